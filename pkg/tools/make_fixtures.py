#!/usr/bin/env python3
"""Generate the committed test fixtures.

Produces, under tests/fixtures/:
  instances.jsonl / instances.tsv   five-instance dataset
  translation_cache.jsonl           primed fixture-engine cache (it, pt)
  vectors_{en,it,pt}.txt            small word2vec-style text stores
  encodings.jsonl                   frozen encoder responses (dim 16, seed 7)
  alignment_cases.jsonl             30-case alignment corpus
  config.json                       golden run configuration

The fixture translations are hand-written; this script assembles them,
computes spans, and sanity-checks that the pipeline aligns them the way the
fixture design intends (exact / fuzzy / marker / failed per word). Run it
from the repository root; it is idempotent.
"""
from __future__ import annotations

import hashlib
import json
import sys
from pathlib import Path

ROOT = Path(__file__).resolve().parent.parent
sys.path.insert(0, str(ROOT / "src"))

from polysim.dataset import GoldScores, Instance, MarkedContext, write_canonical
from polysim.encoder import SyntheticHashBackend
from polysim.textutil import content_hash

FIXTURES = ROOT / "tests" / "fixtures"
SENT_L, SENT_R = "⟦", "⟧"

ENCODER_SEED = 7
ENCODER_DIM = 16


def span_of(text: str, word: str, occurrence: int = 0) -> tuple[int, int]:
    start = -1
    for _ in range(occurrence + 1):
        start = text.index(word, start + 1)
    return (start, start + len(word))


def word_span_of(text: str, word: str, occurrence: int = 0) -> tuple[int, int]:
    """The nth occurrence of `word` bounded by non-word characters."""
    import unicodedata

    def wordch(ch):
        return ch.isalnum() or ch == "_" or unicodedata.category(ch) == "Mn"

    seen = 0
    start = 0
    while True:
        at = text.index(word, start)
        before_ok = at == 0 or not wordch(text[at - 1])
        after = at + len(word)
        after_ok = after == len(text) or not wordch(text[after])
        if before_ok and after_ok:
            if seen == occurrence:
                return (at, after)
            seen += 1
        start = at + 1


def context(text: str, surface1: str, surface2: str, occ1=0, occ2=0) -> MarkedContext:
    s1 = word_span_of(text, surface1, occ1)
    s2 = word_span_of(text, surface2, occ2)
    return MarkedContext(text=text, span1=s1, span2=s2, surface1=surface1, surface2=surface2)


# ---------------------------------------------------------------------------
# The five instances. en-001 is the worked prison-cell example; the others
# cover all-exact alignment, diacritics, an embedding-OOV language, and a
# language where one context cannot be aligned at all.

INSTANCES = [
    Instance(
        id="en-001", source_lang="en", word1="cell", word2="room",
        context1=context(
            "Her prison cell was almost an improvement over her room at the last hostel.",
            "cell", "room"),
        context2=context(
            "His job didn't leave much room for a personal life. He knew much more "
            "about human cells than about human feelings.",
            "cells", "room"),
        gold=GoldScores(7.9, 1.4),
    ),
    Instance(
        id="en-002", source_lang="en", word1="bank", word2="shore",
        context1=context(
            "They moored the boat to the bank and walked along the shore.",
            "bank", "shore"),
        context2=context(
            "She deposited the check at the bank nowhere near the shore.",
            "bank", "shore"),
        gold=GoldScores(8.2, 3.1),
    ),
    Instance(
        id="en-003", source_lang="en", word1="heart", word2="core",
        context1=context(
            "The heart of the old town beats near its core.",
            "heart", "core"),
        context2=context(
            "Surgeons repaired the heart but never touched its core.",
            "heart", "core"),
        gold=GoldScores(8.8, 5.6),
    ),
    Instance(
        id="en-004", source_lang="en", word1="flask", word2="bottle",
        context1=context(
            "He filled the flask and the bottle with cold water.",
            "flask", "bottle"),
        context2=context(
            "A glass flask is not a wine bottle.",
            "flask", "bottle"),
        gold=GoldScores(9.1, 6.3),
    ),
    Instance(
        id="en-005", source_lang="en", word1="spring", word2="fall",
        context1=context(
            "In spring the garden blooms and in fall the leaves drop.",
            "spring", "fall"),
        context2=context(
            "The spring of the mattress broke during his sudden fall.",
            "spring", "fall"),
        gold=GoldScores(4.2, 2.0),
    ),
]

# Isolated-word translations per (word, lang).
WORD_TRANSLATIONS = {
    ("cell", "it"): "cella", ("cell", "pt"): "célula",
    ("room", "it"): "stanza", ("room", "pt"): "quarto",
    ("bank", "it"): "riva", ("bank", "pt"): "banco",
    ("shore", "it"): "costa", ("shore", "pt"): "costa",
    ("heart", "it"): "cuore", ("heart", "pt"): "coração",
    ("core", "it"): "nucleo", ("core", "pt"): "núcleo",
    ("flask", "it"): "fiasco", ("flask", "pt"): "frasco",
    ("bottle", "it"): "bottiglia", ("bottle", "pt"): "garrafa",
    ("spring", "it"): "primavera", ("spring", "pt"): "primavera",
    ("fall", "it"): "autunno", ("fall", "pt"): "outono",
}

# Context translations per (instance id, lang, context index).
CONTEXT_TRANSLATIONS = {
    ("en-001", "it", 1): (
        "La sua cella di prigione era quasi un miglioramento rispetto alla sua "
        "stanza nell'ultimo ostello."),
    ("en-001", "it", 2): (
        "Il suo lavoro non gli lasciava molto spazio per una vita personale. "
        "Sapeva molto di più sulle cellule umane che sui sentimenti umani."),
    ("en-001", "pt", 1): (
        "A sua cela de prisão era quase uma melhoria em relação ao seu quarto "
        "no último albergue."),
    ("en-001", "pt", 2): (
        "O seu trabalho não lhe deixava muito espaço para uma vida pessoal. "
        "Sabia muito mais sobre células humanas do que sobre sentimentos humanos."),
    ("en-002", "it", 1): "Ormeggiarono la barca alla riva e camminarono lungo la costa.",
    ("en-002", "it", 2): "Ha depositato l'assegno alla riva per nulla vicino alla costa.",
    ("en-002", "pt", 1): "Amarraram o barco ao banco e caminharam ao longo da costa.",
    ("en-002", "pt", 2): "Ela depositou o cheque no banco, longe da costa.",
    ("en-003", "it", 1): "Il cuore della città vecchia batte vicino al suo nucleo.",
    ("en-003", "it", 2): ("I chirurghi hanno riparato il cuore ma non hanno mai "
                          "toccato il suo nucleo."),
    ("en-003", "pt", 1): "O coração da cidade velha bate perto do seu núcleo.",
    ("en-003", "pt", 2): ("Os cirurgiões repararam o coração mas nunca tocaram "
                          "no seu núcleo."),
    ("en-004", "it", 1): "Ha riempito il fiasco e la bottiglia con acqua fredda.",
    ("en-004", "it", 2): "Un fiasco di vetro non è una bottiglia di vino.",
    ("en-004", "pt", 1): "Ele encheu o frasco e a garrafa com água fria.",
    ("en-004", "pt", 2): "Um frasco de vidro não é uma garrafa de vinho.",
    ("en-005", "it", 1): "In primavera il giardino fiorisce e in autunno le foglie cadono.",
    ("en-005", "it", 2): ("La molla del materasso si è rotta durante la sua "
                          "caduta improvvisa."),
    ("en-005", "pt", 1): "Na primavera o jardim floresce e no outono as folhas caem.",
    ("en-005", "pt", 2): "A mola do colchão partiu-se durante a sua queda repentina.",
}

# Marker re-translations: (instance id, lang, context index, word index) ->
# translated marked sentence. Everything else marker-related stays unprimed.
MARKER_TRANSLATIONS = {
    ("en-001", "it", 2, 2): (
        "Il suo lavoro non gli lasciava molto ⟦spazio⟧ per una vita personale. "
        "Sapeva molto di più sulle cellule umane che sui sentimenti umani."),
    ("en-001", "pt", 2, 2): (
        "O seu trabalho não lhe deixava muito ⟦espaço⟧ para uma vida pessoal. "
        "Sabia muito mais sobre células humanas do que sobre sentimentos humanos."),
    ("en-005", "pt", 2, 1): (
        "A ⟦mola⟧ do colchão partiu-se durante a sua queda repentina."),
    ("en-005", "pt", 2, 2): (
        "A mola do colchão partiu-se durante a sua ⟦queda⟧ repentina."),
}

# Designed alignment outcomes: (instance, lang, ctx) -> per word
# (surface or None, occurrence, method).
DESIGNED_ALIGNMENTS = {
    ("en-001", "it", 1): (("cella", 0, "exact"), ("stanza", 0, "exact")),
    ("en-001", "it", 2): (("cellule", 0, "fuzzy"), ("spazio", 0, "marker")),
    ("en-001", "pt", 1): (("cela", 0, "fuzzy"), ("quarto", 0, "exact")),
    ("en-001", "pt", 2): (("células", 0, "fuzzy"), ("espaço", 0, "marker")),
    ("en-002", "it", 1): (("riva", 0, "exact"), ("costa", 0, "exact")),
    ("en-002", "it", 2): (("riva", 0, "exact"), ("costa", 0, "exact")),
    ("en-002", "pt", 1): (("banco", 0, "exact"), ("costa", 0, "exact")),
    ("en-002", "pt", 2): (("banco", 0, "exact"), ("costa", 0, "exact")),
    ("en-003", "it", 1): (("cuore", 0, "exact"), ("nucleo", 0, "exact")),
    ("en-003", "it", 2): (("cuore", 0, "exact"), ("nucleo", 0, "exact")),
    ("en-003", "pt", 1): (("coração", 0, "exact"), ("núcleo", 0, "exact")),
    ("en-003", "pt", 2): (("coração", 0, "exact"), ("núcleo", 0, "exact")),
    ("en-004", "it", 1): (("fiasco", 0, "exact"), ("bottiglia", 0, "exact")),
    ("en-004", "it", 2): (("fiasco", 0, "exact"), ("bottiglia", 0, "exact")),
    ("en-004", "pt", 1): (("frasco", 0, "exact"), ("garrafa", 0, "exact")),
    ("en-004", "pt", 2): (("frasco", 0, "exact"), ("garrafa", 0, "exact")),
    ("en-005", "it", 1): (("primavera", 0, "exact"), ("autunno", 0, "exact")),
    ("en-005", "it", 2): ((None, 0, "failed"), (None, 0, "failed")),
    ("en-005", "pt", 1): (("primavera", 0, "exact"), ("outono", 0, "exact")),
    ("en-005", "pt", 2): (("mola", 0, "marker"), ("queda", 0, "marker")),
}

# Vector store vocabularies. "fiasco" is deliberately missing from Italian so
# one language exercises the missing-embedding renormalization path.
STORE_WORDS = {
    "en": ["cell", "cells", "room", "bank", "shore", "heart", "core", "flask",
           "bottle", "spring", "fall", "the", "a", "of", "water", "house"],
    "it": ["cella", "cellule", "stanza", "spazio", "riva", "costa", "cuore",
           "nucleo", "bottiglia", "primavera", "autunno", "la", "il", "di"],
    "pt": ["cela", "células", "quarto", "espaço", "banco", "costa", "coração",
           "núcleo", "frasco", "garrafa", "primavera", "outono", "mola",
           "queda", "o", "a", "de"],
}

VECTOR_DIM = 8


def hash_vector(lang: str, word: str, dim: int = VECTOR_DIM) -> list[float]:
    """Deterministic pseudo-vector, independent of any RNG library."""
    values = []
    block = 0
    while len(values) < dim:
        digest = hashlib.sha256(f"vec|{lang}|{word}|{block}".encode()).digest()
        for off in range(0, 32, 8):
            if len(values) >= dim:
                break
            u = int.from_bytes(digest[off:off + 8], "big") / 2.0**64
            values.append(round(2.0 * u - 1.0, 6))
        block += 1
    return values


def write_vector_stores() -> None:
    for lang, words in STORE_WORDS.items():
        lines = [f"{len(words)} {VECTOR_DIM}"]
        for word in words:
            comps = " ".join(f"{v:.6f}" for v in hash_vector(lang, word))
            lines.append(f"{word} {comps}")
        (FIXTURES / f"vectors_{lang}.txt").write_text("\n".join(lines) + "\n",
                                                      encoding="utf-8")


def cache_line(engine, src, tgt, source_text, translated):
    return json.dumps({
        "engine": engine, "src": src, "tgt": tgt,
        "sha256": content_hash(source_text),
        "source_text": source_text,
        "translated_text": translated,
        "timestamp": "2020-02-20T00:00:00Z",
    }, ensure_ascii=False)


def write_cache() -> None:
    lines = []
    for inst in INSTANCES:
        for lang in ("it", "pt"):
            for ctx_index, ctx in ((1, inst.context1), (2, inst.context2)):
                lines.append(cache_line(
                    "fixture", "en", lang, ctx.text,
                    CONTEXT_TRANSLATIONS[(inst.id, lang, ctx_index)]))
            for word_index, word in ((1, inst.word1), (2, inst.word2)):
                lines.append(cache_line(
                    "fixture", "en", lang, word, WORD_TRANSLATIONS[(word, lang)]))
    for (inst_id, lang, ctx_index, word_index), translated in MARKER_TRANSLATIONS.items():
        inst = next(i for i in INSTANCES if i.id == inst_id)
        ctx = inst.context1 if ctx_index == 1 else inst.context2
        span = ctx.span1 if word_index == 1 else ctx.span2
        marked = ctx.text[:span[0]] + SENT_L + ctx.text[span[0]:span[1]] + SENT_R + ctx.text[span[1]:]
        lines.append(cache_line("fixture", "en", lang, marked, translated))
    (FIXTURES / "translation_cache.jsonl").write_text("\n".join(lines) + "\n",
                                                      encoding="utf-8")


def write_tsv() -> None:
    rows = ["id\tword1\tword2\tcontext1\tcontext2\tsim1\tsim2"]
    for inst in INSTANCES:
        cells = [inst.id, inst.word1, inst.word2]
        for ctx in (inst.context1, inst.context2):
            spans = sorted([ctx.span1, ctx.span2], reverse=True)
            text = ctx.text
            for start, end in spans:
                text = text[:start] + "<strong>" + text[start:end] + "</strong>" + text[end:]
            cells.append(text)
        cells.append(repr(inst.gold.sim1_mean))
        cells.append(repr(inst.gold.sim2_mean))
        rows.append("\t".join(cells))
    (FIXTURES / "instances.tsv").write_text("\n".join(rows) + "\n", encoding="utf-8")


def write_encodings() -> None:
    backend = SyntheticHashBackend(dim=ENCODER_DIM, seed=ENCODER_SEED)
    lines = []
    sentences = []
    for inst in INSTANCES:
        sentences.append(("en", inst.context1.text))
        sentences.append(("en", inst.context2.text))
    for (inst_id, lang, ctx_index), text in sorted(CONTEXT_TRANSLATIONS.items()):
        sentences.append((lang, text))
    for lang, text in sentences:
        payload = backend.raw_encode(lang, text)
        record = {"lang": lang, "sha256": content_hash(text),
                  "dim": payload["dim"], "tokens": payload["tokens"]}
        lines.append(json.dumps(record, ensure_ascii=False))
    (FIXTURES / "encodings.jsonl").write_text("\n".join(lines) + "\n", encoding="utf-8")


def write_config() -> None:
    config = {
        "dataset": "instances.jsonl",
        "format": "canonical",
        "languages": ["it", "pt"],
        "alpha": 0.7,
        "beta": 0.3,
        "engine": "fixture",
        "cache": "translation_cache.jsonl",
        "vectors": {"en": "vectors_en.txt", "it": "vectors_it.txt",
                    "pt": "vectors_pt.txt"},
        "encoder": {"kind": "fixture-file", "path": "encodings.jsonl"},
        "pooling": "pooled",
    }
    (FIXTURES / "config.json").write_text(
        json.dumps(config, indent=2, ensure_ascii=False) + "\n", encoding="utf-8")


# ---------------------------------------------------------------------------
# Alignment corpus: 30 cases. Each case: an English source context with two
# marked words, a translated context, the isolated-word translations, any
# primed marker re-translations, and the hand-annotated truth.

def corpus_case(case_id, tgt, src_text, w1, w2, translated, t1, t2,
                ann1, ann2, m1, m2, markers=None, occ1=0, occ2=0,
                ann_occ1=0, ann_occ2=0, recovered=True):
    src = context(src_text, w1, w2, occ1, occ2)
    marker_map = {}
    if markers:
        for word_index, translated_marked in markers.items():
            span = src.span1 if word_index == 1 else src.span2
            marked = (src_text[:span[0]] + SENT_L + src_text[span[0]:span[1]] +
                      SENT_R + src_text[span[1]:])
            marker_map[marked] = translated_marked
    return {
        "case_id": case_id,
        "src_lang": "en",
        "tgt_lang": tgt,
        "src": {"text": src_text, "span1": list(src.span1), "span2": list(src.span2)},
        "translated_text": translated,
        "word_translations": [t1, t2],
        "markers": marker_map,
        "annotated": {
            "span1": list(word_span_of(translated, ann1, ann_occ1)) if ann1 else None,
            "span2": list(word_span_of(translated, ann2, ann_occ2)) if ann2 else None,
            "method1": m1,
            "method2": m2,
        },
        "expect_recovered": recovered,
    }


EN_CELL_CTX1 = "Her prison cell was almost an improvement over her room at the last hostel."
EN_CELL_CTX2 = ("His job didn't leave much room for a personal life. He knew much more "
                "about human cells than about human feelings.")


def build_corpus() -> list[dict]:
    cases = []
    add = cases.append
    # 1-2: the worked example, Italian and Portuguese, all exact.
    add(corpus_case(
        "c01", "it", EN_CELL_CTX1, "cell", "room",
        CONTEXT_TRANSLATIONS[("en-001", "it", 1)], "cella", "stanza",
        "cella", "stanza", "exact", "exact"))
    add(corpus_case(
        "c02", "pt", EN_CELL_CTX1, "cell", "room",
        CONTEXT_TRANSLATIONS[("en-001", "pt", 1)], "cela", "quarto",
        "cela", "quarto", "exact", "exact"))
    # 3-4: the second context; plural inflections force the fuzzy rung.
    add(corpus_case(
        "c03", "pt", EN_CELL_CTX2, "cells", "room",
        CONTEXT_TRANSLATIONS[("en-001", "pt", 2)], "célula", "espaço",
        "células", "espaço", "fuzzy", "exact"))
    add(corpus_case(
        "c04", "it", EN_CELL_CTX2, "cells", "room",
        CONTEXT_TRANSLATIONS[("en-001", "it", 2)], "cellula", "spazio",
        "cellule", "spazio", "fuzzy", "exact"))
    # 5-6: marker rung (the figurative "room" translates away from "quarto"/"stanza").
    add(corpus_case(
        "c05", "pt", "His job didn't leave much room for a personal life.",
        "room", "job",
        "O seu trabalho não lhe deixava muito espaço para uma vida pessoal.",
        "quarto", "trabalho", "espaço", "trabalho", "marker", "exact",
        markers={1: "O seu trabalho não lhe deixava muito ⟦espaço⟧ para uma vida pessoal."}))
    add(corpus_case(
        "c06", "it", "His job didn't leave much room for a personal life.",
        "room", "job",
        "Il suo lavoro non gli lasciava molto spazio per una vita personale.",
        "stanza", "lavoro", "spazio", "lavoro", "marker", "exact",
        markers={1: "Il suo lavoro non gli lasciava molto ⟦spazio⟧ per una vita personale."}))
    # 7: diacritic-normalized exact (engine output lost the accent).
    add(corpus_case(
        "c07", "pt", "The coffee and the milk were hot.", "coffee", "milk",
        "O cafe e o leite estavam quentes.", "café", "leite",
        "cafe", "leite", "exact", "exact"))
    # 8: case-normalized exact at sentence start.
    add(corpus_case(
        "c08", "it", "The bank flooded before the rain stopped.", "bank", "rain",
        "Riva allagata prima che la pioggia smettesse.", "riva", "pioggia",
        "Riva", "pioggia", "exact", "exact"))
    # 9: Cyrillic, with one inflected form.
    add(corpus_case(
        "c09", "ru", "Her cell was better than the room.", "cell", "room",
        "Её клетка была лучше комнаты.", "клетка", "комната",
        "клетка", "комнаты", "exact", "fuzzy"))
    # 10: Greek; final-accent variant normalizes away.
    add(corpus_case(
        "c10", "el", "The cell was almost better than her room.", "cell", "room",
        "Το κελί ήταν σχεδόν καλύτερο από το δωμάτιό της.", "κελί", "δωμάτιο",
        "κελί", "δωμάτιό", "exact", "exact"))
    # 11-12: gender and conjugation inflections.
    add(corpus_case(
        "c11", "pt", "The red wall hid the green door.", "red", "green",
        "A parede vermelha escondia a porta verde.", "vermelho", "verde",
        "vermelha", "verde", "fuzzy", "exact"))
    add(corpus_case(
        "c12", "pt", "She kept running while he kept singing.", "running", "singing",
        "Ela continuou correndo enquanto ele continuava cantando.", "correr", "cantar",
        "correndo", "cantando", "fuzzy", "fuzzy"))
    # 13: short word through the 60%-of-shorter branch.
    add(corpus_case(
        "c13", "pt", "The bread and the cheese were fresh.", "bread", "cheese",
        "Os pães e os queijos estavam frescos.", "pão", "queijo",
        "pães", "queijos", "fuzzy", "fuzzy"))
    # 14-16: multi-word translations.
    add(corpus_case(
        "c14", "es", "The living room was warm but the kitchen cold.", "room", "kitchen",
        "La sala de estar era cálida pero la cocina fría.", "sala de estar", "cocina",
        "sala de estar", "cocina", "exact", "exact"))
    add(corpus_case(
        "c15", "pt", "The wardrobe hid a narrow door.", "wardrobe", "door",
        "O guarda roupa escondia uma porta estreita.", "guarda roupa", "porta",
        "guarda roupa", "porta", "exact", "exact"))
    add(corpus_case(
        "c16", "pt", "The dishwasher broke again this winter.", "dishwasher", "winter",
        "A máquina avariou outra vez neste inverno.", "máquina de lavar louça", "inverno",
        "máquina", "inverno", "exact", "exact"))
    # 17: both words share one translation; source order claims occurrences.
    add(corpus_case(
        "c17", "pt", "The ladder leaned against the stairs.", "ladder", "stairs",
        "A escada encostada contra a escada.", "escada", "escada",
        "escada", "escada", "exact", "exact", ann_occ1=0, ann_occ2=1))
    # 18: repeated candidate, first unclaimed occurrence wins.
    add(corpus_case(
        "c18", "pt", "The cat chased the rat while another cat slept.", "cat", "rat",
        "O gato perseguiu o rato enquanto outro gato dormia.", "gato", "rato",
        "gato", "rato", "exact", "exact", ann_occ1=0))
    # 19: the translation genuinely dropped word2 (annotated absent).
    add(corpus_case(
        "c19", "pt", "The spring broke during his fall.", "spring", "fall",
        "A mola partiu-se de repente.", "mola", "queda",
        "mola", None, "exact", "failed"))
    # 20: sentinels eaten by the engine -> designed miss (truth exists).
    add(corpus_case(
        "c20", "it", "Her room at the hostel was tiny.", "room", "hostel",
        "La sua camera all'ostello era minuscola.", "stanza", "ostello",
        "camera", "ostello", "failed", "exact",
        markers={1: "La sua camera all'ostello era minuscola."},
        recovered=False))
    # 21: suppletive verb form -> designed miss (no shared prefix, no marker).
    add(corpus_case(
        "c21", "pt", "He wanted to go before the show ended.", "go", "show",
        "Ele foi embora antes do espetáculo acabar.", "ir", "espetáculo",
        "foi", "espetáculo", "failed", "exact",
        recovered=False))
    # 22-26: more of the eleven languages, mostly exact.
    add(corpus_case(
        "c22", "es", EN_CELL_CTX1, "cell", "room",
        "Su celda de la prisión era casi una mejora con respecto a su "
        "habitación en el último albergue.", "celda", "habitación",
        "celda", "habitación", "exact", "exact"))
    add(corpus_case(
        "c23", "de", "Her cell was almost better than her room.", "cell", "room",
        "Ihre Zelle war fast besser als ihr Zimmer.", "Zelle", "Zimmer",
        "Zelle", "Zimmer", "exact", "exact"))
    add(corpus_case(
        "c24", "de", "They met in dark rooms without windows.", "rooms", "windows",
        "Sie trafen sich in dunklen Zimmern ohne Fenster.", "Zimmer", "Fenster",
        "Zimmern", "Fenster", "fuzzy", "exact"))
    add(corpus_case(
        "c25", "tr", "The rooms were empty but the garden full.", "rooms", "garden",
        "Odalar boştu ama bahçe doluydu.", "oda", "bahçe",
        "Odalar", "bahçe", "fuzzy", "exact"))
    add(corpus_case(
        "c26", "pl", "Her prison cell was better than the room.", "cell", "room",
        "Jej więzienna cela była lepsza niż pokój.", "cela", "pokój",
        "cela", "pokój", "exact", "exact"))
    # 27: marker in Cyrillic.
    add(corpus_case(
        "c27", "ru", "There was no room for doubt.", "room", "doubt",
        "Не было места для сомнений.", "комната", "сомнение",
        "места", "сомнений", "marker", "fuzzy",
        markers={1: "Не было ⟦места⟧ для сомнений."}))
    # 28-29: Serbian and Bosnian with diacritics; one genitive inflection.
    add(corpus_case(
        "c28", "sr", "Her prison cell was better than her room.", "cell", "room",
        "Njena zatvorska ćelija bila je bolja od njene sobe.", "ćelija", "soba",
        "ćelija", "sobe", "exact", "fuzzy"))
    add(corpus_case(
        "c29", "bs", "The cell and the room were both cold.", "cell", "room",
        "Ćelija i soba bile su obje hladne.", "ćelija", "soba",
        "Ćelija", "soba", "exact", "exact"))
    # 30: word2's first candidate sits inside word1's claimed window.
    add(corpus_case(
        "c30", "pt", "The big house stood near a small house.", "big house", "house",
        "A casa grande ficava perto de uma casa pequena.", "casa grande", "casa",
        "casa grande", "casa", "exact", "exact", occ2=1, ann_occ2=1))
    return cases


def write_corpus() -> None:
    cases = build_corpus()
    assert len(cases) == 30, len(cases)
    lines = [json.dumps(case, ensure_ascii=False) for case in cases]
    (FIXTURES / "alignment_cases.jsonl").write_text("\n".join(lines) + "\n",
                                                    encoding="utf-8")


def verify_pipeline_alignments() -> None:
    """Check that build_views on the written fixtures matches the design table."""
    from polysim.translation import TranslationCache, build_views

    cache = TranslationCache(FIXTURES / "translation_cache.jsonl", writable=False)
    batch = build_views(INSTANCES, ["it", "pt"], "fixture", cache)
    assert not batch.errors, batch.errors
    problems = []
    for view in batch.views:
        for ctx_index in (1, 2):
            designed = DESIGNED_ALIGNMENTS[(view.instance_id, view.tgt_lang, ctx_index)]
            ctx = view.context(ctx_index)
            for word_index, (surface, occurrence, method) in enumerate(designed, start=1):
                got_surface = ctx.surface(word_index)
                got_method = ctx.method(word_index)
                want_span = (word_span_of(ctx.text, surface, occurrence)
                             if surface else None)
                if got_surface != surface or got_method != method or \
                        ctx.span(word_index) != want_span:
                    problems.append(
                        f"{view.instance_id}/{view.tgt_lang}/ctx{ctx_index} word{word_index}: "
                        f"designed ({surface!r},{method}) got ({got_surface!r},{got_method})")
    if problems:
        raise SystemExit("fixture design mismatch:\n" + "\n".join(problems))
    print(f"pipeline alignments verified: {len(batch.views)} views match the design table")


def verify_corpus() -> None:
    from polysim.errors import FixtureMissError
    from polysim.translation import MarkerRetranslator, align_pair

    recovered = 0
    for case in build_corpus():
        src = MarkedContext(
            text=case["src"]["text"],
            span1=tuple(case["src"]["span1"]),
            span2=tuple(case["src"]["span2"]),
            surface1=case["src"]["text"][case["src"]["span1"][0]:case["src"]["span1"][1]],
            surface2=case["src"]["text"][case["src"]["span2"][0]:case["src"]["span2"][1]],
        )
        markers = case["markers"]

        def translate_fn(text, markers=markers):
            if text in markers:
                return markers[text]
            raise FixtureMissError("translation", "unprimed marker sentence")

        aligned = align_pair(src, case["translated_text"],
                             tuple(case["word_translations"]),
                             MarkerRetranslator(translate_fn=translate_fn))
        ann = case["annotated"]
        want1 = tuple(ann["span1"]) if ann["span1"] else None
        want2 = tuple(ann["span2"]) if ann["span2"] else None
        hit = aligned.span1 == want1 and aligned.span2 == want2
        if case["expect_recovered"]:
            if not hit or (aligned.method1, aligned.method2) != (ann["method1"], ann["method2"]):
                raise SystemExit(
                    f"corpus case {case['case_id']}: designed "
                    f"({want1},{want2},{ann['method1']},{ann['method2']}) got "
                    f"({aligned.span1},{aligned.span2},{aligned.method1},{aligned.method2})")
        elif hit:
            raise SystemExit(f"corpus case {case['case_id']} was designed to miss but hit")
        recovered += 1 if hit else 0
    print(f"alignment corpus verified: {recovered}/30 recovered by the ladder")


def main() -> None:
    FIXTURES.mkdir(parents=True, exist_ok=True)
    write_canonical(INSTANCES, FIXTURES / "instances.jsonl")
    write_tsv()
    write_cache()
    write_vector_stores()
    write_encodings()
    write_config()
    write_corpus()
    verify_pipeline_alignments()
    verify_corpus()
    print(f"fixtures written to {FIXTURES}")


if __name__ == "__main__":
    main()
