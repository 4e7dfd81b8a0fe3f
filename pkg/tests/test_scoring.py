import numpy as np
import pytest

from polysim.dataset import GoldScores, Instance, MarkedContext
from polysim.embedstore import VectorStore, we_similarity
from polysim.encoder import SyntheticHashBackend, bert_similarity, encode
from polysim.errors import DataError, NoSignalError
from polysim.scoring import (
    ChannelScores,
    ExperimentConfig,
    ScoringResources,
    combine,
    predict_subtask1,
    predict_subtask2,
    read_subtask1_predictions,
    read_subtask2_predictions,
    score_instance,
    score_instances,
    write_subtask1_predictions,
    write_subtask2_predictions,
)
from polysim.translation import ViewBatch, identity_view


def channel(lang, bert, we, instance_id="x", context_index=1):
    return ChannelScores(instance_id=instance_id, lang=lang, context_index=context_index,
                         sim_we=we, sim_bert=bert)


def make_context(text, w1, w2):
    s1 = text.index(w1)
    s2 = text.index(w2)
    return MarkedContext(text=text, span1=(s1, s1 + len(w1)), span2=(s2, s2 + len(w2)),
                         surface1=w1, surface2=w2)


def make_instance(instance_id="en-001", w1="cat", w2="dog",
                  c1="the cat saw a dog", c2="a dog bit the cat"):
    return Instance(
        id=instance_id, source_lang="en", word1=w1, word2=w2,
        context1=make_context(c1, w1, w2), context2=make_context(c2, w1, w2),
        gold=GoldScores(3.0, 1.0),
    )


def store_for(words, dim=4, lang="en", seed=0):
    rng = np.random.default_rng(seed)
    vocab = {w: rng.normal(size=dim).astype(np.float32) for w in words}
    return VectorStore(lang=lang, dim=dim, vocab=vocab)


class TestCombine:
    def test_weighted_blend(self):
        value, langs = combine([channel("en", bert=0.8, we=0.6)], alpha=0.7, beta=0.3)
        assert value == pytest.approx(0.7 * 0.8 + 0.3 * 0.6, abs=1e-15)
        assert langs == ["en"]

    def test_bert_only_config(self):
        value, _ = combine([channel("en", bert=0.42, we=0.9)], alpha=1.0, beta=0.0)
        assert value == pytest.approx(0.42, abs=1e-15)

    def test_mean_of_two_languages(self):
        channels = [channel("en", bert=0.5, we=0.5), channel("it", bert=0.9, we=0.9)]
        value, langs = combine(channels, alpha=0.5, beta=0.5)
        assert value == pytest.approx(0.7, abs=1e-15)
        assert langs == ["en", "it"]

    def test_missing_channel_renormalizes(self):
        value, _ = combine([channel("it", bert=0.4, we=None)], alpha=0.6, beta=0.4)
        assert value == pytest.approx(0.4, abs=1e-15)  # not 0.24

    def test_missing_bert_renormalizes(self):
        value, _ = combine([channel("it", bert=None, we=-0.2)], alpha=0.6, beta=0.4)
        assert value == pytest.approx(-0.2, abs=1e-15)

    def test_zero_weight_channel_alone_is_excluded(self):
        channels = [channel("it", bert=0.4, we=None), channel("en", bert=0.5, we=0.5)]
        value, langs = combine(channels, alpha=0.0, beta=1.0)
        assert langs == ["en"]
        assert value == pytest.approx(0.5, abs=1e-15)

    def test_all_excluded_raises_with_reasons(self):
        with pytest.raises(NoSignalError) as err:
            combine([channel("it", bert=None, we=None)], alpha=0.5, beta=0.5)
        assert "it" in err.value.reasons

    def test_permutation_invariance_exact(self):
        rng = np.random.default_rng(5)
        channels = [channel(f"l{i}", float(rng.uniform(-1, 1)), float(rng.uniform(-1, 1)))
                    for i in range(7)]
        forward, _ = combine(channels, alpha=0.37, beta=0.63)
        backward, _ = combine(list(reversed(channels)), alpha=0.37, beta=0.63)
        assert forward == backward  # fsum makes the mean order-independent

    def test_duplication_neutrality(self):
        channels = [channel("a", 0.2, 0.4), channel("b", 0.6, 0.8)]
        alpha, beta = 0.5, 0.5
        mean, _ = combine(channels, alpha, beta)
        # a language whose blended value equals the current mean leaves it unchanged
        neutral = channel("c", mean, mean)
        value, _ = combine(channels + [neutral], alpha, beta)
        assert value == pytest.approx(mean, abs=1e-12)

    def test_weights_used_as_given(self):
        value, _ = combine([channel("en", bert=0.5, we=0.5)], alpha=2.0, beta=1.0)
        assert value == pytest.approx(1.5, abs=1e-15)  # alpha+beta=1 not enforced

    def test_monotone_in_alpha_when_bert_dominates(self):
        # with non-negative bert >= we per language and beta fixed, raising
        # alpha can only add bert mass, so the mean cannot decrease
        rng = np.random.default_rng(8)
        for _ in range(50):
            channels = []
            for k in range(int(rng.integers(1, 6))):
                bert = float(rng.uniform(0.0, 1.0))
                we = float(rng.uniform(-1.0, bert))
                channels.append(channel(f"l{k}", bert=bert, we=we))
            beta = float(rng.uniform(0.0, 1.0))
            alphas = sorted(float(rng.uniform(0.01, 1.0)) for _ in range(3))
            values = [combine(channels, a, beta)[0] for a in alphas]
            assert values == sorted(values)

    def test_empty_channel_list_rejected(self):
        with pytest.raises(DataError):
            combine([], 0.5, 0.5)


class TestExperimentConfig:
    def test_weight_validation(self):
        with pytest.raises(DataError):
            ExperimentConfig(alpha=0.0, beta=0.0)
        with pytest.raises(DataError):
            ExperimentConfig(alpha=-0.1, beta=0.5)

    def test_source_language_always_included(self):
        config = ExperimentConfig(alpha=1.0, beta=0.0, languages=("it", "en", "pt"))
        assert config.effective_languages("en") == ["en", "it", "pt"]

    def test_fingerprint_stable_and_sensitive(self):
        a = ExperimentConfig(alpha=0.7, beta=0.3, languages=("it",))
        b = ExperimentConfig(alpha=0.7, beta=0.3, languages=("it",))
        c = ExperimentConfig(alpha=0.8, beta=0.2, languages=("it",))
        assert a.fingerprint() == b.fingerprint()
        assert a.fingerprint() != c.fingerprint()


class TestScoreInstance:
    def test_degenerate_bert_only_equals_bert_similarity(self):
        inst = make_instance()
        backend = SyntheticHashBackend(dim=8, seed=7)
        config = ExperimentConfig(alpha=1.0, beta=0.0)
        views = {"en": identity_view(inst, "fixture")}
        resources = ScoringResources(stores={}, backend=backend)
        sheet = score_instance(inst, views, resources, config)
        for ctx_index, sim in ((1, sheet.sim1), (2, sheet.sim2)):
            ctx = inst.context1 if ctx_index == 1 else inst.context2
            enc = encode(backend, "en", ctx.text)
            expected = bert_similarity(enc, ctx.span1, ctx.span2)
            assert abs(sim - expected) < 1e-12
        assert sheet.delta == sheet.sim2 - sheet.sim1

    def test_degenerate_we_only_equals_embedding_channel(self):
        inst = make_instance()
        store = store_for(["cat", "dog"])
        config = ExperimentConfig(alpha=0.0, beta=1.0)
        views = {"en": identity_view(inst, "fixture")}
        resources = ScoringResources(stores={"en": store},
                                     backend=SyntheticHashBackend(dim=8, seed=7))
        sheet = score_instance(inst, views, resources, config)
        expected = we_similarity(store, "cat", "dog")
        assert abs(sheet.sim1 - expected) < 1e-12
        assert abs(sheet.sim2 - expected) < 1e-12

    def test_no_signal_raises_with_reasons(self):
        inst = make_instance()
        config = ExperimentConfig(alpha=0.0, beta=1.0)  # WE only, but store is empty
        views = {"en": identity_view(inst, "fixture")}
        resources = ScoringResources(stores={"en": store_for(["unrelated"])},
                                     backend=SyntheticHashBackend(dim=8, seed=7))
        with pytest.raises(NoSignalError) as err:
            score_instance(inst, views, resources, config)
        assert "en" in err.value.reasons

    def test_missing_view_reason(self):
        inst = make_instance()
        config = ExperimentConfig(alpha=1.0, beta=0.0, languages=("it",))
        views = {}
        resources = ScoringResources(stores={}, backend=SyntheticHashBackend(dim=8, seed=7))
        with pytest.raises(NoSignalError) as err:
            score_instance(inst, views, resources, config)
        assert err.value.reasons["en"] == "no translated view"
        assert err.value.reasons["it"] == "no translated view"

    def test_batch_continues_past_no_signal(self):
        good = make_instance("en-001")
        bad = make_instance("en-002")
        batch = ViewBatch(views=[identity_view(good, "fixture")])
        config = ExperimentConfig(alpha=1.0, beta=0.0)
        resources = ScoringResources(stores={}, backend=SyntheticHashBackend(dim=8, seed=7))
        result = score_instances([good, bad], batch, resources, config)
        assert [s.instance_id for s in result.sheets] == ["en-001"]
        assert len(result.errors) == 1

    def test_protocol_backend_scores_end_to_end(self):
        # the third backend kind drives the same pipeline unchanged
        from polysim.encoder import ProtocolClientBackend
        from test_encoder import _OneShotServer

        def responder(request):
            if request["op"] == "hello":
                return {"name": "toy", "dim": 3, "layers": "sum-last-4"}
            text = request["text"]
            tokens = []
            pos = 0
            for word in text.split():
                start = text.index(word, pos)
                pos = start + len(word)
                tokens.append({"start": start, "end": pos,
                               "vec": [1.0, float(len(word)), 0.25]})
            return {"dim": 3, "tokens": tokens}

        server = _OneShotServer(responder)
        server.start()
        backend = ProtocolClientBackend(f"tcp:127.0.0.1:{server.port}")
        inst = make_instance()
        resources = ScoringResources(stores={}, backend=backend)
        sheet = score_instance(inst, {"en": identity_view(inst, "fixture")},
                               resources, ExperimentConfig(alpha=1.0, beta=0.0))
        assert -1.0 <= sheet.sim1 <= 1.0 and -1.0 <= sheet.sim2 <= 1.0
        backend.close()
        server.close()

    def test_delta_antisymmetry(self):
        from polysim.dataset import swap_contexts

        inst = make_instance()
        swapped = swap_contexts(inst)
        backend = SyntheticHashBackend(dim=8, seed=3)
        config = ExperimentConfig(alpha=0.6, beta=0.4)
        store = store_for(["cat", "dog"])
        resources = ScoringResources(stores={"en": store}, backend=backend)
        sheet = score_instance(inst, {"en": identity_view(inst, "fixture")}, resources, config)
        mirror = score_instance(swapped, {"en": identity_view(swapped, "fixture")},
                                resources, config)
        assert mirror.delta == -sheet.delta


class TestPredictions:
    def sheets(self):
        inst = make_instance()
        backend = SyntheticHashBackend(dim=8, seed=7)
        config = ExperimentConfig(alpha=1.0, beta=0.0)
        resources = ScoringResources(stores={}, backend=backend)
        out = []
        for k in range(5):
            i = make_instance(instance_id=f"en-{k:03d}", c1=f"the cat saw {k} dog here",
                              c2=f"a dog bit {k} cat there")
            out.append(score_instance(i, {"en": identity_view(i, "fixture")},
                                      resources, config))
        return out

    def test_projections(self):
        sheets = self.sheets()
        sub1 = predict_subtask1(sheets)
        sub2 = predict_subtask2(sheets)
        assert len(sub1) == len(sub2) == 5
        for sheet in sheets:
            assert sub1[sheet.instance_id] == sheet.delta
            assert sub2[sheet.instance_id] == (sheet.sim1, sheet.sim2)

    def test_subtraction_example(self):
        assert (0.30 - 0.74) == pytest.approx(-0.44, abs=1e-12)

    def test_identical_contexts_zero_delta(self):
        text = "the cat saw a dog"
        inst = Instance(
            id="same", source_lang="en", word1="cat", word2="dog",
            context1=make_context(text, "cat", "dog"),
            context2=make_context(text, "cat", "dog"),
        )
        resources = ScoringResources(stores={}, backend=SyntheticHashBackend(dim=8, seed=1))
        sheet = score_instance(inst, {"en": identity_view(inst, "fixture")}, resources,
                               ExperimentConfig(alpha=1.0, beta=0.0))
        assert sheet.delta == 0.0

    def test_tsv_roundtrip(self, tmp_path):
        sheets = self.sheets()
        p1 = tmp_path / "s1.tsv"
        p2 = tmp_path / "s2.tsv"
        write_subtask1_predictions(predict_subtask1(sheets), p1)
        write_subtask2_predictions(predict_subtask2(sheets), p2)
        assert read_subtask1_predictions(p1) == predict_subtask1(sheets)
        assert read_subtask2_predictions(p2) == predict_subtask2(sheets)

    def test_empty_sheets_rejected(self):
        with pytest.raises(DataError):
            predict_subtask1([])
