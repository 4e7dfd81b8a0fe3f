import os
from pathlib import Path

import pytest

os.environ.setdefault("HF_HUB_OFFLINE", "1")
os.environ.setdefault("TRANSFORMERS_OFFLINE", "1")

FIXTURES = Path(__file__).parent / "fixtures"


@pytest.fixture(scope="session")
def model_dir(tmp_path_factory):
    """A tiny deterministic model + WordPiece tokenizer saved to disk.

    Built from a config with a fixed seed so tests run fully offline; five
    transformer layers keep the last-four sum distinct from "all layers".
    """
    import torch
    from transformers import BertConfig, BertModel, BertTokenizerFast

    vocab_file = FIXTURES / "vocab.txt"
    vocab_size = len(vocab_file.read_text(encoding="utf-8").splitlines())
    config = BertConfig(
        vocab_size=vocab_size,
        hidden_size=32,
        num_hidden_layers=5,
        num_attention_heads=4,
        intermediate_size=64,
        max_position_embeddings=128,
    )
    torch.manual_seed(20200303)
    model = BertModel(config)
    tokenizer = BertTokenizerFast(vocab_file=str(vocab_file), do_lower_case=True)
    out = tmp_path_factory.mktemp("tiny_model")
    model.save_pretrained(out)
    tokenizer.save_pretrained(out)
    return str(out)


@pytest.fixture(scope="session")
def encoder(model_dir):
    from encoder_sidecar import HiddenStateEncoder

    return HiddenStateEncoder(model_dir)


@pytest.fixture(scope="session")
def probes():
    lines = (FIXTURES / "probe_sentences.tsv").read_text(encoding="utf-8").splitlines()
    return [tuple(line.split("\t", 1)) for line in lines if line.strip()]
