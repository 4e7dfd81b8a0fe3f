"""Model wrapper: tokenize with offsets, sum the last four hidden layers."""
from __future__ import annotations

import logging

import torch
from transformers import AutoModel, AutoTokenizer

logger = logging.getLogger(__name__)

LAYER_POLICY = "sum-last-4"


class EncodeError(Exception):
    """Per-request failure; the serving loop reports it and stays up."""


class HiddenStateEncoder:
    """Deterministic inference over a pretrained masked-language model.

    The model must have at least four transformer layers and a fast
    tokenizer (offset mappings are required). Inference runs on CPU in eval
    mode with gradients disabled, so repeated runs produce identical output.
    """

    def __init__(self, model_id: str, device: str = "cpu"):
        self.model_id = model_id
        self.tokenizer = AutoTokenizer.from_pretrained(model_id)
        if not self.tokenizer.is_fast:
            raise ValueError(f"{model_id}: a fast tokenizer is required for offsets")
        self.model = AutoModel.from_pretrained(model_id)
        layers = getattr(self.model.config, "num_hidden_layers", 0)
        if layers < 4:
            raise ValueError(f"{model_id}: needs >= 4 transformer layers, has {layers}")
        self.model.to(device)
        self.model.eval()
        self.device = device
        self.dim = int(self.model.config.hidden_size)

    def hello(self) -> dict:
        return {"name": self.model_id, "dim": self.dim, "layers": LAYER_POLICY}

    def encode(self, lang: str, text: str) -> dict:
        if not text or not text.strip():
            raise EncodeError("empty text")
        batch = self.tokenizer(
            text,
            return_offsets_mapping=True,
            return_special_tokens_mask=True,
            return_tensors="pt",
            truncation=True,
        )
        offsets = batch.pop("offset_mapping")[0].tolist()
        special = batch.pop("special_tokens_mask")[0].tolist()
        batch = {k: v.to(self.device) for k, v in batch.items()}
        with torch.no_grad():
            output = self.model(**batch, output_hidden_states=True)
        hidden = output.hidden_states
        summed = hidden[-1] + hidden[-2] + hidden[-3] + hidden[-4]
        tokens = []
        prev_end = 0
        for position, ((start, end), is_special) in enumerate(zip(offsets, special)):
            if is_special or start == end:
                continue
            if start < prev_end:
                raise EncodeError(
                    f"tokenizer produced overlapping offsets at position {position}")
            prev_end = end
            vec = summed[0, position].tolist()
            tokens.append({"start": int(start), "end": int(end), "vec": vec})
        return {"dim": self.dim, "tokens": tokens}
