"""Reference encoder sidecar: contextual token vectors over a wire protocol.

Wraps a pretrained masked-language model. Per token, the emitted vector is
the componentwise sum of the model's last four hidden layers (the last four
transformer layer outputs; the embedding-layer output is excluded). Token
character offsets come from the tokenizer's offset mapping and always index
the original text, even for uncased models that fold case internally.
"""

__version__ = "0.1.0"

from .model import HiddenStateEncoder
from .fixtures import dump_fixtures

__all__ = ["HiddenStateEncoder", "dump_fixtures", "__version__"]
