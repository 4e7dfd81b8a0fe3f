"""Context-dependent word-pair similarity through multilingual translation.

The pipeline translates each instance's contexts into a set of extra
languages, scores every language with a static word-embedding cosine channel
and a contextual-encoder cosine channel, and averages the weighted blend over
the languages. Evaluation uses the uncentered Pearson correlation (change
prediction) and the harmonic mean of Pearson and Spearman (similarity
prediction); ablation harnesses cover weight sweeps, greedy language
addition, and translation-engine comparison.
"""

__version__ = "0.1.0"

from .dataset import GoldScores, Instance, MarkedContext, parse_dataset, write_canonical
from .embedstore import VectorStore, load_text_vectors, open_binary, we_similarity
from .encoder import (
    FixtureFileBackend,
    ProtocolClientBackend,
    SyntheticHashBackend,
    TokenEncoding,
    bert_similarity,
    encode,
    word_vector,
)
from .errors import (
    DataError,
    ExternalServiceError,
    FixtureMissError,
    NoSignalError,
    PipelineError,
    ProtocolError,
    UndefinedCorrelationError,
)
from .metrics import (
    EvalReport,
    PairedSeries,
    evaluate,
    harmonic_mean,
    pearson,
    spearman,
    uncentered_pearson,
)
from .scoring import (
    ChannelScores,
    ExperimentConfig,
    ScoreSheet,
    combine,
    predict_subtask1,
    predict_subtask2,
    score_instance,
)
from .translation import (
    AlignedContext,
    TranslatedView,
    TranslationCache,
    align_pair,
    build_views,
    translate,
    translate_word,
)

__all__ = [name for name in dir() if not name.startswith("_")]
