"""covertext: hide uniform bit sequences inside fluent token sequences.

A fixed-precision arithmetic steganographic coder with self-adjusting
top-K truncation, the classic baseline coders (bin blocks, Huffman paths,
patient Huffman), an imperceptibility metrics harness, and a wire protocol
for external language-model distribution providers.
"""

from .baselines import (
    BinLMConfig,
    HuffmanConfig,
    PatienceConfig,
    binlm_decode,
    binlm_encode,
    huffman_decode,
    huffman_encode,
    patient_huffman_decode,
    patient_huffman_encode,
)
from .bits import Ciphertext
from .coder import (
    CoderInterval,
    QuantizedDistribution,
    StepTrace,
    decode,
    encode,
    quantize,
    rescale,
)
from .distributions import DistributionProvider, NextTokenDistribution
from .errors import CovertextError
from .methods import StegoMethod, method_from_spec
from .metrics import MetricsReport, bits_per_word, build_report, step_kl_summary, tvd_bound_report
from .ngram import NgramProvider, load_corpus, perplexity, train_ngram
from .pipeline import Session, SessionConfig, decrypt, encrypt, hide, hide_with_traces, reveal
from .truncation import (
    SelfAdjusting,
    StaticK,
    TruncationDecision,
    select_min_k,
    total_bound,
    truncate,
)
from .vocab import Context, TokenId, Vocabulary
from .wire import ProviderServer, RemoteProvider

__version__ = "0.1.0"

__all__ = [
    "BinLMConfig",
    "Ciphertext",
    "CoderInterval",
    "Context",
    "CovertextError",
    "DistributionProvider",
    "HuffmanConfig",
    "MetricsReport",
    "NextTokenDistribution",
    "NgramProvider",
    "PatienceConfig",
    "ProviderServer",
    "QuantizedDistribution",
    "RemoteProvider",
    "SelfAdjusting",
    "Session",
    "SessionConfig",
    "StaticK",
    "StegoMethod",
    "StepTrace",
    "TokenId",
    "TruncationDecision",
    "Vocabulary",
    "binlm_decode",
    "binlm_encode",
    "bits_per_word",
    "build_report",
    "decode",
    "decrypt",
    "encode",
    "encrypt",
    "hide",
    "hide_with_traces",
    "huffman_decode",
    "huffman_encode",
    "load_corpus",
    "method_from_spec",
    "patient_huffman_decode",
    "patient_huffman_encode",
    "perplexity",
    "quantize",
    "rescale",
    "reveal",
    "select_min_k",
    "step_kl_summary",
    "total_bound",
    "train_ngram",
    "truncate",
    "tvd_bound_report",
]
