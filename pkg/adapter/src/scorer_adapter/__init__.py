"""Score-record producer for the contrarank evaluation engine.

Runs (or calls endpoints for) QA, QA2D, and NLI models over a dataset and
writes the JSONL format the engine ingests. All evaluation math lives in the
engine; this package only produces scores and defers hypothesis
post-processing and validation to the engine's CLI.
"""

from .backends import (
    HttpBackend,
    LocalTransformersBackend,
    ModelEndpointConfig,
    ScoringBackend,
    StubBackend,
    make_backend,
)
from .score import ScoreResult, parse_dataset, score_corpus, verify_against_primary

__version__ = "0.1.0"
