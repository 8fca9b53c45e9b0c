"""Identity-with-locality hashing and Bloom-filter indices for k-mer search.

Subpackages:
    hash_core  seeded digests, MinHash, rolling window minima, location schemes
    gene       sequence ingestion, tokenization, Jaccard, query generation
    bloom      partitioned Bloom filter with scheme-parameterized addressing
    index      COBS-style filter arrays and RAMBO-style merged/repeated grids
    cachesim   block-access tracing and a two-level inclusive LRU model
    analysis   false-positive-rate bounds and bound-vs-empirical reports
    cli        command-line front end
"""

from ._backend import backend_name
from .hash_core import HashScheme, IdlConfig

__version__ = "0.1.0"

__all__ = ["IdlConfig", "HashScheme", "backend_name", "__version__"]
