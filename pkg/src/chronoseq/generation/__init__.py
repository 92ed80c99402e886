"""Sampling, expert pooling, table conversion, and corpus statistics."""

from .sampling import SamplingConfig, apply_decoding_controls, sample_token_id, sample_sequence  # noqa: F401
from .pool import Provenance, ExpertReport, SyntheticCorpus, generate_pool  # noqa: F401
from .convert import ConversionReport, convert_to_tables  # noqa: F401
from .stats import SummaryStats, summary_stats, write_stats_csv, GENDER_FEMALE  # noqa: F401
