"""Smoothed separable NMF: VCA, SPA, ALLS, SVCA and SSPA vertex extraction,
NNLS abundances, MRSA evaluation and reproducible benchmarks."""

__version__ = "0.1.0"

from .errors import (
    DegenerateInputError,
    DimensionError,
    FormatError,
    InputError,
    ParameterError,
    RankDeficiencyError,
    SSNMFError,
)
from .extract import AlgoConfig, ExtractionResult, aggregate, alls, extract, extract_best, spa, sspa, svca, vca
from .metrics import MatchResult, mrsa, mrsa_pair, purity_fraction
from .solver import NnlsSettings, nnls_cd, relative_error

__all__ = [
    "AlgoConfig", "ExtractionResult", "MatchResult", "NnlsSettings",
    "aggregate", "alls", "extract", "extract_best", "mrsa", "mrsa_pair", "nnls_cd",
    "purity_fraction", "relative_error", "spa", "sspa", "svca", "vca",
    "DegenerateInputError", "DimensionError", "FormatError", "InputError",
    "ParameterError", "RankDeficiencyError", "SSNMFError",
]
