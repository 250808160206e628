"""Marginal empirical-likelihood local independence screening."""

__version__ = "0.1.0"

from .dataset import Dataset, load_csv, rescale_features, write_csv
from .el import ELOutcome, el_logratio, el_logratio_bruteforce
from .kernel import KernelConfig
from .screening import ScreeningConfig, ScreeningReport, screen, threshold, top_d
from .vc import VCConfig, vc_screen

__all__ = [
    "Dataset", "load_csv", "rescale_features", "write_csv",
    "ELOutcome", "el_logratio", "el_logratio_bruteforce",
    "KernelConfig", "ScreeningConfig", "ScreeningReport", "screen", "threshold", "top_d",
    "VCConfig", "vc_screen",
]
