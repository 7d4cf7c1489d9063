"""Adaptive boundary control laboratory for the 1-D noisy
Kuramoto-Sivashinsky equation under intermittent sensing."""

from .backend import active_backend_name, available_backends, get_backend
from .engine import (ExperimentConfig, ForcingSpec, LambdaSpec, initial_condition,
                     run_batch, run_closed_loop, run_full_sensing)
from .lyapunov import (CertificateReport, TrajectoryLog, check_ges, check_gpa,
                       check_iss, check_ultimate_bound, riemann_V)

__version__ = "0.1.0"

__all__ = [
    "ExperimentConfig", "ForcingSpec", "LambdaSpec", "TrajectoryLog",
    "CertificateReport", "initial_condition", "run_closed_loop",
    "run_full_sensing", "run_batch", "check_ges", "check_gpa", "check_iss",
    "check_ultimate_bound", "riemann_V", "get_backend", "active_backend_name",
    "available_backends",
]
