"""Metric-consistent linear transports along paths (C++ core)."""

import json as _json

from ._core import (
    BundleTransportError,
    coefficients_from_metric,
    compatibility_residual,
    consistency_residual,
    existence_check,
    extract_invariant_gram,
    frame_from_coefficients,
    j_compatibility_check,
    lyapunov_integral,
    lyapunov_spectral,
    metrics_from_transport,
    signature,
    split_hermitian,
    sym_eigen,
    transport_matrix,
)
from ._core import run_scenario as _run_scenario

__version__ = "0.1.0"


def run_scenario(config, tol=None):
    """Run a scenario given as a dict or JSON text; returns the report as a dict."""
    text = config if isinstance(config, str) else _json.dumps(config)
    return _json.loads(_run_scenario(text, tol))


__all__ = [
    "BundleTransportError",
    "coefficients_from_metric",
    "compatibility_residual",
    "consistency_residual",
    "existence_check",
    "extract_invariant_gram",
    "frame_from_coefficients",
    "j_compatibility_check",
    "lyapunov_integral",
    "lyapunov_spectral",
    "metrics_from_transport",
    "run_scenario",
    "signature",
    "split_hermitian",
    "sym_eigen",
    "transport_matrix",
]
