"""Numeric kernel backend selection.

Imports the compiled accelerator extension when available and falls back
to the pure NumPy twin otherwise. The environment variable
``ELLRANK_BACKEND`` forces a choice: ``compiled`` (error if missing) or
``pure``. Both backends expose the same function names and contracts.
"""
import os

from . import _purekernels

_forced = os.environ.get("ELLRANK_BACKEND", "").strip().lower()

if _forced == "pure":
    _impl = _purekernels
elif _forced == "compiled":
    from . import _ckernels as _impl
else:
    try:
        from . import _ckernels as _impl
    except ImportError:
        _impl = _purekernels

BACKEND = _impl.BACKEND

__all__ = [
    "BACKEND",
    "backend_name",
    "reg_lower_gamma",
    "reg_upper_gamma",
    "reg_inc_beta",
    "gammainc_inv",
    "gammainc_inv_q",
    "betainc_inv",
    "student_radial_quantile",
    "gammainc_inv_batch",
    "student_radial_quantile_batch",
    "weiszfeld_median",
    "tyler_fixed_point",
    "joint_fixed_point",
]

reg_lower_gamma = _impl.reg_lower_gamma
reg_upper_gamma = _impl.reg_upper_gamma
reg_inc_beta = _impl.reg_inc_beta
gammainc_inv = _impl.gammainc_inv
gammainc_inv_q = _impl.gammainc_inv_q
betainc_inv = _impl.betainc_inv
student_radial_quantile = _impl.student_radial_quantile
gammainc_inv_batch = _impl.gammainc_inv_batch
student_radial_quantile_batch = _impl.student_radial_quantile_batch
weiszfeld_median = _impl.weiszfeld_median
tyler_fixed_point = _impl.tyler_fixed_point
joint_fixed_point = _impl.joint_fixed_point


def backend_name():
    """Name of the kernel backend selected at import time."""
    return BACKEND
