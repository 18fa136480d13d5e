"""Kernel backend selection.

SCOREMATCH_BACKEND=numpy forces the pure-numpy fallback,
SCOREMATCH_BACKEND=numba requires numba (ImportError if missing),
unset tries numba and silently falls back.

SCOREMATCH_THREADS caps the numba thread pool; the numpy path is
single-threaded regardless.
"""

import os

_requested = os.environ.get("SCOREMATCH_BACKEND", "").strip().lower()

if _requested not in ("", "numpy", "numba"):
    raise ValueError(f"SCOREMATCH_BACKEND must be 'numpy' or 'numba', got {_requested!r}")

ACTIVE_BACKEND = "numpy"

if _requested in ("", "numba"):
    try:
        import numba as _numba

        _threads = os.environ.get("SCOREMATCH_THREADS", "").strip()
        if _threads:
            _numba.set_num_threads(max(1, min(int(_threads), _numba.config.NUMBA_NUM_THREADS)))
        from . import numba_impl as _impl

        ACTIVE_BACKEND = "numba"
    except ImportError:
        if _requested == "numba":
            raise
        from . import numpy_impl as _impl
else:
    from . import numpy_impl as _impl

tg_rho_rows = _impl.tg_rho_rows
tg_grad_rows = _impl.tg_grad_rows
gsm_rho_rows = _impl.gsm_rho_rows
gsm_grad_rows = _impl.gsm_grad_rows
cmp_logz_trunc_rows = _impl.cmp_logz_trunc_rows
cmp_logz_asym_rows = _impl.cmp_logz_asym_rows
cmp_logz_asym_floored_rows = _impl.cmp_logz_asym_floored_rows
