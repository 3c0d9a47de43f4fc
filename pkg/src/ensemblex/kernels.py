"""Backend selection for the hot numeric kernels.

ENSEMBLEX_BACKEND controls which implementation backs the package:

* ``auto`` (default): numba-compiled kernels when numba is importable,
  otherwise pure numpy;
* ``numba``: require the compiled kernels, fail if numba is missing;
* ``numpy``: force the pure-numpy fallback.

Both backends implement identical contracts; see ``benchmarks/bench_kernels.py``
for a speed comparison.
"""

import os

from . import _kernels_np

_ENV_VAR = "ENSEMBLEX_BACKEND"
_CHOICES = ("auto", "numba", "numpy")


def _resolve():
    requested = os.environ.get(_ENV_VAR, "auto").strip().lower()
    if requested not in _CHOICES:
        raise ValueError(
            f"{_ENV_VAR}={requested!r}: expected one of {', '.join(_CHOICES)}"
        )
    if requested == "numpy":
        return "numpy", _kernels_np
    try:
        from . import _kernels_nb
    except ImportError:
        if requested == "numba":
            raise ImportError(
                f"{_ENV_VAR}=numba but numba is not installed"
            ) from None
        return "numpy", _kernels_np
    return "numba", _kernels_nb


_BACKEND_NAME, _impl = _resolve()

softmax2d = _impl.softmax2d
logsumexp2d = _impl.logsumexp2d
combine_scores = _impl.combine_scores
stacked_nll = _impl.stacked_nll
stacked_nll_grad = _impl.stacked_nll_grad


def backend_name():
    """Name of the active kernel backend, ``"numba"`` or ``"numpy"``."""
    return _BACKEND_NAME
