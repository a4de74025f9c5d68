"""Optional numba acceleration.

Hot kernels (banded LU, WENO reconstruction, stability-field sweeps) exist in
two forms: a numba ``@njit`` loop kernel and a vectorised numpy fallback.
The numba path is used when numba imports cleanly and the environment
variable ``SEMIMPLICIT_DISABLE_NUMBA`` is unset or ``0``.
"""

import os


def _noop_jit(*args, **kwargs):
    if len(args) == 1 and callable(args[0]) and not kwargs:
        return args[0]

    def wrap(f):
        return f

    return wrap


def _have_numba():
    try:
        import numba  # noqa: F401

        return True
    except ImportError:
        return False


HAVE_NUMBA = _have_numba()

_flag = os.environ.get("SEMIMPLICIT_DISABLE_NUMBA", "0").strip().lower()
USE_NUMBA = HAVE_NUMBA and _flag in ("", "0", "false", "no", "off")

if HAVE_NUMBA:
    from numba import njit as _numba_njit

    def njit(*args, **kwargs):
        # IEEE semantics (inf/nan instead of ZeroDivisionError), like numpy
        kwargs.setdefault("error_model", "numpy")
        if len(args) == 1 and callable(args[0]):
            return _numba_njit(**kwargs)(args[0])
        return _numba_njit(*args, **kwargs)

else:
    njit = _noop_jit


def backend_name():
    return "numba" if USE_NUMBA else "numpy"


def pick(numba_impl, numpy_impl, backend=None):
    """Return the kernel for ``backend`` ('numba', 'numpy' or None = default)."""
    if backend is None:
        backend = backend_name()
    if backend == "numba":
        if not HAVE_NUMBA:
            raise RuntimeError("numba backend requested but numba is not installed")
        return numba_impl
    if backend == "numpy":
        return numpy_impl
    raise ValueError(f"unknown backend {backend!r}")
