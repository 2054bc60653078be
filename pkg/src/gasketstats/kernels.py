"""Pick the compiled kernels when available, else the numpy fallback.

Set ``GASKETSTATS_BACKEND=python`` to force the fallback (``cython`` makes a
missing extension an import error instead of a silent downgrade).
"""

import os

from . import _pykernels

_choice = os.environ.get("GASKETSTATS_BACKEND", "auto").lower()

if _choice == "python":
    impl = _pykernels
else:
    try:
        from . import _ckernels as impl
    except ImportError:
        if _choice == "cython":
            raise
        impl = _pykernels

BACKEND = impl.BACKEND


def available():
    """Names and modules of every backend importable in this process."""
    found = {"python": _pykernels}
    try:
        from . import _ckernels
    except ImportError:
        pass
    else:
        found["cython"] = _ckernels
    return found
