"""Select the compiled or pure-numpy kernels at import time.

Set ``COMBSPARSE_BACKEND=python`` to force the numpy fallback (useful for
debugging and for the backend benchmark). ``use()`` switches at runtime.
"""

import os

from . import _pykernels

try:
    from . import _ckernels
except ImportError:  # extension not built
    _ckernels = None

_ACTIVE = None


def available() -> list[str]:
    return ["python"] + (["cython"] if _ckernels is not None else [])


def use(name: str) -> None:
    global _ACTIVE
    if name == "cython":
        if _ckernels is None:
            raise ImportError("compiled kernels are not built; run `pip install -e .`")
        _ACTIVE = _ckernels
    elif name == "python":
        _ACTIVE = _pykernels
    else:
        raise ValueError(f"unknown backend {name!r}")


def name() -> str:
    return "cython" if _ACTIVE is _ckernels and _ckernels is not None else "python"


def kernels():
    return _ACTIVE


use(os.environ.get("COMBSPARSE_BACKEND", "cython" if _ckernels is not None else "python"))
