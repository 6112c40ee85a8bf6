"""Bitmask kernels: compiled when available, pure Python otherwise.

Set ``METAFOLD_PURE=1`` to force the fallback.  Masks wider than 64 bits
always take the Python path.
"""
import os

from . import _pykernels as python

try:
    if os.environ.get("METAFOLD_PURE"):
        raise ImportError("pure backend requested")
    from . import _ckernels as compiled
except ImportError:
    compiled = None

BACKEND = "cython" if compiled is not None else "python"
WIDTH = 64


def backend_for(full: int):
    if compiled is not None and full.bit_length() <= WIDTH:
        return compiled
    return python


def interior(mask, basis, full):
    return backend_for(full).interior(mask, basis, full)


def open_family(basis, full):
    return backend_for(full).open_family(basis, full)


def implies(a, b, basis, full):
    return backend_for(full).implies(a, b, basis, full)


def residuation_failures(opens, basis, full):
    return backend_for(full).residuation_failures(opens, basis, full)


def implies_max_failures(opens, basis, full):
    return backend_for(full).implies_max_failures(opens, basis, full)


def lower_preimage(images, o):
    width = max([o.bit_length(), len(images)] + [m.bit_length() for m in images])
    mod = compiled if compiled is not None and width <= WIDTH else python
    return mod.lower_preimage(images, o)
