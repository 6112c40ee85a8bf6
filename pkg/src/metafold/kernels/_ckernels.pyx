# cython: language_level=3, boundscheck=False, wraparound=False
"""Compiled bitmask kernels; same contract as ``_pykernels`` for hosts of at most 64 edges."""
from libc.stdlib cimport malloc, free
from libc.stdint cimport uint64_t

ctypedef uint64_t u64


cdef inline u64 _interior(u64 mask, u64* basis, Py_ssize_t nb, u64 full) noexcept nogil:
    cdef u64 out = 0
    cdef Py_ssize_t i
    if mask == full:
        return full
    for i in range(nb):
        if basis[i] & ~mask == 0:
            out |= basis[i]
    return out


cdef u64* _pack(seq, Py_ssize_t* n) except NULL:
    cdef Py_ssize_t k = len(seq), i
    cdef u64* buf = <u64*> malloc((k + 1) * sizeof(u64))
    if buf == NULL:
        raise MemoryError()
    for i in range(k):
        buf[i] = <u64> seq[i]
    n[0] = k
    return buf


def interior(mask, basis, full):
    cdef Py_ssize_t nb
    cdef u64* b = _pack(basis, &nb)
    try:
        return _interior(<u64> mask, b, nb, <u64> full)
    finally:
        free(b)


def open_family(basis, full):
    opens = {0, full}
    for b in basis:
        opens |= {s | b for s in opens}
    return sorted(opens)


def implies(a, b, basis, full):
    cdef Py_ssize_t nb
    cdef u64* bs = _pack(basis, &nb)
    cdef u64 f = <u64> full
    try:
        return _interior((f & ~(<u64> a)) | (<u64> b), bs, nb, f)
    finally:
        free(bs)


def residuation_failures(opens, basis, full):
    cdef Py_ssize_t no, nb, i, j, k
    cdef u64* op = _pack(opens, &no)
    cdef u64* bs = _pack(basis, &nb)
    cdef u64 f = <u64> full, a, b, imp, x
    cdef long bad = 0
    cdef bint lhs, rhs
    with nogil:
        for i in range(no):
            a = op[i]
            for j in range(no):
                b = op[j]
                imp = _interior((f & ~a) | b, bs, nb, f)
                for k in range(no):
                    x = op[k]
                    lhs = (_interior(a & x, bs, nb, f) & ~b) == 0
                    rhs = (x & ~imp) == 0
                    if lhs != rhs:
                        bad += 1
    free(op)
    free(bs)
    return bad


def implies_max_failures(opens, basis, full):
    cdef Py_ssize_t no, nb, i, j, k
    cdef u64* op = _pack(opens, &no)
    cdef u64* bs = _pack(basis, &nb)
    cdef u64 f = <u64> full, a, b, best, x
    cdef long bad = 0
    with nogil:
        for i in range(no):
            a = op[i]
            for j in range(no):
                b = op[j]
                best = 0
                for k in range(no):
                    x = op[k]
                    if (_interior(a & x, bs, nb, f) & ~b) == 0:
                        best |= x
                if best != _interior((f & ~a) | b, bs, nb, f):
                    bad += 1
    free(op)
    free(bs)
    return bad


def lower_preimage(images, o):
    cdef Py_ssize_t n, i
    cdef u64* im = _pack(images, &n)
    cdef u64 om = <u64> o, out = 0
    for i in range(n):
        if im[i] & om:
            out |= (<u64> 1) << i
    free(im)
    return out
