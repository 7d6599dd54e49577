# cython: language_level=3, boundscheck=False, wraparound=False
"""Compiled sparse polynomial kernels; mirror of ``_kernels_py``."""

from cpython.mem cimport PyMem_Malloc, PyMem_Free
from cpython.tuple cimport PyTuple_New, PyTuple_SET_ITEM
from cpython.ref cimport Py_INCREF

from fractions import Fraction

from jetham.errors import ExpressionTooLarge

BACKEND = "cython"

cdef object _Fraction = Fraction


cdef inline object _norm(object c):
    if type(c) is _Fraction and c.denominator == 1:
        return c.numerator
    return c


def normalize(c):
    return _norm(c)


cpdef tuple mono_mul(tuple a, tuple b):
    cdef Py_ssize_t la = len(a)
    cdef Py_ssize_t lb = len(b)
    if la == 0:
        return b
    if lb == 0:
        return a
    cdef long* buf = <long*>PyMem_Malloc((la + lb) * sizeof(long))
    if buf == NULL:
        raise MemoryError()
    cdef Py_ssize_t i = 0, j = 0, k = 0, t
    cdef long ia, ib
    cdef tuple out
    cdef object item
    try:
        while i < la and j < lb:
            ia = a[i]
            ib = b[j]
            if ia < ib:
                buf[k] = ia
                buf[k + 1] = a[i + 1]
                i += 2
            elif ib < ia:
                buf[k] = ib
                buf[k + 1] = b[j + 1]
                j += 2
            else:
                buf[k] = ia
                buf[k + 1] = <long>a[i + 1] + <long>b[j + 1]
                i += 2
                j += 2
            k += 2
        while i < la:
            buf[k] = a[i]
            k += 1
            i += 1
        while j < lb:
            buf[k] = b[j]
            k += 1
            j += 1
        out = PyTuple_New(k)
        for t in range(k):
            item = buf[t]
            Py_INCREF(item)
            PyTuple_SET_ITEM(out, t, item)
        return out
    finally:
        PyMem_Free(buf)


def poly_add(dict a, dict b, scale=1):
    cdef dict out = dict(a)
    poly_iadd(out, b, scale)
    return out


def poly_iadd(dict out, dict b, scale=1):
    if not b or not scale:
        return out
    cdef bint unit = scale == 1
    for m, c in b.items():
        if not unit:
            c = c * scale
        v = out.get(m)
        if v is None:
            out[m] = _norm(c)
        else:
            s = v + c
            if s:
                out[m] = _norm(s)
            else:
                del out[m]
    return out


def poly_scale(dict a, scale):
    if not scale:
        return {}
    if scale == 1:
        return dict(a)
    return {m: _norm(c * scale) for m, c in a.items()}


def poly_mul(dict a, dict b, Py_ssize_t max_terms):
    if len(a) < len(b):
        a, b = b, a
    cdef dict out = {}
    cdef tuple m
    for mb, cb in b.items():
        for ma, ca in a.items():
            m = mono_mul(<tuple>ma, <tuple>mb)
            c = ca * cb
            v = out.get(m)
            if v is None:
                out[m] = c
                if len(out) > max_terms:
                    raise ExpressionTooLarge(
                        f"product exceeds {max_terms} terms (JETHAM_MAX_TERMS)"
                    )
            else:
                out[m] = v + c
    return {k: _norm(v) for k, v in out.items() if v}
