"""Pure-Python sparse polynomial kernels.

A polynomial is a ``dict`` mapping a monomial to a nonzero rational
coefficient.  A monomial is a flat tuple ``(id0, e0, id1, e1, ...)`` of
interned atom ids and positive exponents, strictly increasing in id.
Coefficients are ``int`` whenever they are integral and ``Fraction``
otherwise.

``_ckernels.pyx`` implements the same functions; keep the two in lockstep.
"""

from fractions import Fraction

from jetham.errors import ExpressionTooLarge

BACKEND = "python"


def normalize(c):
    if type(c) is Fraction and c.denominator == 1:
        return c.numerator
    return c


def mono_mul(a, b):
    if not a:
        return b
    if not b:
        return a
    out = []
    i = j = 0
    la = len(a)
    lb = len(b)
    while i < la and j < lb:
        ia = a[i]
        ib = b[j]
        if ia < ib:
            out.append(ia)
            out.append(a[i + 1])
            i += 2
        elif ib < ia:
            out.append(ib)
            out.append(b[j + 1])
            j += 2
        else:
            out.append(ia)
            out.append(a[i + 1] + b[j + 1])
            i += 2
            j += 2
    if i < la:
        out.extend(a[i:])
    if j < lb:
        out.extend(b[j:])
    return tuple(out)


def poly_add(a, b, scale=1):
    """Return ``a + scale * b``."""
    out = dict(a)
    poly_iadd(out, b, scale)
    return out


def poly_iadd(out, b, scale=1):
    """In-place ``out += scale * b``."""
    if not b or not scale:
        return out
    for m, c in b.items():
        if scale != 1:
            c = c * scale
        v = out.get(m)
        if v is None:
            out[m] = normalize(c)
        else:
            s = v + c
            if s:
                out[m] = normalize(s)
            else:
                del out[m]
    return out


def poly_scale(a, scale):
    if not scale:
        return {}
    if scale == 1:
        return dict(a)
    return {m: normalize(c * scale) for m, c in a.items()}


def poly_mul(a, b, max_terms):
    if len(a) < len(b):
        a, b = b, a
    out = {}
    for mb, cb in b.items():
        for ma, ca in a.items():
            m = mono_mul(ma, mb)
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
    return {m: normalize(c) for m, c in out.items() if c}
