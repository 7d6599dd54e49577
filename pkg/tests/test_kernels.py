import importlib
import os
import subprocess
import sys
from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from jetham import _kernels_py, kernels
from jetham.errors import ExpressionTooLarge

try:
    _ckernels = importlib.import_module("jetham._ckernels")
except ImportError:  # extension not built
    _ckernels = None

BACKENDS = [_kernels_py] + ([_ckernels] if _ckernels is not None else [])


@st.composite
def monomials(draw):
    ids = sorted(draw(st.sets(st.integers(0, 12), max_size=4)))
    out = []
    for i in ids:
        out += [i, draw(st.integers(1, 4))]
    return tuple(out)


coeff = st.one_of(
    st.integers(-20, 20).filter(bool),
    st.fractions(-5, 5, max_denominator=6).filter(lambda f: f != 0 and f.denominator != 1),
)
polys = st.dictionaries(monomials(), coeff, max_size=8)


def reference_mul(a, b):
    """Monomial products via exponent dictionaries."""
    out = {}
    for ma, ca in a.items():
        for mb, cb in b.items():
            exps = dict(zip(ma[::2], ma[1::2]))
            for i, k in zip(mb[::2], mb[1::2]):
                exps[i] = exps.get(i, 0) + k
            mono = tuple(v for i in sorted(exps) for v in (i, exps[i]))
            out[mono] = out.get(mono, 0) + Fraction(ca) * Fraction(cb)
    return {m: (c.numerator if c.denominator == 1 else c) for m, c in out.items() if c}


def test_selected_backend_is_importable():
    assert kernels.BACKEND in ("cython", "python")
    if _ckernels is not None and os.environ.get("JETHAM_PURE_PYTHON", "") in ("", "0"):
        assert kernels.BACKEND == "cython"


def test_pure_python_can_be_forced():
    env = dict(os.environ, JETHAM_PURE_PYTHON="1")
    out = subprocess.run(
        [sys.executable, "-c", "from jetham import kernels; print(kernels.BACKEND)"],
        env=env,
        capture_output=True,
        text=True,
        check=True,
    )
    assert out.stdout.strip() == "python"


@pytest.mark.parametrize("backend", BACKENDS, ids=lambda b: b.BACKEND)
def test_normalize_integral_fractions(backend):
    assert type(backend.normalize(Fraction(4, 2))) is int
    assert backend.normalize(Fraction(1, 3)) == Fraction(1, 3)


@pytest.mark.parametrize("backend", BACKENDS, ids=lambda b: b.BACKEND)
def test_mono_mul_merges(backend):
    assert backend.mono_mul((1, 2, 5, 1), (0, 1, 5, 3)) == (0, 1, 1, 2, 5, 4)
    assert backend.mono_mul((), (3, 1)) == (3, 1)


@pytest.mark.parametrize("backend", BACKENDS, ids=lambda b: b.BACKEND)
def test_term_cap(backend):
    a = {(i, 1): 1 for i in range(0, 40, 2)}
    b = {(i, 1): 1 for i in range(1, 40, 2)}
    with pytest.raises(ExpressionTooLarge):
        backend.poly_mul(a, b, 50)
    assert len(backend.poly_mul(a, b, 10_000)) == 400


def test_max_terms_reads_environment(monkeypatch):
    monkeypatch.setenv("JETHAM_MAX_TERMS", "7")
    assert kernels.max_terms() == 7
    monkeypatch.setenv("JETHAM_MAX_TERMS", "junk")
    assert kernels.max_terms() == kernels.DEFAULT_MAX_TERMS
    monkeypatch.delenv("JETHAM_MAX_TERMS")
    assert kernels.max_terms() == kernels.DEFAULT_MAX_TERMS


@settings(max_examples=150, deadline=None)
@given(polys, polys)
def test_backends_match_reference(a, b):
    want = reference_mul(a, b)
    for backend in BACKENDS:
        got = backend.poly_mul(a, b, 10**6)
        assert got == want
        assert all(type(c) is int or c.denominator != 1 for c in got.values())


@settings(max_examples=150, deadline=None)
@given(polys, polys, coeff)
def test_backends_agree_on_add_and_scale(a, b, s):
    results = [(k.poly_add(a, b, s), k.poly_scale(a, s)) for k in BACKENDS]
    for r in results[1:]:
        assert r == results[0]
    total, scaled = results[0]
    for m in set(a) | set(b):
        want = Fraction(a.get(m, 0)) + Fraction(s) * Fraction(b.get(m, 0))
        assert Fraction(total.get(m, 0)) == want
    assert all(scaled[m] == Fraction(a[m]) * Fraction(s) for m in a)


@settings(max_examples=80, deadline=None)
@given(polys, polys)
def test_iadd_in_place(a, b):
    for backend in BACKENDS:
        out = dict(a)
        backend.poly_iadd(out, b, 1)
        assert out == backend.poly_add(a, b, 1)
