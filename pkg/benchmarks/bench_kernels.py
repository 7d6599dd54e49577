"""Compare the compiled and pure-Python polynomial kernels.

Run from the repository root::

    python benchmarks/bench_kernels.py [--repeat 5]

Both backends are loaded side by side, fed identical inputs, checked for
identical results and timed with ``timeit``.
"""

import argparse
import importlib
import os
import random
import subprocess
import sys
import timeit
from fractions import Fraction


def random_poly(rng, atoms, terms, max_exp=3):
    out = {}
    for _ in range(terms):
        k = rng.randint(0, min(4, len(atoms)))
        chosen = sorted(rng.sample(atoms, k))
        mono = []
        for a in chosen:
            mono += [a, rng.randint(1, max_exp)]
        c = Fraction(rng.randint(-9, 9), rng.choice([1, 1, 2, 3]))
        if c:
            out[tuple(mono)] = c.numerator if c.denominator == 1 else c
    return out


def workloads(seed=0):
    rng = random.Random(seed)
    atoms = list(range(24))
    small = [(random_poly(rng, atoms, 20), random_poly(rng, atoms, 20)) for _ in range(50)]
    large = [(random_poly(rng, atoms, 300), random_poly(rng, atoms, 300)) for _ in range(3)]
    return {"20x20 terms (x50)": small, "300x300 terms (x3)": large}


def run(backend, pairs):
    for a, b in pairs:
        backend.poly_mul(a, b, 10**7)


def add_all(backend, pairs):
    for a, b in pairs:
        backend.poly_add(a, b, -1)


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=5)
    args = ap.parse_args(argv)

    py = importlib.import_module("jetham._kernels_py")
    try:
        cy = importlib.import_module("jetham._ckernels")
    except ImportError:
        print("compiled kernels are not built; only the pure-Python backend is available")
        cy = None

    print(f"{'workload':<24}{'python [ms]':>14}{'cython [ms]':>14}{'speed-up':>10}")
    for name, pairs in workloads().items():
        for label, fn in ((" mul", run), (" add", add_all)):
            if cy is not None:
                for a, b in pairs:
                    assert py.poly_mul(a, b, 10**7) == cy.poly_mul(a, b, 10**7)
                    assert py.poly_add(a, b, -1) == cy.poly_add(a, b, -1)
            t_py = min(timeit.repeat(lambda: fn(py, pairs), number=1, repeat=args.repeat))
            row = f"{(name + label):<24}{t_py * 1e3:>14.2f}"
            if cy is not None:
                t_cy = min(timeit.repeat(lambda: fn(cy, pairs), number=1, repeat=args.repeat))
                row += f"{t_cy * 1e3:>14.2f}{t_py / t_cy:>9.1f}x"
            print(row)

    print()
    print("end to end (Hamilton = Euler-Lagrange on a random cubic Hamiltonian, n=3, m=2):")
    for forced in ("0", "1"):
        env = dict(os.environ, JETHAM_PURE_PYTHON=forced)
        out = subprocess.run(
            [sys.executable, "-c", PIPELINE], env=env, capture_output=True, text=True, check=True
        )
        print("  " + out.stdout.strip())


PIPELINE = """
import random, time
from jetham import ham, kernels
chart = ham.legendre_chart(3, 2)
rng = random.Random(1)
atoms = [chart.tau, *chart.base, *chart.fibers, *chart.momenta.values()]
t0 = time.perf_counter()
for _ in range(5):
    h = 0
    for _ in range(12):
        term = rng.randint(-5, 5)
        for _ in range(rng.randint(1, 3)):
            term = term * rng.choice(atoms)
        h = h + term
    spec = ham.HamiltonianSpec(chart, h)
    fields = chart.fibers + tuple(chart.momenta.values())
    assert ham.hamilton_equations(spec) == ham.euler_lagrange(ham.lagrangian_LH(spec), chart, fields)
print(f"{kernels.BACKEND:<8} {(time.perf_counter() - t0) * 1e3:8.1f} ms")
"""


if __name__ == "__main__":
    main()
