"""Acceptance criteria, one test each.

Every test records a ``PASS``/``FAIL`` line; ``conftest.py`` prints them in
the terminal summary, and running this file directly prints them as well.
A failing criterion also fails its test.
"""

import math
import sys
import time

import numpy as np
import pytest

from radop.algebra import classify_membership, hardy_log_moment
from radop.geometry import ball, disk, hartogs_triangle, polydisc
from radop.lattice import IndexBox, IndexSet, enumerate_allowable
from radop.norms import BergmanSpace, monomial_norm_sq
from radop.operators import (LaurentPoly, RadialOperator, adjoint, analysis_transform, apply_diagonal, hull_contains,
                             is_compact, is_finite_rank, normality_residual, reducing_projection, spectrum_report,
                             synthesis_transform)
from radop.symbols import geometric, reciprocal_succ
from radop.verify import catalog_spaces, run_suite, suite_parseval

PI = math.pi
RESULTS: list[str] = []


def record(n: int, title: str, ok: bool, detail: str) -> None:
    line = f"{'PASS' if ok else 'FAIL'} criterion {n:2d} ({title}): {detail}"
    RESULTS.append(line)
    print(line)
    assert ok, line


def test_01_norm_closed_forms_vs_quadrature():
    start = time.perf_counter()
    cases = []
    sp = BergmanSpace(disk())
    cases += [(sp, (m,), PI / (m + 1)) for m in range(51)]
    sp = BergmanSpace(polydisc(2))
    cases += [(sp, (a, b), PI**2 / ((a + 1) * (b + 1))) for a in range(7) for b in range(7)]
    sp = BergmanSpace(ball(2))
    cases += [(sp, (a, b), PI**2 * math.factorial(a) * math.factorial(b) / math.factorial(2 + a + b))
              for a in range(7) for b in range(7)]
    sp = BergmanSpace(hartogs_triangle())
    cases += [(sp, (a, b), PI**2 / ((a + 1) * (a + b + 2)))
              for a in range(7) for b in range(-6, 7) if a + b >= -1]
    worst = 0.0
    for space, alpha, oracle in cases:
        quad, _, _ = space.quadrature_norm_sq(alpha, rel_tol=1e-12)
        closed = monomial_norm_sq(space, alpha)
        worst = max(worst, abs(quad - oracle) / oracle, abs(closed - oracle) / oracle)
    elapsed = time.perf_counter() - start
    record(1, "norm closed forms vs quadrature", worst < 1e-8 and elapsed < 60,
           f"{len(cases)} indices, worst rel err {worst:.2e} (< 1e-8), {elapsed:.1f} s (< 60 s)")


def test_02_parseval():
    res = suite_parseval(trials=50, seed=0)
    record(2, "orthogonal-basis Parseval", res.passed and res.worst < 1e-7,
           f"{res.cases} polynomials on 5 spaces, worst rel err {res.worst:.2e} (< 1e-7)")


def test_03_unitarity():
    res = run_suite("unitarity", trials=50, seed=0)
    spaces = catalog_spaces()
    exact = True
    rng = np.random.default_rng(3)
    for space in spaces:
        box = enumerate_allowable(space, IndexBox(space.dim, 4))
        members = box.members
        for _ in range(10):
            picks = rng.choice(len(members), size=min(5, len(members)), replace=False)
            f = LaurentPoly(space.dim, {members[i]: complex(*rng.integers(-8, 9, size=2)) for i in picks})
            back = synthesis_transform(space, analysis_transform(space, f, box), box)
            # exact up to the round trip sqrt(n) / sqrt(n) of the stored norms
            exact &= back.max_abs_diff(f) <= 4 * np.finfo(float).eps * max(abs(c) for c in f.coeffs.values())
    record(3, "truncated-T unitarity", res.passed and exact,
           f"{res.cases} round trips, worst coefficient/norm gap {res.worst:.2e} (< 1e-10)")


def test_04_representation_equivalence():
    start = time.perf_counter()
    res = run_suite("representation", trials=20, seed=0)
    elapsed = time.perf_counter() - start
    record(4, "representation equivalence", res.passed and elapsed < 300,
           f"{res.cases} evaluations (disk, polydisc2, ball2, Hartogs), worst |integral - diagonal| "
           f"{res.worst:.2e} (< 1e-5), {elapsed:.1f} s (< 300 s)")


def test_05_radiality():
    res = run_suite("commutation", trials=100, seed=0)
    record(5, "radiality", res.passed, f"{res.cases} (lambda, f) trials, worst residual {res.worst:.2e} (< 1e-12)")


def test_06_adjoint():
    res = run_suite("adjoint", trials=20, seed=0)
    record(6, "adjoint", res.passed, f"{res.cases} points, worst gap {res.worst:.2e} (< 1e-8)")


def test_07_spectral_suite():
    sp = BergmanSpace(disk())
    R = RadialOperator(sp, reciprocal_succ())
    rep = spectrum_report(R, IndexSet.range(101))
    values_ok = np.array_equal(rep.values, 1.0 / (np.arange(101) + 1))
    limit = min((abs(p) for p in rep.limit_points), default=np.inf)
    comp_ok = is_compact(R) is True and is_finite_rank(R) is False
    sq = spectrum_report(RadialOperator(sp, geometric(1j)), IndexSet.range(101))
    hull_err = max(min(abs(h - v) for h in sq.hull) for v in (1, 1j, -1, -1j)) if len(sq.hull) == 4 else np.inf
    contained = all(hull_contains(sq.hull, v) for v in sq.values) and all(hull_contains(rep.hull, v) for v in rep.values)
    normal = max(normality_residual(R, IndexBox(1, 20)),
                 normality_residual(RadialOperator(BergmanSpace(polydisc(2)), geometric(0.5j, 2)), IndexBox(2, 20)))
    ok = values_ok and limit < 1e-6 and comp_ok and hull_err < 1e-12 and contained and normal < 1e-14
    record(7, "spectral suite", ok,
           f"values exact={values_ok}, |limit point| {limit:.1e} (< 1e-6), compact/finite-rank={comp_ok}, "
           f"hull vertex err {hull_err:.1e} (< 1e-12), normality {normal:.1e} (< 1e-14)")


def test_08_reducing_projections():
    rng = np.random.default_rng(8)
    ok, trials = True, 0
    for space in (BergmanSpace(disk()), BergmanSpace(polydisc(2)), BergmanSpace(hartogs_triangle())):
        box = enumerate_allowable(space, IndexBox(space.dim, 16))
        members = box.members
        for _ in range(10):
            E = [members[i] for i in rng.choice(len(members), size=int(rng.integers(1, min(20, len(members)))),
                                                 replace=False)]
            P = reducing_projection(space, E)
            picks = rng.choice(len(members), size=min(12, len(members)), replace=False)
            f = LaurentPoly(space.dim, {members[i]: complex(*rng.normal(size=2)) for i in picks})
            Pf = apply_diagonal(P, f)
            PPf = apply_diagonal(P, Pf)
            ok &= PPf.coeffs == Pf.coeffs and apply_diagonal(adjoint(P), f).coeffs == Pf.coeffs
            ok &= set(Pf.coeffs) <= set(E)
            trials += 1
    record(8, "reducing projections", ok, f"P = P^2 = P* on coefficients for {trials} random E at N=16")


def test_09_algebra_laws():
    res = run_suite("algebra-laws", trials=100, seed=0)
    record(9, "algebra laws", res.passed,
           f"{res.cases} random finite-symbol triples, {int(res.worst)} failed identities"
           + (f" ({'; '.join(res.details)})" if res.details else ""))


def test_10_hardy_dirichlet():
    res = run_suite("hardy-dirichlet", trials=20, seed=0)
    moments = max(abs(hardy_log_moment(m) - 1) for m in range(1, 9))
    record(10, "Hardy/Dirichlet", res.passed and moments < 1e-8,
           f"{res.cases} evaluations, worst |quadrature - diagonal| {res.worst:.2e} (< 1e-6); "
           f"log-moment err {moments:.1e} (< 1e-8)")


def test_11_inclusion_chain():
    N = 200
    geo = classify_membership(lambda m: 1.0, N)
    berg = classify_membership(lambda m: (m + 1) / PI, N)
    ok = (geo.hardy.member and not geo.dirichlet.member and geo.dirichlet.tail_value >= N / 2
          and berg.bergman.member and not berg.hardy.member)
    record(11, "inclusion chain", ok,
           f"1/(1-z): H2 member={geo.hardy.member}, Dirichlet symbol at N={N} is {geo.dirichlet.tail_value:g} "
           f"(>= {N // 2}); Bergman kernel: A2 member={berg.bergman.member}, Hardy symbol at N is "
           f"{berg.hardy.tail_value:.1f}")


if __name__ == "__main__":
    sys.exit(pytest.main([__file__, "-q", "-s"]))
