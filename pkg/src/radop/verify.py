"""Seeded verification suites shared by the CLI and the test-suite."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import geometry
from .algebra import AlgebraElement, algebra_norm, dirichlet_apply, element_add, element_mul, element_star, hardy_apply
from .lattice import IndexBox, IndexSet, enumerate_allowable
from .norms import BergmanSpace, DirichletSpace, HardySpace, Space
from .operators import (LaurentPoly, RadialOperator, adjoint_residual, analysis_transform, apply_diagonal,
                        apply_integral, radiality_residual, synthesis_transform)
from .quadrature import integrate_domain
from .symbols import (FiniteSymbol, Symbol, geometric, indicator, one, pointwise_product, pointwise_sum,
                      reciprocal_succ, scale)


@dataclass
class SuiteResult:
    name: str
    worst: float
    threshold: float
    cases: int
    details: list[str] = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return bool(self.worst < self.threshold)

    def to_json(self) -> dict:
        return {"suite": self.name, "passed": self.passed, "worst_residual": self.worst,
                "threshold": self.threshold, "cases": self.cases, "details": self.details}


def catalog_spaces() -> list[BergmanSpace]:
    return [BergmanSpace(d) for d in (geometry.disk(), geometry.polydisc(2), geometry.ball(2),
                                      geometry.poly_annulus(1), geometry.hartogs_triangle())]


def random_poly(space: Space, rng: np.random.Generator, degree: int = 6, max_terms: int = 6) -> LaurentPoly:
    """Random polynomial on allowable indices with ``|alpha|_1 <= degree``."""
    cand = [a for a in enumerate_allowable(space, IndexBox(space.dim, degree)) if sum(map(abs, a)) <= degree]
    k = int(rng.integers(1, min(max_terms, len(cand)) + 1))
    picks = rng.choice(len(cand), size=k, replace=False)
    coeffs = rng.normal(size=k) + 1j * rng.normal(size=k)
    return LaurentPoly(space.dim, {cand[i]: c for i, c in zip(picks, coeffs)})


def random_subset(space: Space, rng: np.random.Generator, bound: int = 3, size: int = 4) -> list:
    cand = enumerate_allowable(space, IndexBox(space.dim, bound)).members
    picks = rng.choice(len(cand), size=min(size, len(cand)), replace=False)
    return [cand[i] for i in sorted(picks)]


def random_finite_symbol(dim: int, rng: np.random.Generator, bound: int = 3, size: int = 5) -> FiniteSymbol:
    box = IndexBox(dim, bound).array()
    picks = rng.choice(len(box), size=min(size, len(box)), replace=False)
    # dyadic values keep +, * and conjugation exact in floating point
    vals = (rng.integers(-8, 9, size=len(picks)) + 1j * rng.integers(-8, 9, size=len(picks))) / 4
    return FiniteSymbol(dim, {tuple(int(x) for x in box[i]): v for i, v in zip(picks, vals)})


def standard_symbols(space: Space, rng: np.random.Generator) -> list[Symbol]:
    return [one(space.dim), reciprocal_succ(space.dim), indicator(random_subset(space, rng), space.dim)]


def suite_unitarity(trials: int = 50, seed: int = 0, spaces=None) -> SuiteResult:
    rng = np.random.default_rng(seed)
    worst, cases = 0.0, 0
    for space in spaces or catalog_spaces():
        box = enumerate_allowable(space, IndexBox(space.dim, 6))
        for _ in range(trials):
            f = random_poly(space, rng)
            seq = analysis_transform(space, f, box)
            back = synthesis_transform(space, seq, box)
            coeff_gap = back.max_abs_diff(f) / max(abs(c) for c in f.coeffs.values())
            norm = f.norm_sq(space)
            worst = max(worst, coeff_gap, abs(np.sum(np.abs(seq) ** 2) - norm) / norm)
            cases += 1
    return SuiteResult("unitarity", worst, 1e-10, cases)


def suite_parseval(trials: int = 50, seed: int = 0, spaces=None) -> SuiteResult:
    """Quadrature ``||f||^2`` against the orthogonal-basis sum."""
    rng = np.random.default_rng(seed)
    worst, cases = 0.0, 0
    for space in spaces or catalog_spaces():
        for _ in range(trials):
            f = random_poly(space, rng)
            exact = f.norm_sq(space)
            span = max(max(map(abs, a)) for a in f.coeffs)
            rep = integrate_domain(lambda w: np.abs(f.evaluate(w)) ** 2, space.domain,
                                   phase_order=2 * span + 2, rel_tol=1e-12)
            worst = max(worst, abs(rep.value.real - exact) / exact)
            cases += 1
    return SuiteResult("parseval", worst, 1e-7, cases)


def suite_commutation(trials: int = 100, seed: int = 0, spaces=None) -> SuiteResult:
    rng = np.random.default_rng(seed)
    worst, cases = 0.0, 0
    for space in spaces or catalog_spaces():
        for sym in standard_symbols(space, rng):
            worst = max(worst, radiality_residual(RadialOperator(space, sym), trials, seed))
            cases += trials
    return SuiteResult("commutation", worst, 1e-12, cases)


def suite_adjoint(trials: int = 20, seed: int = 0, spaces=None) -> SuiteResult:
    rng = np.random.default_rng(seed)
    worst, cases = 0.0, 0
    for space in spaces or catalog_spaces():
        dom = space.domain
        base = 0.8 * np.exp(1j * rng.uniform(0, 2 * np.pi))
        sym = pointwise_sum(scale(1j, reciprocal_succ(space.dim)), geometric(base, space.dim))
        pts = geometry.sample_domain(dom, trials, seed, core=0.8) * np.conj(
            geometry.sample_domain(dom, trials, seed + 1, core=0.8))
        worst = max(worst, adjoint_residual(RadialOperator(space, sym), pts))
        cases += trials
    return SuiteResult("adjoint", worst, 1e-8, cases)


def suite_representation(trials: int = 20, seed: int = 0, spaces=None, polys: int = 1) -> SuiteResult:
    """Integral route against the diagonal route at seeded points of a compact core."""
    rng = np.random.default_rng(seed)
    worst, cases, details = 0.0, 0, []
    for space in spaces or [s for s in catalog_spaces() if s.domain.name != "poly-annulus"]:
        zs = geometry.sample_domain(space.domain, trials, seed, core=0.6)
        for sym in standard_symbols(space, rng):
            R = RadialOperator(space, sym)
            local = 0.0
            for _ in range(polys):
                f = random_poly(space, rng)
                Rf = apply_diagonal(R, f)
                for z in zs:
                    local = max(local, abs(apply_integral(R, f, z) - Rf.evaluate(z)))
                    cases += 1
            details.append(f"{space.domain.name} {getattr(sym, 'name', sym.kind)}: {local:.3e}")
            worst = max(worst, local)
    return SuiteResult("representation", worst, 1e-5, cases, details)


def suite_algebra_laws(trials: int = 100, seed: int = 0, dim: int = 1) -> SuiteResult:
    """Exact *-algebra identities on random finite symbols (residual 0 or 1)."""
    rng = np.random.default_rng(seed)
    space = BergmanSpace(geometry.disk()) if dim == 1 else BergmanSpace(geometry.polydisc(dim))
    probe = IndexSet.from_array(IndexBox(dim, 3).array())
    arr = probe.array()
    failures = []
    for t in range(trials):
        a, b, c = (AlgebraElement(space, random_finite_symbol(dim, rng)) for _ in range(3))

        def v(g):
            return g.symbol.values(arr)

        def sup_sq(g):
            # squared moduli stay exact for dyadic entries, unlike abs()
            u = v(g)
            return float(np.max(u.real ** 2 + u.imag ** 2))

        checks = {
            "assoc+": np.array_equal(v((a + b) + c), v(a + (b + c))),
            "assoc*": np.array_equal(v((a * b) * c), v(a * (b * c))),
            "comm*": np.array_equal(v(a * b), v(b * a)),
            "distrib": np.array_equal(v(a * (b + c)), v(a * b + a * c)),
            "star-star": np.array_equal(v(element_star(element_star(a))), v(a)),
            "star-mul": np.array_equal(v(element_star(a * b)), v(element_star(a) * element_star(b))),
            "star-add": np.array_equal(v(element_star(a + b)), v(element_star(a) + element_star(b))),
            "c-star": sup_sq(element_star(a) * a) == sup_sq(a) ** 2,
            "submult": sup_sq(a * b) <= sup_sq(a) * sup_sq(b),
            "iso-norm": algebra_norm(a, probe).value == float(np.max(np.abs(v(a)))),
            "iso-roundtrip": np.array_equal(v(AlgebraElement(space, a.symbol)), a.symbol.values(arr)),
        }
        failures += [f"trial {t}: {k}" for k, ok in checks.items() if not ok]
    return SuiteResult("algebra-laws", float(len(failures)), 0.5, trials, failures[:10])


def suite_hardy_dirichlet(trials: int = 20, seed: int = 0) -> SuiteResult:
    rng = np.random.default_rng(seed)
    worst, cases = 0.0, 0
    syms = [one(1), reciprocal_succ(1), indicator([(0,)], 1)]
    for space, route in ((HardySpace(), hardy_apply), (DirichletSpace(), dirichlet_apply)):
        for sym in syms:
            g = AlgebraElement(space, sym)
            R = RadialOperator(space, sym)
            for _ in range(trials):
                f = LaurentPoly.from_sequence(rng.normal(size=7) + 1j * rng.normal(size=7))
                z = 0.9 * np.sqrt(rng.random()) * np.exp(2j * np.pi * rng.random())
                worst = max(worst, abs(route(g, f, z) - apply_diagonal(R, f).evaluate([z])))
                cases += 1
    return SuiteResult("hardy-dirichlet", worst, 1e-6, cases)


SUITES = {
    "unitarity": suite_unitarity,
    "commutation": suite_commutation,
    "adjoint": suite_adjoint,
    "representation": suite_representation,
    "algebra-laws": suite_algebra_laws,
    "hardy-dirichlet": suite_hardy_dirichlet,
}


def run_suite(name: str, trials: int | None = None, seed: int = 0, spaces=None) -> SuiteResult:
    fn = SUITES[name]
    kwargs = {"seed": seed}
    if trials is not None:
        kwargs["trials"] = trials
    if spaces is not None and name in ("unitarity", "commutation", "adjoint", "representation"):
        kwargs["spaces"] = spaces
    return fn(**kwargs)
