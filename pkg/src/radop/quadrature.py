"""Integration over shadows and over Reinhardt domains.

Shadow integrals use tensor Gauss-Legendre rules pulled back through the
shadow's unit-box parametrisation, refined by doubling the order.  Domain
integrals reduce to polar coordinates: the shadow rule times an equispaced
(trapezoidal) rule on each phase, which integrates trigonometric
polynomials of degree below the phase order exactly.
"""

from __future__ import annotations

import heapq
import itertools
from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np

from scipy.special import roots_legendre

from .errors import BudgetExhausted, DimensionMismatch, NonFinite, PreconditionError
from .geometry import DomainSpec, ShadowRegion, WeightSpec

DEFAULT_REL_TOL = 1e-8
DEFAULT_BUDGET = 10**7
MAX_GAUSS_ORDER = 4096


@dataclass(frozen=True, eq=False)
class QuadratureRule:
    nodes: np.ndarray
    weights: np.ndarray
    order: int
    kind: str = "tensor-gauss"
    coarse: Optional["QuadratureRule"] = None
    seed: Optional[int] = None

    @property
    def dim(self) -> int:
        return self.nodes.shape[1]

    def __len__(self) -> int:
        return len(self.weights)


@dataclass
class IntegrationReport:
    value: complex
    error_estimate: float
    evaluations: int

    def __post_init__(self):
        self.error_estimate = abs(float(self.error_estimate))


def _gauss01(points: int) -> tuple[np.ndarray, np.ndarray]:
    x, w = roots_legendre(points)
    return 0.5 * (x + 1.0), 0.5 * w


def _tensor(nodes_1d: list[np.ndarray], weights_1d: list[np.ndarray]) -> tuple[np.ndarray, np.ndarray]:
    grids = np.meshgrid(*nodes_1d, indexing="ij")
    nodes = np.stack([g.ravel() for g in grids], axis=-1)
    wgrids = np.meshgrid(*weights_1d, indexing="ij")
    weights = np.prod(np.stack([g.ravel() for g in wgrids], axis=-1), axis=1)
    return nodes, weights


def gauss_rule(intervals, points_per_axis: int, *, with_coarse: bool = True) -> QuadratureRule:
    """Tensor Gauss-Legendre rule on a product of intervals.

    Exact for polynomials of degree ``2 * points_per_axis - 1`` per axis.
    The companion ``coarse`` rule (half the points) feeds error estimates.
    """
    if points_per_axis < 1:
        raise PreconditionError("points_per_axis must be >= 1")
    intervals = [tuple(map(float, iv)) for iv in intervals]
    if any(not (np.isfinite(a) and np.isfinite(b)) for a, b in intervals):
        raise PreconditionError("intervals must be bounded")
    x, w = _gauss01(points_per_axis)
    nodes_1d = [a + (b - a) * x for a, b in intervals]
    weights_1d = [(b - a) * w for a, b in intervals]
    nodes, weights = _tensor(nodes_1d, weights_1d)
    coarse = None
    if with_coarse and points_per_axis >= 2:
        coarse = gauss_rule(intervals, points_per_axis // 2, with_coarse=False)
    return QuadratureRule(nodes, weights, points_per_axis, "tensor-gauss", coarse)


def _singular_map(u: np.ndarray, lo: float, s: float) -> tuple[np.ndarray, np.ndarray]:
    # r = 1 - (1 - lo)(1 - u)^{1/(1+s)} absorbs (1 - r^2)^s at r = 1
    p = 1.0 / (1.0 + s)
    r = 1.0 - (1.0 - lo) * (1.0 - u) ** p
    dr = (1.0 - lo) * p * (1.0 - u) ** (p - 1.0)
    return r, dr


def shadow_rule(domain: DomainSpec | ShadowRegion, points_per_axis: int, *,
                weight: WeightSpec | None = None, kind: str = "tensor-gauss",
                seed: int = 0, samples: int = 4096, with_coarse: bool = True) -> QuadratureRule:
    """Rule on a shadow with the parametrisation Jacobian folded into weights.

    ``tensor-gauss`` pulls a unit-box Gauss rule back through the shadow's
    parametrisation.  Box axes ending at 1 under a radial-power weight with
    a negative exponent get a substitution that removes the endpoint
    singularity.  ``monte-carlo`` draws ``samples`` seeded uniform points.
    """
    shadow = domain.shadow if isinstance(domain, DomainSpec) else domain
    if weight is None and isinstance(domain, DomainSpec):
        weight = domain.weight
    n = shadow.dim
    if kind == "monte-carlo":
        rng = np.random.default_rng(seed)
        u = rng.random((samples, n))
        r, jac = shadow.parametrize(u)
        return QuadratureRule(r, jac / samples, samples, "monte-carlo", None, seed)
    if kind != "tensor-gauss":
        raise PreconditionError(f"unknown rule kind {kind!r}")
    x, w = _gauss01(points_per_axis)
    u, uw = _tensor([x] * n, [w] * n)
    if shadow.kind == "box" and weight is not None and weight.kind == "radial-power":
        lo, hi = shadow.bounding_box
        r = np.empty_like(u)
        jac = np.ones(len(u))
        for j in range(n):
            s = weight.exponents[j]
            if s < 0 and hi[j] == 1.0:
                r[:, j], d = _singular_map(u[:, j], lo[j], s)
            else:
                r[:, j], d = lo[j] + (hi[j] - lo[j]) * u[:, j], hi[j] - lo[j]
            jac = jac * d
    else:
        r, jac = shadow.parametrize(u)
    coarse = None
    if with_coarse and points_per_axis >= 2:
        coarse = shadow_rule(shadow, points_per_axis // 2, weight=weight, with_coarse=False)
    return QuadratureRule(r, uw * jac, points_per_axis, "tensor-gauss", coarse)


def _evaluate(f, rule: QuadratureRule) -> tuple[complex, np.ndarray]:
    vals = np.asarray(f(rule.nodes))
    vals = np.broadcast_to(vals, rule.weights.shape) if vals.ndim == 0 else vals.reshape(len(rule.weights))
    active = rule.weights != 0
    if not np.all(np.isfinite(vals[active])):
        raise NonFinite("integrand produced a non-finite value at a quadrature node")
    vals = np.where(active, vals, 0.0)
    return np.sum(rule.weights * vals), vals


def _scalar(v):
    v = complex(v)
    return v.real if v.imag == 0 else v


def integrate_with_rule(f, rule: QuadratureRule) -> IntegrationReport:
    value, vals = _evaluate(f, rule)
    evaluations = len(rule)
    if rule.kind == "monte-carlo":
        contrib = rule.weights * vals * len(rule)
        err = np.std(contrib) / np.sqrt(len(rule))
    elif rule.coarse is not None:
        coarse_value, _ = _evaluate(f, rule.coarse)
        evaluations += len(rule.coarse)
        err = abs(value - coarse_value)
    else:
        err = 0.0
    return IntegrationReport(_scalar(value), err, evaluations)


def integrate_shadow(f: Callable[[np.ndarray], np.ndarray], domain: DomainSpec, rule: QuadratureRule | None = None,
                     *, weight: WeightSpec | None = None, rel_tol: float = DEFAULT_REL_TOL,
                     budget: int = DEFAULT_BUDGET, start_order: int = 8,
                     magnitude: Callable[[np.ndarray], np.ndarray] | None = None) -> IntegrationReport:
    """Integrate ``f(r) dr`` over the shadow of ``domain``.

    ``f`` maps an ``(M, n)`` array of radii to ``M`` values; any weight or
    Jacobian factor belongs inside ``f``.  With an explicit ``rule`` the rule
    is applied once.  Otherwise the Gauss order is doubled (or, for custom
    shadows, cells are subdivided) until the estimated relative error drops
    below ``rel_tol``, or below rounding level relative to the integral of
    ``|f|`` (or of ``magnitude`` when ``f`` already hides cancellation).
    """
    if rule is not None:
        if rule.dim != domain.dim:
            raise DimensionMismatch("rule and domain dimensions differ")
        return integrate_with_rule(f, rule)
    if domain.shadow.kind == "custom":
        return _integrate_subdivision(f, domain.shadow, rel_tol, budget)
    evaluations = 0
    previous = None
    order = start_order
    while True:
        if order > MAX_GAUSS_ORDER or evaluations + order ** domain.dim > budget:
            raise BudgetExhausted(f"relative tolerance {rel_tol:g} not met within {budget} evaluations")
        rule = shadow_rule(domain, order, weight=weight, with_coarse=False)
        if evaluations + len(rule) > budget:
            raise BudgetExhausted(f"relative tolerance {rel_tol:g} not met within {budget} evaluations")
        value, vals = _evaluate(f, rule)
        evaluations += len(rule)
        mags = np.abs(vals) if magnitude is None else magnitude(rule.nodes)
        scale = float(np.sum(np.abs(rule.weights) * mags))
        if previous is not None:
            err = abs(value - previous)
            if err <= rel_tol * max(abs(value), 1e-300) or err <= 1e-14 * scale:
                return IntegrationReport(_scalar(value), err, evaluations)
        previous = value
        order *= 2


def _integrate_subdivision(f, shadow: ShadowRegion, rel_tol: float, budget: int,
                           points: int = 6) -> IntegrationReport:
    """Greedy cell bisection on the bounding box of a custom shadow."""
    n = shadow.dim
    x, w = _gauss01(points)
    xc, wc = _gauss01(max(points // 2, 1))
    ref_nodes, ref_w = _tensor([x] * n, [w] * n)
    ref_cnodes, ref_cw = _tensor([xc] * n, [wc] * n)
    probe = np.stack([g.ravel() for g in np.meshgrid(*([np.linspace(0, 1, 5)] * n), indexing="ij")], -1)
    evaluations = 0
    counter = itertools.count()

    def cell_estimate(lo, hi):
        nonlocal evaluations
        size = hi - lo
        vol = float(np.prod(size))
        inside_probe = shadow.contains(lo + size * probe)
        if not inside_probe.any():
            return 0.0, 0.0
        fine_pts = lo + size * ref_nodes
        coarse_pts = lo + size * ref_cnodes
        fine_mask = shadow.contains(fine_pts)
        coarse_mask = shadow.contains(coarse_pts)
        fv = np.where(fine_mask, np.asarray(f(fine_pts)).reshape(-1), 0.0)
        cv = np.where(coarse_mask, np.asarray(f(coarse_pts)).reshape(-1), 0.0)
        evaluations += len(fine_pts) + len(coarse_pts)
        if not (np.all(np.isfinite(fv)) and np.all(np.isfinite(cv))):
            raise NonFinite("integrand produced a non-finite value at a quadrature node")
        fine = vol * np.sum(ref_w * fv)
        coarse = vol * np.sum(ref_cw * cv)
        err = abs(fine - coarse)
        if not inside_probe.all():
            err = max(err, vol * float(np.max(np.abs(fv), initial=0.0)))
        return fine, err

    lo0, hi0 = shadow.bounding_box
    value, err = cell_estimate(lo0, hi0)
    heap = [(-err, next(counter), lo0, hi0, value, err)]
    total, total_err = value, err
    while total_err > rel_tol * max(abs(total), 1e-300):
        if evaluations > budget:
            raise BudgetExhausted(
                f"relative tolerance {rel_tol:g} not met within {budget} evaluations "
                f"(estimate {total:.12g} +- {total_err:.3g})")
        _, _, lo, hi, v, e = heapq.heappop(heap)
        total -= v
        total_err -= e
        axis = int(np.argmax(hi - lo))
        mid = 0.5 * (lo[axis] + hi[axis])
        for a, b in ((lo[axis], mid), (mid, hi[axis])):
            clo, chi = lo.copy(), hi.copy()
            clo[axis], chi[axis] = a, b
            cv, ce = cell_estimate(clo, chi)
            total += cv
            total_err += ce
            heapq.heappush(heap, (-ce, next(counter), clo, chi, cv, ce))
    return IntegrationReport(_scalar(total), total_err, evaluations)


def phase_nodes(phase_order: int) -> np.ndarray:
    """Equispaced phases ``2 pi k / P``; exact for ``e^{i m theta}``, ``|m| < P``."""
    if phase_order < 1:
        raise PreconditionError("phase_order must be >= 1")
    return 2.0 * np.pi * np.arange(phase_order) / phase_order


def integrate_domain(f: Callable[[np.ndarray], np.ndarray], domain: DomainSpec,
                     weight: WeightSpec | None = None, rule: QuadratureRule | None = None,
                     phase_order: int = 16, *, rel_tol: float = DEFAULT_REL_TOL,
                     budget: int = DEFAULT_BUDGET, start_order: int = 8,
                     chunk: int = 1 << 20) -> IntegrationReport:
    """Integrate ``f(w) * weight(|w|) dV(w)`` over the domain.

    ``f`` maps an ``(M, n)`` complex array of points to ``M`` values.  The
    polar Jacobian ``prod_j r_j`` is included here.
    """
    weight = weight if weight is not None else domain.weight
    n = domain.dim
    theta = phase_nodes(phase_order)
    tgrid = np.stack([g.ravel() for g in np.meshgrid(*([theta] * n), indexing="ij")], -1)
    phases = np.exp(1j * tgrid)
    pw = (2.0 * np.pi / phase_order) ** n

    last_abs = {}

    def radial_integrand(r: np.ndarray) -> np.ndarray:
        out = np.empty(len(r), dtype=complex)
        mag = np.empty(len(r))
        step = max(1, chunk // len(phases))
        for start in range(0, len(r), step):
            rr = r[start:start + step]
            pts = (rr[:, None, :] * phases[None, :, :]).reshape(-1, n)
            vals = np.asarray(f(pts), dtype=complex).reshape(len(rr), len(phases))
            out[start:start + step] = pw * vals.sum(axis=1)
            mag[start:start + step] = pw * np.abs(vals).sum(axis=1)
        factor = np.prod(r, axis=1) * weight(r)
        last_abs["value"] = mag * np.abs(factor)
        return out * factor

    def magnitude(r: np.ndarray) -> np.ndarray:
        # phase sums cancel; measure convergence against the integral of |f|
        return last_abs["value"]

    if rule is not None:
        report = integrate_shadow(radial_integrand, domain, rule)
    else:
        report = integrate_shadow(radial_integrand, domain, weight=weight, rel_tol=rel_tol,
                                  budget=max(1, budget // len(phases)), start_order=start_order,
                                  magnitude=magnitude)
    report.evaluations *= len(phases)
    return report
