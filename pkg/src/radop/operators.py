"""Radial operators: diagonal action, integral representation, spectral data.

Functions enter as finite Laurent coefficient maps (:class:`LaurentPoly`).  A
radial operator multiplies the coefficient of ``z^alpha`` by the symbol
value at ``alpha``, so the diagonal route is exact.  The integral route
evaluates ``Rf(z) = integral f(w) g(z conj(w)) weight dV(w)`` by quadrature,
where ``g`` has Laurent coefficients ``||c_alpha||^2 * symbol(alpha)``.  It
serves as an independent check of the diagonal route.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Callable, Iterable, Optional

import numpy as np

from .errors import (DimensionMismatch, NoConvergence, NotAllowable, NotUnimodular, OutsideDomain,
                     OutsideTildeDomain, PreconditionError)
from .geometry import DomainSpec, contains_point, sample_domain
from .lattice import IndexBox, IndexSet, MultiIndex, as_index, canonical_key, enumerate_allowable, sup_norm
from .norms import BergmanSpace, DirichletSpace, HardySpace, Space
from .quadrature import integrate_domain, phase_nodes, shadow_rule
from .symbols import (FINITE_RANK, COMPACT, NEITHER, Symbol, SupNorm, classify_decay, conjugate, indicator,
                      one)
from . import symbols as _symbols


# -- Laurent polynomials ------------------------------------------------------

@dataclass
class LaurentPoly:
    dim: int
    coeffs: dict[MultiIndex, complex] = field(default_factory=dict)

    def __post_init__(self):
        clean = {}
        for a, v in self.coeffs.items():
            a = as_index(a)
            if len(a) != self.dim:
                raise DimensionMismatch(f"exponent {a} does not have dimension {self.dim}")
            v = complex(v)
            if v != 0:
                clean[a] = v
        self.coeffs = clean

    @classmethod
    def monomial(cls, alpha, coeff: complex = 1.0) -> "LaurentPoly":
        alpha = as_index(alpha)
        return cls(len(alpha), {alpha: coeff})

    @classmethod
    def from_sequence(cls, coeffs: Iterable[complex]) -> "LaurentPoly":
        """One-variable polynomial ``sum_m coeffs[m] z^m``."""
        return cls(1, {(m,): c for m, c in enumerate(coeffs)})

    @property
    def support(self) -> tuple[MultiIndex, ...]:
        return tuple(sorted(self.coeffs, key=canonical_key))

    def coeff(self, alpha) -> complex:
        return self.coeffs.get(as_index(alpha), 0j)

    def degree(self) -> int:
        """Largest ``|alpha|_1`` in the support (0 for the zero polynomial)."""
        return max((sum(abs(x) for x in a) for a in self.coeffs), default=0)

    def __call__(self, z) -> complex | np.ndarray:
        return self.evaluate(z)

    def evaluate(self, z) -> complex | np.ndarray:
        z = np.asarray(z, dtype=complex)
        single = z.ndim <= 1 and z.size == self.dim
        pts = z.reshape(-1, self.dim)
        out = np.zeros(len(pts), dtype=complex)
        for a, c in self.coeffs.items():
            out += c * np.prod(pts ** np.asarray(a), axis=1)
        return complex(out[0]) if single else out

    def derivative(self) -> "LaurentPoly":
        if self.dim != 1:
            raise PreconditionError("derivative is defined for one-variable polynomials")
        return LaurentPoly(1, {(a[0] - 1,): a[0] * c for a, c in self.coeffs.items() if a[0] != 0})

    def __add__(self, other: "LaurentPoly") -> "LaurentPoly":
        out = dict(self.coeffs)
        for a, c in other.coeffs.items():
            out[a] = out.get(a, 0) + c
        return LaurentPoly(self.dim, out)

    def __sub__(self, other: "LaurentPoly") -> "LaurentPoly":
        return self + other.scaled(-1)

    def scaled(self, c: complex) -> "LaurentPoly":
        return LaurentPoly(self.dim, {a: c * v for a, v in self.coeffs.items()})

    def max_abs_diff(self, other: "LaurentPoly") -> float:
        keys = set(self.coeffs) | set(other.coeffs)
        return max((abs(self.coeff(a) - other.coeff(a)) for a in keys), default=0.0)

    def norm_sq(self, space: Space) -> float:
        """``sum |c_alpha|^2 ||e_alpha||^2`` (monomials are orthogonal)."""
        if not self.coeffs:
            return 0.0
        arr = np.array(self.support)
        _require_allowable(space, arr)
        return float(np.sum(np.abs([self.coeffs[a] for a in self.support]) ** 2
                            * np.exp(space.log_norm_sq_array(arr))))

    def to_json(self) -> dict:
        return {"dim": self.dim, "terms": [[list(a), [self.coeffs[a].real, self.coeffs[a].imag]]
                                           for a in self.support]}

    @classmethod
    def from_json(cls, data: dict | str) -> "LaurentPoly":
        if isinstance(data, str):
            data = json.loads(data)
        try:
            terms = {}
            for a, v in data["terms"]:
                v = complex(v[0], v[1]) if isinstance(v, (list, tuple)) else complex(v)
                key = as_index(a)
                terms[key] = terms.get(key, 0) + v
            return cls(int(data["dim"]), terms)
        except (KeyError, TypeError, ValueError) as exc:
            raise PreconditionError(f"malformed polynomial JSON: {exc}") from exc


def _require_allowable(space: Space, arr: np.ndarray) -> None:
    if len(arr) == 0:
        return
    mask = space.allowable_mask(arr)
    if not np.all(mask):
        bad = tuple(int(v) for v in arr[np.flatnonzero(~mask)[0]])
        raise NotAllowable(f"coefficient at non-allowable index {bad}")


# -- kernel series ------------------------------------------------------------

@dataclass
class SeriesResult:
    value: complex
    truncation: int
    tail_bound: float
    terms: int


def _tilde_ok(space: Space, moduli: np.ndarray) -> np.ndarray:
    if isinstance(space, BergmanSpace):
        return space.domain.shadow.tilde_contains(moduli)
    return moduli[:, 0] < 1.0


class KernelSeries:
    """The series ``sum_alpha ||c_alpha||^2 symbol(alpha) zeta^alpha``.

    Coefficients are handled in log form so that domains with negative
    exponents (annuli, Hartogs triangles) do not overflow.  Truncation is by
    nested sup-norm shells; the tail beyond shell ``N`` is bounded from the
    geometric decay of the last shells of the majorant series
    ``sum ||c_alpha||^2 |zeta^alpha|`` (the slice coefficients), times
    ``sup |symbol|``.
    """

    def __init__(self, space: Space, symbol: Symbol):
        if symbol.dim != space.dim:
            raise DimensionMismatch("symbol and space dimensions differ")
        self.space = space
        self.symbol = symbol
        self._boxes: dict[int, tuple[np.ndarray, np.ndarray, np.ndarray, np.ndarray]] = {}

    def box(self, N: int):
        """Allowable indices with sup-norm <= N: ``(arr, log||c||^2, symbol, level)``."""
        if N not in self._boxes:
            arr = IndexBox(self.space.dim, N).array()
            logn = self.space.log_norm_sq_array(arr)
            keep = np.isfinite(logn)
            arr, logc = arr[keep], -logn[keep]
            u = self.symbol.values(arr) if len(arr) else np.zeros(0, complex)
            self._boxes = {k: v for k, v in self._boxes.items() if k > N // 4}
            self._boxes[N] = (arr, logc, u, np.abs(arr).max(axis=1) if len(arr) else np.zeros(0, int))
        return self._boxes[N]

    def _sup_symbol(self, N: int) -> float:
        _, _, u, _ = self.box(N)
        return float(np.max(np.abs(u), initial=0.0))

    def truncation(self, moduli, tol: float = 1e-13, budget: int = 10**6,
                   derivative: bool = False, start: int = 8) -> tuple[int, float]:
        """Smallest doubling-sequence ``N`` whose tail estimate is below ``tol``.

        ``tol`` is relative to the majorant sum.  Returns ``(N, tail_bound)``
        where ``tail_bound`` is the worst absolute bound over the points.
        """
        moduli = np.atleast_2d(np.asarray(moduli, dtype=float))
        with np.errstate(divide="ignore"):
            logm = np.log(moduli)
        N = start
        while True:
            if (2 * N + 1) ** self.space.dim > 4 * budget:
                raise NoConvergence(f"kernel series tail not below {tol:g} within {budget} terms")
            arr, logc, u, level = self.box(N)
            if len(arr) > budget:
                raise NoConvergence(f"kernel series tail not below {tol:g} within {budget} terms")
            sup_u = max(float(np.max(np.abs(u), initial=0.0)), 1e-300)
            ok, worst = True, 0.0
            for start_row in range(0, len(moduli), 64):
                lm = logm[start_row:start_row + 64]
                with np.errstate(invalid="ignore"):
                    expo = np.where(arr[None, :, :] == 0, 0.0, arr[None, :, :] * lm[:, None, :]).sum(-1)
                mag = np.exp(logc[None, :] + expo)
                if derivative:
                    mag = mag * np.abs(arr[:, 0])[None, :]
                shells = np.zeros((len(lm), N + 1))
                for k in range(N + 1):
                    sel = level == k
                    if sel.any():
                        shells[:, k] = mag[:, sel].sum(axis=1)
                total = shells.sum(axis=1)
                tail = self._tail(shells)
                worst = max(worst, float(np.max(sup_u * tail)))
                if np.any(~np.isfinite(tail)) or np.any(tail > tol * np.maximum(total, 1e-300)):
                    ok = False
                    break
            if ok:
                return N, worst
            N *= 2

    @staticmethod
    def _tail(shells: np.ndarray, window: int = 4) -> np.ndarray:
        last = shells[:, -1]
        prev = shells[:, -window - 1:-1]
        cur = shells[:, -window:]
        with np.errstate(divide="ignore", invalid="ignore"):
            ratios = np.where(prev > 0, cur / prev, np.where(cur > 0, np.inf, 0.0))
        q = ratios.max(axis=1)
        with np.errstate(divide="ignore", invalid="ignore"):
            tail = np.where(q < 1, last * q / (1 - q), np.inf)
        return np.where(last == 0, 0.0, tail) + last

    def evaluate(self, zeta, tol: float = 1e-13, budget: int = 10**6, derivative: bool = False) -> SeriesResult:
        zeta = np.asarray(zeta, dtype=complex).reshape(self.space.dim)
        moduli = np.abs(zeta)
        if not _tilde_ok(self.space, moduli.reshape(1, -1))[0]:
            raise OutsideTildeDomain(f"|zeta| = {moduli.tolist()} lies outside the product domain")
        N, tail = self.truncation(moduli, tol, budget, derivative)
        arr, logc, u, _ = self.box(N)
        with np.errstate(divide="ignore"):
            logz = np.log(zeta)
        if derivative:
            # d/dzeta of zeta^m = m zeta^(m-1)
            nz = arr[:, 0] != 0
            arr, logc, u = arr[nz], logc[nz], u[nz]
            expo = (arr[:, 0] - 1) * logz[0] if zeta[0] != 0 else np.where(arr[:, 0] == 1, 0.0, -np.inf)
            vals = u * arr[:, 0] * np.exp(logc + expo)
        else:
            with np.errstate(invalid="ignore"):
                expo = np.where(arr == 0, 0.0, arr * logz[None, :]).sum(axis=1)
            vals = u * np.exp(logc + expo)
        return SeriesResult(complex(np.sum(vals)), N, tail, len(arr))


# -- the operator -------------------------------------------------------------

class RadialOperator:
    """A space together with a bounded symbol.

    ``R e_alpha = symbol(alpha) e_alpha`` for every allowable ``alpha``.
    """

    def __init__(self, space: Space, symbol: Symbol):
        if symbol.dim != space.dim:
            raise DimensionMismatch("symbol and space dimensions differ")
        self.space = space
        self.symbol = symbol
        self.series = KernelSeries(space, symbol)

    def __repr__(self) -> str:
        return f"RadialOperator({self.space!r}, {self.symbol!r})"

    @property
    def dim(self) -> int:
        return self.space.dim

    def __call__(self, f: LaurentPoly) -> LaurentPoly:
        return apply_diagonal(self, f)

    def operator_norm(self, probe) -> SupNorm:
        return _symbols.sup_norm(self.symbol, probe)

    def adjoint(self) -> "RadialOperator":
        return adjoint(self)


def analysis_transform(space: Space, f: LaurentPoly, index_set: IndexSet, method: str = "exact",
                       **quad_kwargs) -> np.ndarray:
    """Entries ``||c_alpha|| * <f, e_alpha>`` over ``index_set`` (canonical order).

    ``exact`` reads them off the coefficients as ``c_alpha(f) ||e_alpha||``;
    ``quadrature`` integrates ``f * conj(z^alpha) * weight`` over the domain
    (Bergman spaces only) and exists for cross-validation.
    """
    if f.dim != space.dim or index_set.dimension != space.dim:
        raise DimensionMismatch("dimension mismatch")
    _require_allowable(space, np.array(f.support).reshape(-1, space.dim))
    arr = index_set.array()
    if len(arr) == 0:
        return np.zeros(0, complex)
    _require_allowable(space, arr)
    lognorm = space.log_norm_sq_array(arr)
    if method == "exact":
        c = np.array([f.coeff(a) for a in index_set], dtype=complex)
        return c * np.exp(0.5 * lognorm)
    if method != "quadrature":
        raise PreconditionError(f"unknown method {method!r}")
    if not isinstance(space, BergmanSpace):
        raise PreconditionError("quadrature analysis is available for Bergman spaces only")
    span = max([sup_norm(a) for a in f.support] + [sup_norm(a) for a in index_set]) if f.coeffs else 0
    phase_order = quad_kwargs.pop("phase_order", 2 * span + 2)
    out = np.empty(len(arr), dtype=complex)
    for i, a in enumerate(arr):
        expo = np.asarray(a)
        rep = integrate_domain(lambda w, e=expo: f.evaluate(w) * np.conj(np.prod(w ** e, axis=1)),
                               space.domain, phase_order=phase_order, **quad_kwargs)
        out[i] = rep.value
    return out * np.exp(-0.5 * lognorm)


def synthesis_transform(space: Space, seq, index_set: IndexSet) -> LaurentPoly:
    """``sum_alpha ||c_alpha|| seq(alpha) z^alpha``; inverse of the analysis transform."""
    seq = np.asarray(seq, dtype=complex).reshape(-1)
    if len(seq) != len(index_set):
        raise PreconditionError("sequence length must match the index set")
    if len(seq) == 0:
        return LaurentPoly(space.dim)
    arr = index_set.array()
    _require_allowable(space, arr)
    coeff = seq * np.exp(-0.5 * space.log_norm_sq_array(arr))
    return LaurentPoly(space.dim, dict(zip(index_set, coeff)))


def apply_diagonal(R: RadialOperator, f: LaurentPoly) -> LaurentPoly:
    if f.dim != R.dim:
        raise DimensionMismatch("polynomial and operator dimensions differ")
    if not f.coeffs:
        return LaurentPoly(R.dim)
    arr = np.array(f.support)
    _require_allowable(R.space, arr)
    u = R.symbol.values(arr)
    return LaurentPoly(R.dim, {a: v * f.coeffs[a] for a, v in zip(f.support, u)})


def inducing_function_eval(R: RadialOperator, zeta, tol: float = 1e-13, budget: int = 10**6) -> complex:
    """Value at ``zeta`` of the function inducing ``R``.

    Raises ``OutsideTildeDomain`` when ``|zeta|`` is not in the product
    domain and ``NoConvergence`` when the tail bound is not met in budget.
    """
    return R.series.evaluate(zeta, tol, budget).value


def apply_integral(R: RadialOperator, f: LaurentPoly, z, rule=None, phase_order: int | None = None, *,
                   tol: float = 1e-13, budget: int = 10**6, radial_points: int | None = None) -> complex:
    """``Rf(z)`` through the integral representation, by quadrature.

    For every radial node the kernel ``g(z conj(w))`` and ``f(w)`` are
    sampled on an equispaced phase grid and summed with the trapezoidal rule.
    The default phase order exceeds the spread of exponents in the truncated
    kernel and in ``f``, which makes the phase sums alias-free.  The default
    radial rule is a Gauss rule on the shadow parametrisation.
    """
    space = R.space
    if not isinstance(space, BergmanSpace):
        raise PreconditionError("apply_integral needs a Bergman space; see radop.algebra for H^2 and D")
    domain = space.domain
    n = space.dim
    z = np.asarray(z, dtype=complex).reshape(n)
    if not contains_point(domain, z):
        raise OutsideDomain(f"z = {z.tolist()} is not in {domain.name}")
    if not f.coeffs:
        return 0j
    fsupp = np.array(f.support)
    _require_allowable(space, fsupp)
    if rule is None:
        pts = radial_points or max(8, 2 * f.degree() + 4)
        rule = shadow_rule(domain, pts, weight=domain.weight, with_coarse=False)
    rnodes, rw = rule.nodes, rule.weights
    keep = rw != 0
    rnodes, rw = rnodes[keep], rw[keep]
    moduli = np.abs(z)[None, :] * rnodes
    N, _ = R.series.truncation(moduli, tol, budget)
    arr, logc, u, _ = R.series.box(N)
    glo, ghi = arr.min(axis=0), arr.max(axis=0)
    flo, fhi = fsupp.min(axis=0), fsupp.max(axis=0)
    if phase_order is None:
        P = np.maximum(ghi - flo, fhi - glo) + 1
    else:
        P = np.full(n, int(phase_order))
    P = np.maximum(P, 1)
    phi = np.angle(z)
    gshape = tuple(ghi - glo + 1)
    fshape = tuple(fhi - flo + 1)
    gidx = tuple((arr - glo).T)
    fidx = tuple((fsupp - flo).T)
    fc = np.array([f.coeffs[a] for a in f.support])
    Eg, Ef = [], []
    for j in range(n):
        theta = phase_nodes(int(P[j]))
        ga = np.arange(glo[j], ghi[j] + 1)
        fa = np.arange(flo[j], fhi[j] + 1)
        Eg.append(np.exp(1j * ga[None, :] * (phi[j] - theta[:, None])))
        Ef.append(np.exp(1j * fa[None, :] * theta[:, None]))
    pw = float(np.prod(2 * np.pi / P))
    with np.errstate(divide="ignore"):
        logmod = np.log(moduli)
        logr = np.log(rnodes)
    radial = rw * np.prod(rnodes, axis=1) * domain.weight(rnodes)
    total = 0j
    D = np.zeros(gshape, dtype=complex)
    F = np.zeros(fshape, dtype=complex)
    for m in range(len(rnodes)):
        with np.errstate(invalid="ignore"):
            expo = np.where(arr == 0, 0.0, arr * logmod[m][None, :]).sum(axis=1)
        D[gidx] = u * np.exp(logc + expo)
        with np.errstate(invalid="ignore"):
            fexpo = np.where(fsupp == 0, 0.0, fsupp * logr[m][None, :]).sum(axis=1)
        F[fidx] = fc * np.exp(fexpo)
        G, Fg = D, F
        # contracting the trailing axis each time keeps G and Fg aligned
        for j in reversed(range(n)):
            G = np.tensordot(Eg[j], G, axes=([1], [n - 1]))
            Fg = np.tensordot(Ef[j], Fg, axes=([1], [n - 1]))
        total += radial[m] * pw * np.sum(Fg * G)
    return complex(total)


# -- rotations and radiality --------------------------------------------------

def rotation_apply(lam, f: LaurentPoly) -> LaurentPoly:
    """``(V_lam f)(z) = f(lam z)``: multiplies the ``alpha`` coefficient by ``lam^alpha``."""
    lam = np.asarray(lam, dtype=complex).reshape(-1)
    if len(lam) != f.dim:
        raise DimensionMismatch("lambda must have one entry per variable")
    if np.any(np.abs(np.abs(lam) - 1) > 1e-12):
        raise NotUnimodular("rotation parameters must have modulus 1")
    return LaurentPoly(f.dim, {a: c * complex(np.prod(lam ** np.asarray(a))) for a, c in f.coeffs.items()})


def radiality_residual(R, trials: int = 100, seed: int = 0, support: IndexSet | None = None,
                       max_terms: int = 4) -> float:
    """Worst coefficient gap between ``R V_lam f`` and ``V_lam R f``.

    ``R`` is a :class:`RadialOperator` or any callable on ``LaurentPoly``
    (then ``support`` is required).  Test functions are random combinations
    of at most ``max_terms`` monomials from ``support``.
    """
    if trials < 1:
        raise PreconditionError("trials must be >= 1")
    if support is None:
        if not isinstance(R, RadialOperator):
            raise PreconditionError("support is required for a bare callable")
        support = enumerate_allowable(R.space, IndexBox(R.dim, 4))
    op = R if callable(R) else None
    members = support.members
    dim = support.dimension
    rng = np.random.default_rng(seed)
    worst = 0.0
    for _ in range(trials):
        lam = np.exp(1j * rng.uniform(0, 2 * np.pi, size=dim))
        k = int(rng.integers(1, min(max_terms, len(members)) + 1))
        picks = rng.choice(len(members), size=k, replace=False)
        coeffs = rng.normal(size=k) + 1j * rng.normal(size=k)
        f = LaurentPoly(dim, {members[i]: c for i, c in zip(picks, coeffs)})
        left = op(rotation_apply(lam, f))
        right = rotation_apply(lam, op(f))
        worst = max(worst, left.max_abs_diff(right))
    return worst


# -- adjoint ------------------------------------------------------------------

def adjoint(R: RadialOperator) -> RadialOperator:
    return RadialOperator(R.space, conjugate(R.symbol))


def gstar_eval(R: RadialOperator, zeta, tol: float = 1e-13) -> complex:
    """``g*(zeta) = conj(g(conj(zeta)))`` for the function ``g`` inducing ``R``."""
    zeta = np.asarray(zeta, dtype=complex)
    return complex(np.conj(inducing_function_eval(R, np.conj(zeta), tol)))


def adjoint_residual(R: RadialOperator, points, tol: float = 1e-13) -> float:
    """Worst relative gap between the conjugate-symbol route and the ``g*`` route."""
    A = adjoint(R)
    worst = 0.0
    for zeta in np.atleast_2d(np.asarray(points, dtype=complex)):
        a = inducing_function_eval(A, zeta, tol)
        b = gstar_eval(R, zeta, tol)
        worst = max(worst, abs(a - b) / max(1.0, abs(b)))
    return worst


# -- spectral data ------------------------------------------------------------

def convex_hull(points, tol: float = 1e-12) -> list[complex]:
    """Counter-clockwise hull vertices of complex points (monotone chain).

    Near-collinear points (cross product within ``tol``) are dropped.
    Degenerate hulls come back as one point or the two ends of a segment.
    """
    # adding 0.0 folds -0.0 into 0.0 so equal points dedupe and print alike
    pts = sorted({(float(np.real(p)) + 0.0, float(np.imag(p)) + 0.0) for p in np.asarray(points, complex).ravel()})
    if len(pts) <= 1:
        return [complex(*p) for p in pts]

    def cross(o, a, b):
        return (a[0] - o[0]) * (b[1] - o[1]) - (a[1] - o[1]) * (b[0] - o[0])

    lower, upper = [], []
    for p in pts:
        while len(lower) >= 2 and cross(lower[-2], lower[-1], p) <= tol:
            lower.pop()
        lower.append(p)
    for p in reversed(pts):
        while len(upper) >= 2 and cross(upper[-2], upper[-1], p) <= tol:
            upper.pop()
        upper.append(p)
    hull = lower[:-1] + upper[:-1]
    if len(hull) == 2 and hull[0] == hull[1]:
        hull = hull[:1]
    return [complex(*p) for p in hull]


def hull_contains(hull: list[complex], p: complex, tol: float = 1e-12) -> bool:
    if not hull:
        return False
    if len(hull) == 1:
        return abs(p - hull[0]) <= tol
    if len(hull) == 2:
        a, b = hull
        ab = b - a
        t = ((p - a) * np.conj(ab)).real / abs(ab) ** 2
        return -tol <= t <= 1 + tol and abs(p - (a + t * ab)) <= tol * max(1.0, abs(ab))
    for a, b in zip(hull, hull[1:] + hull[:1]):
        if ((b - a).real * (p - a).imag - (b - a).imag * (p - a).real) < -tol:
            return False
    return True


@dataclass
class SpectrumReport:
    indices: list[MultiIndex]
    values: np.ndarray
    attained: np.ndarray
    limit_points: list[complex]
    hull: list[complex]
    limit_point_method: str = "cluster + Richardson extrapolation over the outer half of the probe (heuristic)"

    def to_json(self) -> dict:
        def c(v):
            return [float(np.real(v)), float(np.imag(v))]
        return {
            "indices": [list(a) for a in self.indices],
            "values": [c(v) for v in self.values],
            "attained": [bool(x) for x in self.attained],
            "limit_points": [c(v) for v in self.limit_points],
            "limit_point_method": self.limit_point_method,
            "hull": [c(v) for v in self.hull],
        }


def _clusters(values: np.ndarray, tol: float, min_size: int) -> list[complex]:
    remaining = list(values)
    found = []
    while remaining:
        seed = remaining[0]
        members = [v for v in remaining if abs(v - seed) <= tol / 2]
        remaining = [v for v in remaining if abs(v - seed) > tol / 2]
        if len(members) >= min_size:
            found.append(complex(np.mean(members)))
    return found


def _richardson(levels: np.ndarray, means: np.ndarray, degree: int) -> complex:
    h = 1.0 / (levels + 1.0)
    # polynomial in h through the last degree+1 points, evaluated at h = 0
    V = np.vander(h, degree + 1, increasing=True)
    coef = np.linalg.solve(V, means)
    return complex(coef[0])


def _extrapolated_limit(levels_all: np.ndarray, vals: np.ndarray, tol: float, degree: int = 3) -> complex | None:
    levels = np.unique(levels_all)
    if len(levels) < degree + 3:
        return None
    means = np.array([vals[levels_all == k].mean() for k in levels])
    a = _richardson(levels[-degree - 1:], means[-degree - 1:], degree)
    b = _richardson(levels[-degree - 3:-2], means[-degree - 3:-2], degree)
    if abs(a - b) <= tol:
        return a
    return None


def spectrum_report(R: RadialOperator, probe: IndexSet, cluster_tol: float = 1e-6,
                    min_cluster: int = 5) -> SpectrumReport:
    """Sampled spectrum of ``R`` over ``probe``.

    Every sampled value is an eigenvalue (eigenvector ``e_alpha``).  Limit
    points are estimated from indices in the outer half of the probe: tight
    clusters of at least ``min_cluster`` values, and the Richardson
    extrapolate (in ``1/(level+1)``) of the shell means when two windows
    agree within ``cluster_tol``.  The hull is the numerical-range polygon.
    """
    if len(probe) == 0:
        raise PreconditionError("probe must be nonempty")
    arr = probe.array()
    _require_allowable(R.space, arr)
    vals = R.symbol.values(arr)
    levels = np.abs(arr).max(axis=1)
    outer = levels > levels.max() / 2
    limits: list[complex] = []
    if outer.any():
        limits.extend(_clusters(vals[outer], cluster_tol, min_cluster))
        ext = _extrapolated_limit(levels[outer], vals[outer], cluster_tol)
        if ext is not None and all(abs(ext - p) > cluster_tol for p in limits):
            limits.append(ext)
    hull = convex_hull(vals)
    return SpectrumReport(list(probe), vals, np.ones(len(vals), dtype=bool), limits, hull)


def is_compact(R: RadialOperator) -> Optional[bool]:
    cls = classify_decay(R.symbol)
    return {FINITE_RANK: True, COMPACT: True, NEITHER: False}.get(cls)


def is_finite_rank(R: RadialOperator) -> Optional[bool]:
    cls = classify_decay(R.symbol)
    if cls == FINITE_RANK:
        return True
    if cls in (COMPACT, NEITHER):
        return False
    return None


def reducing_projection(space: Space, E) -> RadialOperator:
    """Projection onto the closed span of ``{e_alpha : alpha in E}``."""
    members = list(E)
    if not members:
        return RadialOperator(space, _symbols.FiniteSymbol(space.dim))
    _require_allowable(space, np.array([as_index(a) for a in members]).reshape(-1, space.dim))
    return RadialOperator(space, indicator(members, space.dim))


def projection_laws_hold(P: RadialOperator, probe: IndexSet) -> bool:
    """``P = P^2 = P*`` checked exactly on the symbol over ``probe``."""
    arr = probe.array()
    u = P.symbol.values(arr)
    return bool(np.array_equal(u, u * u) and np.array_equal(u, np.conj(u)))


def truncated_matrix(R: RadialOperator, box: IndexBox) -> np.ndarray:
    """Matrix of ``R`` in the normalised monomial basis of the allowable box."""
    probe = enumerate_allowable(R.space, box)
    return np.diag(R.symbol.values(probe.array()))


def normality_residual(R: RadialOperator | np.ndarray, box: IndexBox | None = None) -> float:
    """``max |M* M - M M*|`` for the truncated matrix (or a given matrix)."""
    M = R if isinstance(R, np.ndarray) else truncated_matrix(R, box)
    H = M.conj().T
    return float(np.max(np.abs(H @ M - M @ H), initial=0.0))


# -- feasibility ----------------------------------------------------------------

@dataclass
class FeasibilityReport:
    verdict: str
    points: np.ndarray
    converged: np.ndarray
    messages: list[str]

    def to_json(self) -> dict:
        return {"verdict": self.verdict,
                "points": [[[float(v.real), float(v.imag)] for v in p] for p in self.points],
                "converged": [bool(c) for c in self.converged],
                "messages": self.messages}


def feasibility_probe(domain: DomainSpec | Space, samples: int = 20, seed: int = 0, *, core: float = 0.9,
                      tol: float = 1e-12, budget: int = 10**6) -> FeasibilityReport:
    """Run the kernel series at seeded points ``z * conj(w)`` of the product domain.

    A numeric probe, not a proof: the verdict is ``feasible-at-samples`` when
    the series met its tail bound everywhere.
    """
    if samples < 1:
        raise PreconditionError("samples must be >= 1")
    space = domain if isinstance(domain, (BergmanSpace, HardySpace, DirichletSpace)) else BergmanSpace(domain)
    if isinstance(space, BergmanSpace):
        dom = space.domain
    else:
        from .geometry import disk
        dom = disk()
    R = RadialOperator(space, one(space.dim))
    zs = sample_domain(dom, samples, seed, core=core)
    ws = sample_domain(dom, samples, seed + 1, core=core)
    points = zs * np.conj(ws)
    converged = np.zeros(samples, dtype=bool)
    messages = []
    for i, zeta in enumerate(points):
        try:
            R.series.evaluate(zeta, tol, budget)
            converged[i] = True
        except (NoConvergence, OutsideTildeDomain) as exc:
            messages.append(f"point {i}: {exc}")
    verdict = "feasible-at-samples" if converged.all() else "failed"
    return FeasibilityReport(verdict, points, converged, messages)
