"""Reinhardt domains described by their shadows, multi-radial weights, sampling.

A Reinhardt domain is determined by its shadow ``{(|z_1|, ..., |z_n|)}``, so a
:class:`DomainSpec` stores only the shadow.  Every catalogued shadow also
carries a parametrisation by the unit box, used both by quadrature and by
sampling.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

from .errors import DimensionMismatch, PreconditionError, ResolutionExceeded

SHADOW_KINDS = ("box", "ball", "ordered-simplex", "custom")


def _as_rows(r, dim: int) -> np.ndarray:
    arr = np.asarray(r, dtype=float)
    if arr.ndim == 0:
        arr = arr.reshape(1, 1)
    elif arr.ndim == 1:
        arr = arr.reshape(1, -1) if dim > 1 or arr.size == 1 else arr.reshape(-1, 1)
    if arr.shape[-1] != dim:
        raise DimensionMismatch(f"expected vectors of length {dim}, got shape {arr.shape}")
    return arr


@dataclass(frozen=True, eq=False)
class ShadowRegion:
    """Shadow of a bounded Reinhardt domain.

    ``box`` uses ``lower``/``upper`` per axis; an axis with ``lower == 0``
    includes 0, otherwise the interval is open.  ``ball`` is
    ``sum r_j^2 < 1``, ``ordered-simplex`` is ``0 <= r_1 < ... < r_n < 1``
    and ``custom`` is ``predicate`` restricted to the box ``lower``/``upper``.
    """

    kind: str
    dim: int
    lower: tuple[float, ...] = ()
    upper: tuple[float, ...] = ()
    predicate: Optional[Callable[[np.ndarray], np.ndarray]] = None

    def __post_init__(self):
        if self.kind not in SHADOW_KINDS:
            raise PreconditionError(f"unknown shadow kind {self.kind!r}")
        if self.dim < 1:
            raise PreconditionError("dimension must be >= 1")
        if self.kind in ("box", "custom"):
            lo, hi = np.asarray(self.lower, float), np.asarray(self.upper, float)
            if lo.shape != (self.dim,) or hi.shape != (self.dim,):
                raise DimensionMismatch("lower/upper must have one entry per axis")
            if np.any(lo < 0) or np.any(hi <= lo) or not np.all(np.isfinite(hi)):
                raise PreconditionError("box intervals must satisfy 0 <= lower < upper < inf")
        if self.kind == "custom" and self.predicate is None:
            raise PreconditionError("custom shadows need a membership predicate")

    @property
    def bounding_box(self) -> tuple[np.ndarray, np.ndarray]:
        if self.kind in ("box", "custom"):
            return np.asarray(self.lower, float), np.asarray(self.upper, float)
        return np.zeros(self.dim), np.ones(self.dim)

    def touches_zero(self) -> np.ndarray:
        """Per-axis flag: can ``r_j`` get arbitrarily close to 0?"""
        lo, _ = self.bounding_box
        return lo == 0.0

    def contains(self, r) -> np.ndarray:
        r = _as_rows(r, self.dim)
        nonneg = np.all(r >= 0, axis=1)
        if self.kind == "box":
            lo, hi = self.bounding_box
            low_ok = np.where(lo == 0, r >= 0, r > lo)
            return nonneg & np.all(low_ok & (r < hi), axis=1)
        if self.kind == "ball":
            return nonneg & (np.sum(r * r, axis=1) < 1.0)
        if self.kind == "ordered-simplex":
            ok = nonneg & (r[:, -1] < 1.0)
            if self.dim > 1:
                ok &= np.all(np.diff(r, axis=1) > 0, axis=1)
            return ok
        lo, hi = self.bounding_box
        inside = nonneg & np.all((r >= lo) & (r < hi), axis=1)
        out = np.zeros(len(r), dtype=bool)
        if inside.any():
            out[inside] = np.asarray(self.predicate(r[inside]), dtype=bool)
        return out

    def tilde_contains(self, s, resolution: int = 64, max_resolution: int = 1024) -> np.ndarray:
        """Membership in the shadow of ``{z * conj(w) : z, w in domain}``.

        That shadow is the set of entrywise products ``r * t`` of two shadow
        points.  Closed form for the catalogue kinds; custom shadows use a
        grid search over factorisations ``s = r * (s / r)``.
        """
        s = _as_rows(s, self.dim)
        nonneg = np.all(s >= 0, axis=1)
        if self.kind == "box":
            lo, hi = self.bounding_box
            low_ok = np.where(lo == 0, s >= 0, s > lo**2)
            return nonneg & np.all(low_ok & (s < hi**2), axis=1)
        if self.kind == "ball":
            # Cauchy-Schwarz gives sum r_j t_j < 1; r = t = sqrt(s) attains it.
            return nonneg & (np.sum(s, axis=1) < 1.0)
        if self.kind == "ordered-simplex":
            return self.contains(s)
        return np.array([self._tilde_search(row, resolution, max_resolution) for row in s])

    def _tilde_search(self, s: np.ndarray, resolution: int, max_resolution: int) -> bool:
        lo, hi = self.bounding_box
        if np.any(s < 0) or np.any(s >= hi**2) or np.any(s < lo**2):
            return False
        res = resolution
        while res <= max_resolution:
            grids = [lo[j] + (hi[j] - lo[j]) * (np.arange(res) + 0.5) / res for j in range(self.dim)]
            cand = np.stack(np.meshgrid(*grids, indexing="ij"), -1).reshape(-1, self.dim)
            cand = cand[self.contains(cand)]
            if len(cand):
                with np.errstate(divide="ignore", invalid="ignore"):
                    other = np.where(cand > 0, s / cand, 0.0)
                ok = self.contains(other) & np.all(np.isclose(cand * other, s, rtol=0, atol=1e-15), axis=1)
                if ok.any():
                    return True
            res *= 2
        raise ResolutionExceeded(f"no factorisation of {s.tolist()} found at resolution {max_resolution}")

    def parametrize(self, u: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        """Map unit-box points to the shadow; returns ``(r, |Jacobian|)``.

        Custom shadows map onto their bounding box and zero the Jacobian
        outside the predicate.
        """
        u = np.asarray(u, dtype=float).reshape(-1, self.dim)
        if self.kind in ("box", "custom"):
            lo, hi = self.bounding_box
            r = lo + (hi - lo) * u
            jac = np.full(len(u), float(np.prod(hi - lo)))
            if self.kind == "custom":
                jac = np.where(self.contains(r), jac, 0.0)
            return r, jac
        if self.kind == "ball":
            r = np.empty_like(u)
            jac = np.ones(len(u))
            used = np.zeros(len(u))
            for j in range(self.dim):
                scale = np.sqrt(np.clip(1.0 - used, 0.0, None))
                r[:, j] = scale * u[:, j]
                jac *= scale
                used += r[:, j] ** 2
            return r, jac
        # ordered simplex: r_j = prod_{k >= j} t_k
        r = np.flip(np.cumprod(np.flip(u, axis=1), axis=1), axis=1)
        powers = np.arange(self.dim, dtype=float)
        jac = np.prod(u**powers, axis=1)
        return r, jac

    def to_json(self) -> dict:
        if self.kind == "custom":
            raise PreconditionError("custom shadows carry a Python predicate and cannot be serialised")
        out: dict = {"kind": self.kind}
        if self.kind == "box":
            out["lower"] = [float(v) for v in self.lower]
            out["upper"] = [float(v) for v in self.upper]
        return out


@dataclass(frozen=True, eq=False)
class WeightSpec:
    """Multi-radial weight given on the shadow.

    ``constant`` is ``value``; ``radial-power`` is
    ``prod_j (1 - r_j^2)^{s_j}`` with every ``s_j > -1``; ``custom`` wraps
    ``func(r)`` evaluated on ``(M, n)`` arrays.  Admissibility is a declared
    flag, never proven.
    """

    kind: str = "constant"
    value: float = 1.0
    exponents: tuple[float, ...] = ()
    func: Optional[Callable[[np.ndarray], np.ndarray]] = None
    admissible: Optional[bool] = None

    def __post_init__(self):
        if self.kind == "constant":
            if not self.value > 0:
                raise PreconditionError("constant weight must be positive")
        elif self.kind == "radial-power":
            if not self.exponents or any(not s > -1 for s in self.exponents):
                raise PreconditionError("radial-power exponents must all exceed -1")
        elif self.kind == "custom":
            if self.func is None:
                raise PreconditionError("custom weight needs an evaluator")
        else:
            raise PreconditionError(f"unknown weight kind {self.kind!r}")
        if self.admissible is None:
            # positive continuous evaluators are admissible
            object.__setattr__(self, "admissible", self.kind != "custom")

    def __call__(self, r) -> np.ndarray:
        r = np.asarray(r, dtype=float)
        r = r.reshape(-1, r.shape[-1]) if r.ndim > 1 else r.reshape(1, -1)
        if self.kind == "constant":
            return np.full(len(r), float(self.value))
        if self.kind == "radial-power":
            s = np.asarray(self.exponents, float)
            return np.prod((1.0 - r * r) ** s, axis=1)
        return np.asarray(self.func(r), dtype=float).reshape(len(r))

    def singular_axes(self) -> np.ndarray:
        """Axes with an integrable endpoint singularity at ``r_j = 1``."""
        if self.kind != "radial-power":
            return np.zeros(0, dtype=bool)
        return np.asarray(self.exponents, float) < 0

    def to_json(self) -> dict:
        if self.kind == "constant":
            return {"kind": "constant", "value": float(self.value)}
        if self.kind == "radial-power":
            return {"kind": "radial-power", "exponents": [float(s) for s in self.exponents]}
        raise PreconditionError("custom weights cannot be serialised")


@dataclass(frozen=True, eq=False)
class DomainSpec:
    name: str
    shadow: ShadowRegion
    weight: WeightSpec = field(default_factory=WeightSpec)

    def __post_init__(self):
        w = self.weight
        if w.kind == "radial-power":
            if len(w.exponents) != self.dim:
                raise DimensionMismatch("one weight exponent per axis is required")
            _, hi = self.shadow.bounding_box
            if np.any(hi > 1.0):
                raise PreconditionError("radial-power weights need the shadow inside the unit cube")

    @property
    def dim(self) -> int:
        return self.shadow.dim

    def to_json(self) -> dict:
        return {
            "name": self.name,
            "dim": self.dim,
            "shadow": self.shadow.to_json(),
            "weight": self.weight.to_json(),
        }


# -- catalogue --------------------------------------------------------------

def disk(weight: WeightSpec | None = None) -> DomainSpec:
    return DomainSpec("disk", ShadowRegion("box", 1, (0.0,), (1.0,)), weight or WeightSpec())


def polydisc(n: int = 2, weight: WeightSpec | None = None) -> DomainSpec:
    return DomainSpec("polydisc", ShadowRegion("box", n, (0.0,) * n, (1.0,) * n), weight or WeightSpec())


def ball(n: int = 2, weight: WeightSpec | None = None) -> DomainSpec:
    return DomainSpec("ball", ShadowRegion("ball", n), weight or WeightSpec())


def poly_annulus(n: int = 1, inner: float = 0.5, outer: float = 1.0,
                 weight: WeightSpec | None = None) -> DomainSpec:
    return DomainSpec("poly-annulus", ShadowRegion("box", n, (inner,) * n, (outer,) * n),
                      weight or WeightSpec())


def hartogs_triangle(n: int = 2, weight: WeightSpec | None = None) -> DomainSpec:
    """``{|z_1| < |z_2| < ... < |z_n| < 1}``."""
    return DomainSpec("hartogs", ShadowRegion("ordered-simplex", n), weight or WeightSpec())


def custom_domain(name: str, predicate, lower, upper, weight: WeightSpec | None = None) -> DomainSpec:
    lower = tuple(float(v) for v in lower)
    upper = tuple(float(v) for v in upper)
    shadow = ShadowRegion("custom", len(lower), lower, upper, predicate)
    return DomainSpec(name, shadow, weight or WeightSpec())


_SHORTHANDS = {"disk", "polydisc", "ball", "poly-annulus", "hartogs"}


def shadow_from_json(data: dict, dim: int) -> ShadowRegion:
    kind = data.get("kind")
    if kind == "disk":
        return ShadowRegion("box", dim, (0.0,) * dim, (1.0,) * dim)
    if kind == "polydisc":
        return ShadowRegion("box", dim, (0.0,) * dim, (1.0,) * dim)
    if kind == "poly-annulus":
        inner, outer = float(data.get("inner", 0.5)), float(data.get("outer", 1.0))
        return ShadowRegion("box", dim, (inner,) * dim, (outer,) * dim)
    if kind == "hartogs":
        kind = "ordered-simplex"
    if kind == "box":
        return ShadowRegion("box", dim, tuple(map(float, data["lower"])), tuple(map(float, data["upper"])))
    if kind in ("ball", "ordered-simplex"):
        return ShadowRegion(kind, dim)
    raise PreconditionError(f"cannot build shadow of kind {kind!r} from JSON")


def weight_from_json(data: dict | None) -> WeightSpec:
    if not data:
        return WeightSpec()
    kind = data.get("kind", "constant")
    if kind == "constant":
        return WeightSpec("constant", value=float(data.get("value", 1.0)))
    if kind == "radial-power":
        return WeightSpec("radial-power", exponents=tuple(float(s) for s in data["exponents"]))
    raise PreconditionError(f"cannot build weight of kind {kind!r} from JSON")


def domain_from_json(data: dict) -> DomainSpec:
    try:
        dim = int(data["dim"])
        shadow = shadow_from_json(data["shadow"], dim)
        weight = weight_from_json(data.get("weight"))
        return DomainSpec(str(data.get("name", data["shadow"]["kind"])), shadow, weight)
    except (KeyError, TypeError) as exc:
        raise PreconditionError(f"malformed domain JSON: {exc}") from exc


# -- operations ---------------------------------------------------------------

def shadow_contains(domain: DomainSpec, r) -> bool | np.ndarray:
    """Exact shadow membership; scalar for one vector, array for many."""
    arr = np.asarray(r, dtype=float)
    single = arr.ndim == 0 or (arr.ndim == 1 and (domain.dim > 1 or arr.size == 1))
    if single and arr.size != domain.dim:
        raise DimensionMismatch(f"expected {domain.dim} radii")
    out = domain.shadow.contains(arr)
    return bool(out[0]) if single else out


def tilde_shadow_contains(domain: DomainSpec, s, resolution: int = 64,
                          max_resolution: int = 1024) -> bool | np.ndarray:
    arr = np.asarray(s, dtype=float)
    single = arr.ndim <= 1 and (arr.size == domain.dim)
    out = domain.shadow.tilde_contains(arr, resolution, max_resolution)
    return bool(out[0]) if single else out


def contains_point(domain: DomainSpec, z) -> bool:
    return shadow_contains(domain, np.abs(np.asarray(z, dtype=complex)).reshape(domain.dim))


def _core_radii(shadow: ShadowRegion, u: np.ndarray, core: float) -> np.ndarray:
    if core >= 1.0:
        r, _ = shadow.parametrize(u)
        return r
    if shadow.kind == "ball":
        r, _ = shadow.parametrize(u)
        return core * r
    if shadow.kind == "ordered-simplex":
        r, _ = shadow.parametrize(core * u)
        return r
    lo, hi = shadow.bounding_box
    # axes starting at 0 shrink towards 0, others towards their midpoint
    start = np.where(lo == 0, 0.0, 0.5 * (1.0 - core))
    r, _ = shadow.parametrize(start + core * u)
    return r


def sample_domain(domain: DomainSpec, count: int, seed: int = 0, core: float = 1.0) -> np.ndarray:
    """Seeded points of the domain as a ``(count, dim)`` complex array.

    Radii are drawn through the shadow's unit-box parametrisation, phases are
    uniform.  ``core < 1`` restricts radii to a compact subset that shrinks
    with ``core``, which keeps kernel series well inside their region of
    convergence.
    """
    if count < 1:
        raise PreconditionError("count must be >= 1")
    if not 0 < core <= 1:
        raise PreconditionError("core must lie in (0, 1]")
    rng = np.random.default_rng(seed)
    shadow = domain.shadow
    out = np.empty((0, domain.dim))
    # rejection only matters for custom shadows
    while len(out) < count:
        u = rng.random((max(count, 16) * 2, domain.dim))
        r = _core_radii(shadow, u, core)
        r = r[shadow.contains(r)]
        out = np.vstack([out, r])
    r = out[:count]
    theta = rng.uniform(0.0, 2 * np.pi, size=r.shape)
    return r * np.exp(1j * theta)
