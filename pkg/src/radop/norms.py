"""Monomial norms ``||e_alpha||^2`` and coordinate-functional norms.

Bergman spaces use the unnormalised volume measure (``||1||^2 = pi`` on the
disk).  The Hardy and Dirichlet spaces of the disk use area measure
normalised to mass one, so ``||z^m||^2`` is ``1`` (Hardy) and ``max(m, 1)``
(Dirichlet).

Closed forms are available for constant weights on boxes, balls and
ordered simplices, and for ``prod (1 - r_j^2)^{s_j}`` on the unit polydisc.
Everything else goes through shadow quadrature and is cached on disk.
"""

from __future__ import annotations

import hashlib
import json
import logging
import os
import tempfile
import threading
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable

import numpy as np
from scipy.special import betaln, gammaln

from .errors import (DimensionMismatch, NotAllowable, NumericFailure, PreconditionError,
                     QuadratureFailure, UndecidableFiniteness)
from .geometry import DomainSpec, domain_from_json
from .lattice import IndexSet, MultiIndex, as_index
from .quadrature import _gauss01, _tensor, integrate_shadow

log = logging.getLogger(__name__)

CACHE_ENV = "RADOP_CACHE_DIR"


def _rows(alphas, dim: int) -> np.ndarray:
    arr = np.asarray(alphas, dtype=np.int64)
    if arr.ndim == 1:
        arr = arr.reshape(1, -1) if dim > 1 else arr.reshape(-1, 1)
    if arr.shape[-1] != dim:
        raise DimensionMismatch(f"multi-indices must have length {dim}")
    return arr


class _Space:
    kind: str
    dim: int

    def to_json(self) -> dict:
        raise NotImplementedError

    @property
    def fingerprint(self) -> str:
        text = json.dumps(self.to_json(), sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(text.encode()).hexdigest()[:32]

    def allowable_mask(self, alphas) -> np.ndarray:
        raise NotImplementedError

    def log_norm_sq_array(self, alphas) -> np.ndarray:
        """``log ||e_alpha||^2`` per row; ``+inf`` where not allowable."""
        raise NotImplementedError

    def has_closed_form(self) -> bool:
        return True

    def is_allowable(self, alpha) -> bool:
        return bool(self.allowable_mask(_rows([as_index(alpha)], self.dim))[0])


class HardySpace(_Space):
    kind = "hardy-disk"
    dim = 1

    def to_json(self) -> dict:
        return {"kind": self.kind, "dim": 1}

    def allowable_mask(self, alphas) -> np.ndarray:
        return _rows(alphas, 1)[:, 0] >= 0

    def log_norm_sq_array(self, alphas) -> np.ndarray:
        m = _rows(alphas, 1)[:, 0]
        return np.where(m >= 0, 0.0, np.inf)

    def __repr__(self) -> str:
        return "HardySpace()"


class DirichletSpace(_Space):
    kind = "dirichlet-disk"
    dim = 1

    def to_json(self) -> dict:
        return {"kind": self.kind, "dim": 1}

    def allowable_mask(self, alphas) -> np.ndarray:
        return _rows(alphas, 1)[:, 0] >= 0

    def log_norm_sq_array(self, alphas) -> np.ndarray:
        m = _rows(alphas, 1)[:, 0]
        out = np.log(np.maximum(m, 1).astype(float))
        return np.where(m >= 0, out, np.inf)

    def __repr__(self) -> str:
        return "DirichletSpace()"


class BergmanSpace(_Space):
    """Weighted Bergman space ``A^2(domain, weight)``.

    ``divergence_factor`` and ``stabilization`` steer the numeric finiteness
    test used when no closed-form rule applies; ``rel_tol`` and ``budget``
    steer numeric norm quadrature.
    """

    kind = "bergman"

    def __init__(self, domain: DomainSpec, *, rel_tol: float = 1e-10, budget: int = 10**7,
                 divergence_factor: float = 1e8, stabilization: float = 1e-8, levels: int | None = None):
        self.domain = domain
        self.rel_tol = rel_tol
        self.budget = budget
        self.divergence_factor = divergence_factor
        self.stabilization = stabilization
        self.levels = levels if levels is not None else (48 if domain.dim <= 2 else 20)
        self._numeric: dict[MultiIndex, tuple[float, float]] = {}
        self._finite: dict[MultiIndex, bool] = {}
        self.evaluations = 0

    @property
    def dim(self) -> int:
        return self.domain.dim

    @property
    def weight(self):
        return self.domain.weight

    def __repr__(self) -> str:
        return f"BergmanSpace({self.domain.name}, dim={self.dim}, weight={self.weight.kind})"

    def to_json(self) -> dict:
        if self.domain.shadow.kind == "custom" or self.weight.kind == "custom":
            return {"kind": "bergman", "name": self.domain.name, "dim": self.dim, "custom": True}
        out = {"kind": "bergman"}
        out.update(self.domain.to_json())
        return out

    # -- closed forms -------------------------------------------------------

    def _closed_kind(self) -> str | None:
        shadow, w = self.domain.shadow, self.weight
        if shadow.kind == "custom" or w.kind == "custom":
            return None
        if w.kind == "constant":
            return shadow.kind
        lo, hi = shadow.bounding_box
        if shadow.kind == "box" and np.all(lo == 0) and np.all(hi == 1):
            return "unit-box-power"
        return None

    def has_closed_form(self) -> bool:
        return self._closed_kind() is not None

    def _rule_mask(self, arr: np.ndarray) -> np.ndarray | None:
        shadow = self.domain.shadow
        if shadow.kind == "custom" or self.weight.kind == "custom":
            return None
        if shadow.kind == "box":
            return np.all((arr >= 0) | ~shadow.touches_zero(), axis=1)
        if shadow.kind == "ball":
            return np.all(arr >= 0, axis=1)
        # ordered simplex: partial sums S_k satisfy S_k + k > 0
        partial = np.cumsum(arr, axis=1) + np.arange(1, self.dim + 1)
        return np.all(partial > 0, axis=1)

    def _closed_log(self, arr: np.ndarray) -> np.ndarray:
        kind = self._closed_kind()
        n = self.dim
        out = np.full(len(arr), np.inf)
        ok = self._rule_mask(arr)
        a = arr[ok].astype(float)
        if kind == "box":
            lo, hi = self.domain.shadow.bounding_box
            total = np.zeros(len(a))
            for j in range(n):
                total += _annulus_axis_log(a[:, j], lo[j], hi[j])
            vals = total + np.log(self.weight.value)
        elif kind == "ball":
            vals = (n * np.log(np.pi) + np.sum(gammaln(a + 1), axis=1)
                    - gammaln(n + a.sum(axis=1) + 1) + np.log(self.weight.value))
        elif kind == "ordered-simplex":
            partial = np.cumsum(a, axis=1) + np.arange(1, n + 1)
            vals = n * np.log(np.pi) - np.sum(np.log(partial), axis=1) + np.log(self.weight.value)
        else:
            s = np.asarray(self.weight.exponents, float)
            vals = np.sum(np.log(np.pi) + betaln(a + 1, s + 1), axis=1)
        out[ok] = vals
        return out

    # -- numeric route ------------------------------------------------------

    def allowable_mask(self, alphas) -> np.ndarray:
        arr = _rows(alphas, self.dim)
        mask = self._rule_mask(arr)
        if mask is not None:
            return mask
        return np.array([self.numeric_finite(tuple(int(v) for v in row)) for row in arr], dtype=bool)

    def numeric_finite(self, alpha) -> bool:
        """Decide finiteness of ``||e_alpha||`` by exhausting the shadow.

        Axes whose shadow reaches 0 are cut into dyadic layers
        ``[2^{-k-1} b, 2^{-k} b]``; the partial integrals over the first
        ``k`` layers are compared as ``k`` grows.
        """
        alpha = as_index(alpha)
        if alpha in self._finite:
            return self._finite[alpha]
        shadow, n = self.domain.shadow, self.dim
        lo, hi = shadow.bounding_box
        zero_axes = shadow.touches_zero()
        levels = self.levels
        x, w = _gauss01(8)
        two_a = 2.0 * np.asarray(alpha, float)

        def integrand(r):
            with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
                vals = np.prod(r ** (two_a + 1.0), axis=1) * self.weight(r)
            return np.where(shadow.contains(r), vals, 0.0)

        panels = []
        for j in range(n):
            if zero_axes[j]:
                edges = hi[j] * 2.0 ** -np.arange(levels + 1, dtype=float)
                panels.append([(edges[k + 1], edges[k]) for k in range(levels)])
            else:
                panels.append([(lo[j], hi[j])])
        shape = tuple(len(p) for p in panels)
        q = len(x)
        nodes_1d, weights_1d = [], []
        for j in range(n):
            a = np.array([p[0] for p in panels[j]])[:, None]
            b = np.array([p[1] for p in panels[j]])[:, None]
            nodes_1d.append((a + (b - a) * x[None, :]).ravel())
            weights_1d.append(((b - a) * w[None, :]).ravel())
        nodes, weights = _tensor(nodes_1d, weights_1d)
        vals = (weights * integrand(nodes)).reshape(sum(((L, q) for L in shape), ()))
        # sum the Gauss points inside each panel, keeping one axis per panel index
        contrib = vals.sum(axis=tuple(range(1, 2 * n, 2)))
        self.evaluations += contrib.size * len(x) ** n
        level_of = np.zeros(shape, dtype=int)
        for j in range(n):
            if zero_axes[j]:
                level_of = np.maximum(level_of, np.arange(shape[j]).reshape([-1 if k == j else 1 for k in range(n)]))
        partial = np.cumsum(np.bincount(level_of.ravel(), weights=contrib.ravel(), minlength=levels))
        if not np.all(np.isfinite(partial)):
            return self._remember(alpha, False)
        if not zero_axes.any():
            return self._remember(alpha, True)
        nonzero = np.flatnonzero(partial > 0)
        if len(nonzero) == 0:
            raise UndecidableFiniteness(f"integrand vanishes on every layer for {alpha}")
        base = partial[nonzero[0]]
        increments = np.diff(partial)
        for k in range(1, len(partial)):
            if partial[k] > self.divergence_factor * base:
                return self._remember(alpha, False)
            inc = increments[k - 1]
            if k >= 6:
                prev = increments[k - 6:k - 1]
                ratios = increments[k - 5:k] / np.where(prev > 0, prev, np.inf)
                if inc <= self.stabilization * partial[k] and ratios[-1] < 0.9:
                    return self._remember(alpha, True)
                if np.all(ratios >= 0.9) and inc > self.stabilization * partial[k]:
                    return self._remember(alpha, False)
        raise UndecidableFiniteness(
            f"could not certify convergence or divergence of ||e_{alpha}|| within {levels} layers; "
            "supply a closed-form finiteness rule")

    def _remember(self, alpha, value: bool) -> bool:
        self._finite[alpha] = value
        return value

    def quadrature_norm_sq(self, alpha, rel_tol: float | None = None) -> tuple[float, float, int]:
        """``(2 pi)^n * integral of r^{2 alpha} prod r_j w(r) dr`` by quadrature.

        Returns ``(value, error_estimate, evaluations)``.
        """
        alpha = as_index(alpha)
        two_a = 2.0 * np.asarray(alpha, float)

        def integrand(r):
            return np.prod(r ** (two_a + 1.0), axis=1) * self.weight(r)

        try:
            rep = integrate_shadow(integrand, self.domain, weight=self.weight,
                                   rel_tol=rel_tol or self.rel_tol, budget=self.budget)
        except NumericFailure as exc:
            raise QuadratureFailure(f"norm quadrature failed for alpha={alpha}: {exc}") from exc
        scale = (2.0 * np.pi) ** self.dim
        return scale * float(np.real(rep.value)), scale * rep.error_estimate, rep.evaluations

    def log_norm_sq_array(self, alphas) -> np.ndarray:
        arr = _rows(alphas, self.dim)
        if self.has_closed_form():
            return self._closed_log(arr)
        out = np.full(len(arr), np.inf)
        mask = self.allowable_mask(arr)
        for i in np.flatnonzero(mask):
            key = tuple(int(v) for v in arr[i])
            if key not in self._numeric:
                value, err, evals = self.quadrature_norm_sq(key)
                self.evaluations += evals
                self._numeric[key] = (value, err)
            out[i] = np.log(self._numeric[key][0])
        return out


def _annulus_axis_log(m: np.ndarray, a: float, b: float) -> np.ndarray:
    """``log(2 pi * integral_a^b r^{2m+1} dr)`` elementwise."""
    p = 2.0 * m + 2.0
    out = np.empty_like(m)
    pos, neg, zero = p > 0, p < 0, p == 0
    with np.errstate(divide="ignore"):
        ratio = a / b
        out[pos] = (np.log(np.pi) + p[pos] * np.log(b) + np.log1p(-ratio ** p[pos])
                    - np.log(m[pos] + 1.0))
        if np.any(neg):
            inv = b / a
            out[neg] = (np.log(np.pi) + p[neg] * np.log(a) + np.log1p(-inv ** p[neg])
                        - np.log(-(m[neg] + 1.0)))
    if np.any(zero):
        out[zero] = np.log(2.0 * np.pi * np.log(b / a))
    return out


Space = _Space


def bergman(domain: DomainSpec, **kwargs) -> BergmanSpace:
    return BergmanSpace(domain, **kwargs)


def space_from_json(data: dict) -> _Space:
    kind = data.get("kind", "bergman")
    if kind == "hardy-disk":
        return HardySpace()
    if kind == "dirichlet-disk":
        return DirichletSpace()
    if kind != "bergman":
        raise PreconditionError(f"unknown space kind {kind!r}")
    return BergmanSpace(domain_from_json(data))


# -- per-index operations -----------------------------------------------------

def monomial_norm_sq(space: _Space, alpha) -> float:
    """``||e_alpha||^2`` in ``space``; raises ``NotAllowable`` off the allowable set."""
    alpha = as_index(alpha)
    if len(alpha) != space.dim:
        raise DimensionMismatch(f"alpha must have length {space.dim}")
    if not space.is_allowable(alpha):
        raise NotAllowable(f"e_{alpha} is not square integrable")
    return float(np.exp(space.log_norm_sq_array([alpha])[0]))


def coordinate_norm_sq(space: _Space, alpha) -> float:
    """``||c_alpha||^2 = 1 / ||e_alpha||^2``."""
    return 1.0 / monomial_norm_sq(space, alpha)


# -- tables and cache -----------------------------------------------------------

@dataclass
class MonomialNormTable:
    fingerprint: str
    entries: dict[MultiIndex, float] = field(default_factory=dict)
    provenance: dict[MultiIndex, tuple[str, float]] = field(default_factory=dict)
    evaluations: int = 0

    def __getitem__(self, alpha) -> float:
        return self.entries[as_index(alpha)]

    def __contains__(self, alpha) -> bool:
        return as_index(alpha) in self.entries

    def __len__(self) -> int:
        return len(self.entries)

    def coordinate_norm_sq(self, alpha) -> float:
        return 1.0 / self[alpha]

    def to_json(self) -> dict:
        return {
            "fingerprint": self.fingerprint,
            "entries": [[list(a), float(v), list(self.provenance.get(a, ("closed-form", 0.0)))]
                        for a, v in sorted(self.entries.items(), key=lambda kv: (max(map(abs, kv[0])), kv[0]))],
        }

    @classmethod
    def from_json(cls, data: dict) -> "MonomialNormTable":
        table = cls(str(data["fingerprint"]))
        for alpha, value, prov in data["entries"]:
            key = as_index(alpha)
            table.entries[key] = float(value)
            table.provenance[key] = (str(prov[0]), float(prov[1]))
        return table


class NormCache:
    """JSON file per space fingerprint under ``RADOP_CACHE_DIR``.

    Unreadable or mismatched files are ignored.  Writes go through one lock
    and an atomic rename.
    """

    _lock = threading.Lock()

    def __init__(self, directory: str | os.PathLike | None = None):
        if directory is None:
            directory = os.environ.get(CACHE_ENV) or Path.home() / ".cache" / "radop"
        self.directory = Path(directory)

    def path(self, fingerprint: str) -> Path:
        return self.directory / f"{fingerprint}.json"

    def load(self, fingerprint: str) -> MonomialNormTable:
        path = self.path(fingerprint)
        try:
            table = MonomialNormTable.from_json(json.loads(path.read_text()))
        except FileNotFoundError:
            return MonomialNormTable(fingerprint)
        except (ValueError, KeyError, TypeError, IndexError):
            log.warning("discarding corrupt norm cache %s", path)
            return MonomialNormTable(fingerprint)
        if table.fingerprint != fingerprint:
            log.warning("discarding mismatched norm cache %s", path)
            return MonomialNormTable(fingerprint)
        bad = [a for a, v in table.entries.items() if not (np.isfinite(v) and v > 0)]
        for a in bad:
            del table.entries[a]
            table.provenance.pop(a, None)
        return table

    def store(self, table: MonomialNormTable) -> None:
        with self._lock:
            current = self.load(table.fingerprint)
            current.entries.update(table.entries)
            current.provenance.update(table.provenance)
            self.directory.mkdir(parents=True, exist_ok=True)
            fd, tmp = tempfile.mkstemp(dir=self.directory, suffix=".tmp")
            with os.fdopen(fd, "w") as fh:
                json.dump(current.to_json(), fh, sort_keys=True)
            os.replace(tmp, self.path(table.fingerprint))

    def clear(self) -> int:
        removed = 0
        if self.directory.exists():
            for p in self.directory.glob("*.json"):
                p.unlink()
                removed += 1
        return removed


def build_norm_table(space: _Space, index_set: IndexSet | Iterable, cache: NormCache | None = None
                     ) -> MonomialNormTable:
    """Norm table for every index of ``index_set``.

    Closed-form entries are computed directly.  Quadrature entries are looked
    up in ``cache`` first and written back afterwards; ``evaluations``
    counts quadrature evaluations performed by this call.
    """
    if not isinstance(index_set, IndexSet):
        index_set = IndexSet(space.dim, index_set)
    if index_set.dimension != space.dim:
        raise DimensionMismatch("index set and space dimensions differ")
    fingerprint = space.fingerprint
    table = MonomialNormTable(fingerprint)
    arr = index_set.array()
    mask = space.allowable_mask(arr) if len(arr) else np.zeros(0, bool)
    if not np.all(mask):
        bad = tuple(int(v) for v in arr[np.flatnonzero(~mask)[0]])
        raise NotAllowable(f"index {bad} is not allowable for {space!r}")
    if space.has_closed_form():
        values = np.exp(space.log_norm_sq_array(arr))
        for a, v in zip(index_set, values):
            table.entries[a] = float(v)
            table.provenance[a] = ("closed-form", 0.0)
        return table
    cached = cache.load(fingerprint) if cache is not None else MonomialNormTable(fingerprint)
    for a in index_set:
        if a in cached.entries:
            table.entries[a] = cached.entries[a]
            table.provenance[a] = cached.provenance.get(a, ("quadrature", 0.0))
            continue
        try:
            value, err, evals = space.quadrature_norm_sq(a)
        except NumericFailure as exc:
            raise QuadratureFailure(f"norm table entry {a} failed: {exc}") from exc
        table.evaluations += evals
        table.entries[a] = value
        table.provenance[a] = ("quadrature", err)
    if cache is not None and table.evaluations:
        cache.store(table)
    return table
