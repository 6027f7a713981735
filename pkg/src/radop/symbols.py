"""Bounded symbol sequences on the lattice and their pointwise algebra.

A radial operator is diagonal on monomials, so it is fully described by the
sequence of its eigenvalues; that sequence is the symbol.  Three kinds
exist: ``finite`` (explicit map, zero elsewhere), ``closed-form``
(vectorised evaluator plus decay metadata) and ``sampled`` (values on an
index set with a zero or error extension).
"""

from __future__ import annotations

import json
from typing import Callable, Iterable, NamedTuple, Optional

import numpy as np

from .errors import IncompatibleIndexSets, OutOfRange, PreconditionError
from .lattice import IndexSet, MultiIndex, as_index, canonical_key

VANISHING = "vanishing-at-infinity"
NO_DECAY = "bounded-no-decay"
UNKNOWN = "unknown"
DECAY_CLASSES = (VANISHING, NO_DECAY, UNKNOWN)


class SupNorm(NamedTuple):
    value: float
    exact: bool


def _rows(alphas, dim: int) -> np.ndarray:
    arr = np.asarray(alphas, dtype=np.int64)
    if arr.ndim == 1:
        arr = arr.reshape(1, -1) if dim > 1 else arr.reshape(-1, 1)
    if arr.shape[-1] != dim:
        raise IncompatibleIndexSets(f"expected multi-indices of length {dim}")
    return arr


def _probe_array(probe, dim: int) -> np.ndarray:
    if isinstance(probe, IndexSet):
        if probe.dimension != dim:
            raise IncompatibleIndexSets("probe dimension differs from symbol dimension")
        return probe.array()
    return _rows(probe, dim)


class Symbol:
    kind: str = "abstract"
    dim: int
    decay: str

    def values(self, alphas) -> np.ndarray:
        """Symbol values for the rows of an ``(M, n)`` integer array."""
        raise NotImplementedError

    def __call__(self, alpha) -> complex:
        return complex(self.values(_rows([as_index(alpha)], self.dim))[0])

    @property
    def finite_support(self) -> Optional[tuple[MultiIndex, ...]]:
        """Indices outside which the symbol is zero, when that set is finite."""
        return None

    def defined_on(self) -> Optional[IndexSet]:
        """Index set the symbol is restricted to, or ``None`` if defined everywhere."""
        return None

    def to_json(self) -> dict:
        raise NotImplementedError


def _cplx(v) -> list[float]:
    v = complex(v)
    return [v.real, v.imag]


def _parse_cplx(v) -> complex:
    if isinstance(v, (list, tuple)):
        return complex(float(v[0]), float(v[1]))
    return complex(v)


class FiniteSymbol(Symbol):
    kind = "finite"

    def __init__(self, dim: int, entries: dict | Iterable = ()):
        self.dim = dim
        items = entries.items() if isinstance(entries, dict) else entries
        self.entries: dict[MultiIndex, complex] = {}
        for a, v in items:
            a = as_index(a)
            if len(a) != dim:
                raise IncompatibleIndexSets(f"index {a} does not have dimension {dim}")
            v = complex(v)
            if v != 0:
                self.entries[a] = v
        self.decay = VANISHING

    def values(self, alphas) -> np.ndarray:
        arr = _rows(alphas, self.dim)
        return np.array([self.entries.get(tuple(int(x) for x in row), 0j) for row in arr], dtype=complex)

    @property
    def finite_support(self):
        return tuple(sorted(self.entries, key=canonical_key))

    def __repr__(self) -> str:
        return f"FiniteSymbol(dim={self.dim}, entries={dict(sorted(self.entries.items()))})"

    def to_json(self) -> dict:
        return {"kind": "finite", "dim": self.dim, "decay": self.decay,
                "entries": [[list(a), _cplx(self.entries[a])] for a in self.finite_support]}


class ClosedFormSymbol(Symbol):
    """Symbol given by a vectorised evaluator.

    ``func`` receives an ``(M, n)`` int array and returns ``M`` values.
    ``bound``, when given, is a declared upper bound of ``|symbol|`` over the
    whole lattice; sup-norms reaching it are reported exact.
    """

    kind = "closed-form"

    def __init__(self, dim: int, func: Callable[[np.ndarray], np.ndarray], decay: str = UNKNOWN,
                 bound: float | None = None, name: str = "closed-form", params: dict | None = None):
        if decay not in DECAY_CLASSES:
            raise PreconditionError(f"unknown decay class {decay!r}")
        self.dim = dim
        self.func = func
        self.decay = decay
        self.bound = bound
        self.name = name
        self.params = params or {}

    @classmethod
    def from_scalar(cls, dim: int, f: Callable[[MultiIndex], complex], **kwargs) -> "ClosedFormSymbol":
        """Wrap a per-index function ``f(alpha_tuple)`` (or ``f(m)`` when ``dim == 1``)."""
        def func(arr):
            if dim == 1:
                return np.array([f(int(row[0])) for row in arr], dtype=complex)
            return np.array([f(tuple(int(x) for x in row)) for row in arr], dtype=complex)
        return cls(dim, func, **kwargs)

    def values(self, alphas) -> np.ndarray:
        arr = _rows(alphas, self.dim)
        return np.asarray(self.func(arr), dtype=complex).reshape(len(arr))

    def __repr__(self) -> str:
        return f"ClosedFormSymbol({self.name}, dim={self.dim}, decay={self.decay})"

    def to_json(self) -> dict:
        if self.name not in BUILTINS:
            raise PreconditionError(f"closed-form symbol {self.name!r} is not a named builtin")
        return {"kind": "builtin", "name": self.name, "dim": self.dim, "params": self.params,
                "decay": self.decay}


class SampledSymbol(Symbol):
    """Values on an index set; outside it either zero or an error."""

    kind = "sampled"

    def __init__(self, index_set: IndexSet, values, extension: str = "zero"):
        if extension not in ("zero", "error"):
            raise PreconditionError("extension must be 'zero' or 'error'")
        values = np.asarray(values, dtype=complex).reshape(-1)
        if len(values) != len(index_set):
            raise PreconditionError("one value per index is required")
        self.dim = index_set.dimension
        self.index_set = index_set
        self._values = values
        self.extension = extension
        self.decay = VANISHING if extension == "zero" else UNKNOWN

    @classmethod
    def from_sequence(cls, values, start: int = 0, extension: str = "zero") -> "SampledSymbol":
        values = list(values)
        return cls(IndexSet.range(start + len(values), start), values, extension)

    def values(self, alphas) -> np.ndarray:
        arr = _rows(alphas, self.dim)
        out = np.zeros(len(arr), dtype=complex)
        for i, row in enumerate(arr):
            key = tuple(int(x) for x in row)
            if key in self.index_set:
                out[i] = self._values[self.index_set.rank(key)]
            elif self.extension == "error":
                raise OutOfRange(f"{key} lies outside the sampled index set")
        return out

    @property
    def finite_support(self):
        if self.extension == "zero":
            return tuple(a for a, v in zip(self.index_set, self._values) if v != 0)
        return None

    def defined_on(self):
        return self.index_set if self.extension == "error" else None

    def __repr__(self) -> str:
        return f"SampledSymbol(n={len(self.index_set)}, extension={self.extension})"

    def to_json(self) -> dict:
        return {"kind": "sampled", "dim": self.dim, "extension": self.extension, "decay": self.decay,
                "indices": [list(a) for a in self.index_set],
                "values": [_cplx(v) for v in self._values]}


# -- builtins ------------------------------------------------------------------

def _l1(arr: np.ndarray) -> np.ndarray:
    return np.abs(arr).sum(axis=1)


def one(dim: int = 1) -> ClosedFormSymbol:
    """Constant 1 (the identity operator)."""
    return ClosedFormSymbol(dim, lambda a: np.ones(len(a), complex), NO_DECAY, 1.0, "one")


def constant(c: complex, dim: int = 1) -> Symbol:
    c = complex(c)
    if c == 0:
        return FiniteSymbol(dim)
    return ClosedFormSymbol(dim, lambda a: np.full(len(a), c, complex), NO_DECAY, abs(c),
                            "constant", {"value": _cplx(c)})


def reciprocal_succ(dim: int = 1) -> ClosedFormSymbol:
    """``1 / (1 + |alpha|_1)``; ``1/(m+1)`` in one variable."""
    return ClosedFormSymbol(dim, lambda a: 1.0 / (1.0 + _l1(a)) + 0j, VANISHING, 1.0, "reciprocal-succ")


def reciprocal(dim: int = 1) -> ClosedFormSymbol:
    """``1 / |alpha|_1`` off the origin, ``0`` at the origin."""
    def func(a):
        s = _l1(a).astype(float)
        return np.where(s > 0, 1.0 / np.where(s > 0, s, 1.0), 0.0) + 0j
    return ClosedFormSymbol(dim, func, VANISHING, 1.0, "reciprocal")


def geometric(base: complex, dim: int = 1) -> ClosedFormSymbol:
    """``base ** |alpha|_1`` for ``|base| <= 1`` (``i**m`` for ``base=1j``)."""
    base = complex(base)
    if abs(base) > 1:
        raise PreconditionError("geometric symbols need |base| <= 1 to stay bounded")

    def func(a):
        return np.array([base ** int(k) for k in _l1(a)], dtype=complex)

    decay = VANISHING if abs(base) < 1 else NO_DECAY
    return ClosedFormSymbol(dim, func, decay, 1.0, "geometric", {"base": _cplx(base)})


def indicator(subset: Iterable, dim: int | None = None) -> FiniteSymbol:
    """``chi_E`` for a finite set ``E``."""
    items = [as_index(a) for a in subset]
    if dim is None:
        if not items:
            raise PreconditionError("empty subset needs an explicit dimension")
        dim = len(items[0])
    return FiniteSymbol(dim, {a: 1.0 for a in items})


BUILTINS = {
    "one": lambda dim, p: one(dim),
    "constant": lambda dim, p: constant(_parse_cplx(p.get("value", 1.0)), dim),
    "reciprocal-succ": lambda dim, p: reciprocal_succ(dim),
    "reciprocal": lambda dim, p: reciprocal(dim),
    "geometric": lambda dim, p: geometric(_parse_cplx(p.get("base", 0.5)), dim),
    "indicator": lambda dim, p: indicator(p.get("subset", []), dim),
}


def builtin(name: str, dim: int = 1, **params) -> Symbol:
    try:
        factory = BUILTINS[name]
    except KeyError:
        raise PreconditionError(f"unknown builtin symbol {name!r}; choose from {sorted(BUILTINS)}") from None
    return factory(dim, params)


def symbol_from_json(data: dict | str) -> Symbol:
    if isinstance(data, str):
        data = json.loads(data)
    kind = data.get("kind")
    dim = int(data.get("dim", 1))
    try:
        if kind == "finite":
            return FiniteSymbol(dim, [(a, _parse_cplx(v)) for a, v in data["entries"]])
        if kind == "sampled":
            if "indices" in data:
                idx = IndexSet(dim, data["indices"])
                # values follow the listed order, which may differ from canonical order
                lookup = {as_index(a): _parse_cplx(v) for a, v in zip(data["indices"], data["values"])}
                vals = [lookup[a] for a in idx]
            else:
                start = int(data.get("start", 0))
                vals = [_parse_cplx(v) for v in data["values"]]
                idx = IndexSet.range(start + len(vals), start)
            return SampledSymbol(idx, vals, data.get("extension", "zero"))
        if kind == "builtin":
            sym = builtin(data["name"], dim, **data.get("params", {}))
            if "decay" in data and isinstance(sym, ClosedFormSymbol):
                sym.decay = data["decay"]
            return sym
    except (KeyError, TypeError, ValueError) as exc:
        raise PreconditionError(f"malformed symbol JSON: {exc}") from exc
    raise PreconditionError(f"unknown symbol kind {kind!r}")


# -- operations ----------------------------------------------------------------

def symbol_value(s: Symbol, alpha) -> complex:
    return s(alpha)


def _check_compatible(s1: Symbol, s2: Symbol) -> None:
    if s1.dim != s2.dim:
        raise IncompatibleIndexSets(f"symbols live on Z^{s1.dim} and Z^{s2.dim}")
    d1, d2 = s1.defined_on(), s2.defined_on()
    if d1 is not None and d2 is not None and d1 != d2:
        raise IncompatibleIndexSets("sampled symbols with error extension need identical index sets")


def _combine_decay(d1: str, d2: str, op: str) -> str:
    if op == "mul":
        if VANISHING in (d1, d2):
            return VANISHING
        return UNKNOWN
    if d1 == d2 == VANISHING:
        return VANISHING
    if {d1, d2} == {VANISHING, NO_DECAY}:
        return NO_DECAY
    return UNKNOWN


def _combine(s1: Symbol, s2: Symbol, op: str) -> Symbol:
    _check_compatible(s1, s2)
    f = np.multiply if op == "mul" else np.add
    restricted = s1.defined_on() or s2.defined_on()
    if restricted is not None:
        arr = restricted.array()
        return SampledSymbol(restricted, f(s1.values(arr), s2.values(arr)), "error")
    sup1, sup2 = s1.finite_support, s2.finite_support
    if op == "mul" and (sup1 is not None or sup2 is not None):
        support = set(sup1 if sup1 is not None else sup2)
        if sup1 is not None and sup2 is not None:
            support = set(sup1) & set(sup2)
        support = sorted(support, key=canonical_key)
        arr = np.array(support, dtype=np.int64).reshape(len(support), s1.dim)
        return FiniteSymbol(s1.dim, zip(support, f(s1.values(arr), s2.values(arr))))
    if op == "add" and sup1 is not None and sup2 is not None:
        support = sorted(set(sup1) | set(sup2), key=canonical_key)
        arr = np.array(support, dtype=np.int64).reshape(len(support), s1.dim)
        return FiniteSymbol(s1.dim, zip(support, f(s1.values(arr), s2.values(arr))))
    b1, b2 = getattr(s1, "bound", None), getattr(s2, "bound", None)
    origin = [(0,) * s1.dim]
    if sup1 is not None:
        b1 = sup_norm(s1, origin).value
    if sup2 is not None:
        b2 = sup_norm(s2, origin).value
    bound = None
    if b1 is not None and b2 is not None:
        bound = b1 * b2 if op == "mul" else b1 + b2
    return ClosedFormSymbol(s1.dim, lambda a: f(s1.values(a), s2.values(a)),
                            _combine_decay(s1.decay, s2.decay, op), bound,
                            f"({getattr(s1, 'name', s1.kind)} {'*' if op == 'mul' else '+'} "
                            f"{getattr(s2, 'name', s2.kind)})")


def pointwise_product(s1: Symbol, s2: Symbol) -> Symbol:
    return _combine(s1, s2, "mul")


def pointwise_sum(s1: Symbol, s2: Symbol) -> Symbol:
    return _combine(s1, s2, "add")


def conjugate(s: Symbol) -> Symbol:
    if isinstance(s, FiniteSymbol):
        return FiniteSymbol(s.dim, {a: v.conjugate() for a, v in s.entries.items()})
    if isinstance(s, SampledSymbol):
        return SampledSymbol(s.index_set, np.conj(s._values), s.extension)
    name = getattr(s, "name", s.kind)
    return ClosedFormSymbol(s.dim, lambda a: np.conj(s.values(a)), s.decay,
                            getattr(s, "bound", None), f"conj({name})")


def scale(c: complex, s: Symbol) -> Symbol:
    c = complex(c)
    if c == 0:
        return FiniteSymbol(s.dim)
    if isinstance(s, FiniteSymbol):
        return FiniteSymbol(s.dim, {a: c * v for a, v in s.entries.items()})
    if isinstance(s, SampledSymbol):
        return SampledSymbol(s.index_set, c * s._values, s.extension)
    bound = getattr(s, "bound", None)
    return ClosedFormSymbol(s.dim, lambda a: c * s.values(a), s.decay,
                            None if bound is None else abs(c) * bound, f"{c}*{getattr(s, 'name', s.kind)}")


def sup_norm(s: Symbol, probe) -> SupNorm:
    """``sup |s|`` with a flag telling whether the value is exact.

    Finite and sampled symbols are exact.  Closed-form symbols take the
    maximum over ``probe`` and are exact only when it reaches the declared
    bound; otherwise the value is a lower bound.
    """
    if isinstance(s, FiniteSymbol):
        return SupNorm(float(np.max(np.abs(np.array(list(s.entries.values()), dtype=complex)), initial=0.0)), True)
    if isinstance(s, SampledSymbol):
        return SupNorm(float(np.max(np.abs(s._values), initial=0.0)), True)
    arr = _probe_array(probe, s.dim)
    if len(arr) == 0:
        raise PreconditionError("probe must be nonempty")
    value = float(np.max(np.abs(s.values(arr))))
    bound = getattr(s, "bound", None)
    exact = bound is not None and value >= bound * (1 - 1e-12)
    return SupNorm(value, exact)


FINITE_RANK = "finite-rank"
COMPACT = "compact-capable"
NEITHER = "neither"


def classify_decay(s: Symbol, probe=None) -> str:
    """One of ``finite-rank``, ``compact-capable``, ``neither``, ``unknown``."""
    if s.finite_support is not None:
        return FINITE_RANK
    if s.decay == VANISHING:
        return COMPACT
    if s.decay == NO_DECAY:
        return NEITHER
    return UNKNOWN


def check_decay(s: Symbol, probe) -> list[str]:
    """Heuristic consistency check of declared decay metadata on a probe.

    Splits the probe at half its largest sup-norm and compares the symbol's
    magnitude on the two halves.  Returns human-readable warnings.
    """
    arr = _probe_array(probe, s.dim)
    if len(arr) < 4:
        return []
    vals = np.abs(s.values(arr))
    level = np.abs(arr).max(axis=1)
    outer = level > level.max() / 2
    if not outer.any() or outer.all():
        return []
    inner_max, outer_max = vals[~outer].max(), vals[outer].max()
    warnings = []
    if s.decay == VANISHING and outer_max > 0 and outer_max >= inner_max:
        warnings.append(f"declared {VANISHING} but outer-probe max {outer_max:.3g} >= inner max {inner_max:.3g}")
    if s.decay == NO_DECAY and outer_max < 1e-12 * max(inner_max, 1e-300):
        warnings.append(f"declared {NO_DECAY} but symbol is negligible on the outer probe")
    return warnings
