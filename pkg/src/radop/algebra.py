"""The algebra of inducing functions, stored through their symbols.

An element is a space plus a bounded symbol; the analytic function ``g`` is
derived from the symbol on demand.  Also here: the Hardy and Dirichlet
integral formulas on the disc and a finite-probe membership classifier for
the chain ``S^D <= S^{H^2} <= S^{A^2}``.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from typing import Callable, Mapping

import numpy as np

from .errors import OutsideDomain, PreconditionError, SpaceMismatch, UnboundedSymbol
from .lattice import IndexBox, IndexSet, enumerate_allowable
from .norms import BergmanSpace, DirichletSpace, HardySpace, Space
from .operators import KernelSeries, LaurentPoly, RadialOperator, apply_diagonal
from .quadrature import phase_nodes
from .symbols import (FiniteSymbol, SampledSymbol, Symbol, SupNorm, conjugate, pointwise_product, pointwise_sum,
                      scale, sup_norm)
from .geometry import disk


DEFAULT_PROBE = 32
UNBOUNDED_CAP = 1e12


class AlgebraElement:
    """Inducing function ``g`` with Laurent coefficients ``||c_alpha||^2 symbol(alpha)``."""

    def __init__(self, space: Space, symbol: Symbol):
        if symbol.dim != space.dim:
            raise SpaceMismatch("symbol and space dimensions differ")
        self.space = space
        self.symbol = symbol
        self._series: KernelSeries | None = None

    def __repr__(self) -> str:
        return f"AlgebraElement({self.space!r}, {self.symbol!r})"

    @property
    def operator(self) -> RadialOperator:
        return RadialOperator(self.space, self.symbol)

    def __call__(self, zeta, tol: float = 1e-13) -> complex:
        if self._series is None:
            self._series = KernelSeries(self.space, self.symbol)
        return self._series.evaluate(zeta, tol).value

    def coefficients(self, index_set: IndexSet) -> np.ndarray:
        """Laurent coefficients of ``g`` over ``index_set`` (canonical order)."""
        arr = index_set.array()
        return np.exp(-self.space.log_norm_sq_array(arr)) * self.symbol.values(arr)

    def probe(self, bound: int = DEFAULT_PROBE) -> IndexSet:
        return enumerate_allowable(self.space, IndexBox(self.space.dim, bound))

    def equals(self, other: "AlgebraElement", probe: IndexSet | None = None) -> bool:
        """Symbol agreement on every probed index (the symbol determines ``g``)."""
        _same_space(self, other)
        probe = probe or self.probe()
        arr = probe.array()
        return bool(np.array_equal(self.symbol.values(arr), other.symbol.values(arr)))

    def __add__(self, other):
        return element_add(self, other)

    def __mul__(self, other):
        return element_mul(self, other)

    def star(self):
        return element_star(self)


def _same_space(g1: AlgebraElement, g2: AlgebraElement) -> None:
    if g1.space is not g2.space and g1.space.fingerprint != g2.space.fingerprint:
        raise SpaceMismatch("elements live on different spaces")


def element_add(g1: AlgebraElement, g2: AlgebraElement) -> AlgebraElement:
    _same_space(g1, g2)
    return AlgebraElement(g1.space, pointwise_sum(g1.symbol, g2.symbol))


def element_mul(g1: AlgebraElement, g2: AlgebraElement) -> AlgebraElement:
    _same_space(g1, g2)
    return AlgebraElement(g1.space, pointwise_product(g1.symbol, g2.symbol))


def element_star(g: AlgebraElement) -> AlgebraElement:
    return AlgebraElement(g.space, conjugate(g.symbol))


def element_scale(c: complex, g: AlgebraElement) -> AlgebraElement:
    return AlgebraElement(g.space, scale(c, g.symbol))


def algebra_norm(g: AlgebraElement, probe: IndexSet | None = None) -> SupNorm:
    return sup_norm(g.symbol, probe or g.probe())


def iso_to_linf(g: AlgebraElement) -> Symbol:
    return g.symbol


def iso_from_linf(space: Space, s: Symbol, probe: IndexSet | None = None,
                  cap: float = UNBOUNDED_CAP) -> AlgebraElement:
    """Element induced by ``s``; ``UnboundedSymbol`` if its probed sup exceeds ``cap``."""
    probe = probe or enumerate_allowable(space, IndexBox(space.dim, DEFAULT_PROBE))
    norm = sup_norm(s, probe)
    if not np.isfinite(norm.value) or norm.value > cap:
        raise UnboundedSymbol(f"symbol sup {norm.value:g} exceeds cap {cap:g}")
    return AlgebraElement(space, s)


# -- Hardy and Dirichlet integral formulas ----------------------------------------

def _gauss_panels(edges: np.ndarray, points: int) -> tuple[np.ndarray, np.ndarray]:
    x, w = np.polynomial.legendre.leggauss(points)
    a, b = edges[:-1, None], edges[1:, None]
    nodes = 0.5 * (b - a) * x[None, :] + 0.5 * (a + b)
    weights = 0.5 * (b - a) * w[None, :]
    return nodes.ravel(), weights.ravel()


def _derivative_route(g: AlgebraElement, f: LaurentPoly, z: complex, log_weight: bool,
                      tol: float, points: int, max_levels: int) -> complex:
    """``u(0) f(0) + z * integral f'(w) g'(z conj w) [log 1/|w|^2] dA(w)``, normalised ``dA``.

    Phases use an alias-free trapezoidal grid.  Radially, ``[1/2, 1]`` gets
    one Gauss panel and the discs ``|w| < 2^-k`` are peeled off in halving
    annuli until a panel contributes less than ``tol / 10``.
    """
    if f.dim != 1:
        raise PreconditionError("one-variable polynomial expected")
    z = complex(z)
    if abs(z) >= 1:
        raise OutsideDomain(f"|z| = {abs(z):g} is not below 1")
    head = complex(g.symbol((0,))) * f.coeff((0,))
    fp = f.derivative()
    if not fp.coeffs or z == 0:
        return head
    series = g._series or KernelSeries(g.space, g.symbol)
    g._series = series
    N, _ = series.truncation(np.array([[abs(z)]]), tol=tol * 1e-3, derivative=True)
    arr, logc, u, _ = series.box(N)
    m = arr[:, 0]
    keep = m >= 1
    m, logc, u = m[keep], logc[keep], u[keep]
    fk = np.array([a[0] for a in fp.support])
    fc = np.array([fp.coeffs[a] for a in fp.support])
    # phases: g'(z r e^{-i t}) has exponents m-1 in e^{-i t}; f' has k in e^{i t}
    P = int(max(m.max() - 1, fk.max()) + fk.max() + 2)
    theta = phase_nodes(P)
    Eg = np.exp(1j * (m - 1)[None, :] * (np.angle(z) - theta[:, None]))
    Ef = np.exp(1j * fk[None, :] * theta[:, None])
    logz = np.log(abs(z))

    def radial(r: np.ndarray) -> np.ndarray:
        out = np.empty(len(r), dtype=complex)
        for i, ri in enumerate(r):
            gvals = Eg @ (u * m * np.exp(logc + (m - 1) * (logz + np.log(ri))))
            fvals = Ef @ (fc * ri ** fk)
            out[i] = np.mean(fvals * gvals)
        w = 2.0 * r
        if log_weight:
            w = w * -2.0 * np.log(r)
        return out * w

    edges = np.array([0.5, 1.0])
    nodes, wts = _gauss_panels(edges, points)
    total = np.sum(wts * radial(nodes))
    hi = 0.5
    for _ in range(max_levels):
        nodes, wts = _gauss_panels(np.array([hi / 2, hi]), points)
        part = np.sum(wts * radial(nodes))
        total += part
        hi /= 2
        if abs(part) < tol / 10:
            break
    return head + z * total


def dirichlet_apply(g: AlgebraElement, f: LaurentPoly, z: complex, *, tol: float = 1e-12,
                    points: int = 24, max_levels: int = 60) -> complex:
    if not isinstance(g.space, DirichletSpace):
        raise SpaceMismatch("dirichlet_apply needs an element of the Dirichlet space")
    return _derivative_route(g, f, z, False, tol, points, max_levels)


def hardy_apply(g: AlgebraElement, f: LaurentPoly, z: complex, *, tol: float = 1e-12,
                points: int = 24, max_levels: int = 60) -> complex:
    """Hardy formula with the logarithmic factor taken in the integration variable."""
    if not isinstance(g.space, HardySpace):
        raise SpaceMismatch("hardy_apply needs an element of the Hardy space")
    return _derivative_route(g, f, z, True, tol, points, max_levels)


def hardy_log_moment(m: int, points: int = 24, tol: float = 1e-14) -> float:
    """``integral |m w^(m-1)|^2 log(1/|w|^2) dA(w)`` by the same radial scheme (equals 1)."""
    if m < 1:
        raise PreconditionError("m must be >= 1")

    def radial(r):
        return m * m * r ** (2 * m - 2) * 2.0 * r * -2.0 * np.log(r)

    nodes, wts = _gauss_panels(np.array([0.5, 1.0]), points)
    total = float(np.sum(wts * radial(nodes)))
    hi = 0.5
    while hi > 1e-300:
        nodes, wts = _gauss_panels(np.array([hi / 2, hi]), points)
        part = float(np.sum(wts * radial(nodes)))
        total += part
        hi /= 2
        if abs(part) < tol / 10:
            break
    return total


# -- membership classifier ------------------------------------------------------

@dataclass
class Membership:
    member: bool
    certainty: str  # "exact" or "heuristic"
    sup: float
    tail_value: float

    def to_json(self) -> dict:
        return {"member": self.member, "certainty": self.certainty, "sup": self.sup,
                "tail_value": self.tail_value}


@dataclass
class MembershipReport:
    N: int
    dirichlet: Membership
    hardy: Membership
    bergman: Membership

    def to_json(self) -> dict:
        return {"N": self.N, "dirichlet": self.dirichlet.to_json(), "hardy": self.hardy.to_json(),
                "bergman": self.bergman.to_json()}


def recovered_symbols(c: np.ndarray) -> dict[str, np.ndarray]:
    """Candidate symbols ``c_m ||e_m||^2`` on the Dirichlet, Hardy and Bergman disc spaces."""
    m = np.arange(len(c))
    return {
        "dirichlet": c * np.where(m == 0, 1.0, m),
        "hardy": c.astype(complex),
        "bergman": c * np.pi / (m + 1),
    }


def _bounded(u: np.ndarray, finite: bool, growth: float) -> Membership:
    mag = np.abs(u)
    N = len(u) - 1
    if finite:
        return Membership(True, "exact", float(mag.max(initial=0.0)), float(mag[-1]))
    half = mag[: N // 2 + 1].max(initial=0.0)
    grows = mag.max() > growth * half and mag.max() > 0
    return Membership(not grows, "heuristic", float(mag.max()), float(mag[-1]))


def classify_membership(coeffs, N: int = 200, growth: float = 1.5) -> MembershipReport:
    """Classify ``g`` by its Taylor coefficients ``c_0..c_N``.

    ``coeffs`` is a sequence, a callable ``m -> c_m``, or a one-variable
    :class:`LaurentPoly` (a polynomial gets exact verdicts when its degree is
    below ``N``).  A recovered symbol is called unbounded when its maximum
    over ``[0, N]`` exceeds ``growth`` times the maximum over ``[0, N/2]``.
    The implications ``D => H^2 => A^2`` are imposed on the verdicts.
    """
    if N < 2:
        raise PreconditionError("N must be >= 2")
    finite = False
    if isinstance(coeffs, LaurentPoly):
        if coeffs.dim != 1 or any(a[0] < 0 for a in coeffs.coeffs):
            raise PreconditionError("a Taylor polynomial in one variable is expected")
        finite = coeffs.degree() < N
        c = np.array([coeffs.coeff((m,)) for m in range(N + 1)])
    elif callable(coeffs):
        c = np.array([complex(coeffs(m)) for m in range(N + 1)])
    else:
        c = np.asarray(coeffs, dtype=complex)
        if len(c) < N + 1:
            c = np.concatenate([c, np.zeros(N + 1 - len(c))])
            finite = True
        c = c[: N + 1]
    u = recovered_symbols(c)
    d = _bounded(u["dirichlet"], finite, growth)
    h = _bounded(u["hardy"], finite, growth)
    b = _bounded(u["bergman"], finite, growth)
    if d.member and not h.member:
        h = Membership(True, h.certainty, h.sup, h.tail_value)
    if h.member and not b.member:
        b = Membership(True, b.certainty, b.sup, b.tail_value)
    return MembershipReport(N, d, h, b)


# -- expression parser ------------------------------------------------------------

_TOKEN = re.compile(r"\s*(?:(star\()|(\))|([+*·])|(\([-+0-9.eEj ]+\)|[-+]?[0-9.]+(?:[eE][-+]?\d+)?j?)"
                    r"|([A-Za-z_][A-Za-z0-9_\-]*))")


def _tokenize(text: str) -> list[tuple[str, str]]:
    pos, out = 0, []
    text = text.strip()
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        if not m or m.end() == pos:
            raise SyntaxError(f"unexpected input at column {pos}: {text[pos:pos + 10]!r}")
        kinds = ("star", "rparen", "op", "scalar", "name")
        for kind, val in zip(kinds, m.groups()):
            if val is not None:
                out.append((kind, val))
                break
        pos = m.end()
    return out


def parse_expression(text: str, env: Mapping[str, AlgebraElement]) -> AlgebraElement:
    """Evaluate ``expr := term (('+'|'*') term)*`` over named elements.

    ``term`` is a name, ``star(name)`` or ``scalar · name`` (``*`` is also
    accepted after a scalar).  ``*`` binds tighter than ``+``.  Raises
    ``SyntaxError`` on malformed input and ``KeyError`` on unknown names.
    """
    tokens = _tokenize(text)
    pos = 0

    def peek():
        return tokens[pos] if pos < len(tokens) else (None, None)

    def take(kind=None):
        nonlocal pos
        tok = peek()
        if tok[0] is None or (kind and tok[0] != kind):
            raise SyntaxError(f"expected {kind or 'token'} at token {pos}")
        pos += 1
        return tok

    def lookup(name):
        if name not in env:
            raise KeyError(f"unknown symbol name {name!r}")
        return env[name]

    def term():
        kind, val = take()
        if kind == "name":
            return lookup(val)
        if kind == "star":
            g = lookup(take("name")[1])
            take("rparen")
            return element_star(g)
        if kind == "scalar":
            op = take("op")[1]
            if op not in ("·", "*"):
                raise SyntaxError("a scalar must be followed by '·'")
            c = complex(val.replace(" ", ""))
            return element_scale(c, lookup(take("name")[1]))
        raise SyntaxError(f"unexpected {val!r}")

    def product():
        g = term()
        while peek() == ("op", "*") or peek() == ("op", "·"):
            take()
            g = element_mul(g, term())
        return g

    g = product()
    while peek() == ("op", "+"):
        take()
        g = element_add(g, product())
    if pos != len(tokens):
        raise SyntaxError(f"trailing input at token {pos}")
    return g


def element_to_json(g: AlgebraElement, probe: IndexSet | None = None) -> dict:
    """Symbol JSON of ``g``: native for finite/sampled symbols, else sampled on the probe."""
    try:
        sym = g.symbol.to_json()
    except (NotImplementedError, PreconditionError):
        probe = probe or g.probe()
        sym = SampledSymbol(probe, g.symbol.values(probe.array()), extension="error").to_json()
        sym["sampled_from"] = "closed-form"
    norm = algebra_norm(g, probe)
    return {"symbol": sym, "norm": {"value": norm.value, "exact": norm.exact}}
