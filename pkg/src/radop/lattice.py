"""Multi-indices, truncation boxes and the canonical (graded sup-norm) order."""

from __future__ import annotations

import itertools
import json
from dataclasses import dataclass
from typing import Iterable, Iterator, Sequence

import numpy as np

from .errors import DimensionMismatch, NotMember, PreconditionError

MultiIndex = tuple[int, ...]


def as_index(alpha: Iterable[int] | int) -> MultiIndex:
    """Normalise an int or an integer sequence to a ``MultiIndex`` tuple."""
    if isinstance(alpha, (int, np.integer)):
        return (int(alpha),)
    return tuple(int(a) for a in alpha)


def sup_norm(alpha: Sequence[int]) -> int:
    return max((abs(a) for a in alpha), default=0)


def canonical_key(alpha: Sequence[int]) -> tuple:
    return (sup_norm(alpha), tuple(alpha))


@dataclass(frozen=True)
class IndexBox:
    """All ``alpha`` in Z^dim with ``max_j |alpha_j| <= bound``."""

    dimension: int
    bound: int

    def __post_init__(self):
        if self.dimension < 1:
            raise PreconditionError("dimension must be >= 1")
        if self.bound < 0:
            raise PreconditionError("bound must be >= 0")

    def __contains__(self, alpha) -> bool:
        alpha = as_index(alpha)
        return len(alpha) == self.dimension and sup_norm(alpha) <= self.bound

    def __len__(self) -> int:
        return (2 * self.bound + 1) ** self.dimension

    def array(self) -> np.ndarray:
        """Box members as an ``(len, dim)`` int array in canonical order."""
        axis = np.arange(-self.bound, self.bound + 1)
        grid = np.stack(np.meshgrid(*([axis] * self.dimension), indexing="ij"), -1)
        arr = grid.reshape(-1, self.dimension)
        return arr[canonical_argsort(arr)]

    def __iter__(self) -> Iterator[MultiIndex]:
        for row in self.array():
            yield tuple(int(a) for a in row)


def canonical_argsort(arr: np.ndarray) -> np.ndarray:
    """Permutation sorting the rows of ``arr`` by (sup-norm, lexicographic)."""
    arr = np.asarray(arr, dtype=np.int64)
    if arr.size == 0:
        return np.arange(arr.shape[0])
    keys = [arr[:, j] for j in reversed(range(arr.shape[1]))]
    keys.append(np.abs(arr).max(axis=1))
    return np.lexsort(keys)


class IndexSet:
    """An ordered, duplicate-free collection of multi-indices of one dimension.

    Members are always kept in canonical order, so two sets built from the
    same indices compare equal and serialise identically.
    """

    __slots__ = ("dimension", "_members", "_rank")

    def __init__(self, dimension: int, members: Iterable[Iterable[int] | int] = ()):
        if dimension < 1:
            raise PreconditionError("dimension must be >= 1")
        items = {as_index(a) for a in members}
        for a in items:
            if len(a) != dimension:
                raise DimensionMismatch(f"index {a} does not have dimension {dimension}")
        self.dimension = dimension
        self._members = tuple(sorted(items, key=canonical_key))
        self._rank = {a: i for i, a in enumerate(self._members)}

    @classmethod
    def from_array(cls, arr: np.ndarray) -> "IndexSet":
        arr = np.asarray(arr, dtype=np.int64)
        return cls(arr.shape[1], (tuple(int(v) for v in row) for row in arr))

    @classmethod
    def range(cls, stop: int, start: int = 0) -> "IndexSet":
        """One-dimensional set ``{start, ..., stop - 1}``."""
        return cls(1, range(start, stop))

    @property
    def members(self) -> tuple[MultiIndex, ...]:
        return self._members

    def __len__(self) -> int:
        return len(self._members)

    def __iter__(self) -> Iterator[MultiIndex]:
        return iter(self._members)

    def __getitem__(self, i: int) -> MultiIndex:
        return self._members[i]

    def __contains__(self, alpha) -> bool:
        return as_index(alpha) in self._rank

    def __eq__(self, other) -> bool:
        if not isinstance(other, IndexSet):
            return NotImplemented
        return self.dimension == other.dimension and self._members == other._members

    def __hash__(self) -> int:
        return hash((self.dimension, self._members))

    def __repr__(self) -> str:
        head = ", ".join(str(a) for a in self._members[:6])
        more = ", ..." if len(self) > 6 else ""
        return f"IndexSet(dim={self.dimension}, [{head}{more}], n={len(self)})"

    def rank(self, alpha) -> int:
        """Position of ``alpha`` in the canonical order."""
        try:
            return self._rank[as_index(alpha)]
        except KeyError:
            raise NotMember(f"{as_index(alpha)} is not a member") from None

    def index_at(self, position: int) -> MultiIndex:
        """Inverse of :meth:`rank`."""
        if not 0 <= position < len(self):
            raise NotMember(f"position {position} out of range")
        return self._members[position]

    def array(self) -> np.ndarray:
        return np.array(self._members, dtype=np.int64).reshape(len(self), self.dimension)

    def issubset(self, other: "IndexSet") -> bool:
        return all(a in other for a in self._members)

    def union(self, other: "IndexSet") -> "IndexSet":
        if other.dimension != self.dimension:
            raise DimensionMismatch("dimension mismatch")
        return IndexSet(self.dimension, itertools.chain(self, other))

    def shell(self, k: int) -> "IndexSet":
        """Members with sup-norm exactly ``k``."""
        return IndexSet(self.dimension, (a for a in self if sup_norm(a) == k))

    def to_json(self) -> str:
        return json.dumps([list(a) for a in self._members])

    @classmethod
    def from_json(cls, text: str, dimension: int | None = None) -> "IndexSet":
        data = json.loads(text)
        if dimension is None:
            if not data:
                raise PreconditionError("empty index set needs an explicit dimension")
            dimension = len(data[0])
        return cls(dimension, data)


def enumerate_allowable(space, box: IndexBox) -> IndexSet:
    """Indices of ``box`` whose monomial has finite norm in ``space``.

    ``space`` is any object exposing ``dim`` and ``allowable_mask(array)``
    (all the space classes in :mod:`radop.norms` do).  Raises
    ``UndecidableFiniteness`` when the space cannot decide an index.
    """
    if box.dimension != space.dim:
        raise DimensionMismatch(f"box has dimension {box.dimension}, space {space.dim}")
    arr = box.array()
    mask = np.asarray(space.allowable_mask(arr), dtype=bool)
    return IndexSet.from_array(arr[mask])


def order_rank(index_set: IndexSet, alpha) -> int:
    """Position of ``alpha`` in the canonical order of ``index_set``."""
    return index_set.rank(alpha)
