"""Data over sieve points: atlas layout, contiguous storage, closure restriction."""

from __future__ import annotations

from typing import Dict, Iterable, NamedTuple, Tuple

import numpy as np

from .errors import DimensionError, SectionError
from .sieve import Point, Sieve

REAL = np.dtype("<f8")
POINT = np.dtype("<i8")

REPLACE = "replace"
ADD = "add"


class AtlasEntry(NamedTuple):
    offset: int
    dim: int


class Section:
    """Values over points laid out in one contiguous array.

    Declare fiber dimensions with :meth:`set_fiber_dimension`, then call
    :meth:`allocate`. Offsets follow ascending point id. ``dtype`` selects the
    value type: :data:`REAL` for fields such as coordinates, :data:`POINT`
    when the values are themselves sieve points.

    Changing dimensions after allocation is allowed; the next
    :meth:`allocate` keeps the values of points whose dimension is unchanged.
    """

    def __init__(self, dtype=REAL):
        self.dtype = np.dtype(dtype)
        self._dims: Dict[Point, int] = {}
        self._atlas: Dict[Point, AtlasEntry] = {}
        self._storage = np.zeros(0, dtype=self.dtype)
        self._allocated = False
        self._dirty = False

    def __repr__(self):
        return f"Section(dtype={self.dtype}, points={len(self._dims)}, size={self.size})"

    def set_fiber_dimension(self, p: Point, n: int) -> None:
        n = int(n)
        if n < 0:
            raise DimensionError(f"negative fiber dimension {n} at point {p}")
        p = int(p)
        if self._dims.get(p) != n:
            self._dims[p] = n
            self._dirty = True

    def fiber_dimension(self, p: Point) -> int:
        return self._dims.get(p, 0)

    def points(self) -> Tuple[Point, ...]:
        return tuple(sorted(self._dims))

    def allocate(self) -> None:
        old_atlas, old_storage = self._atlas, self._storage
        atlas = {}
        offset = 0
        for p in sorted(self._dims):
            atlas[p] = AtlasEntry(offset, self._dims[p])
            offset += self._dims[p]
        storage = np.zeros(offset, dtype=self.dtype)
        if self._allocated:
            for p, (o, n) in atlas.items():
                prev = old_atlas.get(p)
                if prev is not None and prev.dim == n:
                    storage[o:o + n] = old_storage[prev.offset:prev.offset + n]
        self._atlas, self._storage = atlas, storage
        self._allocated = True
        self._dirty = False

    @property
    def allocated(self) -> bool:
        return self._allocated and not self._dirty

    def _check_ready(self):
        if not self.allocated:
            raise SectionError("section must be allocated before access")

    @property
    def atlas(self) -> Dict[Point, AtlasEntry]:
        self._check_ready()
        return dict(self._atlas)

    @property
    def storage(self) -> np.ndarray:
        self._check_ready()
        return self._storage

    @property
    def size(self) -> int:
        return sum(self._dims.values())

    def restrict(self, p: Point) -> np.ndarray:
        """Values at ``p`` as a view into storage; empty for unknown points."""
        self._check_ready()
        entry = self._atlas.get(p)
        if entry is None:
            return self._storage[0:0]
        return self._storage[entry.offset:entry.offset + entry.dim]

    restrict_point = restrict

    def update(self, p: Point, values, mode: str = REPLACE) -> None:
        self._check_ready()
        entry = self._atlas.get(p)
        if entry is None:
            raise SectionError(f"point {p} is not in the section")
        values = np.asarray(values, dtype=self.dtype).reshape(-1)
        if values.size != entry.dim:
            raise DimensionError(
                f"point {p} has fiber dimension {entry.dim}, got {values.size} values")
        view = self._storage[entry.offset:entry.offset + entry.dim]
        if mode == REPLACE:
            view[:] = values
        elif mode == ADD:
            view += values
        else:
            raise ValueError(f"unknown update mode {mode!r}")

    def copy(self) -> "Section":
        out = Section(self.dtype)
        out._dims = dict(self._dims)
        out._atlas = dict(self._atlas)
        out._storage = self._storage.copy()
        out._allocated, out._dirty = self._allocated, self._dirty
        return out

    def restricted_to(self, points: Iterable[Point]) -> "Section":
        """A new section holding only the given points, values copied."""
        out = Section(self.dtype)
        keep = [p for p in points if p in self._dims]
        for p in keep:
            out.set_fiber_dimension(p, self._dims[p])
        out.allocate()
        for p in keep:
            out.update(p, self.restrict(p))
        return out

    def __eq__(self, other):
        if not isinstance(other, Section):
            return NotImplemented
        if self.dtype != other.dtype or self._dims != other._dims:
            return False
        return all(np.array_equal(self.restrict(p), other.restrict(p)) for p in self._dims)

    @classmethod
    def from_values(cls, values: Dict[Point, Iterable], dtype=REAL) -> "Section":
        sec = cls(dtype)
        rows = {p: np.asarray(v, dtype=sec.dtype).reshape(-1) for p, v in values.items()}
        for p, v in rows.items():
            sec.set_fiber_dimension(p, v.size)
        sec.allocate()
        for p, v in rows.items():
            sec.update(p, v)
        return sec


class ConstantSection:
    """Same single value at every point; nothing to lay out or communicate."""

    def __init__(self, value, dtype=None):
        self.value = value
        if dtype is None:
            dtype = POINT if isinstance(value, (int, np.integer)) else REAL
        self.dtype = np.dtype(dtype)

    def __repr__(self):
        return f"ConstantSection({self.value!r})"

    def fiber_dimension(self, p: Point) -> int:
        return 1

    def restrict(self, p: Point) -> np.ndarray:
        return np.array([self.value], dtype=self.dtype)

    restrict_point = restrict


def restrict_closure(sieve: Sieve, section, p: Point) -> np.ndarray:
    """Values over ``p`` followed by those over ``closure(p)``, concatenated."""
    return _concat(section, sieve.full_closure(p))


def restrict_star(sieve: Sieve, section, p: Point) -> np.ndarray:
    return _concat(section, sieve.full_star(p))


def _concat(section, points) -> np.ndarray:
    parts = [section.restrict(q) for q in points]
    if not parts:
        return np.zeros(0, dtype=section.dtype)
    return np.concatenate(parts)
