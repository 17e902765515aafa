"""Arrow container for covering relations and its lattice traversals.

A :class:`Sieve` stores arrows ``source -> target`` where the source covers
the target (a vertex covers an edge, an edge covers a triangle). Points are
plain non-negative ints with no dimension attached; depth and height are
derived from the arrows on demand.
"""

from __future__ import annotations

import operator
from collections import deque
from dataclasses import dataclass
from typing import Any, Dict, Hashable, Iterable, Iterator, List, Optional, Tuple

from .errors import CycleError, SieveError

Point = int


@dataclass(frozen=True)
class Arrow:
    source: Point
    target: Point
    payload: Any = None


class Sieve:
    """Bidirectional multivalued map between cap and base points.

    ``cone(p)`` lists the sources of arrows into ``p`` and ``support(p)`` the
    targets of arrows out of ``p``, both in arrow insertion order. Each
    (source, target) pair holds at most one arrow; re-adding it only replaces
    the payload.
    """

    def __init__(self, arrows: Iterable = ()):
        # cone: target -> {source: payload}; dicts keep insertion order
        self._cone: Dict[Point, Dict[Point, Any]] = {}
        self._support: Dict[Point, Dict[Point, None]] = {}
        self._points: Dict[Point, None] = {}
        self._strata: Optional[Tuple[Dict[Point, int], Dict[Point, int]]] = None
        for a in arrows:
            if isinstance(a, Arrow):
                self.add_arrow(a.source, a.target, a.payload)
            else:
                self.add_arrow(*a)

    # construction

    def add_point(self, p: Point) -> None:
        p = _as_point(p)
        if p not in self._points:
            self._points[p] = None
            self._strata = None

    def add_arrow(self, source: Point, target: Point, payload: Any = None) -> None:
        source, target = _as_point(source), _as_point(target)
        if source == target:
            raise SieveError(f"point {source} cannot cover itself")
        self.add_point(source)
        self.add_point(target)
        self._cone.setdefault(target, {})[source] = payload
        self._support.setdefault(source, {})[target] = None
        self._strata = None

    def add_cone(self, target: Point, sources: Iterable[Point]) -> None:
        self.add_point(target)
        for s in sources:
            self.add_arrow(s, target)

    def remove_arrow(self, source: Point, target: Point) -> None:
        try:
            del self._cone[target][source]
            del self._support[source][target]
        except KeyError:
            raise SieveError(f"no arrow {source} -> {target}") from None
        self._strata = None

    def clear_cone(self, target: Point) -> None:
        for s in list(self._cone.get(target, ())):
            self.remove_arrow(s, target)

    def copy(self) -> "Sieve":
        out = Sieve()
        for p in self._points:
            out.add_point(p)
        for a in self.arrows():
            out.add_arrow(a.source, a.target, a.payload)
        return out

    def subsieve(self, points: Iterable[Point]) -> "Sieve":
        """Induced subsieve: the given points and every arrow between two of them."""
        keep = dict.fromkeys(points)
        out = Sieve()
        for p in self._points:
            if p in keep:
                out.add_point(p)
        for p in out.points():
            for s, payload in self._cone.get(p, {}).items():
                if s in keep:
                    out.add_arrow(s, p, payload)
        return out

    def reversed(self) -> "Sieve":
        """The same points with every arrow flipped (the dual sieve)."""
        out = Sieve()
        for p in self._points:
            out.add_point(p)
        for a in self.arrows():
            out.add_arrow(a.target, a.source, a.payload)
        return out

    # basic queries

    def __contains__(self, p: Point) -> bool:
        return p in self._points

    def __len__(self) -> int:
        return len(self._points)

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, Sieve):
            return NotImplemented
        if set(self._points) != set(other._points):
            return False
        return all(self.cone(p) == other.cone(p) for p in self._points)

    def __repr__(self) -> str:
        return f"Sieve(points={len(self._points)}, arrows={self.num_arrows()})"

    def points(self) -> Tuple[Point, ...]:
        return tuple(self._points)

    def arrows(self) -> Iterator[Arrow]:
        """All arrows, grouped by target in point insertion order."""
        for t in self._points:
            for s, payload in self._cone.get(t, {}).items():
                yield Arrow(s, t, payload)

    def num_arrows(self) -> int:
        return sum(len(c) for c in self._cone.values())

    def payload(self, source: Point, target: Point) -> Any:
        try:
            return self._cone[target][source]
        except KeyError:
            raise SieveError(f"no arrow {source} -> {target}") from None

    def cone(self, p: Point) -> Tuple[Point, ...]:
        return tuple(self._cone.get(p, ()))

    def support(self, p: Point) -> Tuple[Point, ...]:
        return tuple(self._support.get(p, ()))

    def cone_arrows(self, p: Point) -> Tuple[Arrow, ...]:
        return tuple(Arrow(s, p, pl) for s, pl in self._cone.get(p, {}).items())

    def support_arrows(self, p: Point) -> Tuple[Arrow, ...]:
        return tuple(Arrow(p, t, self._cone[t][p]) for t in self._support.get(p, ()))

    def base(self) -> Tuple[Point, ...]:
        return tuple(sorted(t for t, c in self._cone.items() if c))

    def cap(self) -> Tuple[Point, ...]:
        return tuple(sorted(s for s, c in self._support.items() if c))

    # transitive traversals

    def _bfs(self, p: Point, step: Dict[Point, Dict]) -> Tuple[Point, ...]:
        seen = {p}
        out: List[Point] = []
        queue = deque(step.get(p, ()))
        while queue:
            q = queue.popleft()
            if q in seen:
                continue
            seen.add(q)
            out.append(q)
            queue.extend(step.get(q, ()))
        return tuple(out)

    def closure(self, p: Point) -> Tuple[Point, ...]:
        """Transitive cone of ``p`` in breadth-first order, ``p`` excluded."""
        return self._bfs(p, self._cone)

    def star(self, p: Point) -> Tuple[Point, ...]:
        """Transitive support of ``p`` in breadth-first order, ``p`` excluded."""
        return self._bfs(p, self._support)

    def full_closure(self, p: Point) -> Tuple[Point, ...]:
        return (p,) + self.closure(p)

    def full_star(self, p: Point) -> Tuple[Point, ...]:
        return (p,) + self.star(p)

    def meet(self, p: Point, q: Point) -> Tuple[Point, ...]:
        """Smallest set of points whose removal (with everything they cover)
        leaves ``closure(p)`` and ``closure(q)`` disjoint.

        This is the set of maximal elements of the intersection, sorted by id.
        """
        return self._separator(self.closure(p), self.closure(q), self.closure)

    def join(self, p: Point, q: Point) -> Tuple[Point, ...]:
        """Dual of :meth:`meet` over stars."""
        return self._separator(self.star(p), self.star(q), self.star)

    @staticmethod
    def _separator(a, b, below) -> Tuple[Point, ...]:
        common = set(a).intersection(b)
        covered = set()
        for x in common:
            covered.update(below(x))
        return tuple(sorted(common - covered))

    # stratification

    def stratify(self) -> Tuple[Dict[Point, int], Dict[Point, int]]:
        """Compute (depth, height) for every point; raises CycleError on cycles."""
        if self._strata is not None:
            return self._strata
        indeg = {p: len(self._cone.get(p, ())) for p in self._points}
        order = [p for p in self._points if indeg[p] == 0]
        i = 0
        while i < len(order):
            s = order[i]
            i += 1
            for t in self._support.get(s, ()):
                indeg[t] -= 1
                if indeg[t] == 0:
                    order.append(t)
        if len(order) != len(self._points):
            stuck = sorted(p for p, d in indeg.items() if d > 0)
            raise CycleError(f"covering relation has a cycle through {stuck[:10]}")
        depth: Dict[Point, int] = {}
        for p in order:
            depth[p] = max((depth[s] + 1 for s in self._cone.get(p, ())), default=0)
        height: Dict[Point, int] = {}
        for p in reversed(order):
            height[p] = max((height[t] + 1 for t in self._support.get(p, ())), default=0)
        self._strata = (depth, height)
        return self._strata

    def validate(self) -> None:
        self.stratify()

    def depth(self, p: Point) -> int:
        return self.stratify()[0].get(p, 0)

    def height(self, p: Point) -> int:
        return self.stratify()[1].get(p, 0)

    def depth_stratum(self, d: int) -> Tuple[Point, ...]:
        depth = self.stratify()[0]
        return tuple(sorted(p for p, v in depth.items() if v == d))

    def height_stratum(self, h: int) -> Tuple[Point, ...]:
        height = self.stratify()[1]
        return tuple(sorted(p for p, v in height.items() if v == h))

    def max_depth(self) -> int:
        return max(self.stratify()[0].values(), default=0)


def _as_point(p: Hashable) -> Point:
    # accepts numpy integers; bools and negatives are rejected
    if isinstance(p, bool):
        raise SieveError(f"points are non-negative ints, got {p!r}")
    try:
        p = operator.index(p)
    except TypeError:
        raise SieveError(f"points are non-negative ints, got {p!r}") from None
    if p < 0:
        raise SieveError(f"points are non-negative ints, got {p}")
    return p
