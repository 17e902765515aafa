"""Overlap links between local pieces and the Delta fusion policies."""

from __future__ import annotations

import enum
from typing import Dict, Iterable, List, NamedTuple, Optional, Sequence, Tuple

import numpy as np

from .errors import OverlapError
from .sieve import Point

SEND = "send"
RECV = "recv"


class OverlapLink(NamedTuple):
    local: Point
    rank: int
    remote: Point


class Overlap:
    """Send and receive links of one rank, grouped by remote rank.

    A send link ``(p, r, q)`` on rank ``a`` says local point ``p`` is known as
    ``q`` on rank ``r``; a complete overlap has the mirror recv link
    ``(q, a, p)`` on rank ``r``.
    """

    def __init__(self, rank: int = 0, size: Optional[int] = None):
        self.rank = rank
        self.size = size
        self._links: Dict[str, Dict[int, Dict[Tuple[Point, Point], None]]] = {SEND: {}, RECV: {}}

    def __repr__(self):
        return (f"Overlap(rank={self.rank}, send={len(self.links(SEND))}, "
                f"recv={len(self.links(RECV))})")

    def add_link(self, local: Point, rank: int, remote: Point, direction: str = SEND) -> None:
        side = self._side(direction)
        rank = int(rank)
        if rank == self.rank:
            raise OverlapError(f"rank {self.rank} cannot link to itself")
        if rank < 0 or (self.size is not None and rank >= self.size):
            raise OverlapError(f"rank {rank} outside group of size {self.size}")
        side.setdefault(rank, {})[(int(local), int(remote))] = None

    def _side(self, direction):
        try:
            return self._links[direction]
        except KeyError:
            raise OverlapError(f"direction must be 'send' or 'recv', got {direction!r}") from None

    def ranks(self, direction: str) -> Tuple[int, ...]:
        return tuple(sorted(r for r, v in self._side(direction).items() if v))

    def links_to(self, rank: int, direction: str = SEND) -> List[OverlapLink]:
        """Links with ``rank`` in wire order.

        Send links sort by (remote, local) and receive links by (local,
        remote), so both ends of a mirrored pair enumerate in the same order.
        """
        pairs = self._side(direction).get(rank, {})
        if direction == SEND:
            keys = sorted(pairs, key=lambda lr: (lr[1], lr[0]))
        else:
            keys = sorted(pairs)
        return [OverlapLink(l, rank, r) for l, r in keys]

    def links(self, direction: str) -> List[OverlapLink]:
        out = []
        for r in self.ranks(direction):
            out.extend(self.links_to(r, direction))
        return out

    def local_points(self, direction: Optional[str] = None) -> Tuple[Point, ...]:
        dirs = (SEND, RECV) if direction is None else (direction,)
        pts = {lk.local for d in dirs for lk in self.links(d)}
        return tuple(sorted(pts))

    def is_empty(self) -> bool:
        return not self.links(SEND) and not self.links(RECV)

    def __eq__(self, other):
        if not isinstance(other, Overlap):
            return NotImplemented
        return (self.rank == other.rank and self.links(SEND) == other.links(SEND)
                and self.links(RECV) == other.links(RECV))

    def copy(self) -> "Overlap":
        out = Overlap(self.rank, self.size)
        for d in (SEND, RECV):
            for lk in self.links(d):
                out.add_link(lk.local, lk.rank, lk.remote, d)
        return out


def mirror_defects(overlaps: Sequence[Overlap]) -> List[str]:
    """Describe every send link lacking its recv mirror, and vice versa."""
    by_rank = {ov.rank: ov for ov in overlaps}
    problems = []
    for ov in overlaps:
        for d, other_dir in ((SEND, RECV), (RECV, SEND)):
            for lk in ov.links(d):
                peer = by_rank.get(lk.rank)
                mirror = OverlapLink(lk.remote, ov.rank, lk.local)
                if peer is None or mirror not in peer.links_to(ov.rank, other_dir):
                    problems.append(f"rank {ov.rank} {d} {tuple(lk)} has no {other_dir} mirror")
    return problems


def is_mirrored(overlaps: Sequence[Overlap]) -> bool:
    return not mirror_defects(overlaps)


def conflicting_links(overlap: Overlap) -> List[Tuple[int, Point, Tuple[Point, ...]]]:
    """Local points mapped to more than one remote point on the same rank."""
    out = []
    for d in (SEND, RECV):
        seen: Dict[Tuple[int, Point], set] = {}
        for lk in overlap.links(d):
            seen.setdefault((lk.rank, lk.local), set()).add(lk.remote)
        out.extend((r, p, tuple(sorted(q))) for (r, p), q in seen.items() if len(q) > 1)
    return out


class Delta(enum.Enum):
    """How received values are fused into what a rank already holds."""

    INSERT = "insert"
    REPLACE = "replace"
    ADD = "add"

    def combine(self, current: Optional[np.ndarray], incoming: np.ndarray) -> np.ndarray:
        if current is None or self is Delta.REPLACE:
            return np.array(incoming, copy=True)
        if self is Delta.ADD:
            return current + incoming
        # insert never overwrites what is already there
        return np.array(current, copy=True)

    @classmethod
    def coerce(cls, value) -> "Delta":
        return value if isinstance(value, cls) else cls(value)
