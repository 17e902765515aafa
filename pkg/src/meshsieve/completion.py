"""Section completion over an overlap, and the adapters that feed it.

Completion is the only parallel operation. It moves restricted section
values across overlap links in two exchanges: a sizer phase announcing how
many values travel per link, then the data phase. Distributing points,
cones and field data all call the same :func:`complete_section`; only the
(sizer, data) pair changes.

Wire format, per destination rank: links in :meth:`Overlap.links_to` order;
the sizer buffer is one little-endian int64 count per link, the data buffer
the concatenated tuples in the section's little-endian dtype.
"""

from __future__ import annotations

from typing import Dict, Iterator, Mapping, Sequence, Tuple

import numpy as np

from .comm import Comm
from .errors import DimensionError, ProtocolError
from .overlap import RECV, SEND, Delta, Overlap, OverlapLink
from .section import POINT, ConstantSection, Section
from .sieve import Point, Sieve

COUNT = np.dtype("<i8")


class OverlapSection:
    """A section whose domain is a list of overlap links."""

    def __init__(self, links: Sequence[OverlapLink], dims: Sequence[int], dtype):
        self.links = list(links)
        self.dtype = np.dtype(dtype)
        self.dims = np.asarray(dims, dtype=COUNT).reshape(-1)
        if self.dims.size != len(self.links):
            raise DimensionError("one fiber dimension per link is required")
        if (self.dims < 0).any():
            raise DimensionError("negative fiber dimension in overlap section")
        self.offsets = np.concatenate([[0], np.cumsum(self.dims)]).astype(COUNT)
        self.storage = np.zeros(int(self.offsets[-1]), dtype=self.dtype)

    def __len__(self):
        return len(self.links)

    def __repr__(self):
        return f"OverlapSection(links={len(self.links)}, size={self.storage.size})"

    def _slice(self, i):
        return slice(int(self.offsets[i]), int(self.offsets[i + 1]))

    def values(self, i: int) -> np.ndarray:
        return self.storage[self._slice(i)]

    def restrict(self, rank: int, remote: Point) -> np.ndarray:
        """Values received from ``rank`` for its point ``remote``; concatenated
        when several local points share that remote name."""
        parts = [self.values(i) for i, lk in enumerate(self.links)
                 if lk.rank == rank and lk.remote == remote]
        if not parts:
            return self.storage[0:0]
        return parts[0] if len(parts) == 1 else np.concatenate(parts)

    def items(self) -> Iterator[Tuple[OverlapLink, np.ndarray]]:
        for i, lk in enumerate(self.links):
            yield lk, self.values(i)

    def ranks(self) -> Tuple[int, ...]:
        return tuple(sorted({lk.rank for lk in self.links}))

    def _indices_for(self, rank):
        return [i for i, lk in enumerate(self.links) if lk.rank == rank]

    def pack(self, rank: int) -> bytes:
        idx = self._indices_for(rank)
        if not idx:
            return b""
        return np.concatenate([self.values(i) for i in idx]).astype(self.dtype.newbyteorder("<")).tobytes()

    def unpack(self, rank: int, buf: bytes) -> None:
        idx = self._indices_for(rank)
        want = int(sum(self.dims[i] for i in idx))
        item = self.dtype.itemsize
        if len(buf) != want * item:
            raise ProtocolError(
                f"rank {rank} sent {len(buf)} bytes, expected {want} values of {item} bytes")
        data = np.frombuffer(buf, dtype=self.dtype.newbyteorder("<"))
        pos = 0
        for i in idx:
            n = int(self.dims[i])
            self.storage[self._slice(i)] = data[pos:pos + n]
            pos += n


# -- adapters ---------------------------------------------------------------
# Read-only Section-shaped views computed on demand. Each exposes dtype,
# fiber_dimension(p) and restrict(p).


class _Adapter:
    dtype = POINT

    def fiber_dimension(self, p: Point) -> int:
        return int(self.restrict(p).size)

    def restrict_point(self, p):
        return self.restrict(p)


class PartitionSizeSection(_Adapter):
    def __init__(self, point_sets: Mapping[int, Sequence[Point]]):
        self.point_sets = point_sets

    def fiber_dimension(self, p):
        return 1 if p in self.point_sets else 0

    def restrict(self, p):
        if p not in self.point_sets:
            return np.zeros(0, dtype=self.dtype)
        return np.array([len(self.point_sets[p])], dtype=self.dtype)


class PartitionSection(_Adapter):
    def __init__(self, point_sets: Mapping[int, Sequence[Point]]):
        self.point_sets = point_sets

    def restrict(self, p):
        return np.asarray(tuple(self.point_sets.get(p, ())), dtype=self.dtype)


class ConeSizeSection(_Adapter):
    def __init__(self, sieve: Sieve):
        self.sieve = sieve

    def fiber_dimension(self, p):
        return 1

    def restrict(self, p):
        return np.array([len(self.sieve.cone(p))], dtype=self.dtype)


class ConeSection(_Adapter):
    def __init__(self, sieve: Sieve):
        self.sieve = sieve

    def restrict(self, p):
        return np.asarray(self.sieve.cone(p), dtype=self.dtype)


class SupportSizeSection(ConeSizeSection):
    def restrict(self, p):
        return np.array([len(self.sieve.support(p))], dtype=self.dtype)


class SupportSection(ConeSection):
    def restrict(self, p):
        return np.asarray(self.sieve.support(p), dtype=self.dtype)


class AtlasSizer(_Adapter):
    """Replaces each restricted tuple by its length."""

    def __init__(self, section):
        self.section = section

    def fiber_dimension(self, p):
        return 1

    def restrict(self, p):
        return np.array([self.section.fiber_dimension(p)], dtype=self.dtype)


def partition_sections(point_sets: Mapping[int, Sequence[Point]]):
    """(size, points) adapters over abstract partition points."""
    return PartitionSizeSection(point_sets), PartitionSection(point_sets)


def cone_sections(sieve: Sieve):
    return ConeSizeSection(sieve), ConeSection(sieve)


def support_sections(sieve: Sieve):
    return SupportSizeSection(sieve), SupportSection(sieve)


def atlas_sizer(section) -> AtlasSizer:
    return AtlasSizer(section)


# -- completion -------------------------------------------------------------


def complete_section(send: Overlap, recv: Overlap, sizer, data, comm: Comm,
                     tag: str = "section") -> OverlapSection:
    """Deliver ``data`` restricted to every send link; return what arrived.

    Collective: every rank of ``comm`` must call this with the same ``tag``.
    A :class:`ConstantSection` sizer skips the sizer exchange.
    """
    send_links = send.links(SEND)
    recv_links = recv.links(RECV)

    # 1-3: sizes
    if isinstance(sizer, ConstantSection):
        n = int(sizer.value)
        send_sizes = [n] * len(send_links)
        recv_sizes = np.full(len(recv_links), n, dtype=COUNT)
    else:
        send_sizer = OverlapSection(send_links, [1] * len(send_links), COUNT)
        for i, lk in enumerate(send_links):
            vals = np.asarray(sizer.restrict(lk.local)).reshape(-1)
            if vals.size != 1:
                raise ProtocolError(f"sizer at point {lk.local} has {vals.size} values, expected 1")
            send_sizer.values(i)[0] = int(vals[0])
        recv_sizer = OverlapSection(recv_links, [1] * len(recv_links), COUNT)
        got = comm.exchange({r: send_sizer.pack(r) for r in send_sizer.ranks()}, tag=f"{tag}/sizer")
        _unpack_all(recv_sizer, got, comm.rank)
        send_sizes = send_sizer.storage.tolist()
        recv_sizes = recv_sizer.storage

    # 4-6: data
    send_data = OverlapSection(send_links, send_sizes, data.dtype)
    for i, lk in enumerate(send_links):
        vals = np.asarray(data.restrict(lk.local), dtype=data.dtype).reshape(-1)
        if vals.size != send_data.dims[i]:
            raise ProtocolError(
                f"point {lk.local}: sizer announced {send_data.dims[i]} values, data has {vals.size}")
        send_data.values(i)[:] = vals
    recv_data = OverlapSection(recv_links, recv_sizes, data.dtype)
    got = comm.exchange({r: send_data.pack(r) for r in send_data.ranks()}, tag=f"{tag}/data")
    _unpack_all(recv_data, got, comm.rank)
    return recv_data


def _unpack_all(section: OverlapSection, received: Dict[int, bytes], me: int) -> None:
    expected = set(section.ranks())
    extra = set(received) - expected
    if extra:
        raise ProtocolError(f"rank {me} got messages from unlinked ranks {sorted(extra)}")
    for r in sorted(expected):
        if r not in received:
            raise ProtocolError(f"rank {me} expected a message from rank {r}")
        section.unpack(r, received[r])


def fuse(target, received: OverlapSection, delta=Delta.INSERT, direction: str = "cone") -> None:
    """Merge received values into a local Section or Sieve under each link's local name.

    For a Sieve the values are the cone (or, with ``direction="support"``,
    the support) of the local point: insert adds arrows, replace first drops
    the existing ones.
    """
    delta = Delta.coerce(delta)
    if isinstance(target, Sieve):
        _fuse_sieve(target, received, delta, direction)
    elif isinstance(target, Section):
        _fuse_section(target, received, delta)
    else:
        raise TypeError(f"cannot fuse into {type(target).__name__}")


def _fuse_sieve(sieve: Sieve, received, delta, direction):
    if delta is Delta.ADD:
        raise ValueError("additive fusion is undefined for covering relations")
    for lk, vals in received.items():
        p = lk.local
        sieve.add_point(p)
        if direction == "cone":
            if delta is Delta.REPLACE:
                sieve.clear_cone(p)
            for q in vals.tolist():
                sieve.add_arrow(q, p)
        elif direction == "support":
            if delta is Delta.REPLACE:
                for t in sieve.support(p):
                    sieve.remove_arrow(p, t)
            for q in vals.tolist():
                sieve.add_arrow(p, q)
        else:
            raise ValueError(f"direction must be 'cone' or 'support', got {direction!r}")


def _fuse_section(section: Section, received, delta):
    before = {p: section.fiber_dimension(p) for p in section.points()}
    held = {p for p, n in before.items() if n > 0}
    new_dims: Dict[Point, int] = {}
    for lk, vals in received.items():
        p, n = lk.local, vals.size
        if n == 0 and p not in before:
            continue
        if p in held or (p in before and delta is not Delta.INSERT):
            if before[p] != n:
                raise DimensionError(f"point {p} holds {before[p]} values, received {n}")
        elif new_dims.setdefault(p, n) != n:
            raise DimensionError(f"point {p} received tuples of sizes {new_dims[p]} and {n}")
    for p, n in new_dims.items():
        section.set_fiber_dimension(p, n)
    if not section.allocated:
        section.allocate()
    inserted = set()
    for lk, vals in received.items():
        p = lk.local
        if vals.size == 0:
            continue
        if delta is Delta.INSERT:
            # set union: the first tuple wins, existing values are kept
            if p not in held and p not in inserted:
                section.update(p, vals)
                inserted.add(p)
        elif delta is Delta.REPLACE:
            section.update(p, vals)
        else:
            section.update(p, vals, mode="add")
