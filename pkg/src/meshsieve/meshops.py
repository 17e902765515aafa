"""Mesh-level algorithms: dual graph, partitioning, distribution, assembly.

Distribution and redistribution share one per-rank routine,
:func:`migrate`, that moves a mesh according to partition point sets using
nothing but :func:`~meshsieve.completion.complete_section`:

1. copy the part a rank keeps for itself,
2. link abstract partition points (one per target rank) in an overlap,
3. complete the partition section, which delivers the sieve points,
4. turn the received points into a point-level overlap,
5. complete the cone section over it,
6. fuse the received cones into the local sieve.

Every named section then follows through the same completion with an atlas
sizer. Points keep their global ids on every rank.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field
from typing import Dict, Iterable, List, Mapping, Optional, Sequence, Tuple

import numpy as np

from .comm import Comm, Message, ProcessGroup
from .completion import atlas_sizer, complete_section, cone_sections, fuse, partition_sections
from .errors import ConsistencyError, PartitionError
from .overlap import RECV, SEND, Delta, Overlap
from .section import Section
from .sieve import Point, Sieve

COORDINATES = "coordinates"


@dataclass
class Topology:
    sieve: Sieve
    overlap: Overlap = field(default_factory=Overlap)


@dataclass
class Mesh:
    topology: Topology
    sections: Dict[str, Section] = field(default_factory=dict)
    dim: int = 0
    embed_dim: int = 0
    # elements assigned to this piece by the last partition; None means its cells
    owned: Optional[Tuple[Point, ...]] = None

    @classmethod
    def from_sieve(cls, sieve: Sieve, coordinates: Optional[Section] = None,
                   dim: Optional[int] = None, embed_dim: Optional[int] = None) -> "Mesh":
        sections = {}
        if coordinates is not None:
            sections[COORDINATES] = coordinates
            if embed_dim is None:
                embed_dim = max((coordinates.fiber_dimension(p) for p in coordinates.points()), default=0)
        if dim is None:
            dim = sieve.max_depth()
        return cls(Topology(sieve, Overlap()), sections, dim, embed_dim or 0)

    @property
    def sieve(self) -> Sieve:
        return self.topology.sieve

    @property
    def overlap(self) -> Overlap:
        return self.topology.overlap

    @property
    def coordinates(self) -> Optional[Section]:
        return self.sections.get(COORDINATES)

    def cells(self) -> Tuple[Point, ...]:
        return cells(self.sieve)

    def vertices(self) -> Tuple[Point, ...]:
        return self.sieve.depth_stratum(0)

    def owned_elements(self) -> Tuple[Point, ...]:
        return self.cells() if self.owned is None else self.owned

    def copy(self) -> "Mesh":
        return Mesh(Topology(self.sieve.copy(), self.overlap.copy()),
                    {k: v.copy() for k, v in self.sections.items()},
                    self.dim, self.embed_dim, self.owned)


@dataclass
class DistributedMesh:
    meshes: List[Mesh]
    # per rank: links relating each piece to the mesh it was migrated from
    migration: List[Overlap]
    transcript: List[Message] = field(default_factory=list)

    @property
    def size(self) -> int:
        return len(self.meshes)

    def __getitem__(self, rank) -> Mesh:
        return self.meshes[rank]


def cells(sieve: Sieve) -> Tuple[Point, ...]:
    """Top-dimensional points: nothing above them, something below."""
    return tuple(p for p in sieve.height_stratum(0) if sieve.cone(p))


def cell_vertices(sieve: Sieve, c: Point) -> Tuple[Point, ...]:
    """Depth-0 points of the closure of ``c`` in closure order."""
    depth = sieve.stratify()[0]
    return tuple(p for p in sieve.closure(c) if depth[p] == 0)


def is_interpolated(sieve: Sieve) -> bool:
    """True when some point is neither a cell nor a vertex."""
    top = set(cells(sieve))
    return any(p not in top and sieve.cone(p) for p in sieve.points())


# -- dual graph ------------------------------------------------------------


@dataclass(frozen=True)
class DualGraph:
    vertices: Tuple[Point, ...]
    edges: Tuple[Tuple[Point, Point], ...]

    def neighbors(self, c: Point) -> Tuple[Point, ...]:
        out = {b for a, b in self.edges if a == c} | {a for a, b in self.edges if b == c}
        return tuple(sorted(out))

    def adjacency(self) -> Dict[Point, Tuple[Point, ...]]:
        adj: Dict[Point, set] = {v: set() for v in self.vertices}
        for a, b in self.edges:
            adj[a].add(b)
            adj[b].add(a)
        return {v: tuple(sorted(n)) for v, n in adj.items()}


def _sieve_of(mesh_or_sieve) -> Sieve:
    return mesh_or_sieve.sieve if isinstance(mesh_or_sieve, Mesh) else mesh_or_sieve


def build_dual(mesh, dim: Optional[int] = None, method: str = "vertices") -> DualGraph:
    """Cell adjacency graph.

    ``method="vertices"`` joins two cells sharing at least ``dim`` vertices
    (works without intermediate elements). ``method="faces"`` reverses every
    arrow and joins the two cells found in the reversed cone of each
    height-1 point; it needs an interpolated sieve.
    """
    sieve = _sieve_of(mesh)
    if dim is None:
        dim = mesh.dim if isinstance(mesh, Mesh) else sieve.max_depth()
    top = cells(sieve)
    is_cell = set(top)
    edges = set()
    if method == "vertices":
        for c in top:
            shared: Dict[Point, int] = {}
            for v in cell_vertices(sieve, c):
                for other in sieve.star(v):
                    if other in is_cell and other != c:
                        shared[other] = shared.get(other, 0) + 1
            for other, n in shared.items():
                if n >= max(dim, 1):
                    edges.add((min(c, other), max(c, other)))
    elif method == "faces":
        if dim >= 2 and not is_interpolated(sieve):
            raise PartitionError("the faces dual needs an interpolated mesh")
        dual = sieve.reversed()
        for f in sieve.height_stratum(1):
            adjacent = [c for c in dual.cone(f) if c in is_cell]
            if len(adjacent) == 2:
                a, b = sorted(adjacent)
                edges.add((a, b))
    else:
        raise ValueError(f"unknown dual method {method!r}")
    return DualGraph(tuple(top), tuple(sorted(edges)))


def facet_graph(mesh) -> DualGraph:
    """Adjacency of height-1 points through the points directly below them.

    Two facets are neighbors when their cones intersect (a shared edge in
    3D, a shared vertex in 2D). Used to partition faces instead of cells.
    """
    sieve = _sieve_of(mesh)
    if not is_interpolated(sieve):
        raise PartitionError("partitioning faces needs an interpolated mesh")
    facets = sieve.height_stratum(1)
    is_facet = set(facets)
    edges = set()
    for f in facets:
        for q in sieve.cone(f):
            for g in sieve.support(q):
                if g in is_facet and g != f:
                    edges.add((min(f, g), max(f, g)))
    return DualGraph(tuple(facets), tuple(sorted(edges)))


# -- partitioning ----------------------------------------------------------

PartitionAssignment = Dict[Point, int]


def _quotas(n: int, nparts: int) -> List[int]:
    return [n // nparts + (1 if k < n % nparts else 0) for k in range(nparts)]


def partition_elements(elements: Sequence[Point], nparts: int) -> PartitionAssignment:
    """Contiguous id ranges of near-equal size."""
    elements = sorted(elements)
    if nparts < 1:
        raise PartitionError(f"need at least one partition, got {nparts}")
    if nparts > len(elements):
        raise PartitionError(f"{nparts} partitions for {len(elements)} elements")
    out = {}
    it = iter(elements)
    for k, q in enumerate(_quotas(len(elements), nparts)):
        for _ in range(q):
            out[next(it)] = k
    return out


def partition(dual: DualGraph, nparts: int, method: str = "block") -> PartitionAssignment:
    """Deterministic stand-ins for a graph partitioner.

    ``block`` splits cells into contiguous id ranges. ``greedy-bfs`` grows
    each part breadth-first from the lowest unassigned cell until it holds
    its quota (first ``N % P`` parts get ``ceil(N/P)`` cells, the rest
    ``floor(N/P)``).
    """
    if method == "block":
        return partition_elements(dual.vertices, nparts)
    if method not in ("greedy-bfs", "greedy"):
        raise PartitionError(f"unknown partition method {method!r}")
    verts = sorted(dual.vertices)
    if nparts < 1 or nparts > len(verts):
        raise PartitionError(f"{nparts} partitions for {len(verts)} cells")
    adj = dual.adjacency()
    out: PartitionAssignment = {}
    for k, quota in enumerate(_quotas(len(verts), nparts)):
        queue: deque = deque()
        taken = 0
        while taken < quota:
            if not queue:
                queue.append(next(v for v in verts if v not in out))
            c = queue.popleft()
            if c in out:
                continue
            out[c] = k
            taken += 1
            queue.extend(n for n in adj[c] if n not in out)
    return out


def partition_points(sieve: Sieve, assignment: Mapping[Point, int],
                     nparts: Optional[int] = None) -> Dict[int, Tuple[Point, ...]]:
    """All sieve points each partition needs, sorted by id.

    For an assigned element ``e`` this is ``e``, its closure, its star and
    the closure of its star, so a face or edge partition brings along the
    complete cells around it.
    """
    if nparts is None:
        nparts = max(assignment.values(), default=-1) + 1
    sets: Dict[int, set] = {k: set() for k in range(nparts)}
    for e, k in assignment.items():
        pts = sets.setdefault(k, set())
        pts.add(e)
        pts.update(sieve.closure(e))
        for s in sieve.star(e):
            pts.add(s)
            pts.update(sieve.closure(s))
    return {k: tuple(sorted(v)) for k, v in sorted(sets.items())}


def _element_stratum(sieve: Sieve, elements: Iterable[Point]) -> Tuple[Point, ...]:
    elements = list(elements)
    if not elements:
        return ()
    depth, height = sieve.stratify()
    missing = [e for e in elements if e not in sieve]
    if missing:
        raise PartitionError(f"assignment names unknown points {sorted(missing)[:10]}")
    kinds = {(height[e], depth[e]) for e in elements}
    if len(kinds) > 1:
        raise PartitionError("assigned elements must all be of one kind (same height and depth)")
    h, d = kinds.pop()
    return tuple(p for p in sieve.points() if height[p] == h and depth[p] == d)


def check_assignment(sieve: Sieve, assignment: Mapping[Point, int], nparts: int) -> None:
    bad = {e: r for e, r in assignment.items() if not 0 <= r < nparts}
    if bad:
        raise PartitionError(f"ranks outside [0, {nparts}): {dict(sorted(bad.items())[:10])}")
    required = _element_stratum(sieve, assignment)
    missing = [e for e in required if e not in assignment]
    if missing:
        raise PartitionError(f"assignment misses elements {sorted(missing)[:10]}")


# -- migration -------------------------------------------------------------


def _schema(mesh: Mesh) -> Tuple[Tuple[str, np.dtype], ...]:
    return tuple((name, sec.dtype) for name, sec in sorted(mesh.sections.items()))


def migrate(comm: Comm, mesh: Optional[Mesh], point_sets: Mapping[int, Sequence[Point]],
            senders: Sequence[int], schema, dim: int, embed_dim: int,
            owned: Optional[Tuple[Point, ...]] = None) -> Tuple[Mesh, Overlap]:
    """Rank program moving ``mesh`` so that rank ``k`` ends up with
    ``point_sets[k]`` gathered from every sender. Returns (piece, migration overlap)."""
    me, size = comm.rank, comm.size
    sending = me in senders
    source = mesh.sieve if sending else Sieve()
    point_sets = point_sets if sending else {}

    # 1. local copy
    keep = point_sets.get(me, ())
    local = source.subsieve(keep)

    # 2. partition overlap over abstract partition points 0..size-1
    part_overlap = Overlap(me, size)
    if sending:
        for k in range(size):
            if k != me:
                part_overlap.add_link(k, k, k, SEND)
    for s in senders:
        if s != me:
            part_overlap.add_link(me, s, me, RECV)

    # 3. partition completion
    psize, psec = partition_sections(point_sets)
    received = complete_section(part_overlap, part_overlap, psize, psec, comm, tag="partition")

    # 4. point overlap
    moved = Overlap(me, size)
    for k, pts in point_sets.items():
        if k != me:
            for p in pts:
                moved.add_link(p, k, p, SEND)
    for link, pts in received.items():
        for p in pts.tolist():
            moved.add_link(p, link.rank, p, RECV)
            local.add_point(p)

    # 5-6. cone completion and fusion
    csize, csec = cone_sections(source)
    cones = complete_section(moved, moved, csize, csec, comm, tag="cone")
    fuse(local, cones, Delta.INSERT)

    sections = {}
    for name, dtype in schema:
        old = mesh.sections[name] if sending else _empty_section(dtype)
        new = old.restricted_to(keep)
        got = complete_section(moved, moved, atlas_sizer(old), old, comm, tag=f"section:{name}")
        fuse(new, got, Delta.INSERT)
        sections[name] = new

    interface = interface_overlap(comm, local)
    piece = Mesh(Topology(local, interface), sections, dim, embed_dim, owned)
    return piece, moved


def _empty_section(dtype) -> Section:
    sec = Section(dtype)
    sec.allocate()
    return sec


def interface_overlap(comm: Comm, sieve: Sieve) -> Overlap:
    """Links every point this rank shares with another rank, both directions.

    Each rank completes its sorted point list to every other rank over an
    all-to-all overlap of rank points and intersects what it receives.
    """
    me, size = comm.rank, comm.size
    everyone = Overlap(me, size)
    for r in range(size):
        if r != me:
            everyone.add_link(me, r, me, SEND)
            everyone.add_link(r, r, r, RECV)
    mine = tuple(sorted(sieve.points()))
    psize, psec = partition_sections({me: mine})
    received = complete_section(everyone, everyone, psize, psec, comm, tag="interface")
    have = set(mine)
    out = Overlap(me, size)
    for link, pts in received.items():
        for p in pts.tolist():
            if p in have:
                out.add_link(p, link.rank, p, SEND)
                out.add_link(p, link.rank, p, RECV)
    return out


def _group(group, nparts) -> ProcessGroup:
    if group is None:
        return ProcessGroup(nparts)
    if isinstance(group, int):
        return ProcessGroup(group)
    return group


def distribute(serial: Mesh, assignment: Mapping[Point, int], group=None) -> DistributedMesh:
    """Distribute a mesh held by rank 0 according to an element assignment.

    ``assignment`` maps every element of one kind (cells, faces, ...) to a
    rank. ``group`` is a :class:`ProcessGroup`, a rank count, or None to use
    one rank per partition.
    """
    nparts = max(assignment.values(), default=0) + 1
    group = _group(group, nparts)
    check_assignment(serial.sieve, assignment, group.size)
    point_sets = partition_points(serial.sieve, assignment, group.size)
    owned = {k: tuple(sorted(e for e, r in assignment.items() if r == k)) for k in range(group.size)}
    schema = _schema(serial)

    def program(comm):
        mesh = serial if comm.rank == 0 else None
        return migrate(comm, mesh, point_sets if comm.rank == 0 else {}, [0], schema,
                       serial.dim, serial.embed_dim, owned[comm.rank])

    results = group.run(program)
    return DistributedMesh([m for m, _ in results], [o for _, o in results], list(group.transcript))


def redistribute(current: DistributedMesh, assignment: Mapping[Point, int],
                 group=None) -> DistributedMesh:
    """Move an already distributed mesh to a new element assignment.

    Each rank partitions the elements it owns, so the send and receive
    overlaps may be nonempty on every rank; the migration itself is the same
    one used by :func:`distribute`.
    """
    group = _group(group, current.size)
    if group.size != current.size:
        raise PartitionError(f"group of {group.size} ranks for a mesh on {current.size}")
    nparts = group.size
    for rank, mesh in enumerate(current.meshes):
        mine = {e: assignment[e] for e in mesh.owned_elements() if e in assignment}
        missing = [e for e in mesh.owned_elements() if e not in assignment]
        if missing:
            raise PartitionError(f"rank {rank}: assignment misses owned elements {missing[:10]}")
        bad = [e for e, r in mine.items() if not 0 <= r < nparts]
        if bad:
            raise PartitionError(f"rank {rank}: elements {bad[:10]} assigned outside the group")
    owned = {k: tuple(sorted(e for e, r in assignment.items() if r == k)) for k in range(nparts)}
    first = current.meshes[0]
    schema = _schema(first)

    def program(comm):
        mesh = current.meshes[comm.rank]
        mine = {e: assignment[e] for e in mesh.owned_elements()}
        sets = partition_points(mesh.sieve, mine, nparts)
        return migrate(comm, mesh, sets, range(nparts), schema, first.dim, first.embed_dim,
                       owned[comm.rank])

    results = group.run(program)
    return DistributedMesh([m for m, _ in results], [o for _, o in results], list(group.transcript))


# -- assembly and comparison ----------------------------------------------


def assemble(distributed) -> Mesh:
    """Glue local pieces back into one mesh; raises ConsistencyError when
    pieces disagree on a shared point."""
    meshes = distributed.meshes if isinstance(distributed, DistributedMesh) else list(distributed)
    if not meshes:
        raise ConsistencyError("nothing to assemble")
    for rank, m in enumerate(meshes):
        for link in m.overlap.links(SEND) + m.overlap.links(RECV):
            if link.local not in m.sieve:
                raise ConsistencyError(f"rank {rank} overlap names missing point {link.local}")
            if not 0 <= link.rank < len(meshes) or link.remote not in meshes[link.rank].sieve:
                raise ConsistencyError(
                    f"rank {rank} links point {link.local} to missing point {link.remote} "
                    f"on rank {link.rank}")
    cones: Dict[Point, Tuple[Tuple[Point, ...], int]] = {}
    sieve = Sieve()
    for rank, m in enumerate(meshes):
        for p in m.sieve.points():
            sieve.add_point(p)
            cone = m.sieve.cone(p)
            seen = cones.setdefault(p, (cone, rank))
            if seen[0] != cone:
                raise ConsistencyError(
                    f"point {p}: cone {seen[0]} on rank {seen[1]} but {cone} on rank {rank}")
    for p, (cone, _) in cones.items():
        for q in cone:
            sieve.add_arrow(q, p)
    sections = {}
    for name in sorted({n for m in meshes for n in m.sections}):
        parts = [(r, m.sections[name]) for r, m in enumerate(meshes) if name in m.sections]
        merged = Section(parts[0][1].dtype)
        values: Dict[Point, Tuple[np.ndarray, int]] = {}
        for r, sec in parts:
            for p in sec.points():
                v = sec.restrict(p)
                if v.size == 0:
                    continue
                prev = values.setdefault(p, (v, r))
                if not np.array_equal(prev[0], v):
                    raise ConsistencyError(
                        f"section {name!r} differs at point {p} between ranks {prev[1]} and {r}")
        for p, (v, _) in values.items():
            merged.set_fiber_dimension(p, v.size)
        merged.allocate()
        for p, (v, _) in values.items():
            merged.update(p, v)
        sections[name] = merged
    return Mesh(Topology(sieve, Overlap()), sections, meshes[0].dim, meshes[0].embed_dim)


def mesh_differences(a: Mesh, b: Mesh) -> List[str]:
    """Human-readable structural differences (points, cones, section values)."""
    out = []
    pa, pb = set(a.sieve.points()), set(b.sieve.points())
    if pa != pb:
        out.append(f"points only in first: {sorted(pa - pb)[:10]}, only in second: {sorted(pb - pa)[:10]}")
    for p in sorted(pa & pb):
        if a.sieve.cone(p) != b.sieve.cone(p):
            out.append(f"cone({p}): {a.sieve.cone(p)} != {b.sieve.cone(p)}")
    if (a.dim, a.embed_dim) != (b.dim, b.embed_dim):
        out.append(f"dimensions {(a.dim, a.embed_dim)} != {(b.dim, b.embed_dim)}")
    if set(a.sections) != set(b.sections):
        out.append(f"section names {sorted(a.sections)} != {sorted(b.sections)}")
    for name in sorted(set(a.sections) & set(b.sections)):
        if not section_equal(a.sections[name], b.sections[name]):
            out.append(f"section {name!r} differs")
    return out


def mesh_equal(a: Mesh, b: Mesh) -> bool:
    return not mesh_differences(a, b)


def section_equal(a: Section, b: Section) -> bool:
    """Equality ignoring points with zero fiber dimension."""
    if a.dtype != b.dtype:
        return False
    da = {p: a.fiber_dimension(p) for p in a.points() if a.fiber_dimension(p)}
    db = {p: b.fiber_dimension(p) for p in b.points() if b.fiber_dimension(p)}
    if da != db:
        return False
    return all(np.array_equal(a.restrict(p), b.restrict(p)) for p in da)


def relabel(mesh: Mesh, mapping: Mapping[Point, Point]) -> Mesh:
    """Rename points; unmapped points keep their ids."""
    name = lambda p: mapping.get(p, p)  # noqa: E731
    sieve = Sieve()
    for p in mesh.sieve.points():
        sieve.add_point(name(p))
    for a in mesh.sieve.arrows():
        sieve.add_arrow(name(a.source), name(a.target), a.payload)
    sections = {}
    for key, sec in mesh.sections.items():
        sections[key] = Section.from_values({name(p): sec.restrict(p) for p in sec.points()}, sec.dtype)
    ov = Overlap(mesh.overlap.rank, mesh.overlap.size)
    for d in (SEND, RECV):
        for lk in mesh.overlap.links(d):
            ov.add_link(name(lk.local), lk.rank, lk.remote, d)
    owned = None if mesh.owned is None else tuple(sorted(name(p) for p in mesh.owned))
    return Mesh(Topology(sieve, ov), sections, mesh.dim, mesh.embed_dim, owned)
