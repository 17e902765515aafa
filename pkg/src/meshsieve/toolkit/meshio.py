"""Plain-text mesh format.

::

    dim <topo> <embed>
    cells <C> <arity>
    <arity vertex indices>          C rows, 0-based into the vertex block
    vertices <V>
    <embed coordinates>             V rows

Points are numbered cells first (0..C-1), then vertices (C..C+V-1). Local
pieces and interpolated meshes need more than that, so these optional
blocks may follow, in this order:

``global <C+V>``
    one point id per row, cells then vertices, replacing the default ids
``sieve <A>``
    ``source target`` rows; the complete covering relation, used instead of
    the cell rows (needed when edges or faces are materialized)
``owned <n>``
    ids of the elements assigned to this piece
``overlap <n> <rank> <size>``
    ``send|recv local rank remote`` rows

The writer emits an optional block only when it carries information, so a
plain cells-and-vertices mesh round-trips to the basic format.
"""

from __future__ import annotations

from typing import List, Optional

import numpy as np

from ..errors import MeshFormatError, OverlapError
from ..meshops import COORDINATES, Mesh, Topology, cell_vertices, cells, is_interpolated
from ..overlap import RECV, SEND, Overlap
from ..section import Section
from ..sieve import Sieve


class _Lines:
    def __init__(self, text: str):
        self.rows = [(i + 1, ln.split()) for i, ln in enumerate(text.splitlines())]
        self.pos = 0

    def _skip_blank(self):
        while self.pos < len(self.rows) and not self.rows[self.pos][1]:
            self.pos += 1

    def at_end(self) -> bool:
        self._skip_blank()
        return self.pos >= len(self.rows)

    def peek_keyword(self) -> Optional[str]:
        self._skip_blank()
        return self.rows[self.pos][1][0] if self.pos < len(self.rows) else None

    def header(self, keyword: str, nargs: int) -> List[int]:
        self._skip_blank()
        if self.pos >= len(self.rows):
            raise MeshFormatError(f"expected '{keyword}' header, got end of file",
                                  self.rows[-1][0] if self.rows else 1)
        lineno, toks = self.rows[self.pos]
        if toks[0] != keyword or len(toks) != nargs + 1:
            raise MeshFormatError(f"expected '{keyword}' with {nargs} integers", lineno)
        self.pos += 1
        return [self._int(t, lineno) for t in toks[1:]]

    def row(self, what: str):
        # coordinate rows may be empty when embed dim is 0, so blanks are not skipped
        if self.pos >= len(self.rows):
            raise MeshFormatError(f"missing {what} row at end of file",
                                  self.rows[-1][0] if self.rows else 1)
        lineno, toks = self.rows[self.pos]
        self.pos += 1
        return lineno, toks

    @staticmethod
    def _int(tok, lineno):
        try:
            return int(tok)
        except ValueError:
            raise MeshFormatError(f"expected an integer, got {tok!r}", lineno) from None


def read_mesh(text: str) -> Mesh:
    lines = _Lines(text)
    dim, embed = lines.header("dim", 2)
    ncells, arity = lines.header("cells", 2)
    rows = []
    for _ in range(ncells):
        lineno, toks = lines.row("cell")
        if len(toks) != arity:
            raise MeshFormatError(f"cell row has {len(toks)} entries, arity is {arity}", lineno)
        rows.append((lineno, [lines._int(t, lineno) for t in toks]))
    (nverts,) = lines.header("vertices", 1)
    coords = []
    for _ in range(nverts):
        lineno, toks = lines.row("vertex")
        if len(toks) != embed:
            raise MeshFormatError(f"vertex row has {len(toks)} coordinates, expected {embed}", lineno)
        try:
            coords.append([float(t) for t in toks])
        except ValueError:
            raise MeshFormatError("bad coordinate", lineno) from None
    for lineno, vs in rows:
        for v in vs:
            if not 0 <= v < nverts:
                raise MeshFormatError(f"cell references missing vertex {v}", lineno)

    ids = list(range(ncells + nverts))
    if lines.peek_keyword() == "global":
        (n,) = lines.header("global", 1)
        if n != ncells + nverts:
            raise MeshFormatError(f"global block lists {n} ids, mesh has {ncells + nverts} points",
                                  lines.rows[lines.pos - 1][0])
        ids = []
        for _ in range(n):
            lineno, toks = lines.row("global id")
            if len(toks) != 1:
                raise MeshFormatError("global rows hold one id", lineno)
            ids.append(lines._int(toks[0], lineno))
        if len(set(ids)) != len(ids):
            raise MeshFormatError("global ids repeat")
    cell_ids, vert_ids = ids[:ncells], ids[ncells:]

    sieve = Sieve()
    for p in cell_ids + vert_ids:
        sieve.add_point(p)
    if lines.peek_keyword() == "sieve":
        (narrows,) = lines.header("sieve", 1)
        for _ in range(narrows):
            lineno, toks = lines.row("arrow")
            if len(toks) != 2:
                raise MeshFormatError("arrow rows hold 'source target'", lineno)
            s, t = (lines._int(x, lineno) for x in toks)
            if s == t:
                raise MeshFormatError(f"point {s} covers itself", lineno)
            sieve.add_arrow(s, t)
        for (lineno, vs), c in zip(rows, cell_ids):
            if set(cell_vertices(sieve, c)) != {vert_ids[v] for v in vs}:
                raise MeshFormatError(f"cell {c} row disagrees with the sieve block", lineno)
    else:
        for (_, vs), c in zip(rows, cell_ids):
            sieve.add_cone(c, [vert_ids[v] for v in vs])

    owned = None
    if lines.peek_keyword() == "owned":
        (n,) = lines.header("owned", 1)
        owned = []
        for _ in range(n):
            lineno, toks = lines.row("owned id")
            if len(toks) != 1:
                raise MeshFormatError("owned rows hold one id", lineno)
            owned.append(lines._int(toks[0], lineno))
        owned = tuple(owned)

    overlap = Overlap()
    if lines.peek_keyword() == "overlap":
        n, rank, size = lines.header("overlap", 3)
        overlap = Overlap(rank, size or None)
        for _ in range(n):
            lineno, toks = lines.row("overlap link")
            if len(toks) != 4 or toks[0] not in (SEND, RECV):
                raise MeshFormatError("overlap rows hold 'send|recv local rank remote'", lineno)
            local, r, remote = (lines._int(x, lineno) for x in toks[1:])
            try:
                overlap.add_link(local, r, remote, toks[0])
            except OverlapError as exc:
                raise MeshFormatError(str(exc), lineno) from None
    if not lines.at_end():
        raise MeshFormatError("unexpected trailing content", lines.rows[lines.pos][0])

    coordinates = Section()
    for p, xyz in zip(vert_ids, coords):
        coordinates.set_fiber_dimension(p, embed)
    coordinates.allocate()
    for p, xyz in zip(vert_ids, coords):
        coordinates.update(p, xyz)
    return Mesh(Topology(sieve, overlap), {COORDINATES: coordinates}, dim, embed, owned)


def write_mesh(mesh: Mesh) -> str:
    sieve = mesh.sieve
    cell_ids = sorted(cells(sieve))
    vert_ids = sorted(p for p in sieve.points() if not sieve.cone(p))
    rows = [cell_vertices(sieve, c) for c in cell_ids]
    arities = {len(r) for r in rows}
    if len(arities) > 1:
        raise MeshFormatError(f"cells have mixed vertex counts {sorted(arities)}")
    arity = arities.pop() if arities else 0
    index = {v: i for i, v in enumerate(vert_ids)}
    coords = mesh.coordinates

    out = [f"dim {mesh.dim} {mesh.embed_dim}", f"cells {len(cell_ids)} {arity}"]
    out += [" ".join(str(index[v]) for v in r) for r in rows]
    out.append(f"vertices {len(vert_ids)}")
    for v in vert_ids:
        vals = coords.restrict(v) if coords is not None else np.zeros(0)
        if vals.size != mesh.embed_dim:
            raise MeshFormatError(f"vertex {v} has {vals.size} coordinates, expected {mesh.embed_dim}")
        out.append(" ".join(repr(float(x)) for x in vals))

    ids = cell_ids + vert_ids
    if ids != list(range(len(ids))):
        out.append(f"global {len(ids)}")
        out += [str(p) for p in ids]
    if is_interpolated(sieve):
        arrows = [(s, t) for t in sorted(sieve.points()) for s in sieve.cone(t)]
        out.append(f"sieve {len(arrows)}")
        out += [f"{s} {t}" for s, t in arrows]
    if mesh.owned is not None and tuple(mesh.owned) != tuple(cell_ids):
        out.append(f"owned {len(mesh.owned)}")
        out += [str(p) for p in mesh.owned]
    ov = mesh.overlap
    if not ov.is_empty():
        links = [(d, lk) for d in (SEND, RECV) for lk in ov.links(d)]
        out.append(f"overlap {len(links)} {ov.rank} {ov.size if ov.size is not None else 0}")
        out += [f"{d} {lk.local} {lk.rank} {lk.remote}" for d, lk in links]
    return "\n".join(out) + "\n"


def load_mesh(path) -> Mesh:
    with open(path) as f:
        return read_mesh(f.read())


def save_mesh(mesh: Mesh, path) -> None:
    with open(path, "w") as f:
        f.write(write_mesh(mesh))


def read_assignment(text: str) -> dict:
    """``elementId rank`` per line."""
    out = {}
    for lineno, line in enumerate(text.splitlines(), 1):
        toks = line.split()
        if not toks or toks[0].startswith("#"):
            continue
        if len(toks) != 2:
            raise MeshFormatError("assignment rows hold 'elementId rank'", lineno)
        try:
            e, r = int(toks[0]), int(toks[1])
        except ValueError:
            raise MeshFormatError("assignment entries must be integers", lineno) from None
        if e in out:
            raise MeshFormatError(f"element {e} assigned twice", lineno)
        out[e] = r
    return out


def write_assignment(assignment: dict) -> str:
    return "".join(f"{e} {r}\n" for e, r in sorted(assignment.items()))
