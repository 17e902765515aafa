"""Materialize edges (and faces in 3D) in a cells-and-vertices sieve."""

from __future__ import annotations

from typing import Dict, List, Tuple

from ..errors import MeshFormatError
from ..meshops import Mesh, Topology, cells, is_interpolated
from ..sieve import Sieve

# Local faces per (topological dim, vertex count), as cycles of local vertex indices.
REFERENCE_FACES: Dict[Tuple[int, int], List[Tuple[int, ...]]] = {
    (2, 3): [(0, 1), (1, 2), (2, 0)],
    (2, 4): [(0, 1), (1, 2), (2, 3), (3, 0)],
    (3, 4): [(0, 1, 2), (0, 3, 1), (0, 2, 3), (1, 3, 2)],
    (3, 8): [(0, 3, 2, 1), (4, 5, 6, 7), (0, 1, 5, 4),
             (1, 2, 6, 5), (2, 3, 7, 6), (0, 4, 7, 3)],
}


def _cycle_edges(face):
    return [(face[i], face[(i + 1) % len(face)]) for i in range(len(face))]


def interpolate(mesh: Mesh) -> Mesh:
    """Return a copy of ``mesh`` whose cells cover faces/edges instead of vertices.

    New points get ids above every existing id: first the codimension-1
    entities, then (in 3D) edges, each group numbered in order of sorted
    vertex tuples. Already interpolated meshes come back unchanged.
    """
    sieve = mesh.sieve
    if mesh.dim <= 1 or is_interpolated(sieve):
        return mesh.copy()
    top = sorted(cells(sieve))
    cones = {c: sieve.cone(c) for c in top}
    kinds = {len(v) for v in cones.values()}
    if len(kinds) > 1:
        raise MeshFormatError(f"inconsistent cell arity {sorted(kinds)}")
    if not top:
        return mesh.copy()
    key = (mesh.dim, kinds.pop())
    if key not in REFERENCE_FACES:
        raise MeshFormatError(f"no reference element for dim {key[0]} with {key[1]} vertices")
    ref = REFERENCE_FACES[key]

    # codimension-1 entities as vertex cycles, keyed by sorted vertex tuple
    facets: Dict[Tuple[int, ...], Tuple[int, ...]] = {}
    cell_facets = {}
    for c in top:
        vs = cones[c]
        local = [tuple(vs[i] for i in f) for f in ref]
        cell_facets[c] = [tuple(sorted(f)) for f in local]
        for f in local:
            facets.setdefault(tuple(sorted(f)), f)

    next_id = max(sieve.points()) + 1
    facet_ids = {}
    for k in sorted(facets):
        facet_ids[k] = next_id
        next_id += 1

    edge_ids = {}
    facet_edges = {}
    if mesh.dim == 3:
        edges = set()
        for k, cyc in facets.items():
            es = [tuple(sorted(e)) for e in _cycle_edges(cyc)]
            facet_edges[k] = es
            edges.update(es)
        for e in sorted(edges):
            edge_ids[e] = next_id
            next_id += 1

    out = Sieve()
    for p in sieve.points():
        out.add_point(p)
    for c in top:
        out.add_cone(c, [facet_ids[k] for k in cell_facets[c]])
    for k in sorted(facets):
        if mesh.dim == 3:
            out.add_cone(facet_ids[k], [edge_ids[e] for e in facet_edges[k]])
        else:
            out.add_cone(facet_ids[k], k)
    for e in sorted(edge_ids):
        out.add_cone(edge_ids[e], e)
    sections = {name: sec.copy() for name, sec in mesh.sections.items()}
    return Mesh(Topology(out, mesh.overlap.copy()), sections, mesh.dim, mesh.embed_dim, mesh.owned)
