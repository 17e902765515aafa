import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from meshsieve import (SEND, Section, assemble, build_dual, distribute, mesh_equal, partition,
                       partition_points, redistribute)
from meshsieve.errors import ConsistencyError, PartitionError
from meshsieve.fixtures import (TRI8_COLUMNS, TRI8_INITIAL, doublet, doublet_cells,
                                tri8, two_hex, two_hex_interpolated)
from meshsieve.meshops import cell_vertices, cells, is_interpolated, relabel
from meshsieve.overlap import is_mirrored

from oracles import induced_arrows, induced_points, shared_vertex_dual


def arrows_of(sieve):
    return [(a.source, a.target) for a in sieve.arrows()]


def test_cells_and_vertices():
    m = doublet()
    assert m.cells() == (0, 1)
    assert m.vertices() == (7, 8, 9, 10)
    assert cell_vertices(m.sieve, 1) == (8, 7, 10)
    assert is_interpolated(m.sieve) and not is_interpolated(tri8().sieve)


@pytest.mark.parametrize("factory,threshold", [(doublet_cells, 2), (tri8, 2), (two_hex, 3)])
def test_vertex_dual_matches_pair_scan(factory, threshold):
    m = factory()
    cv = {c: cell_vertices(m.sieve, c) for c in m.cells()}
    assert set(build_dual(m).edges) == shared_vertex_dual(cv, threshold)


def test_doublet_dual_single_edge():
    assert build_dual(doublet()).edges == ((0, 1),)
    assert build_dual(doublet(), method="faces").edges == ((0, 1),)
    assert len(build_dual(tri8()).edges) == 8


@pytest.mark.parametrize("factory", [doublet, two_hex_interpolated])
def test_face_and_vertex_duals_agree(factory):
    m = factory()
    assert build_dual(m, method="faces").edges == build_dual(m, method="vertices").edges


def test_face_dual_needs_interpolation():
    with pytest.raises(PartitionError):
        build_dual(tri8(), method="faces")


@pytest.mark.parametrize("method", ["block", "greedy-bfs"])
@pytest.mark.parametrize("nparts", [1, 2, 3, 4, 8])
def test_partitions_are_balanced_and_total(method, nparts):
    dual = build_dual(tri8())
    assignment = partition(dual, nparts, method)
    assert sorted(assignment) == list(dual.vertices)
    counts = [list(assignment.values()).count(k) for k in range(nparts)]
    assert max(counts) - min(counts) <= 1 and min(counts) >= 1


def test_partition_rejects_too_many_parts():
    with pytest.raises(PartitionError):
        partition(build_dual(doublet()), 3)


def test_partition_points_closure_and_star():
    m = doublet()
    sets = partition_points(m.sieve, {0: 0, 1: 1}, 2)
    assert sets[1] == (1, 4, 5, 6, 7, 8, 10)
    faces = partition_points(m.sieve, {4: 0, 2: 1, 3: 1, 5: 1, 6: 1}, 2)
    assert set(faces[0]) == {4, 7, 8, 0, 1, 2, 3, 5, 6, 9, 10}


def test_assignment_validation():
    m = doublet()
    with pytest.raises(PartitionError):
        distribute(m, {0: 0})
    with pytest.raises(PartitionError):
        distribute(m, {0: 0, 1: 0, 4: 1})
    with pytest.raises(PartitionError):
        distribute(m, {0: 0, 1: 5}, 2)


def test_single_rank_is_identity():
    m = tri8()
    dm = distribute(m, {c: 0 for c in m.cells()}, 1)
    assert mesh_equal(dm[0], m)
    assert dm[0].overlap.is_empty()
    assert dm.transcript == []


def test_doublet_on_two_ranks():
    m = doublet()
    dm = distribute(m, {0: 0, 1: 1})
    assert dm[1].sieve.points() == (1, 4, 5, 6, 7, 8, 10)
    assert set(arrows_of(dm[1].sieve)) == induced_arrows(arrows_of(m.sieve), set(dm[1].sieve.points()))
    assert dm[1].coordinates.restrict(10).tolist() == [1.0, 1.0]
    shared = {lk.local for lk in dm[0].overlap.links(SEND)}
    assert shared == {4, 7, 8}
    assert is_mirrored([p.overlap for p in dm.meshes])
    assert mesh_equal(assemble(dm), m)


def test_tri8_columns():
    m = tri8()
    dm = distribute(m, TRI8_COLUMNS)
    piece = dm[1]
    assert piece.cells() == (3, 5, 6, 7)
    assert len(piece.vertices()) == 6
    assert piece.owned_elements() == (3, 5, 6, 7)
    assert piece.overlap.local_points() == (9, 12, 15)
    assert is_mirrored([p.overlap for p in dm.meshes])
    assert mesh_equal(assemble(dm), m)


def test_migration_overlap_relates_to_source():
    dm = distribute(tri8(), TRI8_COLUMNS)
    sent = {lk.local for lk in dm.migration[0].links(SEND)}
    assert sent == set(dm[1].sieve.points())


def test_face_partition_makes_ghost_cells():
    m = two_hex_interpolated()
    faces = m.sieve.height_stratum(1)
    shared = [f for f in faces if len(m.sieve.support(f)) == 2]
    assert len(shared) == 1
    assignment = {f: (1 if f == shared[0] else 0) for f in faces}
    dm = distribute(m, assignment)
    assert dm[0].cells() == (0, 1) and dm[1].cells() == (0, 1)
    assert mesh_equal(assemble(dm), m)


@settings(max_examples=25, deadline=None)
@given(st.lists(st.integers(0, 3), min_size=8, max_size=8))
def test_random_assignments_round_trip(ranks):
    m = tri8()
    assignment = dict(enumerate(ranks))
    nparts = max(ranks) + 1
    dm = distribute(m, assignment, nparts)
    arrows = arrows_of(m.sieve)
    for k, piece in enumerate(dm.meshes):
        mine = [c for c, r in assignment.items() if r == k]
        assert set(piece.sieve.points()) == induced_points(arrows, mine)
    assert is_mirrored([p.overlap for p in dm.meshes])
    assert mesh_equal(assemble(dm), m)


def test_redistribution_matches_direct_distribution():
    m = tri8()
    start = distribute(m, TRI8_INITIAL)
    moved = redistribute(start, TRI8_COLUMNS)
    direct = distribute(m, TRI8_COLUMNS)
    for a, b in zip(moved.meshes, direct.meshes):
        assert a.sieve == b.sieve
        assert a.coordinates == b.coordinates
        assert a.overlap == b.overlap


def test_redistribution_requires_full_assignment():
    start = distribute(tri8(), TRI8_INITIAL)
    with pytest.raises(PartitionError):
        redistribute(start, {0: 0})


def test_assemble_detects_disagreement():
    dm = distribute(doublet(), {0: 0, 1: 1})
    bad = dm[1].copy()
    bad.sieve.add_arrow(9, 4)
    with pytest.raises(ConsistencyError, match="cone"):
        assemble([dm[0], bad])
    bad = dm[1].copy()
    bad.coordinates.update(8, (5.0, 5.0))
    with pytest.raises(ConsistencyError, match="coordinates"):
        assemble([dm[0], bad])
    bad = dm[1].copy()
    bad.overlap.add_link(4, 0, 77)
    with pytest.raises(ConsistencyError):
        assemble([dm[0], bad])


def test_extra_sections_travel():
    m = tri8()
    m.sections["pressure"] = Section.from_values({c: (float(c),) for c in m.cells()})
    dm = distribute(m, TRI8_COLUMNS)
    assert dm[1].sections["pressure"].points() == (3, 5, 6, 7)
    assert mesh_equal(assemble(dm), m)


def test_relabel():
    m = doublet_cells()
    r = relabel(m, {0: 100})
    assert r.cells() == (1, 100)
    assert r.sieve.cone(100) == m.sieve.cone(0)
