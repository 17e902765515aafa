import numpy as np
import pytest

from meshsieve import (RECV, SEND, ConstantSection, Delta, Overlap, ProcessGroup, Section, Sieve,
                       atlas_sizer, complete_section, cone_sections, fuse, run_group)
from meshsieve.completion import OverlapSection, support_sections
from meshsieve.errors import DimensionError, ProtocolError
from meshsieve.fixtures import doublet_sieve
from meshsieve.overlap import OverlapLink


def shared_overlap(rank, pairs):
    """Rank 0 sends (local, remote) pairs to rank 1, which receives them."""
    ov = Overlap(rank, 2)
    for p, q in pairs:
        if rank == 0:
            ov.add_link(p, 1, q, SEND)
        else:
            ov.add_link(q, 0, p, RECV)
    return ov


def test_empty_overlap_sends_nothing():
    g = ProcessGroup(3)

    def prog(comm):
        ov = Overlap(comm.rank, comm.size)
        sec = Section.from_values({0: (1.0,)})
        return len(complete_section(ov, ov, atlas_sizer(sec), sec, comm))
    assert g.run(prog) == [0, 0, 0]
    assert g.transcript == []


def test_section_values_arrive_under_local_names():
    pairs = [(1, 11), (2, 12), (3, 13)]
    src = Section.from_values({1: (1.0, 1.5), 2: (2.0,), 3: ()})

    def prog(comm):
        ov = shared_overlap(comm.rank, pairs)
        sec = src if comm.rank == 0 else Section.from_values({})
        got = complete_section(ov, ov, atlas_sizer(sec), sec, comm, tag="f")
        return {lk.local: v.tolist() for lk, v in got.items()}
    assert run_group(2, prog) == [{}, {11: [1.0, 1.5], 12: [2.0], 13: []}]


def test_constant_sizer_skips_a_phase():
    g = ProcessGroup(2)
    src = Section.from_values({1: (4.0,), 2: (5.0,)})

    def prog(comm):
        ov = shared_overlap(comm.rank, [(1, 1), (2, 2)])
        got = complete_section(ov, ov, ConstantSection(1), src, comm, tag="c")
        return [v.tolist() for _, v in got.items()]
    assert g.run(prog)[1] == [[4.0], [5.0]]
    assert [m.tag for m in g.transcript] == ["c/data"]


def test_cone_completion_and_byte_equality():
    sieve = doublet_sieve()
    pairs = [(p, p) for p in (1, 4, 5, 6)]
    g = ProcessGroup(2)

    def prog(comm):
        ov = shared_overlap(comm.rank, pairs)
        src = sieve if comm.rank == 0 else Sieve()
        size, cone = cone_sections(src)
        return complete_section(ov, ov, size, cone, comm, tag="cone")
    _, got = g.run(prog)
    for lk, vals in got.items():
        assert vals.astype("<i8").tobytes() == np.asarray(sieve.cone(lk.remote), "<i8").tobytes()
    local = Sieve()
    fuse(local, got)
    assert local.cone(1) == (4, 5, 6) and local.cone(4) == (8, 7)
    snapshot = local.copy()
    fuse(local, got)
    assert local == snapshot


def test_support_completion_fuses_transposed_arrows():
    sieve = doublet_sieve()

    def prog(comm):
        ov = shared_overlap(comm.rank, [(8, 8)])
        src = sieve if comm.rank == 0 else Sieve()
        size, sup = support_sections(src)
        return complete_section(ov, ov, size, sup, comm, tag="support")
    local = Sieve()
    fuse(local, run_group(2, prog)[1], direction="support")
    assert local.support(8) == (2, 4, 6)


def test_short_buffer_is_a_protocol_error():
    sec = OverlapSection([OverlapLink(0, 1, 0)], [2], "<f8")
    with pytest.raises(ProtocolError):
        sec.unpack(1, b"\x00" * 8)


def test_sizer_lying_about_size_is_caught():
    src = Section.from_values({1: (1.0, 2.0)})

    def prog(comm):
        ov = shared_overlap(comm.rank, [(1, 1)])
        complete_section(ov, ov, ConstantSection(1), src, comm)
    with pytest.raises(ProtocolError):
        run_group(2, prog)


def received(pairs_values, dtype="<f8"):
    links = [OverlapLink(p, 1, p) for p, _ in pairs_values]
    sec = OverlapSection(links, [len(v) for _, v in pairs_values], dtype)
    for i, (_, v) in enumerate(pairs_values):
        sec.values(i)[:] = v
    return sec


def test_fuse_section_modes():
    base = Section.from_values({0: (1.0,), 1: (2.0,)})
    got = received([(1, (5.0,)), (2, (7.0, 8.0))])
    ins = base.copy()
    fuse(ins, got, Delta.INSERT)
    assert ins.restrict(1).tolist() == [2.0] and ins.restrict(2).tolist() == [7.0, 8.0]
    rep = base.copy()
    fuse(rep, got, "replace")
    assert rep.restrict(1).tolist() == [5.0]
    add = base.copy()
    fuse(add, received([(1, (5.0,))]), Delta.ADD)
    assert add.restrict(1).tolist() == [7.0]
    again = ins.copy()
    fuse(again, got, Delta.INSERT)
    assert again == ins


def test_fuse_dimension_conflict():
    base = Section.from_values({1: (2.0,)})
    with pytest.raises(DimensionError):
        fuse(base, received([(1, (5.0, 6.0))]), Delta.REPLACE)


def test_fuse_sieve_replace_and_add():
    s = Sieve([(9, 1)])
    fuse(s, received([(1, (2, 3))], "<i8"), Delta.REPLACE)
    assert s.cone(1) == (2, 3)
    with pytest.raises(ValueError):
        fuse(s, received([(1, (4,))], "<i8"), Delta.ADD)
