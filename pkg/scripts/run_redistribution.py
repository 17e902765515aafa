"""Redistribute tri8 from one two-rank split to another and compare with a
direct distribution to the target split."""

import argparse

from meshsieve import ProcessGroup, distribute, redistribute
from meshsieve.fixtures import TRI8_COLUMNS, TRI8_INITIAL, tri8


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--transcript", action="store_true", help="print the redistribution messages")
    args = ap.parse_args(argv)

    mesh = tri8()
    start = distribute(mesh, TRI8_INITIAL, 2)
    group = ProcessGroup(2)
    moved = redistribute(start, TRI8_COLUMNS, group)
    direct = distribute(mesh, TRI8_COLUMNS, 2)
    for k in range(2):
        a, b = moved[k], direct[k]
        same = a.sieve == b.sieve and a.coordinates == b.coordinates and a.overlap == b.overlap
        print(f"rank {k}: cells {list(start[k].cells())} -> {list(a.cells())}, "
              f"{'matches' if same else 'DIFFERS FROM'} direct distribution")
    sent = {}
    for m in group.transcript:
        if m.tag.endswith("/data"):
            sent[m.src] = sent.get(m.src, 0) + m.nbytes
    print("data bytes sent per rank:", dict(sorted(sent.items())))
    if args.transcript:
        print(group.dump_transcript(), end="")


if __name__ == "__main__":
    main()
