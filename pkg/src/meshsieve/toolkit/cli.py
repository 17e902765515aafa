"""Command line front end.

Exit status: 0 on success, 1 for usage errors, 2 for data errors.
"""

from __future__ import annotations

import argparse
import glob
import os
import re
import sys
from dataclasses import dataclass
from typing import List, Optional

from ..comm import ProcessGroup
from ..errors import MeshSieveError
from ..meshops import (DistributedMesh, assemble, build_dual, distribute, facet_graph,
                       mesh_differences, partition, redistribute)
from .dot import export_dot
from .interpolate import interpolate
from .meshio import load_mesh, read_assignment, save_mesh, write_assignment

EXIT_OK, EXIT_USAGE, EXIT_DATA = 0, 1, 2

QUERY_OPS = ("cone", "support", "closure", "star", "meet", "join", "depth", "height")


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(f"{self.prog}: {message}")


@dataclass
class CliConfig:
    command: str
    input: Optional[str] = None
    ranks: Optional[int] = None
    method: str = "block"
    assignment: Optional[str] = None
    out: Optional[str] = None
    interpolate: bool = False
    op: Optional[str] = None
    points: Optional[List[int]] = None
    serial: Optional[str] = None
    dual_method: str = "vertices"
    elements: str = "cells"
    transcript: bool = False
    overlap: bool = False

    def validate(self):
        if self.ranks is not None and self.ranks < 1:
            raise UsageError("--ranks must be at least 1")
        if self.command == "query":
            need = 2 if self.op in ("meet", "join") else 1
            if not self.points or len(self.points) != need:
                raise UsageError(f"--op {self.op} takes {need} point(s)")
        if self.command == "distribute" and self.ranks is None and self.assignment is None:
            raise UsageError("distribute needs --ranks or --assignment")
        if self.command == "redistribute" and self.assignment is None:
            raise UsageError("redistribute needs --assignment")
        return self


def _points(text):
    try:
        return [int(t) for t in text.split(",") if t.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated point ids, got {text!r}")


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="meshsieve", description="Sieve mesh topology and distribution tools")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    q = sub.add_parser("query", help="cone/support/closure/star/meet/join/depth of points")
    q.add_argument("--op", required=True, choices=QUERY_OPS)
    q.add_argument("--points", required=True, type=_points)
    q.add_argument("--interpolate", action="store_true")
    q.add_argument("input")

    d = sub.add_parser("dual", help="print the dual graph edges")
    d.add_argument("--method", dest="dual_method", choices=("vertices", "faces"), default="vertices")
    d.add_argument("--interpolate", action="store_true")
    d.add_argument("input")

    pa = sub.add_parser("partition", help="partition cells and print the assignment")
    pa.add_argument("--ranks", type=int, required=True)
    pa.add_argument("--method", choices=("block", "greedy-bfs"), default="block")
    pa.add_argument("-o", "--out")
    pa.add_argument("input")

    di = sub.add_parser("distribute", help="distribute a mesh file onto simulated ranks")
    di.add_argument("--ranks", type=int)
    di.add_argument("--method", choices=("block", "greedy-bfs"), default="block")
    di.add_argument("--assignment")
    di.add_argument("--elements", choices=("cells", "faces"), default="cells",
                    help="what --ranks partitions; faces need --interpolate or an interpolated file")
    di.add_argument("--interpolate", action="store_true")
    di.add_argument("--transcript", action="store_true", help="print the message log")
    di.add_argument("--out", default="dist")
    di.add_argument("input")

    re_ = sub.add_parser("redistribute", help="move rank files to a new assignment")
    re_.add_argument("--assignment", required=True)
    re_.add_argument("--transcript", action="store_true")
    re_.add_argument("--out", required=True)
    re_.add_argument("input", help="directory of rank<k>.mesh files")

    c = sub.add_parser("check", help="assemble rank files and compare with the serial mesh")
    c.add_argument("--serial")
    c.add_argument("--interpolate", action="store_true")
    c.add_argument("input", help="directory of rank<k>.mesh files")

    g = sub.add_parser("dot", help="render a mesh sieve (or its overlap) as DOT")
    g.add_argument("--overlap", action="store_true")
    g.add_argument("--interpolate", action="store_true")
    g.add_argument("input")
    return p


def parse_args(argv) -> CliConfig:
    ns = build_parser().parse_args(argv)
    return CliConfig(**{k: v for k, v in vars(ns).items()}).validate()


def _load(path, interp=False):
    mesh = load_mesh(path)
    return interpolate(mesh) if interp else mesh


def _fmt(seq):
    return "{" + ", ".join(str(p) for p in seq) + "}"


def _rank_files(directory):
    found = []
    for path in glob.glob(os.path.join(directory, "rank*.mesh")):
        m = re.fullmatch(r"rank(\d+)\.mesh", os.path.basename(path))
        if m:
            found.append((int(m.group(1)), path))
    found.sort()
    if not found or [k for k, _ in found] != list(range(len(found))):
        raise MeshSieveError(f"{directory}: expected rank0.mesh .. rank<P-1>.mesh")
    return [p for _, p in found]


def _write_ranks(dm: DistributedMesh, out):
    os.makedirs(out, exist_ok=True)
    for stale in glob.glob(os.path.join(out, "rank*.mesh")):
        os.remove(stale)
    for k, mesh in enumerate(dm.meshes):
        save_mesh(mesh, os.path.join(out, f"rank{k}.mesh"))


def _print_transcript(dm, stream):
    for m in dm.transcript:
        print(f"{m.phase} {m.tag} {m.src} {m.dst} {m.nbytes}", file=stream)


def run(cfg: CliConfig, stdout=None) -> int:
    stdout = stdout or sys.stdout
    if cfg.command == "query":
        sieve = _load(cfg.input, cfg.interpolate).sieve
        op = getattr(sieve, cfg.op)
        result = op(*cfg.points)
        args = ",".join(str(p) for p in cfg.points)
        if isinstance(result, int):
            print(f"{cfg.op}({args}) = {result}", file=stdout)
        else:
            print(f"{cfg.op}({args}) = {_fmt(result)}", file=stdout)
    elif cfg.command == "dual":
        dual = build_dual(_load(cfg.input, cfg.interpolate), method=cfg.dual_method)
        for a, b in dual.edges:
            print(f"{a} {b}", file=stdout)
    elif cfg.command == "partition":
        mesh = _load(cfg.input)
        text = write_assignment(partition(build_dual(mesh), cfg.ranks, cfg.method))
        if cfg.out:
            with open(cfg.out, "w") as f:
                f.write(text)
        else:
            stdout.write(text)
    elif cfg.command == "distribute":
        mesh = _load(cfg.input, cfg.interpolate)
        if cfg.assignment:
            with open(cfg.assignment) as f:
                assignment = read_assignment(f.read())
        else:
            graph = facet_graph(mesh) if cfg.elements == "faces" else build_dual(mesh)
            assignment = partition(graph, cfg.ranks, cfg.method)
        nranks = cfg.ranks or max(assignment.values()) + 1
        dm = distribute(mesh, assignment, ProcessGroup(nranks))
        _write_ranks(dm, cfg.out)
        if cfg.transcript:
            _print_transcript(dm, stdout)
        print(f"wrote {nranks} rank file(s) to {cfg.out}", file=sys.stderr)
    elif cfg.command == "redistribute":
        meshes = [load_mesh(p) for p in _rank_files(cfg.input)]
        with open(cfg.assignment) as f:
            assignment = read_assignment(f.read())
        dm = redistribute(DistributedMesh(meshes, []), assignment, ProcessGroup(len(meshes)))
        _write_ranks(dm, cfg.out)
        if cfg.transcript:
            _print_transcript(dm, stdout)
    elif cfg.command == "check":
        meshes = [load_mesh(p) for p in _rank_files(cfg.input)]
        whole = assemble(meshes)
        if cfg.serial:
            diffs = mesh_differences(whole, _load(cfg.serial, cfg.interpolate))
            if diffs:
                for line in diffs:
                    print(line, file=sys.stderr)
                print("round-trip FAILED", file=stdout)
                return EXIT_DATA
        print(f"round-trip OK ({len(meshes)} rank(s), {len(whole.sieve)} points)", file=stdout)
    elif cfg.command == "dot":
        mesh = _load(cfg.input, cfg.interpolate)
        stdout.write(export_dot(mesh.overlap if cfg.overlap else mesh.sieve))
    return EXIT_OK


def main(argv=None) -> int:
    argv = sys.argv[1:] if argv is None else argv
    try:
        cfg = parse_args(argv)
    except UsageError as exc:
        print(exc, file=sys.stderr)
        return EXIT_USAGE
    try:
        return run(cfg)
    except (MeshSieveError, OSError) as exc:
        print(f"meshsieve: error: {exc}", file=sys.stderr)
        return EXIT_DATA


if __name__ == "__main__":
    sys.exit(main())
