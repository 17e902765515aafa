"""Graphviz DOT rendering of sieves and overlaps."""

from __future__ import annotations

from typing import Iterable

from ..overlap import RECV, SEND, Overlap
from ..sieve import Sieve


def sieve_to_dot(sieve: Sieve, name: str = "sieve") -> str:
    """One row per depth stratum, vertices on top, arrows pointing down."""
    depth = sieve.stratify()[0]
    lines = [f"digraph {name} {{"]
    if len(sieve):
        lines.append("  rankdir=TB;")
        lines.append("  node [shape=circle];")
        for d in range(max(depth.values()) + 1):
            row = " ".join(f'"{p}";' for p in sieve.depth_stratum(d))
            lines.append(f"  {{ rank=same; {row} }}")
        for t in sorted(sieve.points()):
            for s in sieve.cone(t):
                lines.append(f'  "{s}" -> "{t}";')
    lines.append("}")
    return "\n".join(lines) + "\n"


def overlap_to_dot(overlaps, name: str = "overlap") -> str:
    """Send and receive sides of each rank's overlap as clusters.

    Local points are filled dark, remote ranks light, and each arrow carries
    the remote point name as its label.
    """
    if isinstance(overlaps, Overlap):
        overlaps = [overlaps]
    lines = [f"digraph {name} {{"]
    for ov in overlaps:
        for d in (SEND, RECV):
            links = ov.links(d)
            prefix = f"r{ov.rank}{d}"
            lines.append(f"  subgraph cluster_{prefix} {{")
            lines.append(f'    label="{d} overlap, rank {ov.rank}";')
            for p in sorted({lk.local for lk in links}):
                lines.append(f'    "{prefix}:p{p}" [label="{p}", shape=circle, style=filled, '
                             'fillcolor=gray25, fontcolor=white];')
            for r in sorted({lk.rank for lk in links}):
                lines.append(f'    "{prefix}:rank{r}" [label="{r}", shape=circle, style=filled, '
                             'fillcolor=gray90];')
            for lk in links:
                a, b = f"{prefix}:p{lk.local}", f"{prefix}:rank{lk.rank}"
                if d == RECV:
                    a, b = b, a
                lines.append(f'    "{a}" -> "{b}" [label="{lk.remote}"];')
            lines.append("  }")
    lines.append("}")
    return "\n".join(lines) + "\n"


def export_dot(obj, name: str = None) -> str:
    if isinstance(obj, Sieve):
        return sieve_to_dot(obj, name or "sieve")
    if isinstance(obj, Overlap) or (isinstance(obj, Iterable) and not isinstance(obj, str)):
        return overlap_to_dot(obj, name or "overlap")
    if hasattr(obj, "sieve"):
        return sieve_to_dot(obj.sieve, name or "sieve")
    raise TypeError(f"cannot render {type(obj).__name__}")
