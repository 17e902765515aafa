"""Sieve: arrow-based mesh topology, sections, and distribution by section completion."""

from .comm import Comm, ProcessGroup, run_group
from .completion import (AtlasSizer, ConeSection, ConeSizeSection, OverlapSection,
                         PartitionSection, PartitionSizeSection, atlas_sizer, complete_section,
                         cone_sections, fuse, partition_sections)
from .errors import *  # noqa: F401,F403
from .meshops import (DistributedMesh, DualGraph, Mesh, Topology, assemble, build_dual,
                      distribute, mesh_equal, partition, partition_points, redistribute)
from .overlap import RECV, SEND, Delta, Overlap, OverlapLink
from .section import POINT, REAL, ConstantSection, Section, restrict_closure, restrict_star
from .sieve import Arrow, Sieve

__version__ = "0.1.0"
