"""Small reference meshes used by tests, scripts and the CLI examples."""

from __future__ import annotations

import itertools

from .meshops import Mesh
from .section import Section
from .sieve import Sieve

# Two triangles sharing edge 4: cells 0-1, edges 2-6, vertices 7-10.
DOUBLET_CONES = {
    0: (2, 3, 4),
    1: (4, 5, 6),
    2: (8, 9),
    3: (7, 9),
    4: (8, 7),
    5: (7, 10),
    6: (8, 10),
}
DOUBLET_COORDINATES = {7: (1.0, 0.0), 8: (0.0, 1.0), 9: (0.0, 0.0), 10: (1.0, 1.0)}

# 3x3 vertex grid, each square cut along its (x, y)-(x+1, y+1) diagonal.
# Left column of squares holds triangles 0, 1, 2, 4; the right column 3, 5, 6, 7.
TRI8_SQUARES = {(0, 0): (0, 1), (0, 1): (2, 4), (1, 0): (3, 5), (1, 1): (6, 7)}

TRI8_COLUMNS = {0: 0, 1: 0, 2: 0, 4: 0, 3: 1, 5: 1, 6: 1, 7: 1}
TRI8_INITIAL = {4: 0, 5: 0, 6: 0, 7: 0, 0: 1, 1: 1, 2: 1, 3: 1}


def doublet_sieve() -> Sieve:
    sieve = Sieve()
    for cell, cone in DOUBLET_CONES.items():
        sieve.add_cone(cell, cone)
    return sieve


def doublet() -> Mesh:
    """Interpolated two-triangle mesh with unit-square coordinates."""
    coords = Section.from_values(DOUBLET_COORDINATES)
    return Mesh.from_sieve(doublet_sieve(), coords, dim=2, embed_dim=2)


def doublet_cells() -> Mesh:
    """The doublet with only cells and vertices: cells 0-1, vertices 2-5."""
    rename = {7: 2, 8: 3, 9: 4, 10: 5}
    sieve = Sieve()
    sieve.add_cone(0, [rename[v] for v in (8, 9, 7)])
    sieve.add_cone(1, [rename[v] for v in (8, 7, 10)])
    coords = Section.from_values({rename[v]: x for v, x in DOUBLET_COORDINATES.items()})
    return Mesh.from_sieve(sieve, coords, dim=2, embed_dim=2)


def tri8() -> Mesh:
    """Eight triangles on a 2x2 grid of unit squares; cells 0-7, vertices 8-16."""
    vid = lambda x, y: 8 + 3 * y + x  # noqa: E731
    sieve = Sieve()
    cones = {}
    for (x, y), (lower, upper) in TRI8_SQUARES.items():
        a, b, c, d = vid(x, y), vid(x + 1, y), vid(x + 1, y + 1), vid(x, y + 1)
        cones[lower] = (a, b, c)
        cones[upper] = (a, c, d)
    for cell in sorted(cones):
        sieve.add_cone(cell, cones[cell])
    coords = Section.from_values(
        {vid(x, y): (float(x), float(y)) for x, y in itertools.product(range(3), repeat=2)})
    return Mesh.from_sieve(sieve, coords, dim=2, embed_dim=2)


def two_hex() -> Mesh:
    """Two unit hexahedra side by side along x; cells 0-1, vertices 2-13."""
    vid = lambda x, y, z: 2 + x + 3 * y + 6 * z  # noqa: E731
    corners = [(0, 0, 0), (1, 0, 0), (1, 1, 0), (0, 1, 0),
               (0, 0, 1), (1, 0, 1), (1, 1, 1), (0, 1, 1)]
    sieve = Sieve()
    for cell in (0, 1):
        sieve.add_cone(cell, [vid(cell + dx, dy, dz) for dx, dy, dz in corners])
    coords = Section.from_values(
        {vid(x, y, z): (float(x), float(y), float(z))
         for z in range(2) for y in range(2) for x in range(3)})
    return Mesh.from_sieve(sieve, coords, dim=3, embed_dim=3)


def two_hex_interpolated() -> Mesh:
    from .toolkit.interpolate import interpolate
    return interpolate(two_hex())
