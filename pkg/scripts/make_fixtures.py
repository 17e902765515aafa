"""Write the reference meshes and assignments under data/."""

import argparse
import os

from meshsieve.fixtures import (TRI8_COLUMNS, TRI8_INITIAL, doublet, doublet_cells,
                                tri8, two_hex)
from meshsieve.toolkit import save_mesh, write_assignment

MESHES = {
    "doublet.mesh": doublet,
    "doublet_cells.mesh": doublet_cells,
    "tri8.mesh": tri8,
    "hex2.mesh": two_hex,
}
ASSIGNMENTS = {
    "tri8.target.part": TRI8_COLUMNS,
    "tri8.initial.part": TRI8_INITIAL,
}


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--out", default=os.path.join(os.path.dirname(__file__), "..", "data"))
    args = ap.parse_args(argv)
    os.makedirs(args.out, exist_ok=True)
    for name, factory in MESHES.items():
        save_mesh(factory(), os.path.join(args.out, name))
    for name, assignment in ASSIGNMENTS.items():
        with open(os.path.join(args.out, name), "w") as f:
            f.write(write_assignment(assignment))
    print(f"wrote {len(MESHES) + len(ASSIGNMENTS)} files to {os.path.normpath(args.out)}")


if __name__ == "__main__":
    main()
