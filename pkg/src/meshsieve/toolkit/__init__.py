from .dot import export_dot, overlap_to_dot, sieve_to_dot
from .interpolate import interpolate
from .meshio import load_mesh, read_assignment, read_mesh, save_mesh, write_assignment, write_mesh
