"""H2 matrices, their sparse extended form and SE-based solvers."""

from ._h2se import (
    H2Matrix,
    InfeasibleError,
    Mesh,
    SEForm,
    assemble_dense,
    assemble_se,
    condition_number,
    methods,
    open_surface_mesh,
    solve,
    unit_square_mesh,
)

__all__ = [
    "H2Matrix",
    "InfeasibleError",
    "Mesh",
    "SEForm",
    "assemble_dense",
    "assemble_se",
    "condition_number",
    "methods",
    "open_surface_mesh",
    "solve",
    "unit_square_mesh",
]
