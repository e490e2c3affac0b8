"""CSV history and legacy-ASCII VTK snapshot output.

Both formats are bit-specified: LF line endings, '.' decimal separator,
lowercase 'e' exponents, 17 significant digits so floats round-trip exactly.
"""

from __future__ import annotations

from .stepping import FlowState

CSV_HEADER = "t,Z_CL,zeta,J_increment,grad,u_max"


def _fmt(x: float) -> str:
    return format(float(x), ".17g")


def write_history_csv(history, path) -> None:
    rows = [CSV_HEADER]
    for i in range(len(history.t)):
        rows.append(",".join(_fmt(v) for v in (
            history.t[i], history.z_cl[i], history.zeta[i],
            history.j_increment[i], history.grad[i], history.u_max[i])))
    with open(path, "w", encoding="ascii", newline="\n") as fh:
        fh.write("\n".join(rows) + "\n")


def write_vtk_snapshot(state: FlowState, path) -> None:
    """Mesh plus nodal velocity/pressure as legacy ASCII VTK unstructured grid."""
    mesh = state.mesh
    n = mesh.num_nodes
    m = len(mesh.triangles)
    lines = [
        "# vtk DataFile Version 3.0",
        f"capflow snapshot t={_fmt(state.t)}",
        "ASCII",
        "DATASET UNSTRUCTURED_GRID",
        f"POINTS {n} double",
    ]
    for r, z in mesh.nodes:
        lines.append(f"{_fmt(r)} {_fmt(z)} 0")
    lines.append(f"CELLS {m} {4 * m}")
    for a, b, c in mesh.triangles:
        lines.append(f"3 {a} {b} {c}")
    lines.append(f"CELL_TYPES {m}")
    lines.extend(["5"] * m)
    lines.append(f"POINT_DATA {n}")
    lines.append("VECTORS velocity double")
    for ur, uz in state.u.values:
        lines.append(f"{_fmt(ur)} {_fmt(uz)} 0")
    lines.append("SCALARS pressure double 1")
    lines.append("LOOKUP_TABLE default")
    for p in state.p.values:
        lines.append(_fmt(p))
    with open(path, "w", encoding="ascii", newline="\n") as fh:
        fh.write("\n".join(lines) + "\n")
