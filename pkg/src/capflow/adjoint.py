"""Per-slab steady adjoint problem feeding the control gradient.

The adjoint operator is exactly the transpose of the state operator of the
same slab (bilinear forms evaluated with trial and test slots swapped, the
transport fields unchanged), with the velocity mass action on the new state
as right-hand side.  The pressure stabilization is symmetric, so including
it keeps the discrete transpose relation exact.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp

from .fields import NumParams, PhysParams, ScalarFieldP1, VectorFieldP1
from .forms import (LinearSystem, _flatten, _free_dofs, bottom_load_vector,
                    mass_matrix, solve, state_blocks)
from .geometry import AxiMesh


@dataclass(frozen=True)
class AdjointState:
    z: VectorFieldP1
    q: ScalarFieldP1
    slab_index: int
    bottom_integral: float
    residual: float


def assemble_adjoint_system(mesh_new: AxiMesh, mesh_old: AxiMesh,
                            u_old: VectorFieldP1, V_old: VectorFieldP1,
                            u_new: VectorFieldP1,
                            phys: PhysParams, num: NumParams) -> LinearSystem:
    """Transpose of the slab's state system, rhs = mass action on u_new."""
    K, B, Sp, _ = state_blocks(mesh_new, mesh_old, u_old, V_old, 0.0, phys, num)
    n = mesh_new.num_nodes
    mat = sp.bmat([[K.T.tocsr(), -B], [B.T, Sp]], format="csr")
    rhs = np.concatenate((mass_matrix(mesh_new) @ _flatten(u_new.values), np.zeros(n)))
    free = _free_dofs(mesh_new)
    return LinearSystem(matrix=mat[np.ix_(free, free)].tocsr(), rhs=rhs[free],
                        free=free, size_full=3 * n, n_velocity=2 * n, mesh=mesh_new)


def solve_adjoint(system: LinearSystem, slab_index: int = 0) -> AdjointState:
    """Solve one slab's adjoint; records the bottom integral of z . e3 r dr."""
    z, q, residual = solve(system)
    ib = float(bottom_load_vector(system.mesh) @ _flatten(z.values))
    return AdjointState(z=z, q=q, slab_index=slab_index,
                        bottom_integral=ib, residual=residual)
