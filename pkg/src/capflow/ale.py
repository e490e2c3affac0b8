"""Domain velocity: vertical harmonic extension of the normal surface speed.

The mesh moves vertically only, so the extension reduces to one scalar
Laplace problem for V_z with Dirichlet data (u . nu)/nu_3 on the free surface
(the vertical speed of the surface graph), V_z = 0 on the bottom, and natural
zero-flux conditions on the wall and the axis.  The resulting V = (0, V_z)
satisfies every boundary condition of the extension problem: V . nu matches
u . nu on the surface, the wall stays a cylinder, and the bottom is fixed.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp
import scipy.sparse.linalg as spla

from .errors import SingularMatrix
from .fields import VectorFieldP1
from .forms import element_data
from .geometry import AxiMesh, surface_slopes


@dataclass(frozen=True)
class DomainVelocity:
    """Vertical-only mesh velocity; zero radial component everywhere."""

    field: VectorFieldP1


def scalar_stiffness(mesh: AxiMesh) -> sp.csr_matrix:
    """r-weighted P1 stiffness matrix, shared quadrature with the flow forms."""
    ed = element_data(mesh)
    n = mesh.num_nodes
    ir = (ed.wq[:, None] * ed.rq).sum(axis=1)
    gg = np.einsum("mic,mjc->mij", ed.grad, ed.grad) * ir[:, None, None]
    rows = np.repeat(ed.tri[:, :, None], 3, axis=2)
    cols = np.repeat(ed.tri[:, None, :], 3, axis=1)
    return sp.coo_matrix((gg.ravel(), (rows.ravel(), cols.ravel())),
                         shape=(n, n)).tocsr()


def solve_domain_velocity(mesh: AxiMesh, u: VectorFieldP1) -> DomainVelocity:
    """Harmonic vertical extension of the surface speed of u."""
    if u.mesh is not mesh:
        raise ValueError("velocity field lives on a different mesh")

    # vertical surface speed: (u . nu)/nu_3 = u_z - slope * u_r at surface nodes
    snodes = mesh.surface_nodes
    slopes = surface_slopes(mesh)
    f = u.values[snodes, 1] - slopes * u.values[snodes, 0]

    n = mesh.num_nodes
    dirichlet = np.concatenate((snodes, mesh.bottom_nodes))
    dir_vals = np.concatenate((f, np.zeros(len(mesh.bottom_nodes))))
    # the contact node is on the surface, never on the bottom, so no clash
    A = scalar_stiffness(mesh)
    mask = np.ones(n, dtype=bool)
    mask[dirichlet] = False
    free = np.where(mask)[0]

    g = np.zeros(n)
    g[dirichlet] = dir_vals
    rhs = -(A @ g)[free]
    try:
        x = spla.spsolve(A[np.ix_(free, free)].tocsc(), rhs)
    except (spla.MatrixRankWarning, RuntimeError) as exc:  # pragma: no cover
        raise SingularMatrix(str(exc)) from exc
    if not np.all(np.isfinite(x)):
        raise SingularMatrix("mesh-velocity solve produced non-finite values")

    vz = g.copy()
    vz[free] = x
    values = np.zeros((n, 2))
    values[:, 1] = vz
    values[mesh.bottom_nodes, 1] = 0.0
    return DomainVelocity(field=VectorFieldP1(values, mesh))
