"""One semi-implicit time step of the coupled geometry + flow problem.

Order per step: extend the surface speed into a domain velocity, move the
mesh explicitly, then solve the implicit momentum/continuity system on the
new geometry with the old fields carried over by nodal identification.
"""

from __future__ import annotations

from dataclasses import dataclass

from .ale import solve_domain_velocity
from .fields import NumParams, PhysParams, ScalarFieldP1, VectorFieldP1, zero_scalar_field, zero_vector_field
from .forms import assemble_state_system, solve
from .geometry import AxiMesh, build_structured_mesh, contact_line_height, displace_mesh, mesh_quality


@dataclass(frozen=True)
class FlowState:
    mesh: AxiMesh
    u: VectorFieldP1
    p: ScalarFieldP1
    t: float


@dataclass(frozen=True)
class StepDiagnostics:
    residual: float
    u_max: float
    z_cl: float
    min_area: float
    max_aspect: float


def initial_state(radius: float, height: float, num: NumParams) -> FlowState:
    """Liquid column at rest."""
    mesh = build_structured_mesh(radius, height, num.N1, num.N3)
    return FlowState(mesh=mesh, u=zero_vector_field(mesh), p=zero_scalar_field(mesh), t=0.0)


def step(state: FlowState, zeta: float, phys: PhysParams, num: NumParams) -> tuple[FlowState, StepDiagnostics]:
    """Advance by dt with the bottom control stress zeta held fixed over the slab."""
    V = solve_domain_velocity(state.mesh, state.u)
    mesh_new = displace_mesh(state.mesh, V.field, num.dt)
    system = assemble_state_system(mesh_new, state.mesh, state.u, V.field, zeta, phys, num)
    u_new, p_new, residual = solve(system)
    new = FlowState(mesh=mesh_new, u=u_new, p=p_new, t=state.t + num.dt)
    min_area, max_aspect = mesh_quality(mesh_new)
    diag = StepDiagnostics(residual=residual, u_max=u_new.magnitude_max,
                           z_cl=contact_line_height(mesh_new),
                           min_area=min_area, max_aspect=max_aspect)
    return new, diag
