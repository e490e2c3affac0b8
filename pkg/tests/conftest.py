import numpy as np
import pytest

from capflow.acceptance import run_tc1, tc1_config
from capflow.config import num_params, phys_params
from capflow.fields import VectorFieldP1
from capflow.geometry import AxiMesh, BoundaryTag, build_structured_mesh


def two_triangle_mesh(radius=1.0, height=1.0):
    """Minimal valid half-section: one cell split into two triangles."""
    nodes = np.array([[0.0, 0.0], [radius, 0.0], [radius, height], [0.0, height]])
    tris = np.array([[0, 1, 2], [0, 2, 3]])
    edges = {
        BoundaryTag.BOTTOM: np.array([[0, 1]]),
        BoundaryTag.WALL: np.array([[1, 2]]),
        BoundaryTag.FREE_SURFACE: np.array([[3, 2]]),
        BoundaryTag.AXIS: np.array([[0, 3]]),
    }
    return AxiMesh(nodes=nodes, triangles=tris, boundary_edges=edges,
                   contact_node=2, radius=radius)


def perturbed_mesh(seed=3, amplitude=0.05):
    """Structured 2x2-cell grid with interior/surface nodes jiggled.

    Wall and axis radii, bottom heights and the graph property of the free
    surface are preserved, so all mesh invariants keep holding.
    """
    mesh = build_structured_mesh(1.0, 1.0, 2, 2)
    rng = np.random.default_rng(seed)
    nodes = mesh.nodes.copy()
    interior = [i for i in range(mesh.num_nodes)
                if i not in set(mesh.wall_nodes) | set(mesh.axis_nodes)
                | set(mesh.bottom_nodes) | set(mesh.surface_nodes)]
    nodes[interior] += amplitude * rng.uniform(-1, 1, (len(interior), 2))
    surf = [i for i in mesh.surface_nodes if i not in mesh.wall_nodes and i not in mesh.axis_nodes]
    nodes[surf, 1] += amplitude * rng.uniform(-1, 1, len(surf))
    nodes[mesh.axis_nodes, 1] += amplitude * rng.uniform(-1, 1, len(mesh.axis_nodes)) \
        * (mesh.nodes[mesh.axis_nodes, 1] > 0) * (mesh.nodes[mesh.axis_nodes, 1] < 1)
    return AxiMesh(nodes=nodes, triangles=mesh.triangles,
                   boundary_edges=dict(mesh.boundary_edges),
                   contact_node=mesh.contact_node, radius=mesh.radius)


def random_vector_field(mesh, seed=0, scale=1.0):
    rng = np.random.default_rng(seed)
    vals = scale * rng.standard_normal((mesh.num_nodes, 2))
    vals[mesh.radial_constrained_nodes, 0] = 0.0
    return VectorFieldP1(vals, mesh)


@pytest.fixture(scope="session")
def tc1():
    cfg = tc1_config()
    return cfg, phys_params(cfg), num_params(cfg)


@pytest.fixture(scope="session")
def tc1_uncontrolled():
    return run_tc1(controlled=False)


@pytest.fixture(scope="session")
def tc1_controlled():
    return run_tc1(controlled=True)
