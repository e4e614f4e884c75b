import numpy as np
import pytest

from oracles import constant_stress_boundary_forces
from xsbfem.bench.problems import edge_tension, run_setup
from xsbfem.coupling import (CouplingMap, assemble_coupled_system, build_transformation,
                             condense_stiffness, mouth_coefficients)
from xsbfem.errors import AssemblyError
from xsbfem.fem import DofMap, ElementStiffness, assemble, quad4_stiffness, b_matrix
from xsbfem.material import isotropic
from xsbfem.mesh import CrackGeometry, build_structured_mesh, classify_regions
from xsbfem.sbfem import assemble_coefficients, solve_eigen, stiffness
from xsbfem.solver import BoundaryConditions, apply_bcs, solve


def test_mouth_rows_at_midpoint():
    Nq, Na = mouth_coefficients([0.5, 0.5], -1.0, [-1.0, 1.0])
    assert np.concatenate([Nq, Na]).tolist() == [0.5, 0.5, 0.0, -1.0]
    Nq, Na = mouth_coefficients([0.5, 0.5], 1.0, [-1.0, 1.0])
    assert np.concatenate([Nq, Na]).tolist() == [0.5, 0.5, 1.0, 0.0]


def test_mouth_row_at_quarter_point():
    Nq, Na = mouth_coefficients([0.75, 0.25], -1.0, [-1.0, 1.0])
    assert np.allclose(np.concatenate([Nq, Na]), [0.75, 0.25, 0.0, -0.5])


def test_no_enrichment_no_jump():
    q = np.random.default_rng(0).normal(size=2)
    a = np.zeros(2)
    rows = [np.concatenate(mouth_coefficients([0.3, 0.7], s, [-1.0, 1.0])) for s in (-1.0, 1.0)]
    x = np.concatenate([q, a])
    assert rows[1] @ x - rows[0] @ x == pytest.approx(0.0)


def test_mouth_on_edge_endpoint_rejected():
    with pytest.raises(AssemblyError):
        mouth_coefficients([1.0, 0.0], 1.0, [1.0, -1.0])


def test_identity_transform_keeps_stiffness():
    rng = np.random.default_rng(2)
    A = rng.normal(size=(6, 6))
    K = A + A.T
    cm = CouplingMap(T=np.eye(6), columns=np.array([5, 4, 3, 2, 1, 0]), shared_plain_nodes={})
    es = condense_stiffness(K, cm)
    assert np.allclose(es.k, K)
    assert es.dofs.tolist() == [5, 4, 3, 2, 1, 0]


def _one_layer_system():
    mesh = build_structured_mesh(2.0, 2.0, 8, 8)
    crack = CrackGeometry.segment([0.0, 1.125], [1.125, 1.125])
    cls = classify_regions(mesh, crack, 1)
    return mesh, crack, cls, assemble_coupled_system(mesh, cls, isotropic(1.0, 0.3), crack)


def test_energy_invariance_through_transformation():
    mesh, crack, cls, system = _one_layer_system()
    cm = system.couplings[0]
    K = system.sbfem[0].K
    es = condense_stiffness(K, cm)
    u_global = np.random.default_rng(5).normal(size=len(cm.columns))
    u_sb = cm.T @ u_global
    assert u_sb @ K @ u_sb == pytest.approx(u_global @ es.k @ u_global, rel=1e-12)
    assert np.allclose(es.k, es.k.T)


def test_transformation_rows():
    mesh, crack, cls, system = _one_layer_system()
    cm = system.couplings[0]
    assert len(cm.mouth_pairs) == 2
    assert cm.mouth_pairs[0].side == -cm.mouth_pairs[1].side
    # shared mesh nodes map one to one
    for k, node in cm.shared_plain_nodes.items():
        row = cm.T[2 * k]
        assert row.sum() == 1.0
        assert cm.columns[np.flatnonzero(row)[0]] == 2 * node


def test_transformation_requires_enriched_edge():
    mesh, crack, cls, system = _one_layer_system()
    bare = DofMap(mesh.n_nodes, np.zeros(0, dtype=int))
    with pytest.raises(AssemblyError):
        build_transformation(system.subdomains[0], bare, cls.node_sign)


def test_dof_count_with_one_layer():
    mesh, crack, cls, system = _one_layer_system()
    assert system.total_dofs == 2 * mesh.n_nodes + 2 * len(cls.heaviside_nodes)
    # a branch-enriched tip element would add 8 functions per node on its 4 nodes
    assert system.total_dofs < 2 * mesh.n_nodes + 2 * len(cls.heaviside_nodes) + 2 * 4 * 4


def test_no_crack_equals_plain_fem():
    mesh = build_structured_mesh(1.0, 1.0, 4, 3)
    mat = isotropic(1.0, 0.3)
    system = assemble_coupled_system(mesh, classify_regions(mesh, None), mat)
    parts = [ElementStiffness(quad4_stiffness(mesh.element_coords(e), mat.D),
                              np.ravel([[2 * n, 2 * n + 1] for n in mesh.elements[e]]))
             for e in range(mesh.n_elements)]
    K, _ = assemble(parts, 2 * mesh.n_nodes)
    assert abs(system.K - K).max() < 1e-14


def test_sbfem_block_reproduces_constant_stress_tractions(closed_subdomain):
    mat = isotropic(1.0, 0.3)
    K = stiffness(solve_eigen(assemble_coefficients(closed_subdomain, mat.D))).K
    eps = np.array([1e-3, -4e-4, 6e-4])
    x = closed_subdomain.node_coords
    u = np.column_stack([eps[0] * x[:, 0] + 0.5 * eps[2] * x[:, 1],
                         eps[1] * x[:, 1] + 0.5 * eps[2] * x[:, 0]]).ravel()
    f_ref = constant_stress_boundary_forces(x, closed_subdomain.connectivity, mat.D @ eps)
    assert np.linalg.norm(K @ u - f_ref) <= 1e-8 * np.linalg.norm(f_ref)


def test_coupled_patch_test():
    mesh = build_structured_mesh(4.0, 4.0, 8, 8)
    cls = classify_regions(mesh, None, n_layers=2, sbfem_centers=[[2.0, 2.0]])
    mat = isotropic(1.0, 0.3)
    system = assemble_coupled_system(mesh, cls, mat)
    eps = np.array([2e-3, -1e-3, 5e-4])

    def field(x):
        return np.array([eps[0] * x[0] + 0.5 * eps[2] * x[1], eps[1] * x[1] + 0.5 * eps[2] * x[0]])

    bcs = BoundaryConditions(analytic_dirichlet=field, analytic_nodes=mesh.boundary_nodes())
    u = solve(apply_bcs(system.K, system.f, bcs, mesh.nodes))
    active = np.setdiff1d(np.arange(mesh.n_nodes), cls.inactive_nodes)
    exact = np.array([field(mesh.nodes[n]) for n in active])
    assert np.abs(u.reshape(-1, 2)[active] - exact).max() <= 1e-10 * np.abs(exact).max()
    sigma = mat.D @ eps
    for e in range(mesh.n_elements):
        if cls.element_region[e] != 0:
            continue
        nodes = mesh.elements[e]
        B, _ = b_matrix(mesh.element_coords(e), 0.3, -0.2)
        s = mat.D @ B @ u[np.ravel([[2 * n, 2 * n + 1] for n in nodes])]
        assert np.linalg.norm(s - sigma) <= 1e-8 * np.linalg.norm(sigma)


@pytest.mark.parametrize("ny", [40, 41])
def test_mouth_continuity(ny):
    setup = edge_tension(20, ny, 2)
    out = run_setup(setup, methods=("displacement",))
    system, u = out.system, out.u
    sub = system.subdomains[0]
    u_sb = system.sbfem_displacement(u).reshape(-1, 2)
    mouth = sub.node_coords[0]
    for k in (0, sub.n_nodes - 1):
        side = sub.mouth_side[k]
        u_x = system.displacement_at(u, mouth - [1e-12, 0.0], side=side)
        assert np.allclose(u_x, u_sb[k], rtol=0, atol=1e-10 * np.abs(u).max())
    # the two copies really open
    assert u_sb[-1, 1] - u_sb[0, 1] > 0
