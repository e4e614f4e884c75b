"""Benchmark boundary value problems and a generic solve-and-extract driver."""

from __future__ import annotations

import time
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

from ..coupling import CoupledSystem, assemble_coupled_system
from ..errors import ConfigError
from ..material import MaterialModel, angle_ply_laminate, isotropic, orthotropic_from_phi
from ..mesh import CrackGeometry, Mesh, build_structured_mesh, classify_regions
from ..sbfem import hamiltonian_pairing_error, mode_table_csv, pencil_residuals
from ..sif import compute_sif, select_singular_modes
from ..solver import (BoundaryConditions, ConditioningReport, apply_bcs, residual,
                      scaled_condition_number, solve)

EDGE_TENSION_COEFFS = (1.12, -0.231, 10.55, -21.72, 30.39)


def edge_tension_factor(ratio: float) -> float:
    """Empirical geometry factor of a single edge crack in tension, valid for ratio <= 0.6."""
    return float(sum(c * ratio**k for k, c in enumerate(EDGE_TENSION_COEFFS)))


def near_tip_displacement(r, theta, K_I: float, K_II: float, G: float, kappa: float) -> np.ndarray:
    """Leading-order crack-tip displacement field in the tip frame."""
    s = np.sqrt(np.asarray(r) / (2 * np.pi))
    c2, s2 = np.cos(theta / 2), np.sin(theta / 2)
    ux = (K_I / G * s * c2 * (0.5 * (kappa - 1) + s2**2)
          + K_II / G * s * s2 * (0.5 * (kappa + 1) + c2**2))
    uy = (K_I / G * s * s2 * (0.5 * (kappa + 1) - c2**2)
          - K_II / G * s * c2 * (0.5 * (kappa - 1) - s2**2))
    return np.array([ux, uy])


def griffith_field(x, tip, K_I: float, material: MaterialModel, side: Optional[float] = None):
    """Mode I near-tip field at ``x`` for a crack running in -x from ``tip``.

    On the crack line behind the tip, ``side`` (+1 upper, -1 lower face) picks
    the branch; otherwise the angle is taken in (-pi, pi].
    """
    d = np.asarray(x, dtype=float) - np.asarray(tip, dtype=float)
    r = float(np.hypot(*d))
    th = float(np.arctan2(d[1], d[0]))
    if side is not None and d[0] < 0 and abs(d[1]) <= 1e-12 * max(1.0, r):
        th = np.pi * side
    return near_tip_displacement(r, th, K_I, 0.0, material.G, material.kappa)


@dataclass
class Setup:
    """A fully specified problem: mesh, crack, material, BC builder and references."""

    name: str
    mesh: Mesh
    crack: CrackGeometry
    material: MaterialModel
    n_layers: int
    bcs: Callable[[CoupledSystem], BoundaryConditions]
    reference: dict = field(default_factory=dict)   # tip label -> (K_I, K_II)
    metadata: dict = field(default_factory=dict)


@dataclass
class TipResult:
    label: str
    sif: dict           # method -> SifResult
    mu: tuple
    L0: float
    asymmetry: float
    imag_residue: float
    pencil_residual: float
    pairing_error: float
    modes_csv: Optional[str] = None


@dataclass
class Outcome:
    setup: Setup
    system: CoupledSystem
    u: np.ndarray
    tips: list
    residual: float
    dofs: int
    conditioning: Optional[ConditioningReport]
    wall_time: float


def run_setup(setup: Setup, methods=("displacement", "stress"), conditioning: bool = False,
              emit_modes: bool = False) -> Outcome:
    t0 = time.perf_counter()
    cls = classify_regions(setup.mesh, setup.crack, setup.n_layers)
    system = assemble_coupled_system(setup.mesh, cls, setup.material, setup.crack)
    bcs = setup.bcs(system)
    cs = apply_bcs(system.K, system.f, bcs, setup.mesh.nodes)
    u = solve(cs)
    res = residual(cs, u)
    tips = []
    for b, (sub, st) in enumerate(zip(system.subdomains, system.sbfem)):
        if not sub.cracked:
            continue
        u_b = system.sbfem_displacement(u, b)
        modes = select_singular_modes(st.eig)
        sifs = {}
        for m in methods:
            if m == "displacement" and not setup.material.is_isotropic:
                continue
            sifs[m] = compute_sif(m, st.eig, sub, setup.material, u_b)
        c = np.linalg.solve(st.eig.phi, u_b.astype(complex)) if emit_modes else None
        tips.append(TipResult(
            label=cls.blocks[b].label, sif=sifs,
            mu=tuple(complex(st.eig.mu[k]) for k in modes), L0=float(st.L0),
            asymmetry=st.asymmetry, imag_residue=st.imag_residue,
            pencil_residual=float(pencil_residuals(st.eig).max()),
            pairing_error=hamiltonian_pairing_error(st.eig),
            modes_csv=mode_table_csv(st.eig, c) if emit_modes else None))
    report = None
    if conditioning:
        excluded = np.union1d(cs.fixed, system.inactive_dofs())
        report = scaled_condition_number(system.K, exclude=excluded)
    free = system.total_dofs - len(np.union1d(cs.fixed, system.inactive_dofs()))
    return Outcome(setup=setup, system=system, u=u, tips=tips, residual=res, dofs=free,
                   conditioning=report, wall_time=time.perf_counter() - t0)


# --- problem builders ----------------------------------------------------------------

def griffith(nx: int, ny: int, n_layers: int, *, width=10.0, height=10.0, a=100.0,
             load=1e4, E=1e7, nu=0.3, plane_state="plane_strain") -> Setup:
    """Square window around the tip of a long crack with the exact near-tip field on its edge."""
    mesh = build_structured_mesh(width, height, nx, ny)
    tip = np.array([0.5 * width, 0.5 * height])
    crack = CrackGeometry.segment([0.0, tip[1]], tip)
    mat = isotropic(E, nu, plane_state)
    K_ref = load * np.sqrt(np.pi * a)

    def bcs(system: CoupledSystem) -> BoundaryConditions:
        dm = system.dofmap
        fixed = []
        for n in mesh.boundary_nodes():
            x = mesh.nodes[n]
            if not dm.is_enriched(n):
                ux, uy = griffith_field(x, tip, K_ref, mat)
                fixed += [(2 * n, ux), (2 * n + 1, uy)]
        fixed += _enriched_boundary_dofs(system, lambda x, s: griffith_field(x, tip, K_ref, mat, s))
        return BoundaryConditions(dirichlet=fixed)

    return Setup(name="griffith", mesh=mesh, crack=crack, material=mat, n_layers=n_layers,
                 bcs=bcs, reference={"tip": (K_ref, 0.0)},
                 metadata={"crack_half_length": a, "load": load, "E": E, "nu": nu,
                           "plane_state": plane_state})


def _enriched_boundary_dofs(system: CoupledSystem, field_fn) -> list:
    """Standard and Heaviside DOFs of enriched boundary nodes from a two-sided field.

    Aligned crack: the node sits on the crack, upper face ``q``, lower ``q - 2a``.
    Cut crack: the two edge nodes straddle the crack; their enriched DOFs make the
    edge reproduce the field on both faces at the crack point.
    """
    mesh, dm, cls = system.mesh, system.dofmap, system.classification
    out = []
    enriched_bnd = [n for n in mesh.boundary_nodes() if dm.is_enriched(n)]
    if cls.crack_aligned:
        for n in enriched_bnd:
            x = mesh.nodes[n]
            up, lo = field_fn(x, 1.0), field_fn(x, -1.0)
            hd = dm.heaviside_dofs(n)
            out += [(2 * n, up[0]), (2 * n + 1, up[1]),
                    (hd[0], 0.5 * (up[0] - lo[0])), (hd[1], 0.5 * (up[1] - lo[1]))]
        return out
    yc = cls.crack_y
    for n in enriched_bnd:
        x = mesh.nodes[n]
        u = field_fn(x, None)
        out += [(2 * n, u[0]), (2 * n + 1, u[1])]
    by_x: dict = {}
    for n in enriched_bnd:
        by_x.setdefault(round(mesh.nodes[n, 0] / mesh.hx), []).append(n)
    for nodes in by_x.values():
        below = [n for n in nodes if mesh.nodes[n, 1] < yc]
        above = [n for n in nodes if mesh.nodes[n, 1] > yc]
        if len(below) != 1 or len(above) != 1:
            continue
        nb, na = below[0], above[0]
        xm = np.array([mesh.nodes[nb, 0], yc])
        Nb = (mesh.nodes[na, 1] - yc) / (mesh.nodes[na, 1] - mesh.nodes[nb, 1])
        Na = 1.0 - Nb
        interp = Nb * field_fn(mesh.nodes[nb], None) + Na * field_fn(mesh.nodes[na], None)
        up, lo = field_fn(xm, 1.0), field_fn(xm, -1.0)
        a_b = (up - interp) / (2 * Nb)     # lower node feeds the upper face
        a_a = (interp - lo) / (2 * Na)     # upper node feeds the lower face
        for n, a in ((nb, a_b), (na, a_a)):
            hd = dm.heaviside_dofs(n)
            out += [(hd[0], a[0]), (hd[1], a[1])]
    return out


def edge_tension(nx: int, ny: int, n_layers: int, *, width=1.0, height=2.0, a=0.5, load=1.0,
                 E=1.0, nu=0.3, plane_state="plane_strain") -> Setup:
    """Single edge crack at mid-height, uniform tension on top and bottom."""
    if a / width > 0.6:
        raise ConfigError(f"a/W = {a / width:g} is outside the validity range (<= 0.6) "
                          "of the reference geometry factor")
    mesh = build_structured_mesh(width, height, nx, ny)
    crack = CrackGeometry.segment([0.0, 0.5 * height], [a, 0.5 * height])
    mat = isotropic(E, nu, plane_state)
    K_ref = edge_tension_factor(a / width) * load * np.sqrt(np.pi * a)

    def bcs(system: CoupledSystem) -> BoundaryConditions:
        neu = [(e, (0.0, load)) for e in mesh.boundary_edges("top")]
        neu += [(e, (0.0, -load)) for e in mesh.boundary_edges("bottom")]
        br, tr = mesh.node_id(mesh.nx, 0), mesh.node_id(mesh.nx, mesh.ny)
        fixed = [(2 * br, 0.0), (2 * br + 1, 0.0), (2 * tr, 0.0)]
        return BoundaryConditions(dirichlet=fixed, neumann=neu)

    return Setup(name="edge_tension", mesh=mesh, crack=crack, material=mat, n_layers=n_layers,
                 bcs=bcs, reference={"tip": (K_ref, 0.0)},
                 metadata={"a_over_W": a / width, "geometry_factor": K_ref / (load * np.sqrt(np.pi * a)),
                           "load": load, "E": E, "nu": nu, "plane_state": plane_state})


def edge_shear(nx: int, ny: int, n_layers: int, *, width=7.0, height=16.0, a=3.5, load=1.0,
               E=3e7, nu=0.25, plane_state="plane_strain", K_ref=(34.0, 4.55)) -> Setup:
    """Edge crack at mid-height, clamped bottom, uniform shear traction on top."""
    mesh = build_structured_mesh(width, height, nx, ny)
    crack = CrackGeometry.segment([0.0, 0.5 * height], [a, 0.5 * height])
    mat = isotropic(E, nu, plane_state)

    def bcs(system: CoupledSystem) -> BoundaryConditions:
        neu = [(e, (load, 0.0)) for e in mesh.boundary_edges("top")]
        fixed = []
        for i in range(mesh.nx + 1):
            n = mesh.node_id(i, 0)
            fixed += [(2 * n, 0.0), (2 * n + 1, 0.0)]
        return BoundaryConditions(dirichlet=fixed, neumann=neu)

    return Setup(name="edge_shear", mesh=mesh, crack=crack, material=mat, n_layers=n_layers,
                 bcs=bcs, reference={"tip": tuple(K_ref)},
                 metadata={"load": load, "E": E, "nu": nu, "plane_state": plane_state})


def ortho_center(nx: int, ny: int, n_layers: int, *, phi=1.0, angle=0.0, width=1.0, height=1.0,
                 a=0.2, load=1.0, G12=6e9, nu12=0.03, plane_state="plane_stress") -> Setup:
    """Centre crack of length 2a in an orthotropic square under tension on top and bottom."""
    mesh = build_structured_mesh(width, height, nx, ny)
    xc, yc = 0.5 * width, 0.5 * height
    crack = CrackGeometry.segment([xc - a, yc], [xc + a, yc])
    mat = orthotropic_from_phi(G12, nu12, phi, angle, plane_state)
    K_ref = load * np.sqrt(np.pi * a)

    def bcs(system: CoupledSystem) -> BoundaryConditions:
        neu = [(e, (0.0, load)) for e in mesh.boundary_edges("top")]
        neu += [(e, (0.0, -load)) for e in mesh.boundary_edges("bottom")]
        bl, br = mesh.node_id(0, 0), mesh.node_id(mesh.nx, 0)
        fixed = [(2 * bl, 0.0), (2 * bl + 1, 0.0), (2 * br + 1, 0.0)]
        return BoundaryConditions(dirichlet=fixed, neumann=neu)

    return Setup(name="ortho_center", mesh=mesh, crack=crack, material=mat, n_layers=n_layers,
                 bcs=bcs, reference={"mouth": (K_ref, 0.0), "tip": (K_ref, 0.0)},
                 metadata={"phi": phi, "fiber_angle": angle, "G12": G12, "nu12": nu12,
                           "load": load, "plane_state": plane_state})


def ortho_edge(nx: int, ny: int, n_layers: int, *, angle=0.0, w=1.0, a=0.5, load=1.0,
               E1=144.8e9, E2=11.7e9, G12=9.66e9, nu12=0.21,
               plane_state="plane_stress") -> Setup:
    """Half of a double-edge-cracked angle-ply laminate plate; symmetry on ``x = w``."""
    mesh = build_structured_mesh(w, 2.0 * w, nx, ny)
    crack = CrackGeometry.segment([0.0, w], [a, w])
    mat = angle_ply_laminate(E1, E2, G12, nu12, angle, plane_state)
    K_ref = load * np.sqrt(np.pi * a)

    def bcs(system: CoupledSystem) -> BoundaryConditions:
        neu = [(e, (0.0, load)) for e in mesh.boundary_edges("top")]
        neu += [(e, (0.0, -load)) for e in mesh.boundary_edges("bottom")]
        fixed = []
        for j in range(mesh.ny + 1):
            fixed.append((2 * mesh.node_id(mesh.nx, j), 0.0))
        mid = int(np.argmin(np.hypot(mesh.nodes[:, 0] - w, mesh.nodes[:, 1] - w)))
        fixed.append((2 * mid + 1, 0.0))
        return BoundaryConditions(dirichlet=fixed, neumann=neu)

    return Setup(name="ortho_edge", mesh=mesh, crack=crack, material=mat, n_layers=n_layers,
                 bcs=bcs, reference={"tip": (K_ref, 0.0)},
                 metadata={"fiber_angle": angle, "E1": E1, "E2": E2, "G12": G12, "nu12": nu12,
                           "a_over_w": a / w, "load": load, "plane_state": plane_state})


BUILDERS = {
    "griffith": griffith,
    "edge_tension": edge_tension,
    "edge_shear": edge_shear,
    "ortho_center": ortho_center,
    "ortho_edge": ortho_edge,
}
