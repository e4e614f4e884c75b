"""Tie scaled boundary subdomains to the enriched mesh and assemble the global system.

Boundary nodes of a subdomain that coincide with mesh nodes share their
standard DOFs.  The two copies of the crack-mouth point are expressed through
the enriched displacement of the cut edge they sit on, evaluated on their own
side of the crack:

    u_s = sum_I N_I(x_m) q_I + sum_I N_I(x_m) (H_s - H_I) a_I.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np
import scipy.sparse as sp

from . import fem
from .errors import AssemblyError
from .fem import DofMap, ElementStiffness
from .material import MaterialModel
from .mesh import (CrackGeometry, Mesh, Region, RegionClassification, SbfemSubdomain,
                   extract_sbfem_subdomain)
from .sbfem import (SbfemStiffness, assemble_coefficients, crack_front_length, solve_eigen,
                    stiffness)

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class MouthPair:
    """One crack-mouth copy and the enriched edge it is tied to."""

    sbfem_node: int
    side: float
    edge_nodes: tuple
    shape: tuple


@dataclass(frozen=True)
class CouplingMap:
    """``u_sbfem = T @ u_global[columns]``."""

    T: np.ndarray
    columns: np.ndarray
    shared_plain_nodes: dict
    mouth_pairs: tuple = ()


def mouth_coefficients(shape: Sequence[float], side: float,
                       node_signs: Sequence[float]) -> tuple[np.ndarray, np.ndarray]:
    """Weights of ``q_I`` and of ``a_I`` in a mouth copy on ``side`` of the crack."""
    N = np.asarray(shape, dtype=float)
    if len(N) == 2 and (min(N) <= 0 or max(N) >= 1):
        raise AssemblyError("crack mouth sits on an edge endpoint; coupling is degenerate")
    return N, N * (side - np.asarray(node_signs, dtype=float))


def build_transformation(subdomain: SbfemSubdomain, dofmap: DofMap,
                         node_sign: np.ndarray) -> CouplingMap:
    """Transformation from global DOFs to the subdomain's boundary DOFs."""
    cols: list[int] = []
    col_of: dict[int, int] = {}

    def col(g: int) -> int:
        if g not in col_of:
            col_of[g] = len(cols)
            cols.append(int(g))
        return col_of[g]

    rows = []  # (sbfem dof, global dof, weight)
    shared = {}
    pairs = []
    for k in range(subdomain.n_nodes):
        node = int(subdomain.mesh_nodes[k])
        if node >= 0:
            shared[k] = node
            for c, g in enumerate(dofmap.standard_dofs(node)):
                rows.append((2 * k + c, col(g), 1.0))
            continue
        edge = tuple(int(n) for n in subdomain.mouth_edge_nodes)
        side = float(subdomain.mouth_side[k])
        Nq, Na = mouth_coefficients(subdomain.mouth_edge_shape, side, node_sign[list(edge)])
        for I, node_I in enumerate(edge):
            for c, g in enumerate(dofmap.standard_dofs(node_I)):
                rows.append((2 * k + c, col(g), Nq[I]))
            if Na[I] != 0.0:
                if not dofmap.is_enriched(node_I):
                    raise AssemblyError(f"mouth edge node {node_I} needs Heaviside DOFs")
                for c, g in enumerate(dofmap.heaviside_dofs(node_I)):
                    rows.append((2 * k + c, col(g), Na[I]))
        pairs.append(MouthPair(sbfem_node=k, side=side, edge_nodes=edge,
                               shape=tuple(subdomain.mouth_edge_shape)))
    T = np.zeros((subdomain.n_dofs, len(cols)))
    for r, c, w in rows:
        T[r, c] += w
    return CouplingMap(T=T, columns=np.array(cols, dtype=int), shared_plain_nodes=shared,
                       mouth_pairs=tuple(pairs))


def condense_stiffness(K_sbfem, cmap: CouplingMap,
                       F: Optional[np.ndarray] = None) -> ElementStiffness:
    """Congruence transform ``T^T K T`` addressed over the map's global DOFs."""
    K = K_sbfem.K if isinstance(K_sbfem, SbfemStiffness) else np.asarray(K_sbfem)
    if K.shape != (cmap.T.shape[0],) * 2:
        raise AssemblyError(f"stiffness is {K.shape}, transformation expects {cmap.T.shape[0]} rows")
    k = cmap.T.T @ K @ cmap.T
    f = None if F is None else cmap.T.T @ F
    return ElementStiffness(k=0.5 * (k + k.T), dofs=cmap.columns, f=f)


@dataclass
class CoupledSystem:
    K: sp.csr_matrix
    f: np.ndarray
    mesh: Mesh
    classification: RegionClassification
    dofmap: DofMap
    material: MaterialModel
    crack: Optional[CrackGeometry]
    subdomains: list = field(default_factory=list)
    sbfem: list = field(default_factory=list)
    couplings: list = field(default_factory=list)

    @property
    def total_dofs(self) -> int:
        return self.dofmap.total_dofs

    def inactive_dofs(self) -> np.ndarray:
        return self.dofmap.inactive_dofs()

    def sbfem_displacement(self, u: np.ndarray, block: int = 0) -> np.ndarray:
        cm = self.couplings[block]
        return cm.T @ u[cm.columns]

    def displacement_at(self, u: np.ndarray, x: np.ndarray,
                        side: Optional[float] = None) -> np.ndarray:
        """Enriched displacement at point ``x`` of a non-SBFEM element.

        ``side`` (+1 upper, -1 lower) picks the crack face for points on the crack line.
        """
        m = self.mesh
        i = min(int(x[0] // m.hx), m.nx - 1)
        j = min(int(x[1] // m.hy), m.ny - 1)
        e = m.element_id(i, j)
        nodes = m.elements[e]
        coords = m.nodes[nodes]
        xi = fem.inverse_map(coords, np.asarray(x, dtype=float))
        N = fem.shape_functions(*xi)
        out = N @ u[self.dofmap.standard_dofs(nodes)].reshape(4, 2)
        cy = self.classification.crack_y
        if cy is not None:
            H = side if side is not None else (1.0 if x[1] > cy else -1.0)
            for a, n in enumerate(nodes):
                if self.dofmap.is_enriched(n):
                    f = H - self.classification.node_sign[n]
                    out += N[a] * f * u[self.dofmap.heaviside_dofs(n)]
        return out


def _crack_segment(crack: CrackGeometry) -> np.ndarray:
    return np.array([crack.mouth, crack.tip])


def element_contributions(mesh: Mesh, cls: RegionClassification, dofmap: DofMap,
                          D: np.ndarray, crack: Optional[CrackGeometry]) -> list[ElementStiffness]:
    """Standard and enriched element matrices of every non-SBFEM element."""
    active = np.flatnonzero((cls.element_region == Region.FEM) |
                            (cls.element_region == Region.XFEM_SPLIT))
    enriched = np.zeros(mesh.n_nodes, dtype=bool)
    enriched[dofmap.heaviside_nodes] = True
    k_all = fem.quad4_stiffness_batch(mesh.nodes[mesh.elements[active]], D)
    out = []
    for e, k in zip(active, k_all):
        nodes = mesh.elements[e]
        std = dofmap.standard_dofs(nodes)
        if not enriched[nodes].any():
            out.append(ElementStiffness(k=k, dofs=std))
            continue
        if cls.element_sign[e] == 0.0:
            kk = fem.heaviside_split_stiffness(mesh.nodes[nodes], _crack_segment(crack), D)
            out.append(ElementStiffness(k=kk, dofs=np.concatenate(
                [std, dofmap.heaviside_dofs(nodes)])))
            continue
        factors = np.where(enriched[nodes], cls.element_sign[e] - cls.node_sign[nodes], 0.0)
        if not factors.any():
            out.append(ElementStiffness(k=k, dofs=std))
            continue
        kk = fem.enriched_uncut_stiffness(k, factors)
        out.append(ElementStiffness(k=kk, dofs=np.concatenate(
            [std, dofmap.heaviside_dofs(nodes[factors != 0])])))
    return out


def assemble_coupled_system(mesh: Mesh, cls: RegionClassification, material: MaterialModel,
                            crack: Optional[CrackGeometry] = None) -> CoupledSystem:
    """Global stiffness over standard + Heaviside DOFs with all SBFEM blocks condensed in."""
    dofmap = DofMap(mesh.n_nodes, cls.heaviside_nodes, cls.inactive_nodes)
    parts = element_contributions(mesh, cls, dofmap, material.D, crack)
    subs, sbs, cmaps = [], [], []
    for b in range(len(cls.blocks)):
        sub = extract_sbfem_subdomain(mesh, cls, crack if cls.blocks[b].cracked else None, b)
        eig = solve_eigen(assemble_coefficients(sub, material.D))
        L0 = crack_front_length(sub) if sub.cracked else None
        st = stiffness(eig, L0=L0)
        if st.asymmetry > 1e-8:
            log.warning("SBFEM block %d stiffness asymmetry %.2e", b, st.asymmetry)
        cm = build_transformation(sub, dofmap, cls.node_sign)
        parts.append(condense_stiffness(st, cm))
        subs.append(sub)
        sbs.append(st)
        cmaps.append(cm)
    inactive = dofmap.inactive_dofs()
    if len(inactive):
        parts.append(ElementStiffness(k=np.eye(len(inactive)), dofs=inactive))
    K, f = fem.assemble(parts, dofmap.total_dofs)
    diag = K.diagonal()
    dangling = np.flatnonzero(diag == 0)
    if len(dangling):
        log.warning("DOFs without stiffness (system will be singular): %s", dangling[:20].tolist())
    return CoupledSystem(K=K, f=f, mesh=mesh, classification=cls, dofmap=dofmap,
                         material=material, crack=crack, subdomains=subs, sbfem=sbs,
                         couplings=cmaps)
