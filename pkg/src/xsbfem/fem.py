"""Bilinear quadrilateral stiffness, Heaviside enrichment and sparse assembly."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Optional

import numpy as np
import scipy.sparse as sp

from .errors import AssemblyError, GeometryError, JacobianError

_G = 1.0 / np.sqrt(3.0)
GAUSS_2x2 = np.array([[-_G, -_G], [_G, -_G], [_G, _G], [-_G, _G]])
GAUSS_2x2_W = np.ones(4)

# degree-2 exact rule on the reference triangle (area 1/2)
TRI_3PT = np.array([[1 / 6, 1 / 6], [2 / 3, 1 / 6], [1 / 6, 2 / 3]])
TRI_3PT_W = np.full(3, 1 / 6)

QUADRATURE_ORDERS = {"standard": "gauss 2x2", "split_subcell": "triangle 3-point (degree 2)",
                     "edge_load": "gauss 2-point"}

_XI = np.array([-1.0, 1.0, 1.0, -1.0])
_ETA = np.array([-1.0, -1.0, 1.0, 1.0])


def shape_functions(xi: float, eta: float) -> np.ndarray:
    return 0.25 * (1 + _XI * xi) * (1 + _ETA * eta)


def shape_derivatives(xi: float, eta: float) -> np.ndarray:
    """Rows: dN/dxi, dN/deta."""
    return 0.25 * np.array([_XI * (1 + _ETA * eta), _ETA * (1 + _XI * xi)])


def b_matrix(coords: np.ndarray, xi: float, eta: float) -> tuple[np.ndarray, float]:
    """Strain-displacement matrix (3x8) and Jacobian determinant at a parent point."""
    dN = shape_derivatives(xi, eta)
    J = dN @ coords
    detJ = J[0, 0] * J[1, 1] - J[0, 1] * J[1, 0]
    if detJ <= 0:
        raise JacobianError(f"non-positive Jacobian {detJ:g} at ({xi:g}, {eta:g})")
    dNdx = np.linalg.solve(J, dN)
    B = np.zeros((3, 8))
    B[0, 0::2] = dNdx[0]
    B[1, 1::2] = dNdx[1]
    B[2, 0::2] = dNdx[1]
    B[2, 1::2] = dNdx[0]
    return B, detJ


def quad4_stiffness(coords: np.ndarray, D: np.ndarray) -> np.ndarray:
    """8x8 stiffness of a bilinear quad (2x2 Gauss, unit thickness)."""
    coords = np.asarray(coords, dtype=float)
    _check_convex(coords)
    k = np.zeros((8, 8))
    for (xi, eta), w in zip(GAUSS_2x2, GAUSS_2x2_W):
        B, detJ = b_matrix(coords, xi, eta)
        k += w * detJ * B.T @ D @ B
    return 0.5 * (k + k.T)


def quad4_stiffness_batch(coords: np.ndarray, D: np.ndarray) -> np.ndarray:
    """Vectorised :func:`quad4_stiffness` over ``coords`` of shape (n, 4, 2)."""
    coords = np.asarray(coords, dtype=float)
    n = len(coords)
    k = np.zeros((n, 8, 8))
    for (xi, eta), w in zip(GAUSS_2x2, GAUSS_2x2_W):
        dN = shape_derivatives(xi, eta)
        J = np.einsum("ak,nkb->nab", dN, coords)
        detJ = J[:, 0, 0] * J[:, 1, 1] - J[:, 0, 1] * J[:, 1, 0]
        if np.any(detJ <= 0):
            raise JacobianError(f"non-positive Jacobian in element {int(np.argmin(detJ))}")
        Jinv = np.empty_like(J)
        Jinv[:, 0, 0] = J[:, 1, 1] / detJ
        Jinv[:, 1, 1] = J[:, 0, 0] / detJ
        Jinv[:, 0, 1] = -J[:, 0, 1] / detJ
        Jinv[:, 1, 0] = -J[:, 1, 0] / detJ
        dNdx = np.einsum("nab,bk->nak", Jinv, dN)
        B = np.zeros((n, 3, 8))
        B[:, 0, 0::2] = dNdx[:, 0]
        B[:, 1, 1::2] = dNdx[:, 1]
        B[:, 2, 0::2] = dNdx[:, 1]
        B[:, 2, 1::2] = dNdx[:, 0]
        k += (w * detJ)[:, None, None] * np.einsum("nai,ab,nbj->nij", B, D, B)
    return 0.5 * (k + np.transpose(k, (0, 2, 1)))


def _check_convex(coords: np.ndarray) -> None:
    for a in range(4):
        p, q, r = coords[a - 1], coords[a], coords[(a + 1) % 4]
        cross = (q[0] - p[0]) * (r[1] - q[1]) - (q[1] - p[1]) * (r[0] - q[0])
        if cross <= 0:
            raise JacobianError("element is not convex and counterclockwise")


def heaviside(points: np.ndarray, crack_segment: np.ndarray) -> np.ndarray:
    """+1 on the upper side of the crack line (left of the rightward direction), -1 below."""
    p0, p1 = np.asarray(crack_segment, dtype=float)
    d = p1 - p0
    n = np.array([-d[1], d[0]])
    if n[1] < 0 or (n[1] == 0 and n[0] < 0):
        n = -n
    s = (np.atleast_2d(points) - p0) @ n
    return np.where(s > 0, 1.0, -1.0)


def inverse_map(coords: np.ndarray, x: np.ndarray, tol: float = 1e-13) -> np.ndarray:
    """Parent coordinates of physical point ``x`` (Newton on the bilinear map)."""
    xi = np.zeros(2)
    for _ in range(50):
        N = shape_functions(*xi)
        r = N @ coords - x
        J = shape_derivatives(*xi) @ coords
        step = np.linalg.solve(J.T, r)
        xi -= step
        if np.max(np.abs(step)) < tol:
            break
    return xi


def _clip(poly: list[np.ndarray], a: float, b: float, c: float) -> list[np.ndarray]:
    """Part of a convex polygon with a*x + b*y + c >= 0 (Sutherland-Hodgman, one plane)."""
    out = []
    n = len(poly)
    for k in range(n):
        P, Q = poly[k], poly[(k + 1) % n]
        fp = a * P[0] + b * P[1] + c
        fq = a * Q[0] + b * Q[1] + c
        if fp >= 0:
            out.append(P)
        if (fp >= 0) != (fq >= 0):
            t = fp / (fp - fq)
            out.append(P + t * (Q - P))
    return out


def _edge_crossings(coords: np.ndarray, crack_segment: np.ndarray) -> list[np.ndarray]:
    p0, p1 = np.asarray(crack_segment, dtype=float)
    d = p1 - p0
    pts = []
    for a in range(4):
        P, Q = coords[a], coords[(a + 1) % 4]
        e = Q - P
        den = d[0] * e[1] - d[1] * e[0]
        if abs(den) < 1e-300:
            continue
        w = P - p0
        t = (w[0] * e[1] - w[1] * e[0]) / den   # along crack
        s = (w[0] * d[1] - w[1] * d[0]) / den   # along edge
        if 0.0 < s < 1.0 and -1e-12 <= t <= 1.0 + 1e-12:
            pts.append(P + s * e)
    return pts


def subcell_quadrature(coords: np.ndarray, crack_segment: np.ndarray):
    """Quadrature on crack-aligned triangular subcells of a completely cut element.

    Returns parent-space points (m, 2), weights (m,) including the parent
    triangle area, and the Heaviside value of the subcell each point lies in.
    """
    coords = np.asarray(coords, dtype=float)
    crossings = _edge_crossings(coords, crack_segment)
    if len(crossings) != 2:
        raise GeometryError("crack does not completely cut the element")
    xa, xb = (inverse_map(coords, p) for p in crossings)
    # parent-space line through the two crossing points
    a, b = -(xb[1] - xa[1]), xb[0] - xa[0]
    c = -(a * xa[0] + b * xa[1])
    square = [np.array(p) for p in ([-1.0, -1.0], [1.0, -1.0], [1.0, 1.0], [-1.0, 1.0])]
    pts, wts, hs = [], [], []
    for sign in (1.0, -1.0):
        poly = _clip(square, sign * a, sign * b, sign * c)
        if len(poly) < 3:
            raise GeometryError("degenerate subcell polygon")
        centroid = np.mean(poly, axis=0)
        h = float(heaviside(shape_functions(*centroid) @ coords, crack_segment)[0])
        for k in range(1, len(poly) - 1):
            v0, v1, v2 = poly[0], poly[k], poly[k + 1]
            area2 = (v1[0] - v0[0]) * (v2[1] - v0[1]) - (v1[1] - v0[1]) * (v2[0] - v0[0])
            if area2 <= 0:
                continue
            for (r, s), w in zip(TRI_3PT, TRI_3PT_W):
                pts.append(v0 + r * (v1 - v0) + s * (v2 - v0))
                wts.append(w * area2)
                hs.append(h)
    return np.array(pts), np.array(wts), np.array(hs)


def heaviside_split_stiffness(coords: np.ndarray, crack_segment: np.ndarray,
                              D: np.ndarray) -> np.ndarray:
    """16x16 stiffness of a cut element: [q (8), a (8)] with shifted Heaviside enrichment.

    The enriched basis is ``N_I (H(x) - H(x_I))``; it is integrated on triangular
    subcells aligned with the crack so no discontinuity falls inside a cell.
    """
    coords = np.asarray(coords, dtype=float)
    _check_convex(coords)
    node_h = heaviside(coords, crack_segment)
    pts, wts, hs = subcell_quadrature(coords, crack_segment)
    k = np.zeros((16, 16))
    for (xi, eta), w, h in zip(pts, wts, hs):
        B, detJ = b_matrix(coords, xi, eta)
        shift = np.repeat(h - node_h, 2)
        Bf = np.hstack([B, B * shift])
        k += w * detJ * Bf.T @ D @ Bf
    return 0.5 * (k + k.T)


def shifted_enrichment(coords: np.ndarray, crack_segment: np.ndarray, x: np.ndarray) -> np.ndarray:
    """Shifted enrichment functions ``N_I(x) (H(x) - H(x_I))`` at physical point ``x``."""
    coords = np.asarray(coords, dtype=float)
    xi = inverse_map(coords, np.asarray(x, dtype=float))
    return shape_functions(*xi) * (heaviside(x, crack_segment)[0] - heaviside(coords, crack_segment))


def plain_to_shifted(node_h: np.ndarray) -> np.ndarray:
    """Map [q; a_plain] to [q; a_shifted] for one element (16x16).

    ``N H a = N (H - H_I) a + N H_I a``, so the plain-H coefficients feed the
    standard DOFs through ``H_I``.
    """
    C = np.eye(16)
    C[np.arange(8), 8 + np.arange(8)] = np.repeat(node_h, 2)
    return C


def enriched_uncut_stiffness(k_std: np.ndarray, factors: np.ndarray) -> np.ndarray:
    """Stiffness over [q (8), a (for nodes with nonzero factor)] of an uncut element.

    ``factors[I] = H_element - H_I`` is constant over an uncut element, so the
    enriched block is a scaled copy of the standard one.
    """
    enr = np.flatnonzero(factors)
    T = np.zeros((8, 8 + 2 * len(enr)))
    T[:, :8] = np.eye(8)
    for m, node in enumerate(enr):
        T[2 * node, 8 + 2 * m] = factors[node]
        T[2 * node + 1, 8 + 2 * m + 1] = factors[node]
    return T.T @ k_std @ T


def edge_traction_load(p1: np.ndarray, p2: np.ndarray, traction: np.ndarray) -> np.ndarray:
    """Consistent nodal forces [f1x, f1y, f2x, f2y] of a constant traction (2-point Gauss)."""
    p1, p2 = np.asarray(p1, dtype=float), np.asarray(p2, dtype=float)
    L = np.hypot(*(p2 - p1))
    f = np.zeros(4)
    for g in (-_G, _G):
        N = np.array([0.5 * (1 - g), 0.5 * (1 + g)])
        f[0::2] += N * traction[0] * 0.5 * L
        f[1::2] += N * traction[1] * 0.5 * L
    return f


@dataclass(frozen=True)
class ElementStiffness:
    k: np.ndarray
    dofs: np.ndarray
    f: Optional[np.ndarray] = None


@dataclass(frozen=True)
class DofMap:
    """Standard DOFs ``2n, 2n+1`` for every node, Heaviside DOFs appended after."""

    n_nodes: int
    heaviside_nodes: np.ndarray
    inactive_nodes: np.ndarray = field(default_factory=lambda: np.zeros(0, dtype=int))

    def __post_init__(self):
        h = np.asarray(self.heaviside_nodes, dtype=int)
        object.__setattr__(self, "heaviside_nodes", h)
        lookup = np.full(self.n_nodes, -1, dtype=int)
        lookup[h] = np.arange(len(h))
        object.__setattr__(self, "_h_index", lookup)

    @property
    def n_standard(self) -> int:
        return 2 * self.n_nodes

    @property
    def total_dofs(self) -> int:
        return 2 * self.n_nodes + 2 * len(self.heaviside_nodes)

    def standard_dofs(self, nodes) -> np.ndarray:
        nodes = np.atleast_1d(nodes)
        return np.column_stack([2 * nodes, 2 * nodes + 1]).ravel()

    def is_enriched(self, node: int) -> bool:
        return self._h_index[node] >= 0

    def heaviside_dofs(self, nodes) -> np.ndarray:
        nodes = np.atleast_1d(nodes)
        idx = self._h_index[nodes]
        if np.any(idx < 0):
            raise AssemblyError(f"nodes {nodes[idx < 0].tolist()} carry no Heaviside DOFs")
        base = self.n_standard + 2 * idx
        return np.column_stack([base, base + 1]).ravel()

    def inactive_dofs(self) -> np.ndarray:
        return self.standard_dofs(self.inactive_nodes) if len(self.inactive_nodes) else \
            np.zeros(0, dtype=int)


def assemble(contributions: Iterable[ElementStiffness], total_dofs: int):
    """Scatter-add element matrices (and optional load vectors) into a CSR matrix."""
    rows, cols, vals = [], [], []
    f = np.zeros(total_dofs)
    for c in contributions:
        dofs = np.asarray(c.dofs, dtype=int)
        if dofs.size and (dofs.max() >= total_dofs or dofs.min() < 0):
            raise AssemblyError(f"DOF index out of range [0, {total_dofs})")
        m = len(dofs)
        rows.append(np.repeat(dofs, m))
        cols.append(np.tile(dofs, m))
        vals.append(np.asarray(c.k, dtype=float).ravel())
        if c.f is not None:
            np.add.at(f, dofs, c.f)
    if rows:
        r, cc, v = np.concatenate(rows), np.concatenate(cols), np.concatenate(vals)
    else:
        r = cc = np.zeros(0, dtype=int)
        v = np.zeros(0)
    K = sp.coo_matrix((v, (r, cc)), shape=(total_dofs, total_dofs)).tocsr()
    K.sum_duplicates()
    return K, f
