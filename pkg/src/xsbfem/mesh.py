"""Structured quad meshes, straight cracks and region classification.

The domain is split into standard elements, Heaviside-enriched elements along
the crack, and square blocks of elements around each crack tip whose boundary
becomes a scaled boundary subdomain.  A crack may cut element interiors or run
exactly along a mesh line; tips may sit inside an element or on a node.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from enum import IntEnum
from typing import Optional, Sequence

import numpy as np

from .errors import GeometryError, LayerOverflowError

_GRID_TOL = 1e-9


class Region(IntEnum):
    FEM = 0
    XFEM_SPLIT = 1
    SBFEM = 2
    UNUSED_INTERIOR = 3


@dataclass(frozen=True)
class Mesh:
    """Uniform structured grid of bilinear quads on ``[0, width] x [0, height]``.

    Nodes are numbered lexicographically (x fastest); element ``e = j*nx + i``
    has corner nodes in counterclockwise order starting bottom-left.
    """

    nodes: np.ndarray
    elements: np.ndarray
    nx: int
    ny: int
    width: float
    height: float

    @property
    def hx(self) -> float:
        return self.width / self.nx

    @property
    def hy(self) -> float:
        return self.height / self.ny

    @property
    def n_nodes(self) -> int:
        return len(self.nodes)

    @property
    def n_elements(self) -> int:
        return len(self.elements)

    def node_id(self, i: int, j: int) -> int:
        return j * (self.nx + 1) + i

    def element_id(self, i: int, j: int) -> int:
        return j * self.nx + i

    def element_coords(self, e: int) -> np.ndarray:
        return self.nodes[self.elements[e]]

    def boundary_edges(self, side: str) -> list[tuple[int, int]]:
        """Edges on one side (``bottom``, ``right``, ``top``, ``left``) of the domain."""
        nx, ny = self.nx, self.ny
        if side == "bottom":
            return [(self.node_id(i, 0), self.node_id(i + 1, 0)) for i in range(nx)]
        if side == "top":
            return [(self.node_id(i, ny), self.node_id(i + 1, ny)) for i in range(nx)]
        if side == "left":
            return [(self.node_id(0, j), self.node_id(0, j + 1)) for j in range(ny)]
        if side == "right":
            return [(self.node_id(nx, j), self.node_id(nx, j + 1)) for j in range(ny)]
        raise ValueError(f"unknown side {side!r}")

    def boundary_nodes(self) -> np.ndarray:
        x, y = self.nodes[:, 0], self.nodes[:, 1]
        tol = 1e-12 * max(self.width, self.height)
        on = (x < tol) | (y < tol) | (x > self.width - tol) | (y > self.height - tol)
        return np.flatnonzero(on)

    def to_dict(self) -> dict:
        return {"nx": self.nx, "ny": self.ny, "width": self.width, "height": self.height,
                "nodes": self.nodes.tolist(), "elements": self.elements.tolist()}


def build_structured_mesh(width: float, height: float, nx: int, ny: int) -> Mesh:
    if not (width > 0 and height > 0):
        raise GeometryError(f"domain dimensions must be positive, got {width} x {height}")
    if int(nx) != nx or int(ny) != ny or nx < 1 or ny < 1:
        raise GeometryError(f"element counts must be integers >= 1, got {nx} x {ny}")
    nx, ny = int(nx), int(ny)
    xs = np.linspace(0.0, width, nx + 1)
    ys = np.linspace(0.0, height, ny + 1)
    X, Y = np.meshgrid(xs, ys)
    nodes = np.column_stack([X.ravel(), Y.ravel()])
    i, j = np.meshgrid(np.arange(nx), np.arange(ny))
    i, j = i.ravel(), j.ravel()
    n0 = j * (nx + 1) + i
    elements = np.column_stack([n0, n0 + 1, n0 + nx + 2, n0 + nx + 1])
    return Mesh(nodes=nodes, elements=elements, nx=nx, ny=ny, width=float(width),
                height=float(height))


@dataclass(frozen=True)
class CrackTip:
    point: np.ndarray
    direction: np.ndarray  # unit vector pointing from the crack into the tip
    label: str


@dataclass(frozen=True)
class CrackGeometry:
    """Straight crack given as a polyline; the first vertex is the mouth, the last the tip.

    Either end that lies strictly inside the domain is treated as a tip, so a
    centre crack has two tips.
    """

    points: np.ndarray = field(default_factory=lambda: np.zeros((0, 2)))

    def __post_init__(self):
        pts = np.atleast_2d(np.asarray(self.points, dtype=float)).reshape(-1, 2)
        object.__setattr__(self, "points", pts)
        if len(pts) == 1:
            raise GeometryError("a crack needs at least two points")
        if len(pts) >= 2:
            d = pts[-1] - pts[0]
            length = np.hypot(*d)
            if length == 0:
                raise GeometryError("crack has zero length")
            # straight polyline only
            for p in pts[1:-1]:
                cross = d[0] * (p[1] - pts[0, 1]) - d[1] * (p[0] - pts[0, 0])
                if abs(cross) > 1e-12 * length**2:
                    raise GeometryError("only straight cracks are supported")

    @classmethod
    def segment(cls, mouth, tip) -> "CrackGeometry":
        return cls(np.array([mouth, tip], dtype=float))

    @property
    def is_empty(self) -> bool:
        return len(self.points) == 0

    @property
    def mouth(self) -> np.ndarray:
        return self.points[0]

    @property
    def tip(self) -> np.ndarray:
        return self.points[-1]

    @property
    def is_horizontal(self) -> bool:
        d = self.tip - self.mouth
        return abs(d[1]) <= 1e-12 * abs(d[0])

    def tips(self, mesh: Mesh) -> list[CrackTip]:
        """Crack ends strictly inside the mesh domain, with their growth directions."""
        if self.is_empty:
            return []
        d = self.tip - self.mouth
        d = d / np.hypot(*d)
        out = []
        for point, direction, label in ((self.mouth, -d, "mouth"), (self.tip, d, "tip")):
            if _strictly_inside(mesh, point):
                out.append(CrackTip(point=point.copy(), direction=direction, label=label))
        return out


def _strictly_inside(mesh: Mesh, p: np.ndarray) -> bool:
    tol = 1e-12 * max(mesh.width, mesh.height)
    return tol < p[0] < mesh.width - tol and tol < p[1] < mesh.height - tol


@dataclass(frozen=True)
class SbfemBlock:
    """Rectangular block of elements ``[i0, i1) x [j0, j1)`` replaced by one SBFEM subdomain."""

    center: np.ndarray
    i0: int
    i1: int
    j0: int
    j1: int
    direction: Optional[np.ndarray] = None
    label: str = ""

    @property
    def cracked(self) -> bool:
        return self.direction is not None

    def contains_element(self, i: int, j: int) -> bool:
        return self.i0 <= i < self.i1 and self.j0 <= j < self.j1


@dataclass(frozen=True)
class RegionClassification:
    element_region: np.ndarray
    heaviside_nodes: np.ndarray
    sbfem_boundary_nodes: np.ndarray
    fem_nodes: np.ndarray
    inactive_nodes: np.ndarray
    node_sign: np.ndarray
    element_sign: np.ndarray
    blocks: tuple[SbfemBlock, ...]
    crack_y: Optional[float] = None
    crack_aligned: bool = False
    n_layers: int = 0

    def count(self, region: Region) -> int:
        return int(np.count_nonzero(self.element_region == region))

    def to_dict(self) -> dict:
        return {
            "element_region": [Region(r).name for r in self.element_region],
            "heaviside_nodes": self.heaviside_nodes.tolist(),
            "sbfem_boundary_nodes": self.sbfem_boundary_nodes.tolist(),
            "inactive_nodes": self.inactive_nodes.tolist(),
            "crack_y": self.crack_y,
            "crack_aligned": self.crack_aligned,
            "n_layers": self.n_layers,
            "blocks": [
                {"center": b.center.tolist(), "elements_x": [b.i0, b.i1],
                 "elements_y": [b.j0, b.j1], "cracked": b.cracked, "label": b.label}
                for b in self.blocks
            ],
        }


def mesh_to_json(mesh: Mesh, classification: Optional[RegionClassification] = None) -> str:
    doc = {"mesh": mesh.to_dict()}
    if classification is not None:
        doc["classification"] = classification.to_dict()
    return json.dumps(doc)


def _grid_position(value: float, h: float) -> tuple[float, bool]:
    t = value / h
    on_line = abs(t - round(t)) < _GRID_TOL
    return (float(round(t)) if on_line else t), on_line


def _block_range(t: float, on_line: bool, n_layers: int) -> tuple[int, int]:
    if on_line:
        k = int(round(t))
        return k - n_layers, k + n_layers
    k = int(np.floor(t))
    return k - n_layers + 1, k + n_layers


def _make_block(mesh: Mesh, center, n_layers: int, direction=None, label="") -> SbfemBlock:
    center = np.asarray(center, dtype=float)
    tx, on_x = _grid_position(center[0], mesh.hx)
    ty, on_y = _grid_position(center[1], mesh.hy)
    i0, i1 = _block_range(tx, on_x, n_layers)
    j0, j1 = _block_range(ty, on_y, n_layers)
    if i0 < 0 or j0 < 0 or i1 > mesh.nx or j1 > mesh.ny:
        raise LayerOverflowError(
            f"{n_layers} SBFEM layers around {center.tolist()} need elements "
            f"[{i0},{i1})x[{j0},{j1}) but the mesh has {mesh.nx}x{mesh.ny}")
    return SbfemBlock(center=center, i0=i0, i1=i1, j0=j0, j1=j1, direction=direction, label=label)


def classify_regions(mesh: Mesh, crack: Optional[CrackGeometry], n_layers: int = 1,
                     sbfem_centers: Sequence = (), tip_blocks: bool = True) -> RegionClassification:
    """Tag every element FEM / XFEM_SPLIT / SBFEM / UNUSED_INTERIOR.

    Each crack tip gets a block of ``n_layers`` element rings (the tip element,
    or the four elements around a tip node, plus ``n_layers - 1`` rings).  The
    outer ring is tagged SBFEM and the rest UNUSED_INTERIOR; nodes strictly
    inside a block carry no stiffness.  ``sbfem_centers`` adds uncracked blocks,
    used for patch tests.

    With ``tip_blocks=False`` no subdomain is built and the crack is modelled
    with Heaviside enrichment alone (the tips must lie on element boundaries);
    this is the enrichment-only baseline used for conditioning comparisons.

    When the crack cuts element interiors, the cut elements outside the blocks
    are XFEM_SPLIT and all their nodes are Heaviside-enriched.  When it runs along
    a mesh line, the row just below the line is XFEM_SPLIT and the nodes on the
    line are enriched (their shifted Heaviside vanishes above the line).
    """
    n_el = mesh.n_elements
    region = np.full(n_el, Region.FEM, dtype=int)
    node_sign = np.zeros(mesh.n_nodes)
    element_sign = np.zeros(n_el)
    if n_layers < 1:
        raise GeometryError("n_layers must be >= 1")

    crack = crack if crack is not None and not crack.is_empty else None
    blocks: list[SbfemBlock] = []
    crack_y = None
    aligned = False
    if crack is not None:
        if not crack.is_horizontal:
            raise GeometryError("only horizontal cracks are supported by the region classifier")
        crack_y = float(crack.mouth[1])
        if not 0.0 < crack_y < mesh.height:
            raise GeometryError("crack line must lie strictly inside the domain")
        for tip in (crack.tips(mesh) if tip_blocks else ()):
            blocks.append(_make_block(mesh, tip.point, n_layers, tip.direction, tip.label))
    for k, c in enumerate(sbfem_centers):
        blocks.append(_make_block(mesh, c, n_layers, None, f"patch{k}"))

    ii = np.arange(n_el) % mesh.nx
    jj = np.arange(n_el) // mesh.nx
    in_block = np.zeros(n_el, dtype=bool)
    for b in blocks:
        mask = (ii >= b.i0) & (ii < b.i1) & (jj >= b.j0) & (jj < b.j1)
        if np.any(in_block & mask):
            raise GeometryError("SBFEM blocks overlap; reduce n_layers or move the tips apart")
        in_block |= mask
        interior = (ii > b.i0) & (ii < b.i1 - 1) & (jj > b.j0) & (jj < b.j1 - 1)
        region[mask] = Region.SBFEM
        region[interior & mask] = Region.UNUSED_INTERIOR

    heaviside = np.zeros(0, dtype=int)
    if crack is not None:
        x_lo, x_hi = sorted((float(crack.mouth[0]), float(crack.tip[0])))
        ty, aligned = _grid_position(crack_y, mesh.hy)
        row = int(round(ty)) - 1 if aligned else int(np.floor(ty))
        xs = mesh.nodes[mesh.elements[:, 0], 0]
        xe = xs + mesh.hx
        tol = _GRID_TOL * mesh.hx
        crosses = (jj == row) & (xe > x_lo + tol) & (xs < x_hi - tol)
        full = (xs >= x_lo - tol) & (xe <= x_hi + tol)
        if np.any(crosses & ~full & ~in_block):
            raise GeometryError("crack ends inside an element outside the SBFEM blocks")
        for b in blocks:
            if not b.cracked:
                hit = crosses & (ii >= b.i0) & (ii < b.i1) & (jj >= b.j0) & (jj < b.j1)
                if np.any(hit):
                    raise GeometryError("crack passes through an uncracked SBFEM block")
        split = crosses & full & ~in_block
        for b in blocks:
            if b.cracked and not _crack_leaves_block(mesh, b, x_lo, x_hi):
                raise GeometryError(
                    "crack must extend beyond its SBFEM block by at least one element")
        region[split] = Region.XFEM_SPLIT
        split_elems = np.flatnonzero(split)
        if aligned:
            top = np.unique(mesh.elements[split_elems][:, 2:4])
            if not tip_blocks:
                # nodes at a tip are not fully cut
                ends = [p[0] for p in (crack.mouth, crack.tip) if _strictly_inside(mesh, p)]
                for xe_ in ends:
                    top = top[np.abs(mesh.nodes[top, 0] - xe_) > tol]
            heaviside = top
        else:
            heaviside = np.unique(mesh.elements[split_elems])

        y = mesh.nodes[:, 1]
        ytol = _GRID_TOL * mesh.hy
        node_sign = np.where(y > crack_y - ytol, 1.0, -1.0)
        yc = mesh.nodes[mesh.elements[:, 0], 1] + 0.5 * mesh.hy
        element_sign = np.where(yc > crack_y, 1.0, -1.0)
        if not aligned:
            element_sign[split] = 0.0

    inactive = []
    boundary = []
    for b in blocks:
        for j in range(b.j0, b.j1 + 1):
            for i in range(b.i0, b.i1 + 1):
                n = mesh.node_id(i, j)
                if b.i0 < i < b.i1 and b.j0 < j < b.j1:
                    inactive.append(n)
                else:
                    boundary.append(n)
    inactive = np.array(sorted(inactive), dtype=int)
    fem_nodes = np.unique(mesh.elements[(region == Region.FEM) | (region == Region.XFEM_SPLIT)])

    return RegionClassification(
        element_region=region,
        heaviside_nodes=np.asarray(heaviside, dtype=int),
        sbfem_boundary_nodes=np.unique(np.array(boundary, dtype=int)),
        fem_nodes=fem_nodes,
        inactive_nodes=inactive,
        node_sign=node_sign,
        element_sign=element_sign,
        blocks=tuple(blocks),
        crack_y=crack_y,
        crack_aligned=bool(aligned),
        n_layers=n_layers,
    )


def _crack_leaves_block(mesh: Mesh, b: SbfemBlock, x_lo: float, x_hi: float) -> bool:
    tol = _GRID_TOL * mesh.hx
    if b.direction[0] > 0:
        face = b.i0 * mesh.hx
        return x_lo < face - mesh.hx + tol
    face = b.i1 * mesh.hx
    return x_hi > face + mesh.hx - tol


@dataclass(frozen=True)
class SbfemSubdomain:
    """Boundary discretisation of one scaled boundary subdomain.

    ``node_coords`` are absolute coordinates.  For a cracked subdomain the
    boundary is open: node 0 and node ``n-1`` are the two copies of the crack
    mouth point (first on the lower crack face in the tip frame, then upper),
    and ``connectivity`` runs counterclockwise between them.  ``mesh_nodes``
    holds the underlying mesh node for every boundary node, ``-1`` for mouth
    copies; ``mouth_side`` holds the global Heaviside sign of each mouth copy.
    """

    scaling_center: np.ndarray
    node_coords: np.ndarray
    connectivity: np.ndarray
    mesh_nodes: np.ndarray
    mouth_side: np.ndarray
    mouth_edge_nodes: tuple = ()
    mouth_edge_shape: tuple = ()
    crack_direction: Optional[np.ndarray] = None

    @property
    def n_nodes(self) -> int:
        return len(self.node_coords)

    @property
    def n_dofs(self) -> int:
        return 2 * len(self.node_coords)

    @property
    def n_elements(self) -> int:
        return len(self.connectivity)

    @property
    def cracked(self) -> bool:
        return self.crack_direction is not None

    @property
    def mouth_point(self) -> Optional[np.ndarray]:
        return self.node_coords[0] if self.cracked else None

    @property
    def relative_coords(self) -> np.ndarray:
        return self.node_coords - self.scaling_center

    def frame(self) -> np.ndarray:
        """Columns are the crack-tip axes: growth direction and its left normal."""
        d = self.crack_direction if self.cracked else np.array([1.0, 0.0])
        return np.array([[d[0], -d[1]], [d[1], d[0]]])

    def boundary_point(self, element: int, eta: float) -> np.ndarray:
        """Boundary coordinates relative to the scaling centre at ``eta`` in [-1, 1]."""
        a, b = self.relative_coords[self.connectivity[element]]
        return 0.5 * (1 - eta) * a + 0.5 * (1 + eta) * b

    def r_b(self, element: int, eta: float) -> float:
        return float(np.hypot(*self.boundary_point(element, eta)))

    def theta(self, element: int, eta: float) -> float:
        """Polar angle in the crack-tip frame; the crack faces sit at -pi and +pi."""
        local = self.frame().T @ self.boundary_point(element, eta)
        return float(np.arctan2(local[1], local[0]))

    def is_star_convex(self) -> bool:
        rel = self.relative_coords[self.connectivity]
        a = rel[:, 0, 0] * rel[:, 1, 1] - rel[:, 1, 0] * rel[:, 0, 1]
        return bool(np.all(a > 0))


def _perimeter_cycle(mesh: Mesh, b: SbfemBlock) -> list[tuple[int, int]]:
    cyc = [(i, b.j0) for i in range(b.i0, b.i1)]
    cyc += [(b.i1, j) for j in range(b.j0, b.j1)]
    cyc += [(i, b.j1) for i in range(b.i1, b.i0, -1)]
    cyc += [(b.i0, j) for j in range(b.j1, b.j0, -1)]
    return cyc


def extract_sbfem_subdomain(mesh: Mesh, classification: RegionClassification,
                            crack: Optional[CrackGeometry] = None,
                            block: int = 0) -> SbfemSubdomain:
    """Boundary of SBFEM block ``block`` as an ordered chain of 2-node line elements."""
    if not classification.blocks:
        raise GeometryError("classification has no SBFEM region")
    b = classification.blocks[block]
    cyc = _perimeter_cycle(mesh, b)
    ids = [mesh.node_id(i, j) for i, j in cyc]
    coords = mesh.nodes[ids]

    if not b.cracked:
        n = len(ids)
        conn = np.column_stack([np.arange(n), (np.arange(n) + 1) % n])
        return SbfemSubdomain(
            scaling_center=b.center.copy(), node_coords=coords.copy(), connectivity=conn,
            mesh_nodes=np.array(ids), mouth_side=np.zeros(n))

    yc = classification.crack_y
    if b.direction[0] > 0:
        face_i = b.i0
    else:
        face_i = b.i1
    face_x = face_i * mesh.hx
    hits = []
    n = len(cyc)
    for k in range(n):
        (ia, ja), (ib, jb) = cyc[k], cyc[(k + 1) % n]
        ya, yb = ja * mesh.hy, jb * mesh.hy
        if ia == ib == face_i:
            if abs(ya - yc) <= _GRID_TOL * mesh.hy:
                hits.append(("node", k))
            elif min(ya, yb) < yc < max(ya, yb):
                hits.append(("edge", k))
    if len(hits) != 1:
        raise GeometryError(f"crack must cross the SBFEM boundary exactly once, found {len(hits)}")
    kind, k = hits[0]
    mouth = np.array([face_x, yc])

    if kind == "node":
        order = [(k + s) % n for s in range(1, n)]
        edge_nodes = (ids[k],)
        edge_shape = (1.0,)
    else:
        order = [(k + 1 + s) % n for s in range(n)]
        na, nb = ids[k], ids[(k + 1) % n]
        ya, yb = mesh.nodes[na, 1], mesh.nodes[nb, 1]
        Na = (yb - yc) / (yb - ya)
        edge_nodes = (na, nb)
        edge_shape = (float(Na), float(1.0 - Na))

    inner_ids = [ids[m] for m in order]
    node_coords = np.vstack([mouth, mesh.nodes[inner_ids], mouth])
    mesh_nodes = np.array([-1] + inner_ids + [-1])
    first_side = 1.0 if node_coords[1, 1] > yc else -1.0
    mouth_side = np.zeros(len(node_coords))
    mouth_side[0], mouth_side[-1] = first_side, -first_side
    m = len(node_coords)
    conn = np.column_stack([np.arange(m - 1), np.arange(1, m)])
    sub = SbfemSubdomain(
        scaling_center=b.center.copy(), node_coords=node_coords, connectivity=conn,
        mesh_nodes=mesh_nodes, mouth_side=mouth_side, mouth_edge_nodes=edge_nodes,
        mouth_edge_shape=edge_shape, crack_direction=np.asarray(b.direction, dtype=float))
    if not sub.is_star_convex():
        raise GeometryError("scaling centre does not see the whole subdomain boundary")
    return sub
