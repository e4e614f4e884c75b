"""Boundary conditions, sparse direct solve and Jacobi-scaled conditioning."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence

import numpy as np
import scipy.linalg as sla
import scipy.sparse as sp
import scipy.sparse.linalg as spla

from .errors import BoundaryConditionError, SolverError
from .fem import edge_traction_load

RESIDUAL_TOL = 1e-10
DENSE_LIMIT = 2000


@dataclass
class BoundaryConditions:
    """Prescribed DOF values, edge tractions and an optional closed-form displacement.

    ``analytic_dirichlet(x) -> (2,)`` is applied to the standard DOFs of
    ``analytic_nodes``; ``node_coords`` gives their positions.
    """

    dirichlet: list = field(default_factory=list)
    neumann: list = field(default_factory=list)
    analytic_dirichlet: Optional[Callable[[np.ndarray], np.ndarray]] = None
    analytic_nodes: Sequence[int] = ()

    def fixed_values(self, node_coords: Optional[np.ndarray] = None) -> dict:
        out: dict[int, float] = {}

        def put(dof, value):
            dof = int(dof)
            if dof in out and abs(out[dof] - value) > 1e-12 * max(1.0, abs(value)):
                raise BoundaryConditionError(
                    f"DOF {dof} prescribed twice with {out[dof]} and {value}")
            out[dof] = float(value)

        for dof, value in self.dirichlet:
            put(dof, value)
        if self.analytic_dirichlet is not None:
            if node_coords is None:
                raise BoundaryConditionError("analytic Dirichlet data needs node coordinates")
            for n in self.analytic_nodes:
                ux, uy = self.analytic_dirichlet(node_coords[n])
                put(2 * n, ux)
                put(2 * n + 1, uy)
        return out


@dataclass
class ConstrainedSystem:
    K: sp.csr_matrix
    f: np.ndarray
    fixed: np.ndarray
    values: np.ndarray


def neumann_load(n_dofs: int, node_coords: np.ndarray, neumann) -> np.ndarray:
    f = np.zeros(n_dofs)
    for (n1, n2), traction in neumann:
        fe = edge_traction_load(node_coords[n1], node_coords[n2], traction)
        f[[2 * n1, 2 * n1 + 1, 2 * n2, 2 * n2 + 1]] += fe
    return f


def apply_bcs(K: sp.spmatrix, f: np.ndarray, bcs: BoundaryConditions,
              node_coords: Optional[np.ndarray] = None) -> ConstrainedSystem:
    """Symmetric elimination: prescribed columns move to the RHS, rows become identity."""
    n = K.shape[0]
    f = np.array(f, dtype=float, copy=True)
    if bcs.neumann:
        if node_coords is None:
            raise BoundaryConditionError("tractions need node coordinates")
        f += neumann_load(n, node_coords, bcs.neumann)
    fixed_map = bcs.fixed_values(node_coords)
    fixed = np.array(sorted(fixed_map), dtype=int)
    values = np.array([fixed_map[d] for d in fixed])
    if len(fixed) and (fixed.min() < 0 or fixed.max() >= n):
        raise BoundaryConditionError("prescribed DOF outside the system")
    K = sp.csr_matrix(K)
    u0 = np.zeros(n)
    u0[fixed] = values
    f -= K @ u0
    keep = np.ones(n)
    keep[fixed] = 0.0
    S = sp.diags(keep)
    Kc = (S @ K @ S).tocsr()
    Kc = Kc + sp.diags(1.0 - keep)
    f[fixed] = values
    return ConstrainedSystem(K=Kc.tocsr(), f=f, fixed=fixed, values=values)


def solve(system: ConstrainedSystem, check: bool = True) -> np.ndarray:
    """Sparse LU solve with a relative residual check."""
    K = system.K.tocsc()
    try:
        lu = spla.splu(K)
        u = lu.solve(system.f)
    except RuntimeError as exc:
        diag = np.abs(K.diagonal())
        weak = np.argsort(diag)[:10]
        raise SolverError(f"factorisation failed ({exc}); smallest-diagonal DOFs {weak.tolist()}")
    if not np.all(np.isfinite(u)):
        raise SolverError("solution contains non-finite values")
    if check:
        r = residual(system, u)
        if r > RESIDUAL_TOL:
            raise SolverError(f"relative residual {r:.3e} exceeds {RESIDUAL_TOL:g}")
    return u


def residual(system: ConstrainedSystem, u: np.ndarray) -> float:
    r = system.K @ u - system.f
    scale = np.linalg.norm(system.f)
    if scale == 0.0:
        scale = 1.0
    return float(np.linalg.norm(r) / scale)


@dataclass(frozen=True)
class ConditioningReport:
    scaled_condition_number: float
    condition_number: float
    dof_count: int
    method: str

    def to_dict(self) -> dict:
        return {"scaled_condition_number": self.scaled_condition_number,
                "condition_number": self.condition_number, "dof_count": self.dof_count,
                "method": self.method}


def _extreme_eigenvalues(A: sp.spmatrix) -> tuple[float, float, str]:
    n = A.shape[0]
    if n <= DENSE_LIMIT:
        w = sla.eigvalsh(A.toarray())
        return float(w[0]), float(w[-1]), "dense eigvalsh"
    big = spla.eigsh(A, k=1, which="LA", return_eigenvectors=False, tol=1e-10)[0]
    small = spla.eigsh(A.tocsc(), k=1, sigma=0.0, which="LM", return_eigenvectors=False,
                       tol=1e-10)[0]
    return float(small), float(big), "lanczos (largest) + shift-invert lanczos (smallest)"


def scaled_condition_number(K: sp.spmatrix, exclude: Sequence[int] = (),
                            unscaled: bool = True) -> ConditioningReport:
    """Condition number of ``P K P`` with ``P = diag(K)^-1/2`` over the retained DOFs.

    ``K`` is symmetric positive definite on the retained DOFs, so singular values
    equal eigenvalues.
    """
    K = sp.csr_matrix(K)
    keep = np.setdiff1d(np.arange(K.shape[0]), np.asarray(exclude, dtype=int))
    Kr = K[keep][:, keep]
    d = Kr.diagonal()
    bad = np.flatnonzero(d <= 0)
    if len(bad):
        raise SolverError(f"non-positive diagonal at DOF {int(keep[bad[0]])}")
    P = sp.diags(1.0 / np.sqrt(d))
    lo, hi, method = _extreme_eigenvalues((P @ Kr @ P).tocsr())
    if lo <= 0:
        raise SolverError("scaled matrix is not positive definite on the retained DOFs")
    plain = np.nan
    if unscaled:
        lo_k, hi_k, _ = _extreme_eigenvalues(Kr)
        plain = hi_k / lo_k
    return ConditioningReport(scaled_condition_number=hi / lo, condition_number=plain,
                              dof_count=len(keep), method=method)
