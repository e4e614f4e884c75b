"""Scaled boundary subdomains: coefficient matrices, modal solution and stiffness.

Displacements inside a subdomain are ``u(xi, eta) = N(eta) sum_i c_i xi^mu_i phi_i``
with ``xi`` the normalised radial coordinate (0 at the scaling centre) and
``mu = -lambda`` the exponent of each deformation mode.
"""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from .errors import SbfemError
from .mesh import SbfemSubdomain

SPECTRAL_SHIFT = 1e-12
E0_COND_LIMIT = 1e14
V11_COND_LIMIT = 1e12
RIGID_TOL = 1e-4


@dataclass(frozen=True)
class CoefficientMatrices:
    E0: np.ndarray
    E1: np.ndarray
    E2: np.ndarray

    @property
    def n(self) -> int:
        return self.E0.shape[0]


@dataclass(frozen=True)
class EigenSolution:
    """Selected deformation modes.

    ``lam`` are the n eigenvalues of Z with the smallest real parts; ``mu = -lam``
    is the radial exponent.  ``phi`` (= v11) holds displacement modes and ``v21``
    the matching boundary-force modes, both column-wise.
    """

    lam: np.ndarray
    phi: np.ndarray
    v21: np.ndarray
    all_eigenvalues: np.ndarray
    scale: float = 1.0
    coeffs: Optional[CoefficientMatrices] = field(default=None, repr=False)
    rigid_modes: tuple = ()

    @property
    def mu(self) -> np.ndarray:
        return -self.lam

    @property
    def n(self) -> int:
        return len(self.lam)


@dataclass(frozen=True)
class SbfemStiffness:
    K: np.ndarray
    eig: EigenSolution
    asymmetry: float
    imag_residue: float
    L0: Optional[float] = None


def b_matrices(p1, p2, eta: float) -> tuple[np.ndarray, np.ndarray, float]:
    """``b1`` (constant), ``b2(eta)`` and the Jacobian ``|J|`` of a 2-node boundary element.

    Coordinates are relative to the scaling centre.
    """
    (x1, y1), (x2, y2) = p1, p2
    xb = 0.5 * (1 - eta) * x1 + 0.5 * (1 + eta) * x2
    yb = 0.5 * (1 - eta) * y1 + 0.5 * (1 + eta) * y2
    xe, ye = 0.5 * (x2 - x1), 0.5 * (y2 - y1)
    detJ = xb * ye - yb * xe
    b1 = np.array([[ye, 0.0], [0.0, -xe], [-xe, ye]]) / detJ
    b2 = np.array([[-yb, 0.0], [0.0, xb], [xb, -yb]]) / detJ
    return b1, b2, detJ


def line_B(p1, p2, eta: float) -> tuple[np.ndarray, np.ndarray, float]:
    """3x4 matrices ``B1 = b1 N`` and ``B2 = b2 dN/deta`` at ``eta``."""
    b1, b2, detJ = b_matrices(p1, p2, eta)
    N = np.array([0.5 * (1 - eta), 0.5 * (1 + eta)])
    dN = np.array([-0.5, 0.5])
    B1 = np.hstack([b1 * N[0], b1 * N[1]])
    B2 = np.hstack([b2 * dN[0], b2 * dN[1]])
    return B1, B2, detJ


def line2_coefficients(p1, p2, D: np.ndarray) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Closed-form element coefficient matrices (4x4) of a 2-node line element."""
    (x1, y1), (x2, y2) = np.asarray(p1, dtype=float), np.asarray(p2, dtype=float)
    a = x1 * y2 - x2 * y1
    scale = max(np.hypot(x1, y1), np.hypot(x2, y2)) ** 2
    if not abs(a) > 1e-14 * scale:
        raise SbfemError("boundary element is collinear with the scaling centre")
    if a < 0:
        raise SbfemError("boundary element is oriented clockwise about the scaling centre")
    dx, dy = x2 - x1, y2 - y1
    sx, sy = x2 + x1, y2 + y1
    C1 = np.array([[dy, 0.0], [0.0, -dx], [-dx, dy]])
    C2 = 0.5 * np.array([[sy, 0.0], [0.0, -sx], [-sx, sy]])
    Q0 = C1.T @ D @ C1 / (4 * a)
    Q1 = -C2.T @ D @ C1 / (4 * a)
    Q2 = C2.T @ D @ C2 / (4 * a)
    e0 = 2.0 / 3.0 * np.block([[2 * Q0, Q0], [Q0, 2 * Q0]])
    e1 = 1.0 / 3.0 * np.block([[-Q0, Q0], [Q0, -Q0]]) + 2.0 * np.block([[-Q1, -Q1], [Q1, Q1]])
    e2 = 1.0 / 3.0 * np.block([[Q0, -Q0], [-Q0, Q0]]) + 4.0 * np.block([[Q2, -Q2], [-Q2, Q2]])
    return e0, e1, e2


def assemble_coefficients(subdomain: SbfemSubdomain, D: np.ndarray) -> CoefficientMatrices:
    if subdomain.n_elements < 2:
        raise SbfemError("a subdomain needs at least two boundary elements")
    n = subdomain.n_dofs
    E0, E1, E2 = np.zeros((n, n)), np.zeros((n, n)), np.zeros((n, n))
    rel = subdomain.relative_coords
    for a, b in subdomain.connectivity:
        e0, e1, e2 = line2_coefficients(rel[a], rel[b], D)
        d = np.array([2 * a, 2 * a + 1, 2 * b, 2 * b + 1])
        ix = np.ix_(d, d)
        E0[ix] += e0
        E1[ix] += e1
        E2[ix] += e2
    return CoefficientMatrices(E0=0.5 * (E0 + E0.T), E1=E1, E2=0.5 * (E2 + E2.T))


def solve_eigen(coeffs: CoefficientMatrices) -> EigenSolution:
    """Modes with the n smallest real parts of the Hamiltonian matrix Z.

    The E-matrices are divided by their norm first (the eigenvalues do not
    change; force modes are scaled back).  ``E2`` is shifted by ``1e-12 E0`` so
    the defective rigid-body pair splits into two small distinct eigenvalues.
    """
    n = coeffs.n
    scale = float(np.linalg.norm(coeffs.E0, 2))
    if not (np.isfinite(scale) and scale > 0.0):
        raise SbfemError("E0 is zero or not finite")
    E0, E1, E2 = coeffs.E0 / scale, coeffs.E1 / scale, coeffs.E2 / scale
    cond = np.linalg.cond(E0)
    if not cond < E0_COND_LIMIT:
        raise SbfemError(f"E0 is numerically singular (condition {cond:.3e})")
    m = np.linalg.solve(E0, np.hstack([E1.T, -np.eye(n)]))
    Z = np.block([[m],
                  [E1 @ m[:, :n] - E2 - SPECTRAL_SHIFT * E0, E1 @ m[:, n:]]])
    w, V = np.linalg.eig(Z)
    order = np.argsort(w.real, kind="stable")
    sel = order[:n]
    lam = w[sel]
    phi = V[:n, sel]
    v21 = V[n:, sel] * scale
    # normalise each mode to unit displacement norm
    norms = np.linalg.norm(phi, axis=0)
    phi = phi / norms
    v21 = v21 / norms
    rigid = _snap_rigid_modes(lam, phi, v21)
    return EigenSolution(lam=lam, phi=phi, v21=v21, all_eigenvalues=w[order], scale=scale,
                         coeffs=coeffs, rigid_modes=rigid)


def _snap_rigid_modes(lam, phi, v21) -> tuple[int, ...]:
    """Replace the shifted rigid pair by exact translations with zero force modes.

    The shift leaves the pair at ``|lam| ~ 1e-6``, which would leak
    ``lam E0 phi`` into the force modes; exact translations carry no force.
    """
    idx = np.argsort(np.abs(lam), kind="stable")[:2]
    if len(idx) < 2 or np.max(np.abs(lam[idx])) > RIGID_TOL:
        return ()
    n = phi.shape[0]
    t = np.zeros((n, 2))
    t[0::2, 0] = 1.0
    t[1::2, 1] = 1.0
    t /= np.sqrt(n / 2)
    for k, col in zip(idx, t.T):
        lam[k] = 0.0
        phi[:, k] = col
        v21[:, k] = 0.0
    return tuple(int(k) for k in idx)


def stiffness(eig: EigenSolution, L0: Optional[float] = None) -> SbfemStiffness:
    """Boundary stiffness ``K = Re(v21 v11^-1)`` (symmetrised)."""
    cond = np.linalg.cond(eig.phi)
    if not cond < V11_COND_LIMIT:
        raise SbfemError(f"displacement mode matrix is ill-conditioned (condition {cond:.3e})")
    Kc = np.linalg.solve(eig.phi.T, eig.v21.T).T
    K = Kc.real
    norm = np.linalg.norm(K)
    imag = float(np.linalg.norm(Kc.imag) / norm)
    asym = float(np.linalg.norm(K - K.T) / norm)
    return SbfemStiffness(K=0.5 * (K + K.T), eig=eig, asymmetry=asym, imag_residue=imag, L0=L0)


def stiffness_from_modes(coeffs: CoefficientMatrices, eig: EigenSolution) -> np.ndarray:
    """Alternative stiffness ``-E0 phi diag(lam) phi^-1 + E1^T`` (cross-check only)."""
    A = -coeffs.E0 @ eig.phi @ np.diag(eig.lam) + coeffs.E1.T @ eig.phi
    return np.linalg.solve(eig.phi.T, A.T).T.real


def integration_constants(eig: EigenSolution, u_b: np.ndarray) -> np.ndarray:
    u_b = np.asarray(u_b, dtype=float)
    if u_b.shape != (eig.n,):
        raise SbfemError(f"boundary displacement has length {u_b.size}, expected {eig.n}")
    cond = np.linalg.cond(eig.phi)
    if not cond < V11_COND_LIMIT:
        raise SbfemError(f"displacement mode matrix is ill-conditioned (condition {cond:.3e})")
    return np.linalg.solve(eig.phi, u_b.astype(complex))


def pencil_residuals(eig: EigenSolution, coeffs: Optional[CoefficientMatrices] = None) -> np.ndarray:
    """``|(lam^2 E0 - lam (E1^T - E1) - E2) phi| / (|phi| |E2|)`` for every selected mode."""
    c = coeffs or eig.coeffs
    if c is None:
        raise SbfemError("coefficient matrices are required for the pencil residual")
    norm_e2 = np.linalg.norm(c.E2, 2)
    out = np.empty(eig.n)
    A = c.E1.T - c.E1
    for k in range(eig.n):
        lam, v = eig.lam[k], eig.phi[:, k]
        r = lam**2 * (c.E0 @ v) - lam * (A @ v) - c.E2 @ v
        out[k] = np.linalg.norm(r) / (np.linalg.norm(v) * norm_e2)
    return out


def hamiltonian_pairing_error(eig: EigenSolution) -> float:
    """Largest mismatch between the sorted spectrum and its negated reverse (large modes)."""
    w = np.sort_complex(eig.all_eigenvalues)
    real = np.sort(w.real)
    mirror = -real[::-1]
    big = np.abs(real) > 1e-3
    if not np.any(big):
        return 0.0
    return float(np.max(np.abs(real[big] - mirror[big]) / np.abs(real[big])))


def stress_modes(eig: EigenSolution, subdomain: SbfemSubdomain, D: np.ndarray,
                 modes: Sequence[int], eta: float = 0.0) -> np.ndarray:
    """Boundary stress modes ``D (mu_i B1 + B2) phi_i`` per element, shape (n_el, 3, len(modes)).

    The stress at radial coordinate ``xi`` is ``sum_i c_i xi^(mu_i - 1) Psi_i``.
    Components are in global axes (xx, yy, xy).
    """
    rel = subdomain.relative_coords
    modes = list(modes)
    out = np.zeros((subdomain.n_elements, 3, len(modes)), dtype=complex)
    for e, (a, b) in enumerate(subdomain.connectivity):
        B1, B2, _ = line_B(rel[a], rel[b], eta)
        d = np.array([2 * a, 2 * a + 1, 2 * b, 2 * b + 1])
        for k, i in enumerate(modes):
            out[e, :, k] = D @ ((eig.mu[i] * B1 + B2) @ eig.phi[d, i])
    return out


def crack_front_length(subdomain: SbfemSubdomain) -> float:
    """Boundary radius ``r_b`` in the crack direction (theta = 0 of the tip frame)."""
    d = subdomain.frame()[:, 0]
    rel = subdomain.relative_coords
    for a, b in subdomain.connectivity:
        p, q = rel[a], rel[b]
        e = q - p
        den = d[0] * e[1] - d[1] * e[0]
        if den == 0:
            continue
        t = (p[0] * e[1] - p[1] * e[0]) / den
        s = (p[0] * d[1] - p[1] * d[0]) / den
        if t > 0 and -1e-12 <= s <= 1 + 1e-12:
            return float(t)
    raise SbfemError("no boundary element crosses the crack front direction")


def mode_table_csv(eig: EigenSolution, c: Optional[np.ndarray] = None) -> str:
    """CSV dump of (index, Re/Im lambda, mu, |phi_i|, Re/Im c_i)."""
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["mode", "lambda_re", "lambda_im", "mu_re", "phi_norm", "c_re", "c_im"])
    for k in range(eig.n):
        ck = c[k] if c is not None else np.nan
        w.writerow([k, f"{eig.lam[k].real:.17g}", f"{eig.lam[k].imag:.17g}",
                    f"{eig.mu[k].real:.17g}", f"{np.linalg.norm(eig.phi[:, k]):.17g}",
                    f"{np.real(ck):.17g}", f"{np.imag(ck):.17g}"])
    return buf.getvalue()
