"""Stress intensity factors from the singular modes of a cracked subdomain."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np

from .errors import SifError
from .material import MaterialModel
from .mesh import SbfemSubdomain
from .sbfem import EigenSolution, integration_constants, stress_modes

SINGULAR_WINDOW = (0.1, 0.9)


@dataclass(frozen=True)
class SifResult:
    K_I: float
    K_II: float
    method: str
    singular_mode_indices: tuple
    mu_values: tuple
    L0: Optional[float] = None
    r_o: Optional[float] = None

    def to_dict(self) -> dict:
        return {"K_I": self.K_I, "K_II": self.K_II, "method": self.method,
                "singular_mode_indices": list(self.singular_mode_indices),
                "mu_values": [[float(np.real(m)), float(np.imag(m))] for m in self.mu_values],
                "L0": self.L0, "r_o": self.r_o}


def select_singular_modes(eig: EigenSolution, window=SINGULAR_WINDOW) -> tuple[int, int]:
    """The two modes with exponent closest to 1/2 inside ``window``.

    A complex exponent is always returned together with its conjugate.
    """
    mu = eig.mu
    lo, hi = window
    cand = [k for k in range(eig.n) if lo < mu[k].real < hi and k not in eig.rigid_modes]
    if len(cand) < 2:
        raise SifError(f"found {len(cand)} singular mode(s) with exponent in {window}; "
                       "is the subdomain cracked?")
    cand.sort(key=lambda k: (abs(mu[k] - 0.5), k))
    first = cand[0]
    if abs(mu[first].imag) > 1e-10 * max(1.0, abs(mu[first])):
        partner = min((k for k in cand if k != first),
                      key=lambda k: abs(mu[k] - np.conj(mu[first])))
        return tuple(sorted((first, partner)))
    real_cand = [k for k in cand[1:] if abs(mu[k].imag) <= 1e-10 * max(1.0, abs(mu[k]))]
    if not real_cand:
        raise SifError("singular exponents do not form a real pair or a conjugate pair")
    return tuple(sorted((first, real_cand[0])))


def _constants(eig: EigenSolution, u_b: Optional[np.ndarray], c: Optional[np.ndarray]):
    if c is not None:
        return np.asarray(c, dtype=complex)
    if u_b is None:
        raise SifError("need either boundary displacements or integration constants")
    return integration_constants(eig, u_b)


def sif_from_displacement(eig: EigenSolution, subdomain: SbfemSubdomain, material: MaterialModel,
                          u_b: Optional[np.ndarray] = None, c: Optional[np.ndarray] = None,
                          modes: Optional[tuple] = None) -> SifResult:
    """SIFs from the singular part of the crack-mouth opening.

    ``K = G / (kappa + 1) sqrt(2 pi / r_o) [du_y, du_x]`` with ``du`` the
    opening (upper minus lower face) in the crack-tip frame.
    """
    if not material.is_isotropic:
        raise SifError("the displacement route needs an isotropic material; use the stress route")
    if not subdomain.cracked:
        raise SifError("subdomain has no crack mouth")
    lower, upper = subdomain.node_coords[0], subdomain.node_coords[-1]
    if np.hypot(*(upper - lower)) > 1e-12 * max(1.0, np.hypot(*lower)):
        raise SifError("crack-mouth nodes do not coincide")
    modes = modes or select_singular_modes(eig)
    c = _constants(eig, u_b, c)
    u_s = (eig.phi[:, list(modes)] @ c[list(modes)]).real
    du = subdomain.frame().T @ (u_s[-2:] - u_s[:2])
    r_o = float(np.hypot(*(lower - subdomain.scaling_center)))
    f = material.G / (material.kappa + 1.0) * np.sqrt(2.0 * np.pi / r_o)
    return SifResult(K_I=float(f * du[1]), K_II=float(f * du[0]), method="displacement",
                     singular_mode_indices=tuple(modes),
                     mu_values=tuple(complex(eig.mu[k]) for k in modes), r_o=r_o)


def _rotate_stress(sig: np.ndarray, R: np.ndarray) -> np.ndarray:
    """Voigt stresses (3, m) from global axes into the frame with axes ``R[:, 0], R[:, 1]``."""
    out = np.empty_like(sig)
    for k in range(sig.shape[1]):
        s = np.array([[sig[0, k], sig[2, k]], [sig[2, k], sig[1, k]]])
        t = R.T @ s @ R
        out[:, k] = (t[0, 0], t[1, 1], t[0, 1])
    return out


def sif_from_stress(eig: EigenSolution, subdomain: SbfemSubdomain, material: MaterialModel,
                    u_b: Optional[np.ndarray] = None, c: Optional[np.ndarray] = None,
                    modes: Optional[tuple] = None) -> SifResult:
    """SIFs from singular boundary stresses sampled at element midpoints.

    The stresses and the boundary radius are interpolated linearly in the
    tip-frame polar angle to the crack front, then
    ``K = sqrt(2 pi L0) [sigma_yy, sigma_xy]``.
    """
    modes = modes or select_singular_modes(eig)
    c = _constants(eig, u_b, c)
    psi = stress_modes(eig, subdomain, material.D, modes, eta=0.0)
    sig = (psi @ c[list(modes)]).real.T  # (3, n_el)
    sig = _rotate_stress(sig, subdomain.frame())
    theta = np.array([subdomain.theta(e, 0.0) for e in range(subdomain.n_elements)])
    r_b = np.array([subdomain.r_b(e, 0.0) for e in range(subdomain.n_elements)])
    order = np.argsort(theta)
    theta, sig, r_b = theta[order], sig[:, order], r_b[order]
    if not theta[0] <= 0.0 <= theta[-1]:
        raise SifError("crack front direction lies outside the sampled angular range")
    L0 = float(np.interp(0.0, theta, r_b))
    s_yy = float(np.interp(0.0, theta, sig[1]))
    s_xy = float(np.interp(0.0, theta, sig[2]))
    f = np.sqrt(2.0 * np.pi * L0)
    return SifResult(K_I=f * s_yy, K_II=f * s_xy, method="stress",
                     singular_mode_indices=tuple(modes),
                     mu_values=tuple(complex(eig.mu[k]) for k in modes), L0=L0)


def compute_sif(method: str, eig: EigenSolution, subdomain: SbfemSubdomain,
                material: MaterialModel, u_b: np.ndarray) -> SifResult:
    if method == "displacement":
        return sif_from_displacement(eig, subdomain, material, u_b=u_b)
    if method == "stress":
        return sif_from_stress(eig, subdomain, material, u_b=u_b)
    raise SifError(f"unknown SIF method {method!r}")
