"""Plane constitutive matrices (Voigt order xx, yy, xy with engineering shear)."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Literal, Optional

import numpy as np

from .errors import MaterialError

PlaneState = Literal["plane_strain", "plane_stress"]
_PLANE_STATES = ("plane_strain", "plane_stress")


@dataclass(frozen=True)
class MaterialModel:
    """Linear elastic material in a plane state.

    ``G`` and ``kappa`` are only defined for isotropic materials; they are
    ``None`` for orthotropic ones.
    """

    D: np.ndarray
    plane_state: PlaneState
    G: Optional[float] = None
    kappa: Optional[float] = None
    E: Optional[float] = None
    nu: Optional[float] = None
    E1: Optional[float] = None
    E2: Optional[float] = None
    G12: Optional[float] = None
    nu12: Optional[float] = None
    fiber_angle: float = 0.0

    @property
    def is_isotropic(self) -> bool:
        return self.kappa is not None

    def rotated(self, angle_deg: float) -> "MaterialModel":
        """Return a copy whose D is rotated by ``angle_deg`` (material axes CCW)."""
        D = rotate_D(self.D, angle_deg)
        return MaterialModel(
            D=D, plane_state=self.plane_state, G=self.G, kappa=self.kappa,
            E=self.E, nu=self.nu, E1=self.E1, E2=self.E2, G12=self.G12,
            nu12=self.nu12, fiber_angle=self.fiber_angle + angle_deg,
        )

    def to_dict(self) -> dict:
        out = {"plane_state": self.plane_state, "D": self.D.tolist()}
        for key in ("E", "nu", "G", "kappa", "E1", "E2", "G12", "nu12", "fiber_angle"):
            value = getattr(self, key)
            if value is not None:
                out[key] = value
        return out


def _check_state(plane_state: str) -> None:
    if plane_state not in _PLANE_STATES:
        raise MaterialError(f"unknown plane state {plane_state!r}")


def _check_spd(D: np.ndarray) -> None:
    if not np.all(np.isfinite(D)):
        raise MaterialError("constitutive matrix has non-finite entries")
    eig = np.linalg.eigvalsh(0.5 * (D + D.T))
    if eig.min() <= 1e-14 * abs(eig).max():
        raise MaterialError(f"constitutive matrix not positive definite (eigenvalues {eig})")


def isotropic(E: float, nu: float, plane_state: PlaneState = "plane_strain") -> MaterialModel:
    """Isotropic plane-strain or plane-stress material."""
    _check_state(plane_state)
    if not E > 0:
        raise MaterialError(f"Young's modulus must be positive, got {E}")
    if plane_state == "plane_strain" and nu >= 0.5:
        raise MaterialError("nu = 0.5 is incompressible; plane-strain D is singular")
    if not -1.0 < nu < 0.5:
        raise MaterialError(f"Poisson's ratio must lie in (-1, 0.5), got {nu}")

    if plane_state == "plane_strain":
        c = E / ((1.0 + nu) * (1.0 - 2.0 * nu))
        D = c * np.array([[1.0 - nu, nu, 0.0],
                          [nu, 1.0 - nu, 0.0],
                          [0.0, 0.0, 0.5 - nu]])
        kappa = 3.0 - 4.0 * nu
    else:
        c = E / (1.0 - nu**2)
        D = c * np.array([[1.0, nu, 0.0],
                          [nu, 1.0, 0.0],
                          [0.0, 0.0, 0.5 * (1.0 - nu)]])
        kappa = (3.0 - nu) / (1.0 + nu)
    return MaterialModel(D=D, plane_state=plane_state, G=E / (2.0 * (1.0 + nu)),
                         kappa=kappa, E=E, nu=nu)


def strain_rotation(angle_deg: float) -> np.ndarray:
    """Map global engineering strains to strains in axes rotated by ``angle_deg``."""
    t = np.deg2rad(angle_deg)
    c, s = np.cos(t), np.sin(t)
    return np.array([[c * c, s * s, c * s],
                     [s * s, c * c, -c * s],
                     [-2 * c * s, 2 * c * s, c * c - s * s]])


def rotate_D(D_material: np.ndarray, angle_deg: float) -> np.ndarray:
    """Express a material-axes D in global axes; the fibres sit at ``angle_deg``."""
    T = strain_rotation(angle_deg)
    D = T.T @ D_material @ T
    return 0.5 * (D + D.T)


def orthotropic(E1: float, E2: float, G12: float, nu12: float, fiber_angle: float = 0.0,
                plane_state: PlaneState = "plane_stress", *, E3: Optional[float] = None,
                nu13: Optional[float] = None, nu23: Optional[float] = None) -> MaterialModel:
    """Orthotropic lamina with fibres (axis 1) rotated ``fiber_angle`` degrees from x.

    Plane strain needs the out-of-plane constants; when omitted the lamina is
    taken transversely isotropic (``E3 = E2``, ``nu13 = nu12``, ``nu23 = nu12``).
    """
    _check_state(plane_state)
    if min(E1, E2, G12) <= 0:
        raise MaterialError("moduli must be positive")
    if nu12**2 >= E1 / E2:
        raise MaterialError(f"nu12^2 = {nu12**2} violates nu12^2 < E1/E2 = {E1 / E2}")

    S = np.array([[1.0 / E1, -nu12 / E1, 0.0],
                  [-nu12 / E1, 1.0 / E2, 0.0],
                  [0.0, 0.0, 1.0 / G12]])
    if plane_state == "plane_strain":
        E3 = E2 if E3 is None else E3
        nu13 = nu12 if nu13 is None else nu13
        nu23 = nu12 if nu23 is None else nu23
        s3 = np.array([-nu13 / E1, -nu23 / E2, 0.0])
        S = S - np.outer(s3, s3) * E3
    try:
        _check_spd(S)
    except MaterialError as exc:
        raise MaterialError(f"compliance not positive definite: {exc}") from None

    D_mat = np.linalg.inv(S)
    D_mat = 0.5 * (D_mat + D_mat.T)
    D = rotate_D(D_mat, fiber_angle)
    _check_spd(D)
    return MaterialModel(D=D, plane_state=plane_state, E1=E1, E2=E2, G12=G12,
                         nu12=nu12, fiber_angle=fiber_angle)


def orthotropic_from_phi(G12: float, nu12: float, phi: float, fiber_angle: float = 0.0,
                         plane_state: PlaneState = "plane_stress") -> MaterialModel:
    """Orthotropic material parametrised by the modulus ratio ``phi = E1/E2``.

    ``E1 = G12 (phi + 2 nu12 + 1)`` and ``E2 = E1 / phi``; ``phi = 1`` is the
    isotropic material with shear modulus ``G12``.
    """
    if not phi > 0:
        raise MaterialError(f"phi must be positive, got {phi}")
    E1 = G12 * (phi + 2.0 * nu12 + 1.0)
    E2 = E1 / phi
    return orthotropic(E1, E2, G12, nu12, fiber_angle, plane_state)


def angle_ply_laminate(E1: float, E2: float, G12: float, nu12: float, angle: float,
                       plane_state: PlaneState = "plane_stress") -> MaterialModel:
    """In-plane stiffness of a symmetric [+angle/-angle]s laminate of equal plies."""
    plus = orthotropic(E1, E2, G12, nu12, angle, plane_state)
    minus = orthotropic(E1, E2, G12, nu12, -angle, plane_state)
    D = 0.5 * (plus.D + minus.D)
    return MaterialModel(D=D, plane_state=plane_state, E1=E1, E2=E2, G12=G12,
                         nu12=nu12, fiber_angle=angle)
