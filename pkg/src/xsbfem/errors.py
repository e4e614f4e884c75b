"""Exception hierarchy shared by the solver modules."""


class XsbfemError(Exception):
    """Base class for all errors raised by the package."""


class GeometryError(XsbfemError, ValueError):
    """Invalid mesh, crack or subdomain geometry."""


class LayerOverflowError(GeometryError):
    """The requested SBFEM block does not fit inside the mesh."""


class JacobianError(GeometryError):
    """Non-positive element Jacobian (distorted or inverted element)."""


class MaterialError(XsbfemError, ValueError):
    """Constitutive parameters do not give a positive definite material."""


class SbfemError(XsbfemError, ArithmeticError):
    """Ill-posed scaled boundary subdomain (singular E0, degenerate modes)."""


class AssemblyError(XsbfemError, IndexError):
    """Element contribution addresses a DOF outside the global system."""


class BoundaryConditionError(XsbfemError, ValueError):
    """Conflicting or malformed boundary conditions."""


class SolverError(XsbfemError, ArithmeticError):
    """Factorization failed or the solution residual is too large."""


class SifError(XsbfemError, ValueError):
    """Stress intensity factors cannot be extracted from the modal solution."""


class ConfigError(XsbfemError, ValueError):
    """Invalid benchmark configuration."""
