"""Exception types shared across the package."""


class DomainError(ValueError):
    """Argument outside the mathematical domain of an operation."""


class NotPositiveDefinite(DomainError):
    """A matrix expected to lie in the open SPD cone does not."""


class RealPartNotSPD(DomainError):
    """Complex symmetric matrix whose real part is not positive definite.

    The principal-branch log-determinant used by the overlap kernels is only
    defined on the domain Re X > 0.
    """


class DivergentIntegral(DomainError):
    """Parameters for which a cone integral fails its convergence condition."""


class GridTooCoarse(ValueError):
    """Grid operator requested on a grid with too few points."""


class UnsupportedHamiltonian(TypeError):
    """Closed-form label transport asked for a Hamiltonian without one."""


class BudgetExceeded(RuntimeError):
    """A deterministic quadrature would exceed its configured work cap."""


class ConeExit(DomainError):
    """A perturbation step would leave the open SPD cone."""


class IllConditioned(ValueError):
    """Factorization aborted because a pivot/column norm underflowed."""


class ConfigError(ValueError):
    """Malformed experiment configuration."""


class CheckFailed(RuntimeError):
    """An experiment ran to completion but a criterion did not pass."""
