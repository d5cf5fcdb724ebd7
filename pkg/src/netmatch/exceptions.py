"""Exception types shared across the package."""


class InputDataError(ValueError):
    """User-supplied data or configuration failed validation."""


class SingularSystemError(ArithmeticError):
    """The kernel-weighted pairwise design is numerically singular.

    This is usually the empirical face of too small a bandwidth: too few
    matched pairs, or matched pairs whose covariate differences carry no
    independent variation. Raising the bandwidth is the standard remedy.
    """


class BandwidthTargetError(RuntimeError):
    """No bandwidth on the search grid reaches the requested match rate."""
