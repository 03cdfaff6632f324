"""Exception types shared across the package."""


class HypothesisError(RuntimeError):
    """A numerical hypothesis required by a bound or construction failed.

    The message names the failed condition (rank preservation, noise
    smallness, consistency of the noisy system, ...) so callers can
    report exactly what broke.  The command-line front end maps this to
    exit code 2, as opposed to configuration errors (exit code 1).
    """
