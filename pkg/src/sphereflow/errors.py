"""Exception types shared across the package.

Invalid arguments raise plain ValueError everywhere; these classes cover the
two failure modes that deserve their own exit codes in the CLI.
"""


class NumericError(RuntimeError):
    """A numerical routine failed to converge or produced inconsistent output."""


class InfeasibleConfigError(ValueError):
    """A requested configuration cannot be run at desk scale (e.g. N(p) >= n)."""
