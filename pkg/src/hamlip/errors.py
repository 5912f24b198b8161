"""Exception types shared across the package.

The CLI maps these to exit codes: ConfigError -> 2, ContractError -> 3,
VerificationFailure -> 1.
"""


class ConfigError(ValueError):
    """Run configuration failed to parse or validate."""


class ContractError(RuntimeError):
    """A numerical or structural precondition was violated.

    Examples: dimension mismatch in a Hamiltonian call, incompatible
    boundary data, disconnected domain selection, glue seam mismatch.
    """


class VerificationFailure(AssertionError):
    """A verification-suite assertion did not hold."""
