"""Exception types shared across the package."""


class ContractError(ValueError):
    """An operation was called with inputs that break its precondition."""


class DomainMismatchError(ContractError):
    """A spin assignment does not cover exactly the variables it should."""

    def __init__(self, missing=(), extra=(), what="assignment"):
        self.missing = tuple(sorted(missing))
        self.extra = tuple(sorted(extra))
        parts = []
        if self.missing:
            parts.append(f"missing indices {list(self.missing)}")
        if self.extra:
            parts.append(f"extra indices {list(self.extra)}")
        super().__init__(f"{what} domain mismatch: " + "; ".join(parts))


class CapacityError(ContractError):
    """Problem is too large for exhaustive enumeration."""


class InvalidHamiltonianError(ContractError):
    def __init__(self, violations):
        self.violations = list(violations)
        super().__init__("invalid Hamiltonian: " + "; ".join(self.violations))
