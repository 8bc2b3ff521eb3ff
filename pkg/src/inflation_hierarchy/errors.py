class InputError(ValueError):
    """Malformed or inconsistent user input (graphs, tables, events, polynomials)."""


class BudgetExceeded(RuntimeError):
    """An enumeration would exceed the configured raw-assignment budget."""

    def __init__(self, what: str, raw_count: int, budget: int):
        self.raw_count = raw_count
        self.budget = budget
        super().__init__(f"{what}: {raw_count} raw assignments exceeds budget {budget}")
