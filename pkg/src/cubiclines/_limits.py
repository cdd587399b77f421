"""Work and memory budgets shared by every enumeration engine."""

from __future__ import annotations

from dataclasses import dataclass

GIB = 2**30


class BudgetExceeded(RuntimeError):
    """Raised before a job starts when its cost estimate exceeds the budget."""

    def __init__(self, kind: str, estimate: float, limit: float, what: str = ""):
        self.kind = kind
        self.estimate = estimate
        self.limit = limit
        self.what = what
        label = f"{what}: " if what else ""
        super().__init__(f"{label}{kind} estimate {estimate:.4g} exceeds limit {limit:.4g}")


class WorkLimitExceeded(BudgetExceeded):
    def __init__(self, estimate: float, limit: float, what: str = ""):
        super().__init__("work", estimate, limit, what)


class MemoryLimitExceeded(BudgetExceeded):
    def __init__(self, estimate: float, limit: float, what: str = ""):
        super().__init__("memory", estimate, limit, what)


@dataclass(frozen=True)
class Limits:
    """Elementary-operation and byte budgets.

    Defaults follow the desk-scale envelope: 1e10 operations, 8 GiB.
    """

    work: float = 1e10
    memory: float = 8 * GIB

    def check_work(self, estimate: float, what: str = "") -> None:
        if estimate > self.work:
            raise WorkLimitExceeded(estimate, self.work, what)

    def check_memory(self, estimate: float, what: str = "") -> None:
        if estimate > self.memory:
            raise MemoryLimitExceeded(estimate, self.memory, what)


DEFAULT_LIMITS = Limits()
