from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional, Union


@dataclass(frozen=True)
class FluctuationReport:
    """A finite-n value next to its limiting prediction.

    ``limit_value`` is a number, a pair (even-n, odd-n), or None when no
    limit formula applies; ``discrepancy`` is measured against the entry
    matching ``n``.
    """

    quantity: str
    finite_n_value: float
    limit_value: Union[float, tuple, None]
    discrepancy: Optional[float]
    n: int
    case_tag: Optional[str] = None
    info: dict = field(default_factory=dict)

    @property
    def applicable_limit(self):
        if isinstance(self.limit_value, tuple):
            return self.limit_value[self.n % 2]
        return self.limit_value

    def to_row(self):
        return {"n": self.n, "finite_value": self.finite_n_value,
                "limit_value": self.applicable_limit, "discrepancy": self.discrepancy,
                "case_tag": self.case_tag or ""}
