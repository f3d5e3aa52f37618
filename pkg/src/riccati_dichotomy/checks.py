"""Named pass/fail records."""

from dataclasses import dataclass


@dataclass(frozen=True)
class Check:
    """Outcome of comparing ``value`` against ``threshold``.

    ``kind`` is ``"le"`` (pass if value <= threshold) or ``"ge"``.
    """

    name: str
    value: float
    threshold: float
    kind: str = "le"

    def __post_init__(self):
        object.__setattr__(self, "value", float(self.value))
        object.__setattr__(self, "threshold", float(self.threshold))

    @property
    def passed(self):
        if self.kind == "le":
            return bool(self.value <= self.threshold)
        return bool(self.value >= self.threshold)

    @property
    def margin(self):
        return (self.threshold - self.value if self.kind == "le"
                else self.value - self.threshold)

    def line(self):
        op = "<=" if self.kind == "le" else ">="
        status = "PASS" if self.passed else "FAIL"
        return f"{status} {self.name}: {self.value:.3e} {op} {self.threshold:.3e}"


def flag(name, ok):
    """A boolean check expressed as a Check (1 >= 1 or 0 >= 1)."""
    return Check(name, 1.0 if ok else 0.0, 1.0, "ge")
