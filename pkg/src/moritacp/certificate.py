"""Residual reports."""

from dataclasses import dataclass, field

from . import config


@dataclass
class Certificate:
    """Named residuals checked against one tolerance.

    ``conditions`` hold scale-normalised residuals (``|lhs - rhs| / max(1,
    |rhs|)``) or integer rank deficits; ``absolute`` keeps the raw operator
    norms where they differ.
    """

    name: str
    conditions: dict
    tol: float = field(default_factory=config.tol)
    absolute: dict = field(default_factory=dict)
    info: dict = field(default_factory=dict)

    @property
    def passed(self):
        return all(v <= self.tol for v in self.conditions.values())

    def failing(self):
        return [k for k, v in self.conditions.items() if not v <= self.tol]

    def max_residual(self):
        return max(self.conditions.values(), default=0.0)

    def to_dict(self):
        out = {
            "name": self.name,
            "conditions": {k: float(v) for k, v in self.conditions.items()},
            "tol": self.tol,
            "pass": self.passed,
            "failing": self.failing(),
        }
        if self.absolute:
            out["absolute"] = {k: float(v) for k, v in self.absolute.items()}
        if self.info:
            out["info"] = self.info
        return out

    def __str__(self):
        status = "PASS" if self.passed else "FAIL"
        worst = max(self.conditions, key=self.conditions.get) if self.conditions else "-"
        return f"[{status}] {self.name}: max residual {self.max_residual():.2e} ({worst})"


def merge(name, certificates, info=None):
    """Combine certificates into one, prefixing condition names."""
    conds, absolute = {}, {}
    tol = min((c.tol for c in certificates), default=config.tol())
    for c in certificates:
        for k, v in c.conditions.items():
            conds[f"{c.name}.{k}"] = v
        for k, v in c.absolute.items():
            absolute[f"{c.name}.{k}"] = v
    return Certificate(name, conds, tol, absolute, info or {})
