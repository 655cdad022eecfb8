"""Verification reports and numeric matrix-identity checks."""

from __future__ import annotations

import json
from dataclasses import asdict, dataclass, field

import numpy as np


@dataclass
class VerificationReport:
    name: str
    max_residual: float
    tolerance: float
    metadata: dict = field(default_factory=dict)

    @property
    def passed(self) -> bool:
        return bool(np.isfinite(self.max_residual) and self.max_residual <= self.tolerance)

    def to_dict(self) -> dict:
        d = asdict(self)
        d["max_residual"] = float(self.max_residual)
        d["pass"] = self.passed
        return d

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True, default=_jsonable)

    def line(self) -> str:
        verdict = "PASS" if self.passed else "FAIL"
        return f"{verdict}  {self.name}: max residual {self.max_residual:.3e} (tol {self.tolerance:.1e})"


def _jsonable(obj):
    if isinstance(obj, np.generic):
        return obj.item()
    if isinstance(obj, np.ndarray):
        return obj.tolist()
    if isinstance(obj, complex):
        return [obj.real, obj.imag]
    return str(obj)


# Relations of the Z2 x Z2 x Z2 reduction group.  "orthogonal" is the
# group-level form (Darboux matrices), "skew" the algebra-level form (Lax).
RELATIONS = ("orthogonal", "skew", "reality", "parity")


def relation_deviation(builder, relation: str, lam: complex, q: np.ndarray) -> float:
    m = np.asarray(builder(lam))
    if relation == "orthogonal":
        return float(np.max(np.abs(m @ m.T - np.eye(m.shape[0]))))
    if relation == "skew":
        return float(np.max(np.abs(m + m.T)))
    if relation == "reality":
        return float(np.max(np.abs(np.conj(builder(np.conj(lam))) - m)))
    if relation == "parity":
        return float(np.max(np.abs(q @ builder(-lam) @ np.linalg.inv(q) - m)))
    raise ValueError(f"unknown relation {relation!r}; expected one of {RELATIONS}")


def matrix_identity_check(builder, relations, samples, q, tolerance: float = 1e-10, name: str = "matrix identities") -> VerificationReport:
    """Largest deviation of the requested relations over the lambda samples."""
    per_relation = {}
    for rel in relations:
        per_relation[rel] = max(relation_deviation(builder, rel, complex(lam), q) for lam in samples)
    worst = max(per_relation.values()) if per_relation else 0.0
    return VerificationReport(
        name=name,
        max_residual=worst,
        tolerance=tolerance,
        metadata={"relations": per_relation, "samples": [complex(s) for s in samples]},
    )
