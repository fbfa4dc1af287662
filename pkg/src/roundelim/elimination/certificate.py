"""Certificates recording the error accounting of one reduction or elimination."""
from __future__ import annotations

import json
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Any

from ..protocols.classical import Signature

SLACK_TOL = 1e-7


def fmt_real(v: float) -> str:
    return format(float(v), ".12g")


def fmt_exact(v) -> str:
    if isinstance(v, Fraction):
        return f"{v.numerator}/{v.denominator}"
    if isinstance(v, int):
        return f"{v}/1"
    return fmt_real(v)


def _plain(v: Any):
    if isinstance(v, Fraction):
        return fmt_exact(v)
    if isinstance(v, float):
        return fmt_real(v)
    if isinstance(v, Signature):
        return str(v)
    if isinstance(v, dict):
        return {str(k): _plain(x) for k, x in v.items()}
    if isinstance(v, (list, tuple)):
        return [_plain(x) for x in v]
    return v


@dataclass
class EliminationCertificate:
    kind: str
    before: Signature
    after: Signature
    expected_after: Signature
    eps_before: Any
    eps_after: Any
    information: float
    bound: float
    formula: str
    details: dict = field(default_factory=dict)

    @property
    def slack(self) -> float:
        return self.bound - float(self.eps_after)

    @property
    def shape_ok(self) -> bool:
        return self.after == self.expected_after

    @property
    def ok(self) -> bool:
        return self.shape_ok and self.slack >= -SLACK_TOL

    def to_doc(self) -> dict:
        return {
            "kind": self.kind,
            "before": str(self.before),
            "after": str(self.after),
            "expected_after": str(self.expected_after),
            "eps_before": fmt_exact(self.eps_before),
            "eps_after": fmt_exact(self.eps_after),
            "information": fmt_real(self.information),
            "bound": fmt_real(self.bound),
            "slack": fmt_real(self.slack),
            "formula": self.formula,
            "ok": self.ok,
            "details": _plain(self.details),
        }

    def dumps(self) -> str:
        return json.dumps(self.to_doc(), sort_keys=True, separators=(",", ":"))
