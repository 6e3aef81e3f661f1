"""Verdict objects carrying witnesses, and JSON encoding of exact data."""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Any

import numpy as np

from .gaussq import GaussQ, format_rational, to_json as gauss_to_json


@dataclass
class Certificate:
    """Outcome of a decision procedure.

    ``witness`` holds the violating object on failure (re-checkable by hand)
    and ``data`` holds whatever was certified or computed on the way.
    """

    check: str
    verdict: bool
    witness: dict | None = None
    data: dict = field(default_factory=dict)
    flags: list[str] = field(default_factory=list)

    def __bool__(self):
        return self.verdict

    def to_json(self) -> dict:
        return {
            "check": self.check,
            "verdict": self.verdict,
            "witness": encode(self.witness),
            "data": encode(self.data),
            "flags": list(self.flags),
        }


def encode(obj: Any):
    """Recursively turn exact numbers and containers into JSON-ready values.

    Rationals become ``"p/q"`` strings, Gaussian rationals ``{"re", "im"}``.
    """
    if obj is None or isinstance(obj, (bool, str)):
        return obj
    if isinstance(obj, int):
        return obj
    if isinstance(obj, Fraction):
        return format_rational(obj)
    if isinstance(obj, GaussQ):
        return gauss_to_json(obj)
    if isinstance(obj, float):
        return float(obj)
    if isinstance(obj, (np.floating,)):
        return float(obj)
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, np.ndarray):
        return encode(obj.tolist())
    if isinstance(obj, Certificate):
        return obj.to_json()
    if hasattr(obj, "to_json"):
        return encode(obj.to_json())
    if isinstance(obj, (complex, np.complexfloating)):
        return {"re": float(obj.real), "im": float(obj.imag)}
    if isinstance(obj, dict):
        return {str(k): encode(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple, set, frozenset)):
        items = [encode(v) for v in obj]
        if isinstance(obj, (set, frozenset)):
            items.sort(key=repr)
        return items
    raise TypeError(f"cannot encode {type(obj).__name__}")
