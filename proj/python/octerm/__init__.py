"""Python front end for the octerm core library.

Every analysis returns the same JSON document the ``octerm`` CLI prints,
decoded into plain Python objects. Rationals stay exact as "num/den" strings;
use :func:`fraction` to turn them into :class:`fractions.Fraction`.
"""

from __future__ import annotations

import json
from fractions import Fraction
from typing import Any, Dict, List, Union

from ._octerm import (
    CapExceeded,
    InvalidArgument,
    Model,
    NotRising,
    OctermError,
    ParseError,
    ValidationError,
)
from . import _octerm

__all__ = [
    "Model",
    "OctermError",
    "ParseError",
    "ValidationError",
    "CapExceeded",
    "NotRising",
    "InvalidArgument",
    "load",
    "builtin",
    "check",
    "qualitative",
    "bound",
    "approx",
    "oracle",
    "simulate",
    "fraction",
]

Eps = Union[str, Fraction]


def _eps(epsilon: Eps) -> str:
    if isinstance(epsilon, Fraction):
        return f"{epsilon.numerator}/{epsilon.denominator}"
    return str(epsilon)


def fraction(text: str) -> Fraction:
    """Parses a "num/den" string from a report."""
    return Fraction(text)


def load(path: str) -> Model:
    with open(path, encoding="utf-8") as f:
        return Model.parse(f.read())


def builtin(name: str) -> Model:
    return Model.builtin(name)


def check(text: str) -> Dict[str, Any]:
    """Diagnostics for model text; never raises on invalid models."""
    return json.loads(_octerm.check_json(text))


def qualitative(model: Model, enum_cap: int = 1 << 20) -> Dict[str, Any]:
    return json.loads(_octerm.qualitative_json(model, enum_cap))


def bound(model: Model, epsilon: Eps, enum_cap: int = 1 << 20, prune: bool = True) -> Dict[str, Any]:
    return json.loads(_octerm.bound_json(model, _eps(epsilon), enum_cap, prune))


def approx(
    model: Model, state: str, counter: int, epsilon: Eps, enum_cap: int = 1 << 20, prune: bool = True
) -> Dict[str, Any]:
    return json.loads(_octerm.approx_json(model, state, counter, _eps(epsilon), enum_cap, prune))


def oracle(model: Model, state: str, counter: int, horizon: int = 200) -> Dict[str, Any]:
    return json.loads(_octerm.oracle_json(model, state, counter, horizon))


def simulate(
    model: Model,
    state: str,
    counter: int,
    epsilon: Eps,
    horizon: int = 10000,
    runs: int = 10000,
    seed: int = 0,
) -> Dict[str, Any]:
    return json.loads(_octerm.simulate_json(model, state, counter, _eps(epsilon), horizon, runs, seed))


def builtin_names() -> List[str]:
    return list(Model.builtin_names())
