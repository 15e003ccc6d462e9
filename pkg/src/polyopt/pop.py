"""Polynomial optimization problem instances and their JSON file format.

An instance is: minimize f(x) subject to h_i(x) = 0 and g_j(x) >= 0.
The file format stores each polynomial as a list of {coefficient, exponents}
records so that parse -> print -> parse is idempotent.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field

import numpy as np

from .errors import DimensionMismatchError, ParseError
from .polynomials import Polynomial, grlex_key


@dataclass(frozen=True)
class PopInstance:
    """Problem data: objective f, equalities h, inequalities g.

    Either constraint tuple may be empty.  ``metadata`` carries optional
    extras (known minimum, known minimizers, ball radius) and never affects
    computation.
    """

    f: Polynomial
    h: tuple = ()
    g: tuple = ()
    metadata: dict = field(default_factory=dict)

    def __post_init__(self):
        object.__setattr__(self, "h", tuple(self.h))
        object.__setattr__(self, "g", tuple(self.g))
        n = self.f.nvars
        for p in self.h + self.g:
            if p.nvars != n:
                raise DimensionMismatchError(
                    f"constraint has {p.nvars} variables, objective has {n}")

    @property
    def nvars(self) -> int:
        return self.f.nvars

    def max_degree(self) -> int:
        degs = [self.f.degree] + [p.degree for p in self.h] + [p.degree for p in self.g]
        finite = [d for d in degs if d != float("-inf")]
        return int(max(finite, default=0))

    def min_level(self) -> int:
        """Smallest admissible relaxation level: ceil(max degree / 2), at least 1."""
        return max(1, math.ceil(self.max_degree() / 2))

    # -- feasibility -------------------------------------------------------

    def violations(self, point) -> tuple[float, float]:
        """(worst |h_i(u)|, worst max(0, -g_j(u))) at the point."""
        eq = max((abs(p.eval(point)) for p in self.h), default=0.0)
        ineq = max((max(0.0, -p.eval(point)) for p in self.g), default=0.0)
        return eq, ineq

    def is_feasible(self, point, tol: float = 1e-8) -> bool:
        u = np.asarray(point, dtype=float)
        for p in self.h:
            if abs(p.eval(u)) > tol * (1.0 + p.eval_abs(u)):
                return False
        for p in self.g:
            if p.eval(u) < -tol * (1.0 + p.eval_abs(u)):
                return False
        return True


def ball_constraint(nvars: int, radius_sq: float) -> Polynomial:
    """The polynomial radius_sq - (x1^2 + ... + xn^2)."""
    terms = {(0,) * nvars: float(radius_sq)}
    for i in range(nvars):
        mono = tuple(2 if j == i else 0 for j in range(nvars))
        terms[mono] = -1.0
    return Polynomial(nvars, terms)


# -- JSON instance files ----------------------------------------------------

def _poly_to_records(p: Polynomial) -> list:
    return [{"coefficient": c, "exponents": list(m)} for m, c in p.sorted_terms()]


def _poly_from_records(records, nvars: int) -> Polynomial:
    terms = {}
    for rec in records:
        try:
            coeff = float(rec["coefficient"])
            expo = tuple(int(e) for e in rec["exponents"])
        except (KeyError, TypeError, ValueError) as exc:
            raise ParseError(f"bad polynomial term record {rec!r}") from exc
        if len(expo) != nvars:
            raise ParseError(
                f"exponent vector {list(expo)} has length {len(expo)}, expected {nvars}")
        terms[expo] = terms.get(expo, 0.0) + coeff
    return Polynomial(nvars, terms)


def instance_to_dict(inst: PopInstance) -> dict:
    doc = {
        "nvars": inst.nvars,
        "variables": [f"x{i + 1}" for i in range(inst.nvars)],
        "objective": _poly_to_records(inst.f),
        "equalities": [_poly_to_records(p) for p in inst.h],
        "inequalities": [_poly_to_records(p) for p in inst.g],
    }
    if inst.metadata:
        doc["metadata"] = _jsonable(inst.metadata)
    return doc


def instance_from_dict(doc: dict) -> PopInstance:
    try:
        nvars = int(doc["nvars"])
    except (KeyError, TypeError, ValueError) as exc:
        raise ParseError("instance file lacks a valid 'nvars' field") from exc
    if nvars < 1:
        raise ParseError(f"nvars must be positive, got {nvars}")
    f = _poly_from_records(doc.get("objective", []), nvars)
    h = tuple(_poly_from_records(r, nvars) for r in doc.get("equalities", []))
    g = tuple(_poly_from_records(r, nvars) for r in doc.get("inequalities", []))
    return PopInstance(f=f, h=h, g=g, metadata=dict(doc.get("metadata", {})))


def write_instance(inst: PopInstance, path) -> None:
    with open(path, "w") as fh:
        json.dump(instance_to_dict(inst), fh, indent=2)
        fh.write("\n")


def read_instance(path) -> PopInstance:
    try:
        with open(path) as fh:
            doc = json.load(fh)
    except json.JSONDecodeError as exc:
        raise ParseError(f"{path}: not valid JSON: {exc}") from exc
    if not isinstance(doc, dict):
        raise ParseError(f"{path}: expected a JSON object at top level")
    return instance_from_dict(doc)


def _jsonable(value):
    if isinstance(value, dict):
        return {k: _jsonable(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_jsonable(v) for v in value]
    if isinstance(value, np.ndarray):
        return value.tolist()
    if isinstance(value, (np.floating, np.integer)):
        return value.item()
    return value


def sorted_monomials(monomials) -> list:
    return sorted(monomials, key=grlex_key)
