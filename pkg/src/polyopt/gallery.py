"""Bundled example instances, including the classic non-convergent one.

Each entry returns a fresh PopInstance whose metadata records the known
minimum and minimizers when they have a closed form (stamped against the
brute-force oracle in the test suite).
"""

from __future__ import annotations

import math

from .polynomials import Polynomial, motzkin
from .pop import PopInstance, ball_constraint


def _motzkin_ball() -> PopInstance:
    r = 1.0 / math.sqrt(3.0)
    return PopInstance(
        f=motzkin(),
        g=(ball_constraint(3, 1.0),),
        metadata={
            "name": "motzkin-ball",
            "description": "Motzkin polynomial over the unit ball: nonnegative, "
                           "not a sum of squares; the hierarchy converges only "
                           "asymptotically, never finitely.",
            "f_min": 0.0,
            "minimizers": [[0.0, 0.0, 0.0],
                           [r, r, r], [r, r, -r], [r, -r, r], [-r, r, r],
                           [r, -r, -r], [-r, r, -r], [-r, -r, r], [-r, -r, -r]],
        })


def _quadratic_ball() -> PopInstance:
    f = Polynomial(2, {(2, 0): 2.0, (0, 2): 1.0, (1, 1): 1.0, (1, 0): -1.0, (0, 1): -1.0})
    return PopInstance(
        f=f, g=(ball_constraint(2, 1.0),),
        metadata={
            "name": "quadratic-ball",
            "description": "Strictly convex quadratic with its minimizer inside "
                           "the unit ball; the first relaxation level is already exact.",
            "f_min": -2.0 / 7.0,
            "minimizers": [[1.0 / 7.0, 3.0 / 7.0]],
        })


def _linear_ball() -> PopInstance:
    f = Polynomial(2, {(1, 0): 1.0, (0, 1): 2.0})
    s = math.sqrt(5.0)
    return PopInstance(
        f=f, g=(ball_constraint(2, 1.0),),
        metadata={
            "name": "linear-ball",
            "description": "Linear objective over the unit ball; the minimizer "
                           "sits on the boundary with a strictly positive multiplier.",
            "f_min": -s,
            "minimizers": [[-1.0 / s, -2.0 / s]],
        })


def _quartic_flat() -> PopInstance:
    f = Polynomial(1, {(4,): 1.0})
    return PopInstance(
        f=f, g=(ball_constraint(1, 1.0),),
        metadata={
            "name": "quartic-flat",
            "description": "x^4 on [-1, 1]: the minimizer at 0 has a vanishing "
                           "Hessian, so the second-order sufficiency condition fails.",
            "f_min": 0.0,
            "minimizers": [[0.0]],
        })


def _equality_quadratic() -> PopInstance:
    f = Polynomial(2, {(2, 0): 1.0, (0, 2): 1.0})
    h = Polynomial(2, {(1, 0): 1.0, (0, 1): 1.0, (0, 0): -1.0})
    return PopInstance(
        f=f, h=(h,), g=(ball_constraint(2, 4.0),),
        metadata={
            "name": "equality-quadratic",
            "description": "Least-norm point on the line x1 + x2 = 1 (ball kept "
                           "for archimedeanness); all local conditions hold at it.",
            "f_min": 0.5,
            "minimizers": [[0.5, 0.5]],
        })


def _two_minima() -> PopInstance:
    f = Polynomial(2, {(2, 0): -1.0, (0, 2): 1.0})
    h = Polynomial(2, {(0, 1): 1.0})
    return PopInstance(
        f=f, h=(h,), g=(ball_constraint(2, 1.0),),
        metadata={
            "name": "two-minima",
            "description": "Minimize -x1^2 on the segment x2 = 0, |x| <= 1: two "
                           "global minimizers, so the flat moment matrix has rank 2 "
                           "and rank-1 extraction does not apply.",
            "f_min": -1.0,
            "minimizers": [[1.0, 0.0], [-1.0, 0.0]],
        })


_BUILDERS = {
    "motzkin-ball": _motzkin_ball,
    "quadratic-ball": _quadratic_ball,
    "linear-ball": _linear_ball,
    "quartic-flat": _quartic_flat,
    "equality-quadratic": _equality_quadratic,
    "two-minima": _two_minima,
}


def gallery_names() -> list:
    return sorted(_BUILDERS)


def gallery_instance(name: str) -> PopInstance:
    try:
        return _BUILDERS[name]()
    except KeyError:
        raise KeyError(f"unknown gallery instance {name!r}; "
                       f"available: {', '.join(gallery_names())}") from None
