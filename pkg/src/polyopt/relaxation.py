"""Level-k SOS and moment relaxations of a polynomial program as SDP data.

The SOS form maximizes gamma subject to

    f - gamma  =  sum_i phi_i h_i  +  sum_j sigma_j g_j        (g_0 = 1),

with deg(phi_i h_i) <= 2k and sigma_j a sum of squares with
deg(sigma_j g_j) <= 2k.  Matching coefficients monomial by monomial turns
this into one equality row per monomial of degree <= 2k, PSD Gram blocks for
the sigma_j, and free scalars for gamma and the phi coefficients.

The moment form is its dual: minimize sum f_alpha y_alpha over pseudo-moment
vectors y with y_0 = 1, the moment matrix and the localizing matrices
(M(g y))_{pq} = sum_gamma g_gamma y_{p+q+gamma} PSD, and y orthogonal to the
truncated ideal of the equalities.

Both builders are deterministic: the same instance and level produce
identical problem data, with rows in graded-lex monomial order.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import LevelError
from .polynomials import Polynomial, basis, monomial_mul
from .pop import PopInstance, ball_constraint
from .sdp import SdpProblem


def augment_archimedean(inst: PopInstance, radius_sq: float) -> PopInstance:
    """Append the ball constraint radius_sq - |x|^2 >= 0 to the inequalities.

    Redundant whenever the feasible set already sits inside that ball, but it
    makes the constraint system archimedean, which the convergence theory of
    the hierarchy needs.  The bound applies to the squared norm.
    """
    if radius_sq <= 0:
        raise ValueError(f"ball bound must be positive, got {radius_sq}")
    extra = ball_constraint(inst.nvars, radius_sq)
    meta = dict(inst.metadata)
    meta.setdefault("ball_radius_sq", float(radius_sq))
    return PopInstance(f=inst.f, h=inst.h, g=inst.g + (extra,), metadata=meta)


@dataclass
class SosLayout:
    """Row/variable bookkeeping of a built SOS relaxation."""

    kind: str
    level: int
    nvars: int
    row_monomials: tuple
    gamma_index: int
    phi_slices: list          # per equality: (first free index, monomial basis)
    block_bases: list         # per block j = 0..m2: monomial basis of the Gram block
    min_level: int


@dataclass
class MomentLayout:
    """Variable bookkeeping of a built moment relaxation (y are the free scalars)."""

    kind: str
    level: int
    nvars: int
    free_monomials: tuple
    block_bases: list
    min_level: int


def _check_level(inst: PopInstance, k: int) -> int:
    min_k = inst.min_level()
    if k < min_k:
        raise LevelError(
            f"level {k} is below the minimum admissible level {min_k}", min_level=min_k)
    for i, p in enumerate(inst.h):
        if p.is_zero():
            raise ValueError(f"equality constraint h[{i}] is the zero polynomial")
    for j, p in enumerate(inst.g):
        if p.is_zero():
            raise ValueError(f"inequality constraint g[{j}] is the zero polynomial")
    return min_k


def _gram_bases(inst: PopInstance, k: int):
    """Monomial basis of each Gram block, g_0 = 1 first."""
    n = inst.nvars
    g_all = [Polynomial.constant(n, 1.0)] + list(inst.g)
    bases = []
    for g in g_all:
        half = 0 if g.degree <= 0 else math.ceil(g.degree / 2)
        bases.append(basis(n, k - half))
    return g_all, bases


def build_sos_relaxation(inst: PopInstance, k: int) -> SdpProblem:
    min_k = _check_level(inst, k)
    n = inst.nvars
    rows = basis(n, 2 * k)
    nrows = len(rows)
    row_index = rows.index

    g_all, bases = _gram_bases(inst, k)
    a_blocks = []
    for g, bas in zip(g_all, bases):
        size = len(bas)
        a = np.zeros((nrows, size, size))
        gterms = g.sorted_terms()
        for p in range(size):
            for q in range(p, size):
                prod = monomial_mul(bas[p], bas[q])
                for gamma, coeff in gterms:
                    m = row_index[monomial_mul(prod, gamma)]
                    a[m, p, q] += coeff
                    if p != q:
                        a[m, q, p] += coeff
        a_blocks.append(a)

    phi_slices = []
    nfree = 1
    for h in inst.h:
        bas = basis(n, 2 * k - int(h.degree))
        phi_slices.append((nfree, bas))
        nfree += len(bas)

    b_free = np.zeros((nrows, nfree))
    b_free[row_index[(0,) * n], 0] = 1.0
    for (start, bas), h in zip(phi_slices, inst.h):
        hterms = h.sorted_terms()
        for offset, beta in enumerate(bas):
            for gamma, coeff in hterms:
                b_free[row_index[monomial_mul(beta, gamma)], start + offset] += coeff

    rhs = np.zeros(nrows)
    for mono, coeff in inst.f.sorted_terms():
        rhs[row_index[mono]] = coeff

    c_free = np.zeros(nfree)
    c_free[0] = 1.0

    layout = SosLayout(
        kind="sos", level=k, nvars=n,
        row_monomials=tuple(rows.entries),
        gamma_index=0,
        phi_slices=phi_slices,
        block_bases=[tuple(b.entries) for b in bases],
        min_level=min_k)
    prob = SdpProblem(
        block_sizes=[len(b) for b in bases],
        a_blocks=a_blocks, b_free=b_free, rhs=rhs, c_free=c_free,
        name=f"sos-level-{k}", layout=layout)
    return prob.drop_zero_rows().validate()


def build_moment_relaxation(inst: PopInstance, k: int) -> SdpProblem:
    min_k = _check_level(inst, k)
    n = inst.nvars
    free_basis = basis(n, 2 * k)
    nfree = len(free_basis)
    y_index = free_basis.index

    g_all, bases = _gram_bases(inst, k)
    nrows = 1 + sum(len(b) * (len(b) + 1) // 2 for b in bases)
    for h in inst.h:
        nrows += len(basis(n, 2 * k - int(h.degree)))

    a_blocks = [np.zeros((nrows, len(b), len(b))) for b in bases]
    b_free = np.zeros((nrows, nfree))
    rhs = np.zeros(nrows)

    row = 0
    b_free[row, y_index[(0,) * n]] = 1.0
    rhs[row] = 1.0
    row += 1

    # Link each Gram block entry to the pseudo-moments it localizes.
    for j, (g, bas) in enumerate(zip(g_all, bases)):
        size = len(bas)
        gterms = g.sorted_terms()
        for p in range(size):
            for q in range(p, size):
                if p == q:
                    a_blocks[j][row, p, p] = 1.0
                else:
                    a_blocks[j][row, p, q] = a_blocks[j][row, q, p] = 0.5
                prod = monomial_mul(bas[p], bas[q])
                for gamma, coeff in gterms:
                    b_free[row, y_index[monomial_mul(prod, gamma)]] -= coeff
                row += 1

    # y orthogonal to the truncated ideal: L_y(h_i x^beta) = 0.
    for h in inst.h:
        hterms = h.sorted_terms()
        for beta in basis(n, 2 * k - int(h.degree)):
            for gamma, coeff in hterms:
                b_free[row, y_index[monomial_mul(beta, gamma)]] += coeff
            row += 1

    # Maximization form: the moment optimum is minus the solved objective.
    c_free = np.zeros(nfree)
    for mono, coeff in inst.f.sorted_terms():
        c_free[y_index[mono]] = -coeff

    layout = MomentLayout(
        kind="moment", level=k, nvars=n,
        free_monomials=tuple(free_basis.entries),
        block_bases=[tuple(b.entries) for b in bases],
        min_level=min_k)
    prob = SdpProblem(
        block_sizes=[len(b) for b in bases],
        a_blocks=a_blocks, b_free=b_free, rhs=rhs, c_free=c_free,
        name=f"moment-level-{k}", layout=layout)
    return prob.drop_zero_rows().validate()


def relaxation_value(prob: SdpProblem, sol) -> float:
    """The hierarchy lower bound f_k encoded by a solved relaxation."""
    layout = prob.layout
    if layout is None:
        raise ValueError("problem has no relaxation layout")
    if layout.kind == "sos":
        return float(sol.primal_objective)
    if layout.kind == "moment":
        return -float(sol.primal_objective)
    raise ValueError(f"unknown layout kind {layout.kind!r}")


def moment_vector_from_solution(prob: SdpProblem, sol):
    """Pseudo-moments of a solved MOMENT-form problem (free values are y)."""
    from .certify import MomentVector

    layout = prob.layout
    if layout is None or layout.kind != "moment":
        raise ValueError("not a moment-form problem")
    values = {m: float(val) for m, val in zip(layout.free_monomials, sol.free_values)}
    y0 = values.get((0,) * layout.nvars, 0.0)
    if abs(y0) > 1e-12:
        values = {m: val / y0 for m, val in values.items()}
    return MomentVector(nvars=layout.nvars, level=layout.level, values=values)
