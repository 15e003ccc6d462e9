"""Global-optimality artifacts: certificates, pseudo-moments, flat truncation.

A certificate realizes the identity

    f(x) - gamma  =  sum_i phi_i(x) h_i(x)  +  sum_j sigma_j(x) g_j(x)

with every sigma_j a sum of squares (g_0 = 1 by convention).  Since the right
side is nonnegative on the feasible set, a verified identity proves that
gamma is a global lower bound.  Certificates store the Gram matrix of each
sigma_j together with explicit square decompositions, so an independent
program can re-verify them with polynomial arithmetic alone.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field

import numpy as np

from .errors import ParseError
from .polynomials import Polynomial, basis, monomial_mul
from .pop import PopInstance, instance_from_dict, instance_to_dict, _poly_from_records, _poly_to_records

# Singular values below RANK_REL_TOL times the largest one count as zero when
# ranking moment matrices; matches solver accuracy 1e-8 with safety margin.
RANK_REL_TOL = 1e-6
CERT_TOL = 1e-6
PSD_CHECK_TOL = 1e-7


# ---------------------------------------------------------------------------
# Pseudo-moment vectors
# ---------------------------------------------------------------------------

@dataclass
class MomentVector:
    """Map from monomials of degree <= 2*level to pseudo-moment values, y_0 = 1."""

    nvars: int
    level: int
    values: dict

    def moment_matrix(self, order: int) -> np.ndarray:
        """M_order(y): entry (p, q) is y at the product of basis monomials p, q."""
        if order > self.level:
            raise ValueError(f"order {order} exceeds moment degree window (level {self.level})")
        bas = basis(self.nvars, order)
        size = len(bas)
        mat = np.zeros((size, size))
        for p in range(size):
            for q in range(p, size):
                val = self.values.get(monomial_mul(bas[p], bas[q]), 0.0)
                mat[p, q] = mat[q, p] = val
        return mat

    def truncate(self, order: int) -> "MomentVector":
        vals = {m: v for m, v in self.values.items() if sum(m) <= 2 * order}
        return MomentVector(nvars=self.nvars, level=order, values=vals)

    @staticmethod
    def from_point_mass(point, level: int) -> "MomentVector":
        """Moments of the Dirac measure at a point."""
        point = np.asarray(point, dtype=float)
        n = len(point)
        vals = {}
        for mono in basis(n, 2 * level):
            term = 1.0
            for xi, e in zip(point, mono):
                term *= float(xi) ** e
            vals[mono] = term
        return MomentVector(nvars=n, level=level, values=vals)

    @staticmethod
    def mixture(components, weights, level: int) -> "MomentVector":
        """Moments of a finite atomic measure sum_i w_i * delta(points_i)."""
        parts = [MomentVector.from_point_mass(p, level) for p in components]
        n = parts[0].nvars
        vals = {}
        for mono in basis(n, 2 * level):
            vals[mono] = sum(w * part.values[mono] for w, part in zip(weights, parts))
        return MomentVector(nvars=n, level=level, values=vals)


# ---------------------------------------------------------------------------
# Flat truncation
# ---------------------------------------------------------------------------

@dataclass
class FlatTruncationReport:
    """Numerical ranks of the nested moment matrices and the flatness test.

    The rank-stabilization window ``window`` (the largest half-degree of the
    constraints, at least 1) is a convention, not something the mathematics
    pins down uniquely; reports flag it as such.
    """

    window: int
    min_order: int
    max_order: int
    ranks: dict
    singular_values: dict
    threshold: float
    flat_at: int | None
    note: str | None = None

    @property
    def is_flat(self) -> bool:
        return self.flat_at is not None

    def rank_at(self, order: int) -> int:
        return self.ranks[order]

    def to_dict(self) -> dict:
        return {
            "window": self.window,
            "window_convention": "max ceil(deg/2) over constraints, min 1 (convention)",
            "min_order": self.min_order,
            "max_order": self.max_order,
            "ranks": {str(t): r for t, r in self.ranks.items()},
            "singular_values": {str(t): list(map(float, sv))
                                for t, sv in self.singular_values.items()},
            "threshold": self.threshold,
            "flat_at": self.flat_at,
            "note": self.note,
        }


def _constraint_half_degree(inst: PopInstance) -> int:
    degs = [1]
    for p in list(inst.h) + list(inst.g):
        if not p.is_zero():
            degs.append(math.ceil(p.degree / 2))
    return max(degs)


def flat_truncation(y: MomentVector, inst: PopInstance,
                    level: int | None = None) -> FlatTruncationReport:
    """Detect rank stabilization rank M_{t-d}(y) = rank M_t(y).

    Ranks are counted with one common singular-value threshold (relative to
    the largest moment matrix), which keeps them nondecreasing in t.  The
    smallest order passing the test is reported; when the level leaves no
    room for the comparison the report says so.
    """
    k = level if level is not None else y.level
    d = _constraint_half_degree(inst)
    d0 = d  # both the window and the smallest reported order
    mats = {t: y.moment_matrix(t) for t in range(0, k + 1)}
    svals = {t: np.linalg.svd(mats[t], compute_uv=False) for t in mats}
    sigma_max = float(svals[k][0]) if len(svals[k]) else 0.0
    threshold = RANK_REL_TOL * max(sigma_max, 1e-300)
    ranks_all = {t: int(np.sum(svals[t] > threshold)) for t in mats}

    admissible = [t for t in range(d0, k + 1) if t - d >= 1]
    flat_at = None
    for t in admissible:
        if ranks_all[t - d] == ranks_all[t]:
            flat_at = t
            break
    note = None
    if not admissible:
        note = f"level too low to test (k = {k}, window d = {d})"
    return FlatTruncationReport(
        window=d, min_order=d0, max_order=k,
        ranks={t: ranks_all[t] for t in range(d0, k + 1)},
        singular_values={t: svals[t] for t in range(d0, k + 1)},
        threshold=threshold, flat_at=flat_at, note=note)


def extract_minimizer_rank1(y: MomentVector, inst: PopInstance | None = None,
                            value: float | None = None,
                            tol_consistency: float = 1e-5,
                            tol_feas: float = 1e-6,
                            details: dict | None = None):
    """Candidate minimizer u_i = y_{e_i} / y_0 from a numerically rank-1 moment matrix.

    Returns None (with a reason in ``details`` when supplied) if the rank-1
    precondition fails, if the moments are not consistent with a point mass,
    or if the optional feasibility / objective-value checks fail.
    """
    def reject(reason):
        if details is not None:
            details["reason"] = reason
        return None

    mat = y.moment_matrix(y.level)
    svals = np.linalg.svd(mat, compute_uv=False)
    rank = int(np.sum(svals > RANK_REL_TOL * max(float(svals[0]), 1e-300)))
    if rank != 1:
        return reject(f"moment matrix has numerical rank {rank}, expected 1")

    n = y.nvars
    y0 = y.values.get((0,) * n, 0.0)
    if abs(y0) < 1e-10:
        return reject("y0 vanishes")
    point = np.array([y.values.get(tuple(1 if i == j else 0 for j in range(n)), 0.0) / y0
                      for i in range(n)])

    for mono, val in y.values.items():
        expected = 1.0
        for xi, e in zip(point, mono):
            expected *= float(xi) ** e
        if abs(val / y0 - expected) > tol_consistency * (1.0 + abs(expected)):
            return reject(f"moment of {mono} inconsistent with point mass "
                          f"({val / y0:.6g} vs {expected:.6g})")

    if inst is not None:
        if not inst.is_feasible(point, tol_feas):
            eq, ineq = inst.violations(point)
            return reject(f"extracted point infeasible (|h|={eq:.2e}, -g={ineq:.2e})")
        if value is not None:
            fu = inst.f.eval(point)
            if abs(fu - value) > tol_consistency * (1.0 + abs(value)):
                return reject(f"f(u) = {fu:.8g} does not match bound {value:.8g}")
    if details is not None:
        details["reason"] = None
    return point


# ---------------------------------------------------------------------------
# Certificates
# ---------------------------------------------------------------------------

@dataclass
class GramBlock:
    """PSD Gram matrix of one sigma_j together with its monomial basis."""

    basis: tuple           # monomials indexing the matrix
    matrix: np.ndarray

    def to_polynomial(self, nvars: int) -> Polynomial:
        terms = {}
        size = len(self.basis)
        for p in range(size):
            for q in range(size):
                key = monomial_mul(self.basis[p], self.basis[q])
                terms[key] = terms.get(key, 0.0) + self.matrix[p, q]
        return Polynomial(nvars, terms)


@dataclass
class Certificate:
    gamma: float
    phi: list                  # one multiplier polynomial per equality
    sigma_grams: list          # GramBlock per j = 0..m2
    sos_decompositions: list   # per j: list of square-root polynomials
    identity_residual: float
    verified: bool
    level: int
    tolerance: float
    nvars: int
    notes: list = field(default_factory=list)

    def sigma_polynomials(self) -> list:
        return [g.to_polynomial(self.nvars) for g in self.sigma_grams]


def gram_clip_psd(matrix: np.ndarray):
    """Project a symmetric matrix onto the PSD cone by clipping eigenvalues.

    Returns (clipped matrix, eigenvalues, negative mass removed).
    """
    sym = (matrix + matrix.T) / 2.0
    eigvals, eigvecs = np.linalg.eigh(sym)
    neg_mass = float(-eigvals[eigvals < 0].sum())
    clipped = eigvecs @ np.diag(np.clip(eigvals, 0.0, None)) @ eigvecs.T
    return (clipped + clipped.T) / 2.0, eigvals, neg_mass


def sos_squares(gram: np.ndarray, bas, nvars: int) -> list:
    """Square decomposition sigma = sum_l p_l^2 from a PSD Gram matrix."""
    eigvals, eigvecs = np.linalg.eigh((gram + gram.T) / 2.0)
    lam_max = max(float(eigvals[-1]), 0.0)
    squares = []
    for l in range(len(eigvals)):
        lam = eigvals[l]
        if lam <= 1e-14 * max(lam_max, 1.0):
            continue
        root = math.sqrt(lam)
        terms = {}
        for p, mono in enumerate(bas):
            coeff = root * eigvecs[p, l]
            if coeff != 0.0:
                terms[tuple(mono)] = terms.get(tuple(mono), 0.0) + coeff
        squares.append(Polynomial(nvars, terms))
    return squares


def extract_certificate(prob, sol, inst: PopInstance,
                        tol: float = CERT_TOL) -> Certificate:
    """Turn a solved SOS relaxation into a checkable certificate.

    Gram blocks are repaired to exact PSD by eigenvalue clipping; whatever
    that (and solver inaccuracy) costs shows up in ``identity_residual``,
    which is reported, never rounded away.  A residual above tolerance marks
    the certificate UNVERIFIED but it is still returned.
    """
    layout = prob.layout
    if layout is None or not hasattr(layout, "gamma_index"):
        raise ValueError("problem carries no SOS layout; build it with build_sos_relaxation")
    n = inst.nvars
    gamma = float(sol.free_values[layout.gamma_index])

    phi = []
    for start, bas in layout.phi_slices:
        terms = {}
        for offset, mono in enumerate(bas):
            coeff = float(sol.free_values[start + offset])
            if coeff != 0.0:
                terms[tuple(mono)] = coeff
        phi.append(Polynomial(n, terms))

    grams = []
    squares_all = []
    notes = []
    for j, bas in enumerate(layout.block_bases):
        clipped, eigvals, neg_mass = gram_clip_psd(sol.x_blocks[j])
        if neg_mass > 0:
            notes.append(f"gram {j}: clipped negative eigenvalue mass {neg_mass:.3e}")
        grams.append(GramBlock(basis=tuple(bas), matrix=clipped))
        squares_all.append(sos_squares(clipped, bas, n))

    cert = Certificate(
        gamma=gamma, phi=phi, sigma_grams=grams,
        sos_decompositions=squares_all,
        identity_residual=0.0, verified=False,
        level=layout.level, tolerance=tol, nvars=n, notes=notes)
    residual = certificate_defect(cert, inst).coeff_norm()
    cert.identity_residual = residual
    cert.verified = residual <= tol * (1.0 + inst.f.coeff_norm())
    if not cert.verified:
        cert.notes.append(
            f"UNVERIFIED: identity residual {residual:.3e} exceeds tolerance")
    return cert


def certificate_defect(cert: Certificate, inst: PopInstance) -> Polynomial:
    """f - gamma - sum phi_i h_i - sum sigma_j g_j as a polynomial."""
    n = inst.nvars
    rhs = Polynomial.zero(n)
    for p, hpoly in zip(cert.phi, inst.h):
        rhs = rhs + p * hpoly
    g_all = [Polynomial.constant(n, 1.0)] + list(inst.g)
    for gram, gpoly in zip(cert.sigma_grams, g_all):
        rhs = rhs + gram.to_polynomial(n) * gpoly
    return inst.f - Polynomial.constant(n, cert.gamma) - rhs


def verify_certificate(cert: Certificate, inst: PopInstance,
                       tol: float = CERT_TOL):
    """Independent re-check: PSD Gram blocks plus the polynomial identity.

    Re-expands sigma_j from the stored Gram matrices, forms the right-hand
    side with polynomial arithmetic, and compares coefficients against
    f - gamma.  Returns (passed, max absolute coefficient defect).
    """
    if len(cert.sigma_grams) != len(inst.g) + 1:
        return False, float("inf")
    if len(cert.phi) != len(inst.h):
        return False, float("inf")
    psd_ok = True
    for gram in cert.sigma_grams:
        mat = np.asarray(gram.matrix)
        if mat.shape[0] != mat.shape[1] or mat.shape[0] != len(gram.basis):
            return False, float("inf")
        eigvals = np.linalg.eigvalsh((mat + mat.T) / 2.0)
        scale = max(abs(float(eigvals[-1])), 1.0)
        if eigvals[0] < -PSD_CHECK_TOL * scale:
            psd_ok = False
    residual = certificate_defect(cert, inst).coeff_norm()
    passed = psd_ok and residual <= tol * (1.0 + inst.f.coeff_norm())
    return passed, residual


# ---------------------------------------------------------------------------
# Certificate files
# ---------------------------------------------------------------------------

def certificate_to_dict(cert: Certificate, inst: PopInstance | None = None) -> dict:
    doc = {
        "format": "polyopt-certificate v1",
        "nvars": cert.nvars,
        "level": cert.level,
        "gamma": cert.gamma,
        "tolerance": cert.tolerance,
        "identity_residual": cert.identity_residual,
        "verified": cert.verified,
        "phi": [_poly_to_records(p) for p in cert.phi],
        "sigma": [
            {
                "basis": [list(m) for m in gram.basis],
                "gram": [[float(x) for x in row] for row in gram.matrix],
                "squares": [_poly_to_records(p) for p in squares],
            }
            for gram, squares in zip(cert.sigma_grams, cert.sos_decompositions)
        ],
        "notes": list(cert.notes),
    }
    if inst is not None:
        doc["instance"] = instance_to_dict(inst)
    return doc


def certificate_from_dict(doc: dict) -> tuple:
    """Returns (certificate, embedded instance or None)."""
    if doc.get("format") != "polyopt-certificate v1":
        raise ParseError("not a polyopt certificate (bad or missing format field)")
    try:
        n = int(doc["nvars"])
        grams = []
        squares_all = []
        for entry in doc["sigma"]:
            bas = tuple(tuple(int(e) for e in m) for m in entry["basis"])
            mat = np.asarray(entry["gram"], dtype=float)
            grams.append(GramBlock(basis=bas, matrix=mat))
            squares_all.append([_poly_from_records(r, n) for r in entry.get("squares", [])])
        cert = Certificate(
            gamma=float(doc["gamma"]),
            phi=[_poly_from_records(r, n) for r in doc.get("phi", [])],
            sigma_grams=grams,
            sos_decompositions=squares_all,
            identity_residual=float(doc.get("identity_residual", 0.0)),
            verified=bool(doc.get("verified", False)),
            level=int(doc.get("level", 0)),
            tolerance=float(doc.get("tolerance", CERT_TOL)),
            nvars=n,
            notes=list(doc.get("notes", [])),
        )
    except (KeyError, TypeError, ValueError) as exc:
        raise ParseError(f"malformed certificate document: {exc}") from exc
    inst = instance_from_dict(doc["instance"]) if "instance" in doc else None
    return cert, inst


def write_certificate(cert: Certificate, path, inst: PopInstance | None = None) -> None:
    with open(path, "w") as fh:
        json.dump(certificate_to_dict(cert, inst), fh, indent=1)
        fh.write("\n")


def read_certificate(path) -> tuple:
    try:
        with open(path) as fh:
            doc = json.load(fh)
    except json.JSONDecodeError as exc:
        raise ParseError(f"{path}: not valid JSON: {exc}") from exc
    return certificate_from_dict(doc)
