"""Dense primal-dual interior-point solver for block-diagonal SDPs.

Solves the maximization form of `SdpProblem`:

    max  c.u + sum_j <C_j, X_j>    s.t.  A(X) + B u = b,  X_j PSD,  u free,

together with its dual  min b.v  s.t.  Z_j = A_j*(v) - C_j PSD,  B^T v = c.

The method is infeasible-start path following with the HKM search direction
and a Mehrotra predictor-corrector step.  Free variables are handled by
bordering the HKM Schur complement M with the free columns and solving the
augmented symmetric indefinite system

    [ M    B  ] [dv ]   [h1 ]
    [ B^T -dI ] [-du] = [r_f]

(d a small regularization) by pivoted LU with iterative refinement.

The cold start is the standard "big initialization": X = rho_p I and
Z = rho_d I with the two scales read off the problem norms, u = 0, v = 0,
which makes runs reproducible for identical inputs.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field

import numpy as np
from scipy.linalg import LinAlgWarning, lu_factor, lu_solve, solve_triangular

from .certify import MomentVector
from .errors import DegenerateDualError
from .sdp import SdpProblem

STATUS_OPTIMAL = "optimal"
STATUS_NEAR_OPTIMAL = "near_optimal"
STATUS_INFEASIBLE = "infeasible"
STATUS_UNBOUNDED = "unbounded"
STATUS_MAX_ITER = "max_iter"


@dataclass
class SolverOptions:
    tol_gap: float = 1e-8
    tol_feas: float = 1e-8
    max_iter: int = 200
    step_fraction: float = 0.98   # fraction-to-boundary factor
    free_reg: float = 1e-10       # regularization of the free-variable block
    near_tol: float = 1e-5        # residual band accepted as near_optimal
    polish_iters: int = 3         # bonus iterations after reaching tolerance


@dataclass
class SdpSolution:
    status: str
    x_blocks: list
    free_values: np.ndarray
    dual_vector: np.ndarray
    z_blocks: list
    primal_objective: float
    dual_objective: float
    iterations: int
    residuals: dict
    trace: list = field(default_factory=list)
    notes: list = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return self.status in (STATUS_OPTIMAL, STATUS_NEAR_OPTIMAL)


def _sym(mat):
    return (mat + mat.T) / 2.0


def _apply_A(a_flat, x_blocks):
    """A(X): one inner product per row."""
    out = None
    for a, x in zip(a_flat, x_blocks):
        term = a @ x.reshape(-1)
        out = term if out is None else out + term
    return out


def _apply_At(a_blocks, v):
    """A*(v) per block."""
    return [np.tensordot(v, a, axes=1) for a in a_blocks]


def _max_step(chol_lower, delta):
    """Largest alpha with P + alpha*D PSD, via L^{-1} D L^{-T} eigenvalues."""
    w = solve_triangular(chol_lower, delta, lower=True)
    w = solve_triangular(chol_lower, w.T, lower=True).T
    lam_min = np.linalg.eigvalsh(_sym(w)).min()
    if lam_min >= -1e-14:
        return np.inf
    return -1.0 / lam_min


def solve(prob: SdpProblem, opts: SolverOptions | None = None) -> SdpSolution:
    """Run the predictor-corrector iteration until the duality gap and both
    feasibility residuals are below tolerance.

    Numerical breakdown (a Schur system that stops being positive definite)
    ends the run with status ``max_iter`` and a diagnostic note rather than an
    exception.  Clear certificate-of-infeasibility or divergence patterns are
    reported as ``infeasible`` / ``unbounded``.
    """
    opts = opts or SolverOptions()
    prob.validate()

    sizes = prob.block_sizes
    nrows, nfree, nblocks = prob.nrows, prob.nfree, prob.nblocks
    a_blocks = [np.ascontiguousarray(a) for a in prob.a_blocks]
    a_flat = [a.reshape(nrows, -1) for a in a_blocks]
    b = prob.rhs
    bmat = prob.b_free
    c_free = prob.c_free
    c_blocks = prob.c_blocks
    ntotal = sum(sizes)

    # Big initialization from problem norms.
    anorm = np.sqrt(sum((a_flat[j] ** 2).sum(axis=1) for j in range(nblocks))
                    + (bmat ** 2).sum(axis=1))
    rho_p = max(10.0, np.sqrt(max(sizes)),
                max(sizes) * float(np.max((1.0 + np.abs(b)) / (1.0 + anorm))))
    cnorm = max((float(np.linalg.norm(c)) for c in c_blocks), default=0.0)
    rho_d = max(10.0, np.sqrt(max(sizes)), float(anorm.max(initial=0.0)), cnorm,
                float(np.linalg.norm(c_free)))
    x_blocks = [rho_p * np.eye(s) for s in sizes]
    z_blocks = [rho_d * np.eye(s) for s in sizes]
    u = np.zeros(nfree)
    v = np.zeros(nrows)

    b_scale = 1.0 + float(np.linalg.norm(b))
    c_scale = 1.0 + max(cnorm, float(np.linalg.norm(c_free)))

    trace = []
    notes = []
    status = STATUS_MAX_ITER
    iteration = 0
    stall_count = 0
    converged = False
    polish_left = opts.polish_iters
    best = None  # (score, x, z, u, v, metrics, primal, dual, iteration)

    def objectives():
        primal = float(c_free @ u) + sum(float(np.tensordot(cb, xb))
                                         for cb, xb in zip(c_blocks, x_blocks))
        dual = float(b @ v)
        return primal, dual

    def residual_state():
        r_p = b - _apply_A(a_flat, x_blocks) - bmat @ u
        atv = _apply_At(a_blocks, v)
        r_d = [atv[j] - c_blocks[j] - z_blocks[j] for j in range(nblocks)]
        r_f = c_free - bmat.T @ v
        return r_p, r_d, r_f

    err_p = err_d = rel_gap = np.inf
    primal = dual = 0.0
    for iteration in range(1, opts.max_iter + 1):
        r_p, r_d, r_f = residual_state()
        mu = sum(float(np.tensordot(xb, zb)) for xb, zb in zip(x_blocks, z_blocks)) / ntotal
        primal, dual = objectives()

        err_p = float(np.linalg.norm(r_p)) / b_scale
        err_d = max(max(float(np.linalg.norm(rd)) for rd in r_d),
                    float(np.linalg.norm(r_f))) / c_scale
        gap = dual - primal
        rel_gap = abs(gap) / (1.0 + (abs(primal) + abs(dual)) / 2.0)
        gap_slack = (sum(abs(float(np.tensordot(rd, xb))) for rd, xb in zip(r_d, x_blocks))
                     + abs(float(r_f @ u)) + abs(float(r_p @ v)))
        trace.append({
            "iteration": iteration - 1, "mu": mu, "primal": primal, "dual": dual,
            "err_primal": err_p, "err_dual": err_d, "rel_gap": rel_gap,
            "gap_slack": gap_slack,
        })

        score = max(err_p, err_d, rel_gap)
        if best is None or score < best[0]:
            best = (score, [x.copy() for x in x_blocks], [z.copy() for z in z_blocks],
                    u.copy(), v.copy(), {"primal": err_p, "dual": err_d, "gap": rel_gap},
                    primal, dual, iteration)

        if err_p <= opts.tol_feas and err_d <= opts.tol_feas and rel_gap <= opts.tol_gap:
            converged = True
            # a few bonus iterations push mu further down, which sharpens the
            # dual moments (minimizer coordinates improve like sqrt(gap))
            if polish_left <= 0:
                break
            polish_left -= 1

        # Divergence heuristics: a scaled dual ray certifies primal
        # infeasibility, a scaled primal ray certifies unboundedness.
        vnorm = float(np.linalg.norm(v))
        if vnorm > 1e8 * b_scale:
            vn = v / vnorm
            ray = _apply_At(a_blocks, vn)
            ray_psd = min(np.linalg.eigvalsh(_sym(r)).min() for r in ray)
            if (float(np.linalg.norm(bmat.T @ vn)) < 1e-6
                    and ray_psd > -1e-6 and float(b @ vn) < -1e-8):
                status = STATUS_INFEASIBLE
                notes.append("dual ray found: primal certified infeasible")
                break
        xnorm = max(float(np.linalg.norm(xb)) for xb in x_blocks) + float(np.linalg.norm(u))
        if xnorm > 1e8 * rho_p and primal > 1e8 * (1.0 + abs(dual)):
            scale = xnorm
            resid_ray = float(np.linalg.norm(
                _apply_A(a_flat, [xb / scale for xb in x_blocks]) + bmat @ (u / scale)))
            ray_obj = primal / scale
            if resid_ray < 1e-6 and ray_obj > 1e-8:
                status = STATUS_UNBOUNDED
                notes.append("primal ray found: objective unbounded above")
                break

        # Factor the iterates and the Schur complement.
        try:
            z_chol = [np.linalg.cholesky(_sym(zb)) for zb in z_blocks]
            x_chol = [np.linalg.cholesky(_sym(xb)) for xb in x_blocks]
        except np.linalg.LinAlgError:
            notes.append(f"iterate lost positive definiteness at iteration {iteration}")
            break
        z_inv = []
        for s, lc in zip(sizes, z_chol):
            w = solve_triangular(lc, np.eye(s), lower=True)
            z_inv.append(_sym(w.T @ w))

        schur = np.zeros((nrows, nrows))
        for j in range(nblocks):
            t = np.matmul(np.matmul(x_blocks[j], a_blocks[j]), z_inv[j])
            schur += a_flat[j] @ t.reshape(nrows, -1).T
        schur = _sym(schur)

        # Augmented KKT system: the HKM Schur complement bordered by the
        # free-variable columns, with a small regularization on the free
        # block.  Factored once per iteration by pivoted LU on a diagonally
        # equilibrated copy; one round of iterative refinement against the
        # unscaled matrix recovers the digits that the bad late-stage
        # conditioning (order 1/mu^2) costs.
        dim = nrows + nfree
        kmat = np.zeros((dim, dim))
        kmat[:nrows, :nrows] = schur
        if nfree:
            # regularization sized against B^T M^{-1} B, the block the free
            # columns induce, so it stays negligible as M blows up late on
            base = max(float(np.abs(np.diag(schur)).mean()), 1e-300)
            bscale = max(float((bmat ** 2).sum(axis=0).mean()), 1e-300)
            kmat[:nrows, nrows:] = bmat
            kmat[nrows:, :nrows] = bmat.T
            kmat[nrows:, nrows:] = -opts.free_reg * (bscale / base) * np.eye(nfree)
        equil = 1.0 / np.sqrt(np.clip(np.abs(kmat).max(axis=1), 1e-300, None))
        kkt_eq = kmat * equil[:, None] * equil[None, :]
        kkt_lu = None
        jitter = 0.0
        signs = np.concatenate([np.ones(nrows), -np.ones(nfree)])
        probe = np.ones(dim)
        for _ in range(5):
            try:
                with warnings.catch_warnings():
                    # conditioning near 1/mu^2 is expected in the endgame; the
                    # refinement step below is what handles it
                    warnings.simplefilter("ignore", LinAlgWarning)
                    kkt_lu = lu_factor(kkt_eq + jitter * np.diag(signs))
                if np.all(np.isfinite(lu_solve(kkt_lu, probe))):
                    break
            except (np.linalg.LinAlgError, ValueError):
                pass
            kkt_lu = None
            # exactly singular (e.g. dependent equality rows): retry with a
            # quasi-definiteness-preserving diagonal shift
            jitter = max(jitter * 100.0, 1e-12)
        if kkt_lu is None:
            notes.append(f"KKT system factorization failed at iteration {iteration}")
            break

        def kkt_solve(h1, rf):
            rhs = np.concatenate([h1, rf])

            def once(r):
                return equil * lu_solve(kkt_lu, equil * r)

            sol = once(rhs)
            sol = sol + once(rhs - kmat @ sol)
            return sol[:nrows], -sol[nrows:]

        def newton(k_blocks):
            """Direction for complementarity target K (None means K = 0)."""
            h1 = -r_p - _apply_A(a_flat, x_blocks)
            adj = []
            for j in range(nblocks):
                term = x_blocks[j] @ r_d[j] @ z_inv[j]
                if k_blocks is not None:
                    term = term - k_blocks[j] @ z_inv[j]
                adj.append(term)
            h1 = h1 - _apply_A(a_flat, adj)
            # h1 = A(K Z^{-1}) - A(X) - A(X R_d Z^{-1}) - r_p
            dv, du = kkt_solve(h1, r_f)
            atdv = _apply_At(a_blocks, dv)
            dz = [atdv[j] + r_d[j] for j in range(nblocks)]
            dx = []
            for j in range(nblocks):
                mat = -x_blocks[j] - x_blocks[j] @ dz[j] @ z_inv[j]
                if k_blocks is not None:
                    mat = mat + k_blocks[j] @ z_inv[j]
                dx.append(_sym(mat))
            return dv, du, dx, dz

        def finite(dv, du, dx, dz):
            return (np.all(np.isfinite(dv)) and np.all(np.isfinite(du))
                    and all(np.all(np.isfinite(m)) for m in dx)
                    and all(np.all(np.isfinite(m)) for m in dz))

        # Predictor (affine scaling direction).
        try:
            dv_a, du_a, dx_a, dz_a = newton(None)
            if not finite(dv_a, du_a, dx_a, dz_a):
                raise ValueError("nonfinite predictor direction")
        except (ValueError, np.linalg.LinAlgError) as exc:
            notes.append(f"numerical breakdown at iteration {iteration}: {exc}")
            break
        alpha_p = min(1.0, min(_max_step(x_chol[j], dx_a[j]) for j in range(nblocks)))
        alpha_d = min(1.0, min(_max_step(z_chol[j], dz_a[j]) for j in range(nblocks)))
        mu_aff = sum(float(np.tensordot(x_blocks[j] + alpha_p * dx_a[j],
                                        z_blocks[j] + alpha_d * dz_a[j]))
                     for j in range(nblocks)) / ntotal
        sigma = min(1.0, max((max(mu_aff, 0.0) / mu) ** 3, 1e-12))
        # Endgame guard: if mu collapses far below the remaining
        # infeasibility, the iterates pin to the cone boundary and the Newton
        # systems turn too ill-conditioned to repair r_p.  Near the target
        # gap, floor the centering parameter by the imbalance; earlier on,
        # plain Mehrotra steps are both safe and much faster.
        gap_rel = mu * ntotal / (1.0 + abs(primal) + abs(dual))
        infeas = max(err_p, err_d)
        if gap_rel <= 1e2 * opts.tol_gap:
            sigma = max(sigma, min(0.9, 0.1 * infeas / max(gap_rel, 1e-300)))

        # Corrector.
        k_blocks = [sigma * mu * np.eye(sizes[j]) - dx_a[j] @ dz_a[j]
                    for j in range(nblocks)]
        try:
            dv, du, dx, dz = newton(k_blocks)
            if not finite(dv, du, dx, dz):
                raise ValueError("nonfinite corrector direction")
        except (ValueError, np.linalg.LinAlgError) as exc:
            notes.append(f"numerical breakdown at iteration {iteration}: {exc}")
            break

        tau = opts.step_fraction
        alpha_p = min(1.0, tau * min(_max_step(x_chol[j], dx[j]) for j in range(nblocks)))
        alpha_d = min(1.0, tau * min(_max_step(z_chol[j], dz[j]) for j in range(nblocks)))

        if max(alpha_p, alpha_d) < 1e-10:
            stall_count += 1
            if stall_count >= 2:
                notes.append(f"step length collapsed at iteration {iteration}")
                break
        else:
            stall_count = 0

        for j in range(nblocks):
            x_blocks[j] = _sym(x_blocks[j] + alpha_p * dx[j])
            z_blocks[j] = _sym(z_blocks[j] + alpha_d * dz[j])
        u = u + alpha_p * du
        v = v + alpha_d * dv

        trace[-1].update({"alpha_p": alpha_p, "alpha_d": alpha_d, "sigma": sigma})

    metrics = {"primal": err_p, "dual": err_d, "gap": rel_gap}
    if status not in (STATUS_INFEASIBLE, STATUS_UNBOUNDED) and best is not None:
        # report the best iterate seen, not whatever state a breakdown or the
        # polish phase left behind
        _, x_blocks, z_blocks, u, v, metrics, primal, dual, _ = best
        if converged or (metrics["primal"] <= opts.tol_feas
                         and metrics["dual"] <= opts.tol_feas
                         and metrics["gap"] <= opts.tol_gap):
            status = STATUS_OPTIMAL
        elif max(metrics.values()) <= opts.near_tol:
            status = STATUS_NEAR_OPTIMAL
        else:
            status = STATUS_MAX_ITER
    else:
        primal, dual = objectives()
    return SdpSolution(
        status=status,
        x_blocks=x_blocks,
        free_values=u,
        dual_vector=v,
        z_blocks=z_blocks,
        primal_objective=primal,
        dual_objective=dual,
        iterations=iteration,
        residuals=metrics,
        trace=trace,
        notes=notes,
    )


def extract_dual_moments(sol: SdpSolution, layout) -> MomentVector:
    """Reindex the equality-row multipliers as a pseudo-moment vector.

    ``layout`` is the builder metadata whose ``row_monomials`` lists the
    monomial of each constraint row; the entry of the constant monomial is
    normalized to exactly 1.
    """
    v = sol.dual_vector
    monomials = layout.row_monomials
    n = len(monomials[0])
    y0 = None
    for mono, val in zip(monomials, v):
        if sum(mono) == 0:
            y0 = float(val)
            break
    if y0 is None or abs(y0) < 1e-10:
        raise DegenerateDualError(
            f"dual vector has y0 = {y0!r}; cannot normalize into moments")
    values = {tuple(m): float(val) / y0 for m, val in zip(monomials, v)}
    return MomentVector(nvars=n, level=layout.level, values=values)


def write_trace_csv(sol: SdpSolution, path) -> None:
    """Per-iteration residual/gap rows as CSV."""
    import csv

    fields = ["iteration", "mu", "primal", "dual", "err_primal", "err_dual",
              "rel_gap", "gap_slack", "alpha_p", "alpha_d", "sigma"]
    with open(path, "w", newline="") as fh:
        writer = csv.DictWriter(fh, fieldnames=fields)
        writer.writeheader()
        for row in sol.trace:
            writer.writerow({k: row.get(k, "") for k in fields})
