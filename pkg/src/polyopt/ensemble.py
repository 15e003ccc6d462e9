"""Randomized experiments over ball-constrained instances.

Draws objectives (and optionally linear equalities) with i.i.d. standard
normal coefficients, runs the hierarchy with a small level budget, audits the
extracted minimizer, and tabulates how often finite convergence and the local
conditions hold.  Everything is reproducible from the seed; instances can be
solved in a process pool and are merged back in index order.
"""

from __future__ import annotations

import json
import os
from dataclasses import dataclass, field

import numpy as np

from .errors import PolyOptError
from .localopt import audit_point
from .polynomials import Polynomial, basis
from .pop import PopInstance, ball_constraint, instance_to_dict
from .hierarchy import STOP_FLAT, run_hierarchy
from .certify import verify_certificate

AUDIT_TOL = 1e-5
VALUE_TOL = 1e-5
FEAS_TOL = 1e-6


def random_polynomial(nvars: int, degree: int, rng) -> Polynomial:
    """All monomials of degree <= degree with standard normal coefficients."""
    terms = {}
    for mono in basis(nvars, degree):
        terms[mono] = float(rng.standard_normal())
    return Polynomial(nvars, terms)


def random_instance(nvars: int, degree: int, rng,
                    n_equalities: int = 0,
                    ball_radius_sq: float = 1.0,
                    extra_inequality_degree: int | None = None) -> PopInstance:
    """Random objective over the ball, optionally with linear equalities.

    Equalities are redrawn until the affine subspace actually meets the ball,
    so every returned instance is feasible; conditioning on feasibility keeps
    the coefficient law absolutely continuous.
    """
    f = random_polynomial(nvars, degree, rng)
    unit = [tuple(1 if i == j else 0 for j in range(nvars)) for i in range(nvars)]
    h = []
    for _ in range(n_equalities):
        for _attempt in range(1000):
            cand = random_polynomial(nvars, 1, rng)
            system = h + [cand]
            rows = np.array([[p.coefficient(e) for e in unit] for p in system])
            rhs = -np.array([p.coefficient((0,) * nvars) for p in system])
            sol, *_ = np.linalg.lstsq(rows, rhs, rcond=None)
            consistent = np.allclose(rows @ sol, rhs, atol=1e-9)
            if consistent and sol @ sol <= ball_radius_sq * (1.0 - 1e-9):
                h.append(cand)
                break
        else:
            raise RuntimeError("could not draw a feasible equality system")
    g = [ball_constraint(nvars, ball_radius_sq)]
    if extra_inequality_degree:
        g.append(random_polynomial(nvars, extra_inequality_degree, rng)
                 + Polynomial.constant(nvars, 0.5))
    return PopInstance(f=f, h=tuple(h), g=tuple(g))


def _run_single(index: int, seed: int, nvars: int, degree: int,
                n_equalities: int, level_budget: int,
                keep_artifacts: bool = False) -> dict:
    rng = np.random.default_rng(np.random.SeedSequence(entropy=seed, spawn_key=(index,)))
    inst = random_instance(nvars, degree, rng, n_equalities=n_equalities)
    min_k = inst.min_level()
    result = {
        "index": index,
        "flat": False,
        "flat_level": None,
        "minimizer": None,
        "minimizer_feasible": False,
        "value_matches": False,
        "cqc": None, "scc": None, "sosc": None,
        "certificates_verified": True,
        "max_level": None,
        "value": None,
        "error": None,
        "instance": instance_to_dict(inst),
    }
    if keep_artifacts:
        result["_instance"] = inst
    try:
        run = run_hierarchy(inst, k_min=min_k, k_max=min_k + level_budget)
    except PolyOptError as exc:
        result["error"] = str(exc)
        return result
    if keep_artifacts:
        result["_run"] = run
    solved = [rec for rec in run.levels if rec.value is not None]
    result["max_level"] = solved[-1].level if solved else None
    result["value"] = run.final_value
    for rec in run.levels:
        if rec.certificate is not None:
            ok, _ = verify_certificate(rec.certificate, inst)
            result["certificates_verified"] &= bool(ok)
    if run.stop_reason == STOP_FLAT:
        result["flat"] = True
        result["flat_level"] = run.flat_level
    u = run.minimizer
    if u is not None:
        result["minimizer"] = [float(x) for x in u]
        result["minimizer_feasible"] = inst.is_feasible(u, FEAS_TOL)
        fk = run.final_value
        result["value_matches"] = abs(inst.f.eval(u) - fk) <= VALUE_TOL * (1.0 + abs(fk))
        try:
            report = audit_point(inst, u, tol=AUDIT_TOL)
            result["cqc"] = report.cqc
            result["scc"] = report.scc
            result["sosc"] = report.sosc
        except PolyOptError as exc:
            result["error"] = f"audit failed: {exc}"
    return result


@dataclass
class EnsembleSummary:
    count: int
    seed: int
    nvars: int
    degree: int
    n_equalities: int
    level_budget: int
    results: list = field(default_factory=list)

    def fraction(self, key) -> float:
        if not self.results:
            return 0.0
        return sum(1 for r in self.results if r.get(key) is True) / len(self.results)

    def all_conditions_fraction(self) -> float:
        if not self.results:
            return 0.0
        good = sum(1 for r in self.results
                   if r.get("cqc") is True and r.get("scc") is True and r.get("sosc") is True)
        return good / len(self.results)

    def failures(self) -> list:
        out = []
        for r in self.results:
            ok = (r.get("flat") and r.get("minimizer_feasible") and r.get("value_matches")
                  and r.get("cqc") is True and r.get("scc") is True and r.get("sosc") is True
                  and r.get("certificates_verified") and not r.get("error"))
            if not ok:
                out.append({k: v for k, v in r.items() if not k.startswith("_")})
        return out

    def table(self) -> str:
        n = max(len(self.results), 1)
        max_level = max((r["max_level"] or 0 for r in self.results), default=0)
        lines = [
            f"random ensemble: count={self.count} nvars={self.nvars} "
            f"degree={self.degree} equalities={self.n_equalities} seed={self.seed}",
            f"  flat truncation attained     {self.fraction('flat'):8.3f}",
            f"  minimizer extracted+feasible {self.fraction('minimizer_feasible'):8.3f}",
            f"  f(u) matches bound           {self.fraction('value_matches'):8.3f}",
            f"  CQC                          {self.fraction('cqc'):8.3f}",
            f"  SCC                          {self.fraction('scc'):8.3f}",
            f"  SOSC                         {self.fraction('sosc'):8.3f}",
            f"  all local conditions         {self.all_conditions_fraction():8.3f}",
            f"  certificates verified        {self.fraction('certificates_verified'):8.3f}",
            f"  max level used               {max_level:8d}",
            f"  failures                     {len(self.failures()):8d} of {n}",
        ]
        return "\n".join(lines)

    def to_dict(self) -> dict:
        return {
            "count": self.count, "seed": self.seed, "nvars": self.nvars,
            "degree": self.degree, "n_equalities": self.n_equalities,
            "level_budget": self.level_budget,
            "fractions": {
                "flat": self.fraction("flat"),
                "minimizer_feasible": self.fraction("minimizer_feasible"),
                "value_matches": self.fraction("value_matches"),
                "cqc": self.fraction("cqc"),
                "scc": self.fraction("scc"),
                "sosc": self.fraction("sosc"),
                "all_conditions": self.all_conditions_fraction(),
                "certificates_verified": self.fraction("certificates_verified"),
            },
            "failures": len(self.failures()),
            "results": [{k: v for k, v in r.items() if not k.startswith("_")}
                        for r in self.results],
        }


def run_ensemble(nvars: int, degree: int, count: int, seed: int,
                 n_equalities: int = 0, level_budget: int = 2,
                 workers: int = 1, dump_dir=None,
                 keep_artifacts: bool = False) -> EnsembleSummary:
    """Sample and solve ``count`` random instances; fully determined by the seed.

    Failing instances (anything short of flat convergence with a verified
    audit) are dumped as JSON into ``dump_dir`` when given.  With
    ``keep_artifacts`` (serial only) each result also carries the live
    instance and hierarchy run under the keys ``_instance`` / ``_run``.
    """
    summary = EnsembleSummary(count=count, seed=seed, nvars=nvars, degree=degree,
                              n_equalities=n_equalities, level_budget=level_budget)
    args = [(i, seed, nvars, degree, n_equalities, level_budget) for i in range(count)]
    if workers > 1 and count > 1 and not keep_artifacts:
        from concurrent.futures import ProcessPoolExecutor

        with ProcessPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(_run_single_star, args, chunksize=1))
    else:
        results = [_run_single(*a, keep_artifacts=keep_artifacts) for a in args]
    results.sort(key=lambda r: r["index"])
    summary.results = results

    if dump_dir is not None:
        failures = summary.failures()
        if failures:
            os.makedirs(str(dump_dir), exist_ok=True)
            for r in failures:
                path = os.path.join(str(dump_dir), f"failure_{r['index']:04d}.json")
                with open(path, "w") as fh:
                    json.dump(r, fh, indent=1)
    return summary


def _run_single_star(args):
    return _run_single(*args)
