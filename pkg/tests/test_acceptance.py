"""Acceptance suite: eight numbered criteria, one PASS/FAIL line each.

Run with ``pytest tests/test_acceptance.py -s`` or directly as a script.
"""
from __future__ import annotations

import sys
import time
from dataclasses import dataclass, field

import numpy as np
import pytest

from spin7 import analysis
from spin7 import spin7_algebra as algebra
from spin7.exterior_kernel import DIM, KForm
from spin7.geometry_fields import (
    ConstantScalarField,
    check_nabla_parallel,
    default_potential,
    fixture_conformal,
    fixture_flat,
    fixture_perturbed,
    sample_points,
    structure_jet,
)

N_POINTS = 32
SEED = 0
EXPECTED_RANKS = {"2_7": 7, "2_21": 21, "3_8": 8, "3_48": 48,
                  "4_1": 1, "4_7": 7, "4_27": 27, "4_35": 35}


@dataclass
class Outcome:
    passed: bool
    values: dict = field(default_factory=dict)

    def line(self, n: int) -> str:
        shown = ", ".join(f"{k}={_fmt(v)}" for k, v in self.values.items())
        return f"criterion {n}: {'PASS' if self.passed else 'FAIL'} ({shown})"


def _fmt(v) -> str:
    if isinstance(v, float):
        return f"{v:.3g}"
    return str(v)


def _points():
    return sample_points(N_POINTS, seed=SEED)


def _fixtures():
    return {"flat": fixture_flat(), "conformal": fixture_conformal(default_potential()),
            "perturbed": fixture_perturbed(epsilon=1e-2)}


def criterion_1(phi: KForm | None = None) -> Outcome:
    """Norm, self-duality, Lambda^2 spectrum and splitting ranks of the fundamental form."""
    start = time.perf_counter()
    c = algebra.algebraic_constants(phi)
    elapsed = time.perf_counter() - start
    ok = (c["norm2"] == 14.0 and c["self_duality"] == 0.0 and c["eigenvalues"] <= 1e-10
          and c["ranks"] == EXPECTED_RANKS and elapsed < 1.0)
    return Outcome(ok, {"norm2": c["norm2"], "self_duality": c["self_duality"],
                        "spectrum": c["eigenvalues"], "ranks_ok": c["ranks"] == EXPECTED_RANKS,
                        "seconds": elapsed})


def criterion_2(n: int = 100, seed: int = SEED) -> Outcome:
    """Linear torsion system against the closed form, and the induced nabla Phi."""
    start = time.perf_counter()
    rng = np.random.default_rng(seed)
    rank = int(np.linalg.matrix_rank(algebra.torsion_system_matrix()))
    solve_err = formula_err = 0.0
    for _ in range(n):
        d = KForm(3, rng.standard_normal(56))
        T = algebra.torsion_closed_form(d)
        solve_err = max(solve_err, float(np.abs(algebra.torsion_linear_solve(d).coeffs - T.coeffs).max()))
        half = 0.5 * algebra.torsion_action_on_phi(T)
        X, Y, Z, V, W = rng.standard_normal((5, DIM))
        lhs = np.einsum("xyzvw,x,y,z,v,w->", half, X, Y, Z, V, W)
        formula_err = max(formula_err, abs(lhs - algebra.nabla_phi_formula(d, X, Y, Z, V, W)),
                          float(np.abs(half - algebra.nabla_phi_tensor(d)).max()))
    elapsed = time.perf_counter() - start
    ok = rank == 56 and solve_err <= 1e-9 and formula_err <= 1e-9 and elapsed < 5.0
    return Outcome(ok, {"rank": rank, "solve": solve_err, "nabla_phi": formula_err,
                        "seconds": elapsed})


def criterion_3() -> Outcome:
    """Phi is parallel for the metric connection with skew torsion on every fixture."""
    worst = {}
    for name, f in _fixtures().items():
        worst[name] = max(max(check_nabla_parallel(f, x).values()) for x in _points())
    return Outcome(max(worst.values()) <= 1e-8, worst)


def criterion_4() -> Outcome:
    """Conformal change of the Lee form and torsion, and the Lee form bound."""
    pot = default_potential()
    vals = {}
    ok = True
    for base in ("flat", "perturbed"):
        res = {r.name: r.max_residual
               for r in analysis.conformal_check(_fixtures()[base], pot, _points())}
        vals[f"lee_{base}"] = res["lee_form_conformal"]
        vals[f"torsion_exp4f_{base}"] = res["torsion_conformal_weight4"]
        vals[f"torsion_exp2f_{base}"] = res["torsion_conformal"]
        ok &= res["lee_form_conformal"] <= 1e-7 and res["torsion_conformal_weight4"] <= 1e-7
    fx = _fixtures()
    conf_gap = max(analysis.lee_bound_check(structure_jet(fx["conformal"], x))[2] for x in _points())
    pert_gap = min(analysis.lee_bound_check(structure_jet(fx["perturbed"], x))[2]
                   for x in _points()[1:])
    vals["gap_conformal"], vals["gap_perturbed_min"] = conf_gap, pert_gap
    ok &= conf_gap <= 1e-10 and pert_gap > 1e-4
    return Outcome(bool(ok), vals)


def criterion_5() -> Outcome:
    """Scalar and Ricci curvature formulas, plus the balanced scalar curvature probe."""
    names = ("scal_g", "scal", "ricci_shift", "ricci_g")
    vals = {}
    for fx in ("conformal", "perturbed"):
        results = analysis.curvature_suite(_fixtures()[fx], _points())
        by_name = {r.name: r.max_residual for r in results}
        vals[fx] = max(by_name[n] for n in names)
    base = _fixtures()["perturbed"]
    vals["balanced_probe"] = max(analysis.balanced_probe(base, x)["residual"] for x in _points()[:4])
    ok = vals["conformal"] <= 1e-5 and vals["perturbed"] <= 1e-5 and vals["balanced_probe"] <= 1e-6
    return Outcome(ok, vals)


SPINOR_KEYS = ("torsion_lee", "nabla_g_phi", "dirac_phi", "sl_first_literal", "sl_second",
               "laplacian", "scalar_pairing")


def criterion_6() -> Outcome:
    """Spinor identities on the invariant spinor at every fixture and sample point."""
    vals = {}
    ok = True
    for name, f in _fixtures().items():
        worst = dict.fromkeys(SPINOR_KEYS + ("sl_first",), 0.0)
        for x in _points():
            res = analysis.sl_identity_check(structure_jet(f, x))
            for k in worst:
                worst[k] = max(worst[k], res[k])
        gating = max(worst[k] for k in SPINOR_KEYS)
        vals[name] = gating
        if gating > 1e-6:
            bad = max(SPINOR_KEYS, key=worst.get)
            vals[f"{name}_worst"] = bad
            vals[f"{name}_sl_with_deltaT"] = worst["sl_first"]
        ok &= gating <= 1e-6
    return Outcome(bool(ok), vals)


def criterion_7() -> Outcome:
    """Killing spinor equivalence for a conformally flat structure."""
    pot = default_potential()
    conf = fixture_conformal(pot)
    good = analysis.killing_check(conf, pot.scaled(-7.0 / 3.0), _points())
    zero = analysis.killing_check(conf, ConstantScalarField(0.0), _points())
    worst = max(good.residuals.values())
    ok = good.accepted and worst <= 1e-6 and not zero.accepted and good.scalar <= 1e-6
    return Outcome(ok, {"accepted": good.accepted, "worst": worst, "scalar": good.scalar,
                        "psi0_rejected": not zero.accepted})


def criterion_8() -> Outcome:
    """Corrupted inputs must make criteria 1 and 3 fail."""
    c = algebra.fundamental_form().coeffs.copy()
    c[np.flatnonzero(c)[0]] *= -1
    first = criterion_1(KForm(4, c))
    saved = algebra.TORSION_LEE_COEFF
    algebra.TORSION_LEE_COEFF = 7.0 / 5.0
    try:
        third = criterion_3()
    finally:
        algebra.TORSION_LEE_COEFF = saved
    return Outcome(not first.passed and not third.passed,
                   {"flipped_sign_fails_1": not first.passed, "coeff_7_5_fails_3": not third.passed,
                    "parallel_residual": max(third.values.values())})


CRITERIA = {1: criterion_1, 2: criterion_2, 3: criterion_3, 4: criterion_4,
            5: criterion_5, 6: criterion_6, 7: criterion_7, 8: criterion_8}


@pytest.mark.parametrize("n", sorted(CRITERIA))
def test_criterion(n, capsys):
    outcome = CRITERIA[n]()
    with capsys.disabled():
        print("\n" + outcome.line(n))
    assert outcome.passed, outcome.line(n)


def main() -> int:
    failed = 0
    for n, fn in sorted(CRITERIA.items()):
        outcome = fn()
        print(outcome.line(n), flush=True)
        failed += not outcome.passed
    return 1 if failed else 0


if __name__ == "__main__":
    sys.exit(main())
