"""Theorem-level checks on Spin(7) structure fields.

Every check evaluates closed formulas against quantities computed
independently from the coframe jets (curvature contractions, spin
connection, direct recomputation after a conformal change) and reports
residuals.  Checks that return a :class:`CheckResult` carry a short formula
string so reports are self-describing.

Norm conventions used throughout:

* forms of degree 1 and the pairings against ``*Y`` use the form norm in
  which ordered monomials are orthonormal;
* ``|T|^2`` and ``(i_X T, i_Y T)`` are full tensor contractions, i.e.
  ``sum_{abc} T_abc^2 = 6 |T|^2_form``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

from . import spin7_algebra as algebra
from .clifford_spin import coeffs_matrix, fundamental_spinor
from .exterior_kernel import DIM, KForm, basis, hodge_star, interior, tensor_coeffs, wedge
from .geometry_fields import (
    ConformalField,
    ScalarField,
    StructureJet,
    frame_gradient,
    scalar_laplacian,
    spinor_laplacian_phi,
    spinor_nabla_phi,
    structure_jet,
    tensor_norm2,
)

DEFAULT_TOL = 1e-7
SAMPLE_QUALIFIER = "on the sample set"

CLASS_LABELS = {
    "W0": "parallel",
    "W1": "balanced",
    "W2": "locally conformally parallel",
    "W": "generic",
}


def round_sig(value: float, digits: int = 3) -> float:
    """Round to ``digits`` significant digits (report formatting)."""
    if value == 0.0 or not math.isfinite(value):
        return float(value)
    return float(f"{value:.{digits - 1}e}")


def relative(a, b, floor: float = 1e-12) -> float:
    """max|a - b| / max(max|a|, max|b|, floor)."""
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    scale = max(float(np.abs(a).max()), float(np.abs(b).max()), floor)
    return float(np.abs(a - b).max()) / scale


@dataclass
class CheckResult:
    """Maximum residual of one identity over a set of sample points.

    ``gating`` is False for diagnostic entries that are reported but do not
    decide pass/fail (for example the literal forms of identities that only
    hold with an extra term).
    """

    name: str
    formula: str
    residuals: list[float]
    tol: float
    gating: bool = True
    points: list[list[float]] = field(default_factory=list)

    @property
    def max_residual(self) -> float:
        return max(self.residuals) if self.residuals else 0.0

    @property
    def worst_point(self) -> list[float] | None:
        if not self.points or not self.residuals:
            return None
        return self.points[int(np.argmax(self.residuals))]

    @property
    def passed(self) -> bool:
        return bool(self.max_residual <= self.tol)

    def to_json(self, verbose: bool = False) -> dict:
        out = {
            "name": self.name,
            "reference": self.formula,
            "max_residual": self.max_residual if verbose else round_sig(self.max_residual),
            "tol": self.tol,
            "passed": self.passed,
            "gating": self.gating,
        }
        if self.worst_point is not None:
            out["location"] = [round_sig(v, 6) for v in self.worst_point]
        if verbose:
            out["per_point"] = [float(r) for r in self.residuals]
        return out


def collect(name: str, formula: str, tol: float, values: Iterable[tuple[Sequence[float], float]],
            gating: bool = True) -> CheckResult:
    pts, res = [], []
    for x, r in values:
        pts.append([float(v) for v in x])
        res.append(float(r))
    return CheckResult(name, formula, res, tol, gating, pts)


def _jets(field_, points) -> list[StructureJet]:
    return [structure_jet(field_, x) for x in np.atleast_2d(points)]


# ---------------------------------------------------------------------------
# Classification


@dataclass(frozen=True)
class ClassReport:
    label: str
    residuals: dict
    tol: float
    qualifier: str = SAMPLE_QUALIFIER

    @property
    def description(self) -> str:
        return CLASS_LABELS[self.label]

    def to_json(self, verbose: bool = False) -> dict:
        fmt = (lambda v: v) if verbose else round_sig
        return {
            "label": self.label,
            "description": self.description,
            "qualifier": self.qualifier,
            "tol": self.tol,
            "residuals": {k: fmt(v) for k, v in self.residuals.items()},
        }


def class_residuals(sj: StructureJet) -> dict:
    phi = algebra.fundamental_form()
    return {
        "dphi": sj.dphi.norm(),
        "theta": sj.theta.norm(),
        "dphi_minus_theta_phi": (sj.dphi - wedge(sj.theta, phi)).norm(),
        "dtheta": sj.d_theta.norm(),
    }


def classify(field_, sample_points, tol: float = DEFAULT_TOL) -> ClassReport:
    """Most restrictive class whose defining equation holds at every sample point.

    W2 also requires the Lee form to be closed at the samples.
    """
    keys = ("dphi", "theta", "dphi_minus_theta_phi", "dtheta")
    worst = dict.fromkeys(keys, 0.0)
    for sj in _jets(field_, sample_points):
        for k, v in class_residuals(sj).items():
            worst[k] = max(worst[k], v)
    if worst["dphi"] <= tol:
        label = "W0"
    elif worst["theta"] <= tol:
        label = "W1"
    elif worst["dphi_minus_theta_phi"] <= tol and worst["dtheta"] <= tol:
        label = "W2"
    else:
        label = "W"
    return ClassReport(label, worst, tol)


# ---------------------------------------------------------------------------
# Conformal change


def conformal_torsion(sj: StructureJet, df: KForm, weight: float) -> np.ndarray:
    """Coordinate components of e^{weight f}(T - 2/3 *(df ^ Phi)), without the exponential."""
    core = sj.T - hodge_star(wedge(df, algebra.fundamental_form())) * (2.0 / 3.0)
    return sj.frame_to_coords(core)


def conformal_check(field_, potential: ScalarField, sample_points,
                    tol: float = DEFAULT_TOL) -> list[CheckResult]:
    """Recompute the structure after g -> e^{2f} g and compare with the transformation laws.

    Comparisons are in coordinate components, where the rescaled Lee form is
    theta + 4 df and the rescaled torsion is e^{2f}(T - 2/3 *(df ^ Phi)).
    The same torsion law with weight e^{4f} is reported as a diagnostic.
    """
    rescaled = ConformalField(field_, potential)
    lee, tors, tors4 = [], [], []
    for x in np.atleast_2d(sample_points):
        sj, sb = structure_jet(field_, x), structure_jet(rescaled, x)
        f = potential.jet(x)
        df = frame_gradient(sj, f.grad)
        theta_bar = sb.frame_to_coords(sb.theta)
        lee.append((x, float(np.abs(theta_bar - sj.frame_to_coords(sj.theta) - 4.0 * f.grad).max())))
        core = conformal_torsion(sj, df, 2.0)
        t_bar = sb.frame_to_coords(sb.T)
        tors.append((x, float(np.abs(t_bar - math.exp(2.0 * f.value) * core).max())))
        tors4.append((x, float(np.abs(t_bar - math.exp(4.0 * f.value) * core).max())))
    return [
        collect("lee_form_conformal", "theta' = theta + 4 df", tol, lee),
        collect("torsion_conformal", "T' = exp(2f) (T - 2/3 *(df ^ Phi))", tol, tors),
        collect("torsion_conformal_weight4", "T' = exp(4f) (T - 2/3 *(df ^ Phi))", tol, tors4,
                gating=False),
    ]


# ---------------------------------------------------------------------------
# Scalar curvature


def scalar_formulas(sj: StructureJet) -> tuple[float, float]:
    """(Scal^g, Scal) from theta, T and delta theta."""
    t2, th2, dth = sj.T_norm2, sj.theta_norm2, sj.delta_theta
    base = 49.0 / 18.0 * th2 + 3.5 * dth
    return base - t2 / 12.0, base - t2 / 3.0


def scalar_identity_check(sj: StructureJet) -> dict:
    """Relative residuals of the two scalar curvature formulas and Scal^g = Scal + |T|^2/4."""
    sg, s = scalar_formulas(sj)
    return {
        "scal_g": relative(sg, sj.scal_g),
        "scal": relative(s, sj.scal_torsion),
        "scal_shift": relative(sj.scal_torsion + 0.25 * sj.T_norm2, sj.scal_g),
    }


def balanced_probe(base, x0, floor: float = 1e-12) -> dict:
    """Conformally adjust ``base`` so that theta and delta theta vanish at x0, then compare
    Scal^g with -|delta Phi|^2 / 12 (full tensor norm).

    The potential is quadratic around x0 with gradient -theta(x0)/4 and Hessian
    h * I; delta theta at x0 is affine in h, so two evaluations fix h.
    """
    from .geometry_fields import QuadraticScalarField

    x0 = np.asarray(x0, dtype=float)
    sj = structure_jet(base, x0)
    grad = -sj.frame_to_coords(sj.theta) / 4.0

    def rescaled(h: float) -> StructureJet:
        pot = QuadraticScalarField(x0, 0.0, grad, h * np.eye(DIM))
        return structure_jet(ConformalField(base, pot), x0)

    d0, d1 = rescaled(0.0).delta_theta, rescaled(1.0).delta_theta
    h = -d0 / (d1 - d0)
    probe = rescaled(h)
    dp2 = tensor_norm2(probe.delta_phi)
    return {
        "hessian_scale": h,
        "theta": probe.theta.norm(),
        "delta_theta": abs(probe.delta_theta),
        "lambda3_8_part": algebra.project(probe.delta_phi, "3_8").norm(),
        "scal_g": probe.scal_g,
        "expected": -dp2 / 12.0,
        "residual": relative(probe.scal_g, -dp2 / 12.0, floor),
        "scal_residual": relative(probe.scal_torsion, -dp2 / 3.0, floor),
    }


# ---------------------------------------------------------------------------
# Spinor identities


def sl_identity_check(sj: StructureJet) -> dict:
    """Spinor residual norms on the invariant spinor phi.

    ``sl_first`` is 3 dT.phi - 2 sigma.phi + 2 deltaT.phi + Scal phi and
    ``sl_first_literal`` the same without the delta T term; the latter only
    vanishes where deltaT.phi does.
    """
    phi = fundamental_spinor()

    def act(form: KForm) -> np.ndarray:
        return coeffs_matrix(form.coeffs, form.degree) @ phi

    dT, sigma, dlt = act(sj.dT), act(sj.sigma), act(sj.deltaT)
    literal = 3.0 * dT - 2.0 * sigma + sj.scal_torsion * phi
    second = 0.0
    for X in range(DIM):
        nxt = KForm(3, tensor_coeffs(sj.nabla_T[X], 3))
        v = 0.5 * act(interior(basis(X), sj.dT)) + act(nxt) - act(KForm(1, sj.ricci_torsion[X]))
        second = max(second, float(np.linalg.norm(v)))
    lap = spinor_laplacian_phi(sj)
    d3 = lap - (-0.25 * dlt - (2.0 * sigma - 0.5 * sj.T_norm2 * phi) / 16.0)
    d5 = (-3.5 * sj.delta_theta - 0.25 * sj.T_norm2 + sj.scal_g) * (phi @ phi) + 4.0 * (sigma @ phi)
    nab = spinor_nabla_phi(sj)
    nabla_res = max(float(np.linalg.norm(nab[d] + 0.25 * act(interior(basis(d), sj.T))))
                    for d in range(DIM))
    from .clifford_spin import gamma_table

    dirac = np.einsum("dij,dj->i", gamma_table(), nab)
    return {
        "torsion_lee": float(np.linalg.norm(act(sj.T) + 7.0 / 6.0 * act(sj.theta))),
        "nabla_g_phi": nabla_res,
        "dirac_phi": float(np.linalg.norm(dirac - 0.875 * act(sj.theta))),
        "sl_first": float(np.linalg.norm(literal + 2.0 * dlt)),
        "sl_first_literal": float(np.linalg.norm(literal)),
        "sl_second": second,
        "laplacian": float(np.linalg.norm(d3)),
        "scalar_pairing": abs(float(d5)),
    }


SPINOR_FORMULAS = {
    "torsion_lee": "T.phi = -7/6 theta.phi",
    "nabla_g_phi": "nabla^g_X phi = -1/4 (i_X T).phi",
    "dirac_phi": "D^g phi = 7/8 theta.phi",
    "sl_first": "(3 dT - 2 sigma^T + 2 delta T + Scal).phi = 0",
    "sl_first_literal": "(3 dT - 2 sigma^T + Scal).phi = 0",
    "sl_second": "1/2 (i_X dT).phi + (nabla_X T).phi - Ric(X).phi = 0",
    "laplacian": "Lap^g phi = -1/4 deltaT.phi - 1/16 (2 sigma^T - 1/2 |T|^2).phi",
    "scalar_pairing": "(-7/2 delta theta - 1/4 |T|^2 + Scal^g)|phi|^2 + 4 (sigma^T.phi, phi) = 0",
}


# ---------------------------------------------------------------------------
# Pointwise identities


def gauduchon_identity_check(sj: StructureJet) -> dict:
    """Residual of 7 delta theta = *(d delta Phi ^ Phi) - |dPhi|^2 (form norm).

    ``literal`` is the residual with the opposite sign on |dPhi|^2.
    """
    lhs = 7.0 * sj.delta_theta
    top = float(wedge(sj.d_delta_phi, algebra.fundamental_form()).coeffs[0])
    dphi2 = float(sj.dphi.coeffs @ sj.dphi.coeffs)
    return {"residual": abs(lhs - (top - dphi2)), "literal": abs(lhs - (top + dphi2))}


def lee_bound_check(sj: StructureJet) -> tuple[float, float, float]:
    """(|T|^2, 7/6 |theta|^2, |T + 1/6 *(theta ^ Phi)|^2), full tensor norms for 3-forms.

    |T|^2 - 7/6 |theta|^2 equals the gap, which vanishes exactly in the
    locally conformally parallel case.
    """
    gap = sj.T + hodge_star(wedge(sj.theta, algebra.fundamental_form())) * (1.0 / 6.0)
    return sj.T_norm2, 7.0 / 6.0 * sj.theta_norm2, tensor_norm2(gap)


# ---------------------------------------------------------------------------
# Killing spinor equivalence


@dataclass(frozen=True)
class KillingReport:
    spinor: float
    lee: float
    torsion: float
    scalar: float
    tol: float

    @property
    def residuals(self) -> dict:
        return {"spinor": self.spinor, "lee": self.lee, "torsion": self.torsion,
                "scalar": self.scalar}

    @property
    def accepted(self) -> bool:
        return all(v <= self.tol for v in self.residuals.values())

    def to_json(self, verbose: bool = False) -> dict:
        fmt = (lambda v: v) if verbose else round_sig
        return {
            "accepted": self.accepted,
            "tol": self.tol,
            "residuals": {k: fmt(v) for k, v in self.residuals.items()},
            "reference": {
                "spinor": "(d Psi - 1/2 T).phi = 0",
                "lee": "theta = -12/7 d Psi",
                "torsion": "T = -delta Phi + 2 *(d Psi ^ Phi)",
                "scalar": "Scal^g = 8 |d Psi|^2 - 1/12 |T|^2 - 6 Lap Psi",
            },
        }


def killing_residuals(sj: StructureJet, psi_jet) -> dict:
    phi = fundamental_spinor()
    dpsi = frame_gradient(sj, psi_jet.grad)
    spinor = coeffs_matrix(dpsi.coeffs, 1) @ phi - 0.5 * coeffs_matrix(sj.T.coeffs, 3) @ phi
    t6 = -sj.delta_phi + hodge_star(wedge(dpsi, algebra.fundamental_form())) * 2.0
    lap = scalar_laplacian(sj, psi_jet)
    scal = 8.0 * float(dpsi.coeffs @ dpsi.coeffs) - sj.T_norm2 / 12.0 - 6.0 * lap
    return {
        "spinor": float(np.linalg.norm(spinor)),
        "lee": (sj.theta + dpsi * (12.0 / 7.0)).norm(),
        "torsion": (sj.T - t6).norm(),
        "scalar": abs(sj.scal_g - scal),
    }


def killing_check(field_, psi: ScalarField, sample_points, tol: float = 1e-6) -> KillingReport:
    """Accept the (structure, dilation) pair iff all four residuals are within tol everywhere."""
    worst = {"spinor": 0.0, "lee": 0.0, "torsion": 0.0, "scalar": 0.0}
    for x in np.atleast_2d(sample_points):
        sj = structure_jet(field_, x)
        for k, v in killing_residuals(sj, psi.jet(x)).items():
            worst[k] = max(worst[k], v)
    return KillingReport(tol=tol, **worst)


def balanced_conformal_exponent() -> float:
    """Exponent c in g = exp(c Psi) g_0 relating a Killing structure to its balanced gauge.

    From theta = -12/7 d Psi and theta' = theta + 4 df, the balanced metric
    has f = 3/7 Psi, so g = exp(-6/7 Psi) g_balanced.
    """
    return -6.0 / 7.0


# ---------------------------------------------------------------------------
# Suites over sample points


CURVATURE_FORMULAS = {
    "scal_g": "Scal^g = 49/18 |theta|^2 - 1/12 |T|^2 + 7/2 delta theta",
    "scal": "Scal = 49/18 |theta|^2 - 1/3 |T|^2 + 7/2 delta theta",
    "scal_shift": "Scal^g = Scal + 1/4 |T|^2",
    "ricci_shift": "Ric^g = Ric + 1/2 delta T + 1/4 (i_. T, i_. T)",
    "ricci_torsion": "Ric(X) = -1/2 *(i_X dT ^ Phi) - *(nabla_X T ^ Phi)",
    "ricci_g": "Ric^g(X,Y) = 1/2 (i_X dT ^ Phi, *Y) + (nabla_X T ^ Phi, *Y) + 1/2 delta T(X,Y) + 1/4 (i_X T, i_Y T)",
    "gauduchon": "7 delta theta = *(d delta Phi ^ Phi) - |dPhi|^2",
    "gauduchon_literal": "7 delta theta = *(d delta Phi ^ Phi) + |dPhi|^2",
}


def curvature_suite(field_, sample_points, tol: float = 1e-6) -> list[CheckResult]:
    """Residual table over sample points for every curvature and spinor identity."""
    from .geometry_fields import connection_ricci

    rows: dict[str, list] = {}

    def add(name, x, value):
        rows.setdefault(name, []).append((x, value))

    for x in np.atleast_2d(sample_points):
        sj = structure_jet(field_, x)
        for k, v in scalar_identity_check(sj).items():
            add(k, x, v)
        ric = connection_ricci(field_, x, sj)
        scale = max(float(np.abs(sj.ricci_g).max()), 1e-12)
        add("ricci_shift", x, ric["c5_residual"] / scale)
        add("ricci_torsion", x, ric["ric_residual"] / max(float(np.abs(sj.ricci_torsion).max()), 1e-12))
        add("ricci_g", x, ric["ric_g_residual"] / scale)
        for k, v in sl_identity_check(sj).items():
            add(k, x, v)
        g = gauduchon_identity_check(sj)
        add("gauduchon", x, g["residual"])
        add("gauduchon_literal", x, g["literal"])
    formulas = {**CURVATURE_FORMULAS, **SPINOR_FORMULAS}
    diagnostic = {"sl_first_literal", "gauduchon_literal"}
    return [collect(name, formulas[name], tol, vals, gating=name not in diagnostic)
            for name, vals in rows.items()]


def torsion_suite(field_, sample_points, tol: float = 1e-8) -> list[CheckResult]:
    """Parallelism of Phi, agreement of the two torsion constructions and Lee form checks."""
    from .geometry_fields import check_nabla_parallel

    rows: dict[str, list] = {}
    for x in np.atleast_2d(sample_points):
        sj = structure_jet(field_, x)
        par = check_nabla_parallel(field_, x, sj)
        solved = algebra.torsion_linear_solve(sj.delta_phi)
        vals = {
            "nabla_phi": max(par["torsion_identity"], par["parallel"]),
            "metric_torsion": max(par["metric"], par["torsion"]),
            "torsion_solver": float(np.abs(solved.coeffs - sj.T.coeffs).max()),
            "lee_from_torsion": (algebra.lee_from_torsion(sj.T) - sj.theta).norm(),
        }
        for k, v in vals.items():
            rows.setdefault(k, []).append((x, v))
    formulas = {
        "nabla_phi": "nabla Phi = 0 for the connection with torsion T",
        "metric_torsion": "nabla g = 0 and torsion 3-form equals T",
        "torsion_solver": "closed-form T equals the solution of the contraction system",
        "lee_from_torsion": "theta = 6/7 *(Phi ^ T)",
    }
    return [collect(k, formulas[k], tol, v) for k, v in rows.items()]


def all_passed(results: Iterable[CheckResult]) -> bool:
    return all(r.passed for r in results if r.gating)


# ---------------------------------------------------------------------------
# Algebraic suite


def _random_form(rng: np.random.Generator, degree: int) -> KForm:
    from .exterior_kernel import dim

    return KForm(degree, rng.standard_normal(dim(degree)))


def algebraic_suite(phi: KForm | None = None, seed: int = 0, samples: int = 8,
                    tol: float = 1e-10) -> list[CheckResult]:
    """Exterior, Clifford and Spin(7) invariants on seeded random inputs.

    ``phi`` replaces the fundamental form in the checks that take it as data
    (norm, self-duality, spectrum, splitting ranks and the spinor eigenvalue).
    """
    from . import clifford_spin as cs
    from .exterior_kernel import brute_force_wedge, inner, volume

    rng = np.random.default_rng(seed)
    phi = algebra.fundamental_form() if phi is None else phi
    out: list[CheckResult] = []

    def add(name, formula, values, tol_=tol):
        out.append(CheckResult(name, formula, [float(v) for v in values], tol_))

    wedge_err, star_err, pair_err = [], [], []
    for _ in range(samples):
        # dense reference path costs (p+q)! * 8^(p+q); keep p + q <= 5
        p = int(rng.integers(0, 4))
        q = int(rng.integers(0, 6 - p))
        a, b = _random_form(rng, p), _random_form(rng, q)
        wedge_err.append(np.abs(wedge(a, b).coeffs - brute_force_wedge(a, b).coeffs).max())
        k = int(rng.integers(0, DIM + 1))
        c, d = _random_form(rng, k), _random_form(rng, k)
        star_err.append(np.abs(hodge_star(hodge_star(c)).coeffs - (-1) ** k * c.coeffs).max())
        pair_err.append(abs(wedge(c, hodge_star(d)).coeffs[0] - inner(c, d) * volume().coeffs[0]))
    add("wedge_table", "bitmask wedge equals permutation-sum wedge", wedge_err)
    add("star_involution", "** = (-1)^k on k-forms", star_err)
    add("star_pairing", "a ^ *b = <a, b> vol", pair_err)

    add("gamma_relations", "g_i g_j + g_j g_i = -2 delta_ij", [cs.check_gamma_table()])
    spinor = cs.fundamental_spinor()
    two21 = algebra.projector_basis("2_21")
    inv = [np.linalg.norm(cs.coeffs_matrix(v, 2) @ spinor) for v in two21.T]
    add("spinor_invariance", "Lambda^2_21 . phi = 0", inv)

    consts = algebra.algebraic_constants(phi)
    add("phi_norm", "<Phi, Phi> = 14", [abs(consts["norm2"] - 14.0)])
    add("self_duality", "*Phi = Phi", [consts["self_duality"]])
    add("lambda2_spectrum", "*(. ^ Phi) on 2-forms has eigenvalues 3 (x7), -1 (x21)",
        [consts["eigenvalues"]])
    rank_err = [abs(consts["ranks"][k] - r) for k, r in algebra.COMPONENT_RANKS.items()]
    add("splitting_ranks", "ranks 7, 21, 8, 48, 1, 7, 27, 35", rank_err, 0.5)
    phi_spinor = cs.coeffs_matrix(phi.coeffs, 4) @ spinor + 14.0 * spinor
    add("phi_on_spinor", "Phi.phi = -14 phi", [np.linalg.norm(phi_spinor)])

    A = algebra.torsion_system_matrix()
    add("torsion_system_rank", "contraction system has rank 56",
        [abs(np.linalg.matrix_rank(A) - 56)], 0.5)
    solve_err, n6_err, b2_err = [], [], []
    for _ in range(samples):
        dp = _random_form(rng, 3)
        T = algebra.torsion_closed_form(dp)
        solve_err.append(np.abs(algebra.torsion_linear_solve(dp).coeffs - T.coeffs).max())
        n6 = algebra.torsion_action_on_phi(T) - 2.0 * algebra.nabla_phi_tensor(dp)
        n6_err.append(np.abs(n6).max())
        th = algebra.lee_form(dp)
        b2 = cs.coeffs_matrix(T.coeffs, 3) @ spinor + 7.0 / 6.0 * cs.coeffs_matrix(th.coeffs, 1) @ spinor
        b2_err.append(np.linalg.norm(b2))
    add("torsion_solve", "closed-form T solves the contraction system", solve_err, 1e-9)
    add("torsion_action", "torsion action on Phi equals 2 nabla^g Phi", n6_err, 1e-9)
    add("torsion_lee_spinor", "T.phi = -7/6 theta.phi", b2_err)
    return out
