"""Pointwise differential geometry of Spin(7) structures given by coframe jets.

A structure field is a map x -> E(x), an invertible 8x8 matrix whose rows are
the coframe covectors e^a = E[a, i] dx^i.  The metric is E^T E and the
fundamental form is the standard one in this coframe.  Everything here is
computed from the 2-jet (E, dE, d2E) at a point:

* the frame route: structure functions C[a, b, c] = g([e_a, e_b], e_c) and
  their frame derivatives; every first-order quantity (Levi-Civita symbols,
  dPhi, delta Phi, theta, T) is linear in C, so its frame derivative is the
  same linear map applied to the derivative of C.
* the coordinate route: Christoffel symbols of g = E^T E and coordinate
  derivatives of Phi, used as an independent check of the frame route.

Array conventions: ``dE[a, i, k] = d_k E[a, i]``, ``d2E[a, i, k, l] = d_k d_l E[a, i]``.
Frame tensors are indexed by frame slots; ``Gamma[a, b, c] = g(nabla_{e_a} e_b, e_c)``;
``R[a, b, c, d] = g(R(e_a, e_b) e_c, e_d)`` with
R(X, Y) = nabla_X nabla_Y - nabla_Y nabla_X - nabla_[X, Y].
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from functools import cached_property
from typing import Protocol, Sequence

import numpy as np

from . import spin7_algebra as algebra
from .clifford_spin import coeffs_matrix, fundamental_spinor, gamma_table, spin_lift
from .exterior_kernel import DIM, KForm, hodge_star, tensor_coeffs, to_tensor, wedge


def _einsum(*args):
    return np.einsum(*args, optimize=True)

# ---------------------------------------------------------------------------
# Jets and fields


@dataclass(frozen=True)
class CoframeJet:
    E: np.ndarray
    dE: np.ndarray
    d2E: np.ndarray

    def __post_init__(self):
        for name, shape in (("E", (8, 8)), ("dE", (8, 8, 8)), ("d2E", (8, 8, 8, 8))):
            arr = np.asarray(getattr(self, name), dtype=float)
            if arr.shape != shape:
                raise ValueError(f"{name} must have shape {shape}, got {arr.shape}")
            object.__setattr__(self, name, arr)

    @property
    def condition(self) -> float:
        return float(np.linalg.cond(self.E))

    def hessian_asymmetry(self) -> float:
        return float(np.abs(self.d2E - self.d2E.transpose(0, 1, 3, 2)).max())


@dataclass(frozen=True)
class ScalarJet:
    value: float
    grad: np.ndarray
    hess: np.ndarray


class CoframeJetField(Protocol):
    def jet(self, x: np.ndarray) -> CoframeJet: ...


class ScalarField(Protocol):
    def jet(self, x: np.ndarray) -> ScalarJet: ...


@dataclass(frozen=True)
class TrigTerm:
    """amplitude * sin(sum_j frequency[j] * x[axes[j]] + phase)."""

    amplitude: float
    axes: tuple[int, ...]
    frequency: tuple[float, ...]
    phase: float = 0.0
    entry: tuple[int, int] | None = None

    def wavevector(self) -> np.ndarray:
        k = np.zeros(DIM)
        for ax, fr in zip(self.axes, self.frequency, strict=True):
            k[ax] += fr
        return k

    def jet(self, x: np.ndarray) -> tuple[float, np.ndarray, np.ndarray]:
        k = self.wavevector()
        arg = k @ x + self.phase
        s, c = math.sin(arg), math.cos(arg)
        a = self.amplitude
        return a * s, a * c * k, -a * s * np.outer(k, k)

    def to_json(self) -> dict:
        out = {"axes": list(self.axes), "amplitude": self.amplitude,
               "frequency": list(self.frequency)}
        if self.phase:
            out["phase"] = self.phase
        if self.entry is not None:
            out["entry"] = list(self.entry)
        return out

    @classmethod
    def from_json(cls, data: dict) -> "TrigTerm":
        axes = tuple(int(a) for a in data.get("axes", []))
        freq = tuple(float(f) for f in data.get("frequency", []))
        if len(axes) != len(freq):
            raise ValueError("trig term needs as many frequencies as axes")
        if any(not 0 <= a < DIM for a in axes):
            raise ValueError(f"axis out of range in {axes}")
        entry = data.get("entry")
        if entry is not None:
            entry = (int(entry[0]), int(entry[1]))
            if not all(0 <= e < DIM for e in entry):
                raise ValueError(f"matrix entry out of range: {entry}")
        return cls(float(data["amplitude"]), axes, freq, float(data.get("phase", 0.0)), entry)


@dataclass(frozen=True)
class TrigScalarField:
    """f(x) = epsilon * sum of trig terms."""

    terms: tuple[TrigTerm, ...]
    epsilon: float = 1.0

    def jet(self, x) -> ScalarJet:
        x = np.asarray(x, dtype=float)
        v, g, h = 0.0, np.zeros(DIM), np.zeros((DIM, DIM))
        for t in self.terms:
            tv, tg, th = t.jet(x)
            v, g, h = v + tv, g + tg, h + th
        e = self.epsilon
        return ScalarJet(e * v, e * g, e * h)

    def scaled(self, factor: float) -> "TrigScalarField":
        return TrigScalarField(self.terms, self.epsilon * factor)


@dataclass(frozen=True)
class QuadraticScalarField:
    """value + grad.(x - center) + 1/2 (x - center).hess.(x - center)."""

    center: np.ndarray
    value: float
    grad: np.ndarray
    hess: np.ndarray

    def jet(self, x) -> ScalarJet:
        dx = np.asarray(x, dtype=float) - self.center
        return ScalarJet(
            float(self.value + self.grad @ dx + 0.5 * dx @ self.hess @ dx),
            self.grad + self.hess @ dx,
            np.array(self.hess, dtype=float),
        )


@dataclass(frozen=True)
class SumScalarField:
    parts: tuple

    def jet(self, x) -> ScalarJet:
        jets = [p.jet(x) for p in self.parts]
        return ScalarJet(sum(j.value for j in jets), sum(j.grad for j in jets),
                         sum(j.hess for j in jets))


@dataclass(frozen=True)
class ScaledScalarField:
    base: object
    factor: float

    def jet(self, x) -> ScalarJet:
        j = self.base.jet(x)
        return ScalarJet(self.factor * j.value, self.factor * j.grad, self.factor * j.hess)


ZERO_SCALAR = TrigScalarField((), 0.0)


class FlatField:
    kind = "flat"

    def jet(self, x) -> CoframeJet:
        return CoframeJet(np.eye(DIM), np.zeros((DIM,) * 3), np.zeros((DIM,) * 4))


@dataclass(frozen=True)
class ConformalField:
    """Coframe e^f E_base: metric e^{2f} g_base and fundamental form e^{4f} Phi_base."""

    base: object
    potential: object
    kind: str = "conformal"

    def jet(self, x) -> CoframeJet:
        b = self.base.jet(x)
        f = self.potential.jet(x)
        s = math.exp(f.value)
        g = f.grad
        E = s * b.E
        dE = s * (b.E[:, :, None] * g + b.dE)
        d2E = s * (
            b.E[:, :, None, None] * (f.hess + np.outer(g, g))
            + b.dE[:, :, :, None] * g[None, None, None, :]
            + b.dE[:, :, None, :] * g[None, None, :, None]
            + b.d2E
        )
        return CoframeJet(E, dE, d2E)


@dataclass(frozen=True)
class PerturbedField:
    """E(x) = I + epsilon * A(x) with A a sum of trig terms on matrix entries."""

    terms: tuple[TrigTerm, ...]
    epsilon: float
    kind: str = "perturbed"

    def matrix_jet(self, x) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        x = np.asarray(x, dtype=float)
        A = np.zeros((DIM, DIM))
        dA = np.zeros((DIM, DIM, DIM))
        d2A = np.zeros((DIM, DIM, DIM, DIM))
        for t in self.terms:
            r, c = t.entry
            v, g, h = t.jet(x)
            A[r, c] += v
            dA[r, c] += g
            d2A[r, c] += h
        return A, dA, d2A

    def jet(self, x) -> CoframeJet:
        A, dA, d2A = self.matrix_jet(x)
        e = self.epsilon
        E = np.eye(DIM) + e * A
        if abs(np.linalg.det(E)) < 1e-12:
            raise SingularCoframe(f"coframe is singular at {np.asarray(x).tolist()}")
        return CoframeJet(E, e * dA, e * d2A)


class SingularCoframe(ValueError):
    pass


@dataclass(frozen=True)
class FiniteDifferenceField:
    """Wraps a black-box coframe map x -> E(x) with central differences.

    First derivatives carry O(h^2) truncation and O(u/h) rounding error,
    second derivatives O(h^2) and O(u/h^2); with h = 1e-5 on unit-scale
    fields expect roughly 1e-10 and 1e-5 absolute error respectively.
    """

    fn: object
    step: float = 1e-5

    def jet(self, x) -> CoframeJet:
        x = np.asarray(x, dtype=float)
        h = self.step
        E = np.asarray(self.fn(x), dtype=float)
        dE = np.zeros((DIM, DIM, DIM))
        d2E = np.zeros((DIM, DIM, DIM, DIM))
        eye = np.eye(DIM)
        plus = [np.asarray(self.fn(x + h * eye[k])) for k in range(DIM)]
        minus = [np.asarray(self.fn(x - h * eye[k])) for k in range(DIM)]
        for k in range(DIM):
            dE[:, :, k] = (plus[k] - minus[k]) / (2 * h)
            d2E[:, :, k, k] = (plus[k] - 2 * E + minus[k]) / h**2
        for k in range(DIM):
            for l in range(k + 1, DIM):
                pp = self.fn(x + h * (eye[k] + eye[l]))
                pm = self.fn(x + h * (eye[k] - eye[l]))
                mp = self.fn(x - h * (eye[k] - eye[l]))
                mm = self.fn(x - h * (eye[k] + eye[l]))
                val = (np.asarray(pp) - pm - mp + mm) / (4 * h * h)
                d2E[:, :, k, l] = val
                d2E[:, :, l, k] = val
        return CoframeJet(E, dE, d2E)


# ---------------------------------------------------------------------------
# Fixtures


def fixture_flat() -> FlatField:
    return FlatField()


def random_trig_terms(rng: np.random.Generator, count: int, max_axes: int = 3,
                      entry: tuple[int, int] | None = None) -> list[TrigTerm]:
    out = []
    for _ in range(count):
        n_axes = int(rng.integers(1, max_axes + 1))
        axes = tuple(int(a) for a in rng.choice(DIM, size=n_axes, replace=False))
        freq = tuple(float(f) for f in rng.uniform(0.5, 2.0, size=n_axes))
        out.append(TrigTerm(float(rng.uniform(-1.0, 1.0)), axes, freq,
                            float(rng.uniform(0.0, 2 * math.pi)), entry))
    return out


def default_potential(seed: int = 0, epsilon: float = 1e-2, n_terms: int = 3) -> TrigScalarField:
    """A 3-frequency trigonometric conformal potential."""
    rng = np.random.default_rng(seed)
    return TrigScalarField(tuple(random_trig_terms(rng, n_terms)), epsilon)


def fixture_conformal(potential: ScalarField | None = None, base=None) -> ConformalField:
    """Locally conformally parallel structure e^f * (flat coframe) by default."""
    return ConformalField(FlatField() if base is None else base,
                          default_potential() if potential is None else potential)


def default_perturbation_terms(seed: int = 1, terms_per_entry: int = 2) -> tuple[TrigTerm, ...]:
    rng = np.random.default_rng(seed)
    out = []
    for r in range(DIM):
        for c in range(DIM):
            out.extend(random_trig_terms(rng, terms_per_entry, entry=(r, c)))
    return tuple(out)


def fixture_perturbed(terms: Sequence[TrigTerm] | None = None, epsilon: float = 1e-2,
                      seed: int = 1) -> PerturbedField:
    if terms is None:
        terms = default_perturbation_terms(seed)
    terms = tuple(terms)
    if any(t.entry is None for t in terms):
        raise ValueError("perturbation terms need a matrix entry")
    return PerturbedField(terms, float(epsilon))


def sample_points(n: int, seed: int = 0, scale: float = 1.0, include_origin: bool = True) -> np.ndarray:
    """Seeded sample points (PCG64 generator); the origin comes first when requested."""
    rng = np.random.default_rng(seed)
    pts = rng.uniform(-scale, scale, size=(n, DIM))
    if include_origin:
        pts[0] = 0.0
    return pts


# ---------------------------------------------------------------------------
# Frame route


def structure_functions(jet: CoframeJet) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """(E^-1, C, DC) with C[a,b,c] = g([e_a,e_b], e_c) and DC[d] = e_d(C)."""
    E, dE, d2E = jet.E, jet.dE, jet.d2E
    Einv = np.linalg.inv(E)
    # F[c, i, j] = d_i E[c, j] - d_j E[c, i]  (coordinate components of de^c)
    F = np.einsum("cji->cij", dE) - dE
    dF = np.einsum("cjik->cijk", d2E) - d2E
    dEinv = -np.einsum("ib,bjk,ja->iak", Einv, dE, Einv)
    C = -np.einsum("cij,ia,jb->abc", F, Einv, Einv)
    dC = -(
        np.einsum("cijk,ia,jb->abck", dF, Einv, Einv)
        + np.einsum("cij,iak,jb->abck", F, dEinv, Einv)
        + np.einsum("cij,ia,jbk->abck", F, Einv, dEinv)
    )
    DC = np.einsum("abck,kd->dabc", dC, Einv)
    return Einv, C, DC


def levi_civita_symbols(C: np.ndarray) -> np.ndarray:
    """Gamma[a, b, c] = g(nabla_{e_a} e_b, e_c) for an orthonormal frame."""
    return 0.5 * (C + np.einsum("cab->abc", C) - np.einsum("bca->abc", C))


def covariant_derivative(S: np.ndarray, dS: np.ndarray, Gamma: np.ndarray) -> np.ndarray:
    """nabla S with leading derivative slot: out[d, ...] = e_d(S) - sum_slots Gamma[d, slot, f] S[.. f ..]."""
    out = np.array(dS, dtype=float)
    for slot in range(S.ndim):
        moved = np.tensordot(Gamma, S, axes=([2], [slot]))  # (d, b, rest...)
        out -= np.moveaxis(moved, 1, slot + 1)
    return out


def exterior_from_nabla(nS: np.ndarray) -> np.ndarray:
    """d S for a k-form from its torsion-free covariant derivative (leading slot)."""
    k = nS.ndim - 1
    out = np.zeros((DIM,) * (k + 1))
    for i in range(k + 1):
        # move derivative slot to position i
        perm = list(range(1, i + 1)) + [0] + list(range(i + 1, k + 1))
        out += (-1) ** i * np.transpose(nS, perm)
    return out


def codifferential_from_nabla(nS: np.ndarray) -> np.ndarray:
    """delta S = -sum_a (nabla_{e_a} S)(e_a, ...)."""
    return -np.einsum("aa...->...", nS)


def _phi_derivation(Gamma: np.ndarray) -> np.ndarray:
    """nabla^g Phi in the frame where Phi has constant standard components."""
    ph = algebra.phi_tensor()
    return covariant_derivative(ph, np.zeros((DIM,) + ph.shape), Gamma)


def first_order(C: np.ndarray) -> dict:
    """All quantities linear in the structure functions C."""
    Gamma = levi_civita_symbols(C)
    nabla_phi = _phi_derivation(Gamma)
    dphi = exterior_from_nabla(nabla_phi)
    delta_phi = KForm(3, tensor_coeffs(codifferential_from_nabla(nabla_phi), 3))
    theta = algebra.lee_form(delta_phi)
    torsion = algebra.torsion_closed_form(delta_phi)
    return {
        "Gamma": Gamma,
        "nabla_phi": nabla_phi,
        "dphi": KForm(5, tensor_coeffs(dphi, 5)),
        "delta_phi": delta_phi,
        "theta": theta,
        "T": torsion,
    }


def curvature(Gamma: np.ndarray, dGamma: np.ndarray, C: np.ndarray) -> np.ndarray:
    """R[a,b,c,e] = g(R(e_a,e_b) e_c, e_e) of the connection with symbols Gamma.

    ``dGamma[d] = e_d(Gamma)``.
    """
    return (
        np.einsum("abce->abce", dGamma)
        - np.einsum("bace->abce", dGamma)
        + np.einsum("bcd,ade->abce", Gamma, Gamma)
        - np.einsum("acd,bde->abce", Gamma, Gamma)
        - np.einsum("abd,dce->abce", C, Gamma)
    )


def ricci(R: np.ndarray) -> np.ndarray:
    """Ric(X, Y) = sum_i R(e_i, X, Y, e_i)."""
    return np.einsum("ixyi->xy", R)


# ---------------------------------------------------------------------------
# Coordinate route (independent oracle)


def coordinate_christoffel(jet: CoframeJet):
    """(g, g^-1, Christoffel^k_ij, d_m Christoffel^k_ij) from the coframe jet."""
    E, dE, d2E = jet.E, jet.dE, jet.d2E
    g = E.T @ E
    dg = _einsum("aik,aj->ijk", dE, E) + _einsum("ai,ajk->ijk", E, dE)
    d2g = (_einsum("aikl,aj->ijkl", d2E, E) + _einsum("aik,ajl->ijkl", dE, dE)
           + _einsum("ail,ajk->ijkl", dE, dE) + _einsum("ai,ajkl->ijkl", E, d2E))
    ginv = np.linalg.inv(g)
    # Gamma_low[i, j, l] = 1/2 (d_i g_jl + d_j g_il - d_l g_ij)
    low = 0.5 * (_einsum("jli->ijl", dg) + _einsum("ilj->ijl", dg) - _einsum("ijl->ijl", dg))
    dlow = 0.5 * (_einsum("jlim->ijlm", d2g) + _einsum("iljm->ijlm", d2g) - d2g)
    chris = _einsum("kl,ijl->kij", ginv, low)
    dginv = -_einsum("ka,abm,bl->klm", ginv, dg, ginv)
    dchris = _einsum("klm,ijl->kijm", dginv, low) + _einsum("kl,ijlm->kijm", ginv, dlow)
    return g, ginv, chris, dchris


def coordinate_riemann_frame(jet: CoframeJet) -> np.ndarray:
    """Riemann tensor from the coordinate Christoffel symbols, in frame components."""
    g, _, chris, dchris = coordinate_christoffel(jet)
    # R^l_{ijk} = d_i G^l_{jk} - d_j G^l_{ik} + G^l_{im} G^m_{jk} - G^l_{jm} G^m_{ik}
    Rup = (_einsum("ljki->lijk", dchris) - _einsum("likj->lijk", dchris)
           + _einsum("lim,mjk->lijk", chris, chris) - _einsum("ljm,mik->lijk", chris, chris))
    Rlow = _einsum("lijk,lm->ijkm", Rup, g)
    Einv = np.linalg.inv(jet.E)
    return _einsum("ijkm,ia,jb,kc,md->abcd", Rlow, Einv, Einv, Einv, Einv)


def coordinate_phi(jet: CoframeJet) -> tuple[np.ndarray, np.ndarray]:
    """Coordinate components of Phi and their first partial derivatives."""
    ph = algebra.phi_tensor()
    E, dE = jet.E, jet.dE
    Phi = _einsum("abcd,ai,bj,ck,dl->ijkl", ph, E, E, E, E)
    dPhi = (_einsum("abcd,aim,bj,ck,dl->ijklm", ph, dE, E, E, E)
            + _einsum("abcd,ai,bjm,ck,dl->ijklm", ph, E, dE, E, E)
            + _einsum("abcd,ai,bj,ckm,dl->ijklm", ph, E, E, dE, E)
            + _einsum("abcd,ai,bj,ck,dlm->ijklm", ph, E, E, E, dE))
    return Phi, dPhi


def nabla_phi_coordinate(jet: CoframeJet) -> np.ndarray:
    """(nabla^g_X Phi)(Y, Z, V, W) from partial derivatives and Christoffel symbols, frame components."""
    _, _, chris, _ = coordinate_christoffel(jet)
    Phi, dPhi = coordinate_phi(jet)
    # out[m, i, j, k, l] = d_m Phi_ijkl - G^p_{mi} Phi_pjkl - ...
    out = np.moveaxis(dPhi, 4, 0).copy()
    out -= _einsum("pmi,pjkl->mijkl", chris, Phi)
    out -= _einsum("pmj,ipkl->mijkl", chris, Phi)
    out -= _einsum("pmk,ijpl->mijkl", chris, Phi)
    out -= _einsum("pml,ijkp->mijkl", chris, Phi)
    Einv = np.linalg.inv(jet.E)
    return _einsum("mijkl,ma,ib,jc,kd,le->abcde", out, Einv, Einv, Einv, Einv, Einv)


# ---------------------------------------------------------------------------
# Structure jet


def tensor_norm2(form: KForm) -> float:
    """Full tensor norm sum_{i1..ik} a_{i1..ik}^2 = k! * (form norm)^2."""
    return math.factorial(form.degree) * float(form.coeffs @ form.coeffs)


def sigma_t(torsion: KForm) -> KForm:
    """sigma^T = 1/2 sum_i (i_{e_i} T) ^ (i_{e_i} T)."""
    from .exterior_kernel import interior, basis

    out = KForm.zero(4)
    for i in range(DIM):
        it = interior(basis(i), torsion)
        out = out + wedge(it, it)
    return out * 0.5


def sigma_t_brute(torsion: KForm) -> KForm:
    """sigma^T from dense components: the (2,2)-shuffle sum of T_{i..} T_{i..}, halved."""
    from .exterior_kernel import from_tensor

    t = to_tensor(torsion)
    shuffles = (("ab", "cd", 1), ("ac", "bd", -1), ("ad", "bc", 1),
                ("bc", "ad", 1), ("bd", "ac", -1), ("cd", "ab", 1))
    out = sum(s * np.einsum(f"i{p},i{q}->abcd", t, t) for p, q, s in shuffles)
    return from_tensor(0.5 * out)


@dataclass
class StructureJet:
    """Pointwise quantities of a Spin(7) structure field; form data in frame components."""

    x: np.ndarray
    jet: CoframeJet
    Einv: np.ndarray
    C: np.ndarray
    DC: np.ndarray
    Gamma: np.ndarray
    dGamma: np.ndarray
    nabla_phi: np.ndarray
    dphi: KForm
    delta_phi: KForm
    theta: KForm
    T: KForm
    d_delta_phi_frame: np.ndarray  # e_d(delta Phi) as (8, 56) coefficients
    d_theta_frame: np.ndarray
    d_T_frame: np.ndarray
    riemann: np.ndarray
    torsion_riemann: np.ndarray

    @property
    def metric(self) -> np.ndarray:
        return self.jet.E.T @ self.jet.E

    @property
    def metric_inverse(self) -> np.ndarray:
        return np.linalg.inv(self.metric)

    @cached_property
    def T_tensor(self) -> np.ndarray:
        return to_tensor(self.T)

    @cached_property
    def torsion_gamma(self) -> np.ndarray:
        """Symbols of the Spin(7) connection: Gamma + 1/2 T."""
        return self.Gamma + 0.5 * self.T_tensor

    @cached_property
    def nabla_g_T(self) -> np.ndarray:
        from .exterior_kernel import coeffs_to_tensor
        return covariant_derivative(self.T_tensor, coeffs_to_tensor(self.d_T_frame, 3), self.Gamma)

    @cached_property
    def nabla_T(self) -> np.ndarray:
        """(nabla_{e_d} T) for the Spin(7) connection, leading derivative slot."""
        from .exterior_kernel import coeffs_to_tensor
        return covariant_derivative(self.T_tensor, coeffs_to_tensor(self.d_T_frame, 3),
                                    self.torsion_gamma)

    @cached_property
    def nabla_g_theta(self) -> np.ndarray:
        return covariant_derivative(self.theta.coeffs, self.d_theta_frame, self.Gamma)

    @cached_property
    def dT(self) -> KForm:
        return KForm(4, tensor_coeffs(exterior_from_nabla(self.nabla_g_T), 4))

    @cached_property
    def deltaT(self) -> KForm:
        return KForm(2, tensor_coeffs(codifferential_from_nabla(self.nabla_g_T), 2))

    @cached_property
    def d_theta(self) -> KForm:
        return KForm(2, tensor_coeffs(exterior_from_nabla(self.nabla_g_theta), 2))

    @cached_property
    def delta_theta(self) -> float:
        return float(codifferential_from_nabla(self.nabla_g_theta))

    @cached_property
    def d_delta_phi(self) -> KForm:
        from .exterior_kernel import coeffs_to_tensor
        n = covariant_derivative(to_tensor(self.delta_phi),
                                 coeffs_to_tensor(self.d_delta_phi_frame, 3), self.Gamma)
        return KForm(4, tensor_coeffs(exterior_from_nabla(n), 4))

    @cached_property
    def sigma(self) -> KForm:
        return sigma_t(self.T)

    @property
    def ricci_g(self) -> np.ndarray:
        return ricci(self.riemann)

    @property
    def scal_g(self) -> float:
        return float(np.trace(self.ricci_g))

    @property
    def ricci_torsion(self) -> np.ndarray:
        """Ricci tensor of the Spin(7) connection from its own curvature."""
        return ricci(self.torsion_riemann)

    @property
    def scal_torsion(self) -> float:
        return float(np.trace(self.ricci_torsion))

    @property
    def T_norm2(self) -> float:
        return tensor_norm2(self.T)

    @property
    def theta_norm2(self) -> float:
        return float(self.theta.coeffs @ self.theta.coeffs)

    def frame_to_coords(self, form: KForm) -> np.ndarray:
        """Coordinate components of a frame-component form (dense tensor)."""
        t = to_tensor(form)
        E = self.jet.E
        for _ in range(form.degree):
            t = np.tensordot(t, E, axes=([0], [0]))
        return t

    def spin_connection(self) -> np.ndarray:
        """rho[d]: spinor matrices of the Levi-Civita connection along e_d."""
        return np.array([spin_lift(self.Gamma[d].T) for d in range(DIM)])

    def spin_connection_derivative(self) -> np.ndarray:
        """e_a(rho[a]) summed later; returns e_d(rho[c]) as [d, c]."""
        return np.array([[spin_lift(self.dGamma[d, c].T) for c in range(DIM)] for d in range(DIM)])


def structure_jet(field_: CoframeJetField, x) -> StructureJet:
    x = np.asarray(x, dtype=float)
    jet = field_.jet(x)
    if not np.all(np.isfinite(jet.E)) or abs(np.linalg.det(jet.E)) < 1e-12:
        raise SingularCoframe(f"coframe is singular at {x.tolist()}")
    Einv, C, DC = structure_functions(jet)
    base = first_order(C)
    derivs = [first_order(DC[d]) for d in range(DIM)]
    dGamma = np.array([d["Gamma"] for d in derivs])
    Gamma = base["Gamma"]
    R = curvature(Gamma, dGamma, C)
    T_t = to_tensor(base["T"])
    dT_t = np.array([to_tensor(d["T"]) for d in derivs])
    G_t = Gamma + 0.5 * T_t
    dG_t = dGamma + 0.5 * dT_t
    R_t = curvature(G_t, dG_t, C)
    return StructureJet(
        x=x, jet=jet, Einv=Einv, C=C, DC=DC, Gamma=Gamma, dGamma=dGamma,
        nabla_phi=base["nabla_phi"], dphi=base["dphi"], delta_phi=base["delta_phi"],
        theta=base["theta"], T=base["T"],
        d_delta_phi_frame=np.array([d["delta_phi"].coeffs for d in derivs]),
        d_theta_frame=np.array([d["theta"].coeffs for d in derivs]),
        d_T_frame=np.array([d["T"].coeffs for d in derivs]),
        riemann=R, torsion_riemann=R_t,
    )


# ---------------------------------------------------------------------------
# Checks on a single point


def nabla_phi_direct(field_: CoframeJetField, x, X=None) -> np.ndarray:
    """(nabla^g_X Phi) in frame components from partial derivatives and Christoffels.

    With ``X`` None the full 5-index array (derivative slot first) is returned;
    otherwise X is a frame vector and the result is a 4-index array.
    """
    full = nabla_phi_coordinate(field_.jet(np.asarray(x, dtype=float)))
    if X is None:
        return full
    return np.tensordot(np.asarray(X, dtype=float), full, axes=1)


def check_nabla_parallel(field_: CoframeJetField, x, sj: StructureJet | None = None) -> dict:
    """Residuals of nabla Phi = 0 for the connection with torsion T.

    ``torsion_identity`` compares 2 nabla^g Phi (coordinate route) with the
    torsion action on Phi; ``parallel`` differentiates Phi with the symbols
    Gamma + T/2 directly.  ``metric`` and ``torsion`` check that those symbols
    define a metric connection whose torsion 3-form is T.
    """
    sj = structure_jet(field_, x) if sj is None else sj
    direct = nabla_phi_coordinate(sj.jet)
    rhs = algebra.torsion_action_on_phi(sj.T)
    ph = algebra.phi_tensor()
    G = sj.torsion_gamma
    parallel = covariant_derivative(ph, np.zeros((DIM,) + ph.shape), G)
    tors = G - np.einsum("bac->abc", G) - sj.C
    return {
        "torsion_identity": float(np.abs(2.0 * direct - rhs).max()),
        "parallel": float(np.abs(parallel).max()),
        "metric": float(np.abs(G + np.einsum("acb->abc", G)).max()),
        "torsion": float(np.abs(tors - sj.T_tensor).max()),
    }


def riemann_symmetry_residual(R: np.ndarray) -> dict:
    """Pair antisymmetries, pair symmetry and the first Bianchi identity."""
    bianchi = R + np.einsum("bcad->abcd", R) + np.einsum("cabd->abcd", R)
    return {
        "antisym_12": float(np.abs(R + np.einsum("bacd->abcd", R)).max()),
        "antisym_34": float(np.abs(R + np.einsum("abdc->abcd", R)).max()),
        "pair_sym": float(np.abs(R - np.einsum("cdab->abcd", R)).max()),
        "bianchi": float(np.abs(bianchi).max()),
    }


def ricci_formulas(sj: StructureJet) -> tuple[np.ndarray, np.ndarray]:
    """(Ric, Ric^g) from dT, nabla T and delta T without any curvature contraction.

    Ric(X) = -1/2 *(i_X dT ^ Phi) - *(nabla_X T ^ Phi) and
    Ric^g(X, Y) = 1/2 (i_X dT ^ Phi, *Y) + (nabla_X T ^ Phi, *Y)
                  + 1/2 delta T(X, Y) + 1/4 (i_X T, i_Y T),
    where the last pairing is the full tensor inner product sum_{bc}.
    """
    from .exterior_kernel import basis, inner, interior

    phi = algebra.fundamental_form()
    stars = [hodge_star(basis(y)) for y in range(DIM)]
    ric = np.zeros((DIM, DIM))
    ric_g = np.zeros((DIM, DIM))
    dT = to_tensor(sj.deltaT)
    Tt = sj.T_tensor
    for X in range(DIM):
        a = wedge(interior(basis(X), sj.dT), phi)
        b = wedge(KForm(3, tensor_coeffs(sj.nabla_T[X], 3)), phi)
        ric[X] = (-0.5 * hodge_star(a) - hodge_star(b)).coeffs
        for Y in range(DIM):
            ric_g[X, Y] = 0.5 * inner(a, stars[Y]) + inner(b, stars[Y])
    ric_g += 0.5 * dT + 0.25 * np.einsum("xbc,ybc->xy", Tt, Tt)
    return ric, ric_g


def connection_ricci(field_: CoframeJetField, x, sj: StructureJet | None = None) -> dict:
    """Ricci tensors from the closed formulas, with curvature-contraction cross-checks."""
    sj = structure_jet(field_, x) if sj is None else sj
    ric, ric_g = ricci_formulas(sj)
    Tt = sj.T_tensor
    c5 = sj.ricci_torsion + 0.5 * to_tensor(sj.deltaT) + 0.25 * np.einsum("xbc,ybc->xy", Tt, Tt)
    return {
        "ric": ric,
        "ric_g": ric_g,
        "ric_residual": float(np.abs(ric - sj.ricci_torsion).max()),
        "ric_g_residual": float(np.abs(ric_g - sj.ricci_g).max()),
        "c5_residual": float(np.abs(c5 - sj.ricci_g).max()),
        "ric_asymmetry": float(np.abs(ric - ric.T).max()),
        "delta_T": float(np.abs(sj.deltaT.coeffs).max()),
    }


def spinor_nabla_phi(sj: StructureJet) -> np.ndarray:
    """nabla^g_{e_d} phi for the frame-constant invariant spinor, shape (8, 16)."""
    phi = fundamental_spinor()
    return np.array([r @ phi for r in sj.spin_connection()])


def dirac_identities(field_: CoframeJetField, x, sj: StructureJet | None = None) -> dict:
    """Residuals of nabla^g_X phi = -1/4 (i_X T).phi and D^g phi = 7/8 theta.phi."""
    from .exterior_kernel import basis, interior

    sj = structure_jet(field_, x) if sj is None else sj
    phi = fundamental_spinor()
    nab = spinor_nabla_phi(sj)
    g = gamma_table()
    first = max(
        float(np.linalg.norm(nab[d] + 0.25 * coeffs_matrix(interior(basis(d), sj.T).coeffs, 2) @ phi))
        for d in range(DIM)
    )
    dirac = np.einsum("dij,dj->i", g, nab)
    second = float(np.linalg.norm(dirac - 0.875 * coeffs_matrix(sj.theta.coeffs, 1) @ phi))
    return {"nabla": first, "dirac": second}


def spinor_laplacian_phi(sj: StructureJet) -> np.ndarray:
    """Rough Laplacian -sum_a (nabla_a nabla_a - nabla_{nabla_a e_a}) phi of the spin connection."""
    phi = fundamental_spinor()
    rho = sj.spin_connection()
    drho = sj.spin_connection_derivative()
    out = np.zeros(phi.shape)
    for a in range(DIM):
        out -= drho[a, a] @ phi + rho[a] @ (rho[a] @ phi)
        out += np.tensordot(sj.Gamma[a, a], rho, axes=1) @ phi
    return out


def frame_gradient(sj: StructureJet, grad: np.ndarray) -> KForm:
    """Frame components of a coordinate covector."""
    return KForm(1, np.linalg.solve(sj.jet.E.T, np.asarray(grad, dtype=float)))


def scalar_laplacian(sj: StructureJet, value_jet) -> float:
    """delta d u = -g^{ij}(d_i d_j u - Christoffel^k_ij d_k u) from a scalar 2-jet."""
    _, ginv, chris, _ = coordinate_christoffel(sj.jet)
    hess = value_jet.hess - np.einsum("kij,k->ij", chris, value_jet.grad)
    return float(-np.einsum("ij,ij", ginv, hess))


# ---------------------------------------------------------------------------
# JSON fixtures

FIXTURE_KINDS = ("flat", "conformal", "perturbed")


@dataclass(frozen=True)
class ConstantScalarField:
    value: float = 0.0

    def jet(self, x) -> ScalarJet:
        return ScalarJet(float(self.value), np.zeros(DIM), np.zeros((DIM, DIM)))


def _terms_from_json(items) -> tuple[TrigTerm, ...]:
    if not isinstance(items, list):
        raise ValueError("'terms' must be a list")
    try:
        return tuple(TrigTerm.from_json(t) for t in items)
    except (KeyError, TypeError) as exc:
        raise ValueError(f"malformed trig term: {exc}") from exc


def scalar_from_json(data: dict):
    """{"kind": "trig", "epsilon", "terms"} or {"kind": "constant", "value"}."""
    if not isinstance(data, dict):
        raise ValueError("scalar field JSON must be an object")
    kind = data.get("kind", "trig")
    if kind == "constant":
        return ConstantScalarField(float(data.get("value", 0.0)))
    if kind != "trig":
        raise ValueError(f"unknown scalar field kind {kind!r}")
    return TrigScalarField(_terms_from_json(data.get("terms", [])), float(data.get("epsilon", 1.0)))


def scalar_to_json(f) -> dict:
    if isinstance(f, ConstantScalarField):
        return {"kind": "constant", "value": f.value}
    if isinstance(f, TrigScalarField):
        return {"kind": "trig", "epsilon": f.epsilon, "terms": [t.to_json() for t in f.terms]}
    raise TypeError(f"cannot serialize {type(f).__name__}")


def field_from_json(data: dict):
    """Build a coframe field from {"kind", "epsilon", "terms"[, "base"]}.

    For "conformal" the terms define the potential f and an optional "base"
    fixture is rescaled (flat by default); for "perturbed" each term carries
    the matrix "entry" it perturbs.
    """
    if not isinstance(data, dict):
        raise ValueError("fixture JSON must be an object")
    kind = data.get("kind")
    if kind not in FIXTURE_KINDS:
        raise ValueError(f"fixture kind must be one of {FIXTURE_KINDS}, got {kind!r}")
    if kind == "flat":
        return FlatField()
    eps = float(data.get("epsilon", 1e-2))
    terms = _terms_from_json(data.get("terms", []))
    if kind == "conformal":
        base = field_from_json(data["base"]) if "base" in data else FlatField()
        return ConformalField(base, TrigScalarField(terms, eps))
    return fixture_perturbed(terms, eps)


def field_to_json(f) -> dict:
    if isinstance(f, FlatField):
        return {"kind": "flat"}
    if isinstance(f, ConformalField):
        pot = f.potential
        if not isinstance(pot, TrigScalarField):
            raise TypeError("only trigonometric potentials serialize")
        out = {"kind": "conformal", "epsilon": pot.epsilon, "terms": [t.to_json() for t in pot.terms]}
        if not isinstance(f.base, FlatField):
            out["base"] = field_to_json(f.base)
        return out
    if isinstance(f, PerturbedField):
        return {"kind": "perturbed", "epsilon": f.epsilon, "terms": [t.to_json() for t in f.terms]}
    raise TypeError(f"cannot serialize {type(f).__name__}")


def default_fixture(kind: str):
    if kind == "flat":
        return fixture_flat()
    if kind == "conformal":
        return fixture_conformal()
    if kind == "perturbed":
        return fixture_perturbed()
    raise ValueError(f"unknown fixture kind {kind!r}")
