"""Pointwise Spin(7) linear algebra.

The fundamental 4-form, the triple cross product, the irreducible splittings
of 2-, 3- and 4-forms, the Lee form, and the torsion 3-form of the unique
Spin(7) connection with skew torsion (closed form and the 56x56 linear
system), plus the closed formula for the Levi-Civita derivative of the
fundamental form in terms of its codifferential.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np

from .exterior_kernel import (
    DIM,
    KForm,
    coeffs_to_tensor,
    dim,
    hodge_star,
    star_matrix,
    tensor_coeffs,
    to_tensor,
    wedge,
    _wedge_table,
    interior_table,
)

PHI_TERMS = (
    ((0, 1, 2, 3), 1), ((0, 1, 4, 5), 1), ((0, 1, 6, 7), 1), ((0, 2, 4, 6), 1),
    ((0, 2, 5, 7), -1), ((0, 3, 4, 7), -1), ((0, 3, 5, 6), -1),
    ((4, 5, 6, 7), 1), ((2, 3, 6, 7), 1), ((2, 3, 4, 5), 1), ((1, 3, 5, 7), 1),
    ((1, 3, 4, 6), -1), ((1, 2, 4, 7), -1), ((1, 2, 5, 6), -1),
)

# Coefficient of *(theta ^ Phi) in the torsion formula; read at call time so
# fault-injection tests can perturb it.
TORSION_LEE_COEFF = 7.0 / 6.0

COMPONENT_LABELS = {
    2: ("2_7", "2_21"),
    3: ("3_8", "3_48"),
    4: ("4_1", "4_7", "4_27", "4_35"),
}
COMPONENT_RANKS = {"2_7": 7, "2_21": 21, "3_8": 8, "3_48": 48,
                   "4_1": 1, "4_7": 7, "4_27": 27, "4_35": 35}


@lru_cache(maxsize=1)
def _phi() -> KForm:
    return KForm.from_terms(4, PHI_TERMS)


def fundamental_form() -> KForm:
    return _phi()


@lru_cache(maxsize=1)
def phi_tensor() -> np.ndarray:
    t = to_tensor(_phi())
    t.setflags(write=False)
    return t


def cross_product(x, y, z) -> np.ndarray:
    """P(x, y, z) with <P(x, y, z), t> = Phi(x, y, z, t)."""
    return np.einsum("ijkl,i,j,k->l", phi_tensor(), *(np.asarray(v, float) for v in (x, y, z)))


# ---------------------------------------------------------------------------
# Linear operators and projectors


def _linear_map_matrix(fn, degree_in: int) -> np.ndarray:
    cols = [fn(KForm(degree_in, e)).coeffs for e in np.eye(dim(degree_in))]
    return np.array(cols).T


def lambda2_operator(phi: KForm | None = None) -> np.ndarray:
    """Matrix of alpha -> *(alpha ^ Phi) on 2-forms."""
    phi = _phi() if phi is None else phi
    return _linear_map_matrix(lambda a: hodge_star(wedge(a, phi)), 2)


def lambda1_to_lambda3(phi: KForm | None = None) -> np.ndarray:
    """Matrix of beta -> *(beta ^ Phi), 56x8."""
    phi = _phi() if phi is None else phi
    return _linear_map_matrix(lambda b: hodge_star(wedge(b, phi)), 1)


def derivation_matrix(degree: int) -> np.ndarray:
    """D[r, n, m]: coefficient r of the so(8) derivation by basis 2-form n on basis form m.

    The 2-form e_{ab} is the infinitesimal rotation sending e_b to e_a and
    e_a to -e_b; it acts on forms by (A.alpha)(X..) = -sum alpha(.., A X_m, ..).
    """
    from .exterior_kernel import masks, mask_to_indices

    n2 = dim(2)
    out = np.zeros((dim(degree), n2, dim(degree)))
    for n, m in enumerate(masks(2)):
        a, b = mask_to_indices(m)
        gen = np.zeros((DIM, DIM))
        gen[a, b], gen[b, a] = 1.0, -1.0  # A e_b = e_a, A e_a = -e_b ; gen[i, j] = <A e_j, e_i>
        for k, e in enumerate(np.eye(dim(degree))):
            t = coeffs_to_tensor(e, degree)
            acc = np.zeros_like(t)
            for slot in range(degree):
                # alpha(.., A X, ..) with A X = gen @ X
                acc -= np.moveaxis(np.tensordot(t, gen, axes=([slot], [0])), -1, slot)
            out[:, n, k] = tensor_coeffs(acc, degree)
    return out


def so8_orbit_matrix(phi: KForm | None = None) -> np.ndarray:
    """Matrix (70x28) of A -> A.Phi for the derivation action of 2-forms."""
    phi = _phi() if phi is None else phi
    return np.einsum("rnm,m->rn", derivation_matrix(4), phi.coeffs)


def _orth_projector(mat: np.ndarray, rank: int) -> np.ndarray:
    u, s, _ = np.linalg.svd(mat)
    q = u[:, :rank]
    return q @ q.T


@lru_cache(maxsize=1)
def _projectors() -> dict[str, np.ndarray]:
    phi = _phi()
    L = lambda2_operator(phi)
    eye2 = np.eye(dim(2))
    proj = {
        "2_7": (L + eye2) / 4.0,
        "2_21": (3.0 * eye2 - L) / 4.0,
    }
    B = lambda1_to_lambda3(phi)
    proj["3_8"] = B @ B.T / 7.0
    proj["3_48"] = np.eye(dim(3)) - proj["3_8"]
    s4 = star_matrix(4)
    eye4 = np.eye(dim(4))
    plus = (eye4 + s4) / 2.0
    proj["4_35"] = (eye4 - s4) / 2.0
    proj["4_1"] = np.outer(phi.coeffs, phi.coeffs) / (phi.coeffs @ phi.coeffs)
    proj["4_7"] = _orth_projector(so8_orbit_matrix(phi), 7)
    proj["4_27"] = plus - proj["4_1"] - proj["4_7"]
    for p in proj.values():
        p.setflags(write=False)
    return proj


def projector(label: str) -> np.ndarray:
    """Orthogonal projector onto the labelled irreducible piece, e.g. ``"3_48"``."""
    try:
        return _projectors()[label]
    except KeyError:
        raise ValueError(f"unknown component label {label!r}") from None


def projector_basis(label: str) -> np.ndarray:
    """Orthonormal basis (as columns) of the image of a projector."""
    p = projector(label)
    w, v = np.linalg.eigh(p)
    return v[:, w > 0.5]


def project(a: KForm, label: str) -> KForm:
    deg = int(label.split("_")[0])
    if a.degree != deg:
        raise ValueError(f"cannot project a {a.degree}-form onto Lambda^{label}")
    return KForm(deg, projector(label) @ a.coeffs)


@dataclass(frozen=True)
class IrreducibleComponents:
    degree: int
    components: dict[str, KForm] = field(default_factory=dict)

    def total(self) -> KForm:
        out = KForm.zero(self.degree)
        for c in self.components.values():
            out = out + c
        return out

    def norms(self) -> dict[str, float]:
        return {k: v.norm() for k, v in self.components.items()}

    def to_json(self, tol: float = 0.0) -> dict:
        return {
            "degree": self.degree,
            "components": [
                {
                    "label": lab,
                    "dimension": COMPONENT_RANKS[lab],
                    "norm": comp.norm(),
                    "coeffs": [float(c) for c in comp.coeffs],
                    "terms": comp.to_json(tol)["terms"],
                }
                for lab, comp in self.components.items()
            ],
        }


def decompose(a: KForm) -> IrreducibleComponents:
    if a.degree not in COMPONENT_LABELS:
        raise ValueError(f"decompose supports degrees 2, 3, 4; got {a.degree}")
    return IrreducibleComponents(
        a.degree, {lab: project(a, lab) for lab in COMPONENT_LABELS[a.degree]}
    )


# ---------------------------------------------------------------------------
# Lee form and torsion


def _require_degree(a: KForm, k: int, name: str) -> None:
    if a.degree != k:
        raise ValueError(f"{name} must be a {k}-form, got degree {a.degree}")


def lee_form(delta_phi: KForm, phi: KForm | None = None) -> KForm:
    """theta = (1/7) *(delta Phi ^ Phi)."""
    _require_degree(delta_phi, 3, "delta Phi")
    phi = _phi() if phi is None else phi
    return hodge_star(wedge(delta_phi, phi)) / 7.0


def lee_from_torsion(torsion: KForm) -> KForm:
    """theta = (6/7) *(Phi ^ T)."""
    _require_degree(torsion, 3, "T")
    return hodge_star(wedge(_phi(), torsion)) * (6.0 / 7.0)


def torsion_closed_form(delta_phi: KForm) -> KForm:
    """T = -delta Phi - (7/6) *(theta ^ Phi)."""
    _require_degree(delta_phi, 3, "delta Phi")
    theta = lee_form(delta_phi)
    return -delta_phi - TORSION_LEE_COEFF * hodge_star(wedge(theta, _phi()))


# Normalization of the double contraction sum: substituting the parallelism
# condition into delta Phi = -sum_i i_{e_i} (nabla^g_{e_i} Phi) gives one half
# of the bare double sum.
TORSION_SYSTEM_SCALE = 0.5


def contraction_sum(torsion: KForm, phi: KForm | None = None) -> KForm:
    """sum_{i,j} (i_{e_j} i_{e_i} T) ^ (i_{e_j} i_{e_i} Phi), without normalization."""
    phi = _phi() if phi is None else phi
    i3, i2 = interior_table(3), interior_table(2)
    i4, i3b = interior_table(4), interior_table(3)
    # ii_T[i, j, :] = i_{e_j} i_{e_i} T
    tt = np.einsum("jsr,irm,m->ijs", i2, i3, torsion.coeffs)
    pp = np.einsum("jsr,irm,m->ijs", i3b, i4, phi.coeffs)
    w = _wedge_table(1, 2)
    return KForm(3, np.einsum("uab,ija,ijb->u", w, tt, pp))


@lru_cache(maxsize=1)
def torsion_system_matrix() -> np.ndarray:
    """56x56 matrix A with delta Phi = A @ T (coefficient vectors)."""
    return TORSION_SYSTEM_SCALE * np.array(
        [contraction_sum(KForm(3, e)).coeffs for e in np.eye(dim(3))]
    ).T


class RankDeficientSystem(RuntimeError):
    pass


def torsion_linear_solve(delta_phi: KForm) -> KForm:
    """Solve the contraction system for T; independent of the closed formula."""
    _require_degree(delta_phi, 3, "delta Phi")
    A = torsion_system_matrix()
    rank = np.linalg.matrix_rank(A)
    if rank != dim(3):
        raise RankDeficientSystem(f"torsion system has rank {rank}, expected {dim(3)}")
    return KForm(3, np.linalg.solve(A, delta_phi.coeffs))


# ---------------------------------------------------------------------------
# Levi-Civita derivative of Phi


def nabla_phi_tensor(delta_phi: KForm) -> np.ndarray:
    """N[x, y, z, v, w] = (nabla^g_{e_x} Phi)(e_y, e_z, e_v, e_w) from the closed formula."""
    _require_degree(delta_phi, 3, "delta Phi")
    ph = phi_tensor()
    d = to_tensor(delta_phi)
    tau = hodge_star(wedge(delta_phi, _phi())).coeffs

    def dp(spec):
        # delta Phi(X, ., P(., ., .))
        return np.einsum(spec, d, ph)

    def tp(spec):
        # tau(P(X, ., P(., ., .)))
        return np.einsum(spec, tau, ph, ph)

    out = 0.5 * (dp("xyt,zvwt->xyzvw") - dp("xzt,yvwt->xyzvw"))
    out += 0.5 * (dp("xvt,yzwt->xyzvw") - dp("xwt,yzvt->xyzvw"))
    out -= (tp("t,xyst,zvws->xyzvw") - tp("t,xzst,yvws->xyzvw")) / 12.0
    out -= (tp("t,xvst,yzws->xyzvw") - tp("t,xwst,yzvs->xyzvw")) / 12.0
    return out


def nabla_phi_formula(delta_phi: KForm, X, Y, Z, V, W) -> float:
    """(nabla^g_X Phi)(Y, Z, V, W) assembled from delta Phi and cross products."""
    _require_degree(delta_phi, 3, "delta Phi")
    X, Y, Z, V, W = (np.asarray(v, float) for v in (X, Y, Z, V, W))
    d = to_tensor(delta_phi)
    tau = hodge_star(wedge(delta_phi, _phi())).coeffs

    def dp(a, b, c):
        return float(np.einsum("ijk,i,j,k->", d, a, b, c))

    P = cross_product
    out = 0.5 * (dp(X, Y, P(Z, V, W)) - dp(X, Z, P(Y, V, W)))
    out += 0.5 * (dp(X, V, P(Y, Z, W)) - dp(X, W, P(Y, Z, V)))
    out -= (tau @ P(X, Y, P(Z, V, W)) - tau @ P(X, Z, P(Y, V, W))) / 12.0
    out -= (tau @ P(X, V, P(Y, Z, W)) - tau @ P(X, W, P(Y, Z, V))) / 12.0
    return out


def torsion_action_on_phi(torsion: KForm) -> np.ndarray:
    """Right-hand side of 2 (nabla^g_X Phi)(Y,Z,V,W) = sum Phi(.., T(X, .), ..), as a 5-tensor."""
    ph = phi_tensor()
    t = to_tensor(torsion)
    out = np.einsum("xys,szvw->xyzvw", t, ph)
    out += np.einsum("xzs,ysvw->xyzvw", t, ph)
    out += np.einsum("xvs,yzsw->xyzvw", t, ph)
    out += np.einsum("xws,yzvs->xyzvw", t, ph)
    return out


# ---------------------------------------------------------------------------
# Constants of a candidate fundamental form


def algebraic_constants(phi: KForm | None = None) -> dict:
    """Norm, self-duality, spectrum of alpha -> *(alpha ^ Phi) and splitting ranks for ``phi``.

    Every quantity is rebuilt from ``phi`` itself, so a corrupted form is
    detected rather than masked by the cached projectors.
    """
    phi = _phi() if phi is None else phi
    _require_degree(phi, 4, "Phi")
    L = lambda2_operator(phi)
    eig = np.sort(np.linalg.eigvals(L).real)
    expected = np.array([-1.0] * 21 + [3.0] * 7)
    sym = float(np.abs(L - L.T).max())

    def rank(mat):
        return int(np.linalg.matrix_rank(mat, tol=1e-8))

    orbit = rank(so8_orbit_matrix(phi))
    b = rank(lambda1_to_lambda3(phi))
    plus = int(round(np.trace((np.eye(dim(4)) + star_matrix(4)) / 2.0)))
    has_phi = int(phi.norm() > 0)
    ranks = {
        "2_7": int(np.sum(np.abs(eig - 3.0) < 1e-8)),
        "2_21": int(np.sum(np.abs(eig + 1.0) < 1e-8)),
        "3_8": b,
        "3_48": dim(3) - b,
        "4_1": has_phi,
        "4_7": orbit,
        "4_27": plus - has_phi - orbit,
        "4_35": dim(4) - plus,
    }
    return {
        "norm2": float(phi.coeffs @ phi.coeffs),
        "self_duality": float(np.abs(hodge_star(phi).coeffs - phi.coeffs).max()),
        "eigenvalues": float(np.abs(eig - expected).max()) + sym,
        "ranks": ranks,
    }
