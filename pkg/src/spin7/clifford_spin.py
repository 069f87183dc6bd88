"""Real Clifford algebra Cl(8) acting on 16-component spinors.

Conventions:

* ``v . v = -|v|^2`` for vectors.
* Spinors are length-16 arrays; indices 0..7 span S+, indices 8..15 span S-.
* An ordered monomial ``e_{i1...ik}`` acts as ``gamma_{i1} ... gamma_{ik}``.
* The invariant spinor lies in S+, has unit norm and a positive component
  sum (its components all have equal magnitude, so a largest-component rule
  would depend on rounding).

The gamma matrices are ``[[0, A_i], [-A_i^T, 0]]`` with ``A_0 = I`` and
``A_1..A_7`` seven anticommuting skew 8x8 matrices built as triple Kronecker
products of real 2x2 matrices.
"""
from __future__ import annotations

from functools import lru_cache

import numpy as np

from .exterior_kernel import DIM, KForm, dim, masks, mask_to_indices

SPINOR_DIM = 16
HALF = 8

_ONE = np.eye(2)
_X = np.array([[0.0, 1.0], [1.0, 0.0]])
_Z = np.array([[1.0, 0.0], [0.0, -1.0]])
_J = np.array([[0.0, 1.0], [-1.0, 0.0]])
_FACTORS = {"1": _ONE, "x": _X, "z": _Z, "j": _J}
# each word has an odd number of J factors (skew) and any two words
# anticommute in an odd number of slots
_OCTONION_WORDS = ("11j", "1jx", "xjz", "zjz", "j1z", "jxx", "jzx")


class ConventionError(RuntimeError):
    """Gamma table, orientation and fundamental form disagree."""


def _kron3(word: str) -> np.ndarray:
    a, b, c = (_FACTORS[ch] for ch in word)
    return np.kron(np.kron(a, b), c)


@lru_cache(maxsize=1)
def gamma_table() -> np.ndarray:
    """The eight 16x16 gamma matrices, shape (8, 16, 16)."""
    blocks = [np.eye(HALF)] + [_kron3(w) for w in _OCTONION_WORDS]
    table = np.zeros((DIM, SPINOR_DIM, SPINOR_DIM))
    for i, a in enumerate(blocks):
        table[i, :HALF, HALF:] = a
        table[i, HALF:, :HALF] = -a.T
    table.setflags(write=False)
    return table


def check_gamma_table(table: np.ndarray | None = None, atol: float = 1e-14) -> float:
    """Max deviation from the Clifford relations and the chirality block structure."""
    g = gamma_table() if table is None else table
    eye = np.eye(SPINOR_DIM)
    err = 0.0
    for i in range(DIM):
        err = max(err, np.abs(g[i, :HALF, :HALF]).max(), np.abs(g[i, HALF:, HALF:]).max())
        for j in range(DIM):
            anti = g[i] @ g[j] + g[j] @ g[i] + 2.0 * (i == j) * eye
            err = max(err, np.abs(anti).max())
    return float(err)


@lru_cache(maxsize=None)
def monomial_matrices(degree: int) -> np.ndarray:
    """Clifford matrices of all ordered degree-k monomials, shape (C(8,k), 16, 16)."""
    g = gamma_table()
    out = np.empty((dim(degree), SPINOR_DIM, SPINOR_DIM))
    for n, m in enumerate(masks(degree)):
        mat = np.eye(SPINOR_DIM)
        for i in mask_to_indices(m):
            mat = mat @ g[i]
        out[n] = mat
    out.setflags(write=False)
    return out


def form_matrix(a: KForm) -> np.ndarray:
    """16x16 matrix of the Clifford action of a form."""
    return np.tensordot(a.coeffs, monomial_matrices(a.degree), axes=1)


def coeffs_matrix(coeffs: np.ndarray, degree: int) -> np.ndarray:
    """Batched ``form_matrix`` on raw coefficient arrays (leading axes kept)."""
    return np.tensordot(np.asarray(coeffs, dtype=float), monomial_matrices(degree), axes=1)


def clifford_vector(v, s: np.ndarray) -> np.ndarray:
    vec = v.coeffs if isinstance(v, KForm) else np.asarray(v, dtype=float)
    return np.tensordot(vec, gamma_table(), axes=1) @ np.asarray(s, dtype=float)


def clifford_form(a: KForm, s: np.ndarray) -> np.ndarray:
    return form_matrix(a) @ np.asarray(s, dtype=float)


def brute_force_form_matrix(a: KForm) -> np.ndarray:
    """Clifford action via the antisymmetrized product over all index orderings.

    For a k-form with dense components a_{i1..ik} this is
    (1/k!) sum a_{i1..ik} gamma_{i1} ... gamma_{ik}; repeated indices drop out
    because the components vanish there.
    """
    import itertools
    import math

    from .exterior_kernel import to_tensor

    g = gamma_table()
    t = to_tensor(a)
    out = np.zeros((SPINOR_DIM, SPINOR_DIM))
    for tup in itertools.permutations(range(DIM), a.degree):
        c = t[tup] if a.degree else float(t)
        if c == 0.0:
            continue
        mat = np.eye(SPINOR_DIM)
        for i in tup:
            mat = mat @ g[i]
        out += c * mat
    return out / math.factorial(a.degree)


def chirality(s: np.ndarray, atol: float = 1e-12) -> int:
    """+1 if s lies in S+, -1 if in S-, 0 otherwise."""
    s = np.asarray(s, dtype=float)
    plus, minus = np.linalg.norm(s[:HALF]), np.linalg.norm(s[HALF:])
    if minus <= atol * max(1.0, plus):
        return 1
    if plus <= atol * max(1.0, minus):
        return -1
    return 0


def positive_part(s: np.ndarray) -> np.ndarray:
    out = np.zeros(SPINOR_DIM)
    out[:HALF] = np.asarray(s)[:HALF]
    return out


@lru_cache(maxsize=1)
def _fundamental_spinor() -> np.ndarray:
    from .spin7_algebra import projector_basis

    basis21 = projector_basis("2_21")
    stacked = np.vstack([coeffs_matrix(b, 2)[:HALF, :HALF] for b in basis21.T])
    _, sing, vt = np.linalg.svd(stacked)
    scale = sing[0]
    null = int(np.sum(sing < 1e-10 * scale)) + (HALF - len(sing) if len(sing) < HALF else 0)
    if null != 1:
        raise ConventionError(
            f"Lambda^2_21 annihilates a {null}-dimensional subspace of S+; expected 1"
        )
    v = vt[-1]
    v = v / np.linalg.norm(v)
    if v.sum() < 0:
        v = -v
    phi = np.zeros(SPINOR_DIM)
    phi[:HALF] = v
    phi.setflags(write=False)
    return phi


def fundamental_spinor() -> np.ndarray:
    """The unit spinor in S+ annihilated by every 2-form in Lambda^2_21."""
    return _fundamental_spinor().copy()


def spin_lift(omega: np.ndarray) -> np.ndarray:
    """Spinor matrix of an so(8) element.

    ``omega[a, b] = g(A e_b, e_a)`` is the matrix of an infinitesimal rotation.
    The result rho satisfies [rho, gamma(v)] = gamma(A v).
    """
    g = gamma_table()
    return 0.25 * np.einsum("ba,aij,bjk->ik", omega, g, g)


def spinor_to_json(s: np.ndarray) -> list[float]:
    return [float(x) for x in np.asarray(s).reshape(-1)]


def spinor_from_json(data) -> np.ndarray:
    s = np.asarray(data, dtype=float)
    if s.shape != (SPINOR_DIM,):
        raise ValueError(f"spinors have {SPINOR_DIM} components")
    return s
