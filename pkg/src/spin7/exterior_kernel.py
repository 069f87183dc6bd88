"""Exterior algebra of R^8 with the Euclidean metric.

Basis monomials e_{i1...ik} (i1 < ... < ik) are encoded as 8-bit masks; a
degree-k form stores its C(8, k) coefficients in increasing mask order.
Evaluation follows the determinant convention, e_{0123}(e0, e1, e2, e3) = 1,
so ordered monomials are orthonormal and the volume form is e_{01234567}.

Besides the ``KForm`` value type the module exposes dense conversions
(``to_tensor``/``from_tensor``) between coefficient vectors and fully
antisymmetric ``(8,)*k`` arrays, which the geometry code uses for index work.
"""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

DIM = 8
FULL_MASK = (1 << DIM) - 1


def popcount(mask: int) -> int:
    return bin(mask).count("1")


@lru_cache(maxsize=None)
def masks(degree: int) -> tuple[int, ...]:
    """Masks of all degree-k monomials in increasing numeric order."""
    if not 0 <= degree <= DIM:
        raise ValueError(f"degree must be in 0..{DIM}, got {degree}")
    return tuple(m for m in range(1 << DIM) if popcount(m) == degree)


@lru_cache(maxsize=None)
def mask_index(degree: int) -> dict[int, int]:
    return {m: n for n, m in enumerate(masks(degree))}


def mask_to_indices(mask: int) -> tuple[int, ...]:
    return tuple(i for i in range(DIM) if mask >> i & 1)


def indices_to_mask(indices) -> int:
    m = 0
    for i in indices:
        m |= 1 << int(i)
    return m


def merge_sign(a: int, b: int) -> int:
    """Sign of e_A ^ e_B relative to e_{A|B}; 0 when A and B overlap.

    The sign is the parity of pairs (i in A, j in B) with i > j.
    """
    if a & b:
        return 0
    swaps = 0
    for j in range(DIM):
        if b >> j & 1:
            swaps += popcount(a >> (j + 1))
    return -1 if swaps & 1 else 1


def dim(degree: int) -> int:
    return math.comb(DIM, degree)


@dataclass(frozen=True, eq=False)
class KForm:
    """A degree-k alternating form on R^8."""

    degree: int
    coeffs: np.ndarray

    def __post_init__(self):
        c = np.array(self.coeffs, dtype=float).reshape(-1)
        if not 0 <= self.degree <= DIM:
            raise ValueError(f"degree must be in 0..{DIM}, got {self.degree}")
        if c.shape != (dim(self.degree),):
            raise ValueError(
                f"degree-{self.degree} form needs {dim(self.degree)} coefficients, got {c.size}"
            )
        if not np.all(np.isfinite(c)):
            raise ValueError("form coefficients must be finite")
        c.setflags(write=False)
        object.__setattr__(self, "coeffs", c)

    @classmethod
    def zero(cls, degree: int) -> "KForm":
        return cls(degree, np.zeros(dim(degree)))

    @classmethod
    def monomial(cls, *indices: int, coeff: float = 1.0) -> "KForm":
        """``coeff * e_{i1} ^ ... ^ e_{ik}`` for indices in any order."""
        if len(set(indices)) != len(indices):
            return cls.zero(len(indices))
        perm_sign = _permutation_sign(indices)
        k = len(indices)
        c = np.zeros(dim(k))
        c[mask_index(k)[indices_to_mask(indices)]] = perm_sign * coeff
        return cls(k, c)

    @classmethod
    def from_terms(cls, degree: int, terms) -> "KForm":
        c = np.zeros(dim(degree))
        for indices, coeff in terms:
            f = cls.monomial(*indices, coeff=coeff)
            if f.degree != degree:
                raise ValueError(f"term {indices} has degree {f.degree}, expected {degree}")
            c += f.coeffs
        return cls(degree, c)

    def coeff(self, *indices: int) -> float:
        """Value on (e_{i1}, ..., e_{ik}), indices in any order."""
        if len(indices) != self.degree:
            raise ValueError("number of indices must equal the degree")
        if len(set(indices)) != len(indices):
            return 0.0
        n = mask_index(self.degree)[indices_to_mask(indices)]
        return _permutation_sign(indices) * float(self.coeffs[n])

    def terms(self, tol: float = 0.0):
        for m, c in zip(masks(self.degree), self.coeffs):
            if abs(c) > tol:
                yield mask_to_indices(m), float(c)

    def __add__(self, other: "KForm") -> "KForm":
        _check_same_degree(self, other)
        return KForm(self.degree, self.coeffs + other.coeffs)

    def __sub__(self, other: "KForm") -> "KForm":
        _check_same_degree(self, other)
        return KForm(self.degree, self.coeffs - other.coeffs)

    def __neg__(self) -> "KForm":
        return KForm(self.degree, -self.coeffs)

    def __mul__(self, scalar: float) -> "KForm":
        return KForm(self.degree, float(scalar) * self.coeffs)

    __rmul__ = __mul__

    def __truediv__(self, scalar: float) -> "KForm":
        return KForm(self.degree, self.coeffs / float(scalar))

    def __xor__(self, other: "KForm") -> "KForm":
        return wedge(self, other)

    def norm(self) -> float:
        return float(np.linalg.norm(self.coeffs))

    def allclose(self, other: "KForm", atol: float = 1e-12) -> bool:
        return self.degree == other.degree and bool(
            np.allclose(self.coeffs, other.coeffs, rtol=0.0, atol=atol)
        )

    def to_json(self, tol: float = 0.0) -> dict:
        return {
            "degree": self.degree,
            "terms": [{"indices": list(ix), "coeff": c} for ix, c in self.terms(tol)],
        }

    @classmethod
    def from_json(cls, data: dict) -> "KForm":
        try:
            degree = int(data["degree"])
            terms = [(tuple(int(i) for i in t["indices"]), float(t["coeff"])) for t in data["terms"]]
        except (KeyError, TypeError) as exc:
            raise ValueError(f"malformed form JSON: {exc}") from exc
        for ix, _ in terms:
            if any(not 0 <= i < DIM for i in ix):
                raise ValueError(f"index out of range in {ix}")
        return cls.from_terms(degree, terms)

    def __repr__(self) -> str:
        body = " + ".join(
            f"{c:g}*e{''.join(map(str, ix))}" for ix, c in self.terms(1e-15)
        )
        return f"KForm({self.degree}: {body or '0'})"


def _check_same_degree(a: KForm, b: KForm) -> None:
    if a.degree != b.degree:
        raise ValueError(f"degree mismatch: {a.degree} vs {b.degree}")


def _permutation_sign(seq) -> int:
    sign = 1
    seq = list(seq)
    for i in range(len(seq)):
        for j in range(i + 1, len(seq)):
            if seq[i] > seq[j]:
                sign = -sign
    return sign


def vector(components) -> KForm:
    """A 1-form (identified with a vector through the metric)."""
    v = np.asarray(components, dtype=float)
    if v.shape != (DIM,):
        raise ValueError("vectors have 8 components")
    return KForm(1, v)


def basis(i: int) -> KForm:
    return KForm.monomial(i)


def volume() -> KForm:
    return KForm(DIM, [1.0])


# ---------------------------------------------------------------------------
# Cached structure tables


@lru_cache(maxsize=None)
def _wedge_table(p: int, q: int) -> np.ndarray:
    """W[r, i, j] = coefficient of monomial r in (monomial i of degree p) ^ (monomial j of degree q)."""
    table = np.zeros((dim(p + q), dim(p), dim(q)))
    out = mask_index(p + q)
    for i, a in enumerate(masks(p)):
        for j, b in enumerate(masks(q)):
            s = merge_sign(a, b)
            if s:
                table[out[a | b], i, j] = s
    table.setflags(write=False)
    return table


@lru_cache(maxsize=None)
def interior_table(degree: int) -> np.ndarray:
    """I[v, r, i]: coefficient of monomial r in i_{e_v}(monomial i of the given degree)."""
    table = np.zeros((DIM, dim(degree - 1), dim(degree)))
    out = mask_index(degree - 1)
    for n, m in enumerate(masks(degree)):
        for v in range(DIM):
            if m >> v & 1:
                # bring e_v to the front of the ordered monomial
                s = -1 if popcount(m & ((1 << v) - 1)) & 1 else 1
                table[v, out[m ^ (1 << v)], n] = s
    table.setflags(write=False)
    return table


@lru_cache(maxsize=None)
def star_matrix(degree: int) -> np.ndarray:
    """Matrix of the Hodge star from degree k to degree 8-k."""
    mat = np.zeros((dim(DIM - degree), dim(degree)))
    out = mask_index(DIM - degree)
    for n, m in enumerate(masks(degree)):
        comp = FULL_MASK ^ m
        mat[out[comp], n] = merge_sign(m, comp)
    mat.setflags(write=False)
    return mat


@lru_cache(maxsize=None)
def expansion_matrix(degree: int) -> np.ndarray:
    """X with X @ coeffs = flattened antisymmetric (8,)*k tensor of the form."""
    mat = np.zeros((DIM**degree, dim(degree)))
    idx = mask_index(degree)
    for tup in itertools.permutations(range(DIM), degree):
        flat = np.ravel_multi_index(tup, (DIM,) * degree) if degree else 0
        mat[flat, idx[indices_to_mask(tup)]] = _permutation_sign(tup)
    mat.setflags(write=False)
    return mat


@lru_cache(maxsize=None)
def _compression_index(degree: int) -> np.ndarray:
    """Flat tensor positions of the increasing index tuples, in mask order."""
    if degree == 0:
        return np.zeros(1, dtype=int)
    return np.array(
        [np.ravel_multi_index(mask_to_indices(m), (DIM,) * degree) for m in masks(degree)]
    )


# ---------------------------------------------------------------------------
# Operations


def wedge(a: KForm, b: KForm) -> KForm:
    if a.degree + b.degree > DIM:
        raise ValueError(f"wedge of degrees {a.degree} and {b.degree} exceeds {DIM}")
    table = _wedge_table(a.degree, b.degree)
    return KForm(a.degree + b.degree, np.einsum("rij,i,j->r", table, a.coeffs, b.coeffs))


def interior(v, a: KForm) -> KForm:
    """Contraction of ``a`` with ``v`` in the first slot."""
    if a.degree < 1:
        raise ValueError("interior product needs a form of degree >= 1")
    vec = v.coeffs if isinstance(v, KForm) else np.asarray(v, dtype=float)
    if vec.shape != (DIM,):
        raise ValueError("interior product needs an 8-vector")
    return KForm(a.degree - 1, np.einsum("v,vri,i->r", vec, interior_table(a.degree), a.coeffs))


def hodge_star(a: KForm) -> KForm:
    return KForm(DIM - a.degree, star_matrix(a.degree) @ a.coeffs)


def inner(a: KForm, b: KForm) -> float:
    _check_same_degree(a, b)
    return float(a.coeffs @ b.coeffs)


def to_tensor(a) -> np.ndarray:
    """Dense antisymmetric array T[i1, ..., ik] = a(e_{i1}, ..., e_{ik})."""
    if isinstance(a, KForm):
        degree, coeffs = a.degree, a.coeffs
    else:
        raise TypeError("to_tensor expects a KForm")
    return (expansion_matrix(degree) @ coeffs).reshape((DIM,) * degree)


def coeffs_to_tensor(coeffs: np.ndarray, degree: int) -> np.ndarray:
    """Batched ``to_tensor`` on raw coefficient arrays; leading axes are preserved."""
    coeffs = np.asarray(coeffs, dtype=float)
    lead = coeffs.shape[:-1]
    flat = coeffs.reshape(-1, dim(degree)) @ expansion_matrix(degree).T
    return flat.reshape(lead + (DIM,) * degree)


def tensor_coeffs(tensor: np.ndarray, degree: int) -> np.ndarray:
    """Coefficients of antisymmetric tensors in the last ``degree`` axes (no antisymmetrization)."""
    tensor = np.asarray(tensor, dtype=float)
    lead = tensor.shape[: tensor.ndim - degree]
    flat = tensor.reshape(lead + (DIM**degree,))
    return flat[..., _compression_index(degree)]


def from_tensor(tensor: np.ndarray, check: bool = True, atol: float = 1e-12) -> KForm:
    """Inverse of ``to_tensor``; optionally verifies antisymmetry."""
    tensor = np.asarray(tensor, dtype=float)
    degree = tensor.ndim
    form = KForm(degree, tensor_coeffs(tensor, degree))
    if check and degree > 1:
        err = np.max(np.abs(to_tensor(form) - tensor))
        if err > atol * max(1.0, np.max(np.abs(tensor))):
            raise ValueError(f"tensor is not antisymmetric (deviation {err:.3e})")
    return form


def antisymmetrize(tensor: np.ndarray) -> np.ndarray:
    """Alt(t) = (1/k!) sum_sigma sgn(sigma) t[sigma]."""
    k = tensor.ndim
    out = np.zeros_like(tensor, dtype=float)
    for perm in itertools.permutations(range(k)):
        out += _permutation_sign(perm) * np.transpose(tensor, perm)
    return out / math.factorial(k)


def brute_force_wedge(a: KForm, b: KForm) -> KForm:
    """Wedge through the permutation-sum formula on dense tensors (reference path)."""
    p, q = a.degree, b.degree
    ta, tb = to_tensor(a), to_tensor(b)
    prod = np.multiply.outer(ta, tb)
    alt = antisymmetrize(prod) if p + q else prod
    scale = math.factorial(p + q) / (math.factorial(p) * math.factorial(q))
    return from_tensor(scale * alt)


def brute_force_star(a: KForm) -> KForm:
    """Hodge star through (*a)_J = (1/k!) sum_I sgn(I J) a_I over all orderings (reference path)."""
    k = a.degree
    ta = to_tensor(a)
    out = np.zeros((DIM,) * (DIM - k))
    for perm in itertools.permutations(range(DIM)):
        head, tail = perm[:k], perm[k:]
        out[tail] += _permutation_sign(perm) * ta[head]
    return from_tensor(out / math.factorial(k))
