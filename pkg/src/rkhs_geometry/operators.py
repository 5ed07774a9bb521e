"""Finite-rank operators on spans of kernel functions.

An operator ``A = sum_ij C[i, j] |k_i><k_j|`` acts on ``span{k_{x_1}, ...}``.
With ``G = L L^H`` the Gram matrix, ``Q = [k_i] L^{-H}`` is an orthonormal
basis and ``A = Q (L^H C L) Q^*``, so every norm is taken from the matrix
``M = L^H C L``.
"""
from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np
from scipy import linalg

from .errors import (
    ConditioningError,
    DegenerateError,
    InconsistencyError,
    UndefinedError,
    ValidationError,
)
from .kernels import Kernel, gram, normalized_pairing
from .metrics import REFINE_TOL, Curve, LengthResult, curve_length, delta

JITTER = 1e-12


class ConditioningWarning(UserWarning):
    """Gram matrix needed diagonal jitter before factorization."""


@dataclass(frozen=True, eq=False)
class SpanBasis:
    spec: Kernel
    points: object
    gram: np.ndarray = field(repr=False)
    chol: np.ndarray = field(repr=False)
    jitter: float = 0.0
    condition: float = 1.0

    @classmethod
    def build(cls, spec: Kernel, points) -> "SpanBasis":
        g = gram(spec, points)
        G = 0.5 * (g.entries + g.entries.conj().T)
        tr = float(np.real(np.trace(G)))
        eig = np.linalg.eigvalsh(G)
        jitter = 0.0
        work = G
        if eig[0] < JITTER * tr:
            jitter = JITTER * tr
            work = G + jitter * np.eye(len(G))
            warnings.warn(
                f"Gram matrix is nearly singular (min eigenvalue {eig[0]:.3g}); added jitter {jitter:.3g}",
                ConditioningWarning,
                stacklevel=2,
            )
        try:
            L = np.linalg.cholesky(work)
        except np.linalg.LinAlgError:
            raise ConditioningError("Cholesky factorization failed even after jitter") from None
        cond = float(eig[-1] / max(eig[0] + jitter, 1e-300))
        return cls(spec, g.points, G, L, jitter, cond)

    def __len__(self):
        return len(self.gram)

    def point(self, i):
        return self.points[i]

    def solve(self, b):
        """``G^{-1} b`` through the Cholesky factor."""
        return linalg.cho_solve((self.chol, True), b)

    def column(self, x):
        """``w_i = K(x_i, x)``, the coordinates of ``k_x`` against the span."""
        spec = self.spec
        if spec.vectorized:
            xs = spec.as_points([x] if spec.domain != "ball" else np.asarray(x, dtype=complex)[None])
            return spec.matrix(self.points, xs)[:, 0]
        return np.array([spec(p, x) for p in self.points], dtype=complex)

    def columns(self, xs):
        spec = self.spec
        if spec.vectorized:
            return spec.matrix(self.points, spec.as_points(xs))
        return np.array([[spec(p, x) for x in xs] for p in self.points], dtype=complex)


def span_basis(spec: Kernel, points) -> SpanBasis:
    return SpanBasis.build(spec, points)


@dataclass(frozen=True, eq=False)
class SpanOperator:
    basis: SpanBasis
    coeffs: np.ndarray

    def __post_init__(self):
        c = np.asarray(self.coeffs, dtype=complex)
        n = len(self.basis)
        if c.shape != (n, n):
            raise ValidationError(f"coefficient matrix has shape {c.shape}, expected {(n, n)}")
        object.__setattr__(self, "coeffs", c)

    def matrix(self):
        """The operator in the orthonormalized basis, ``L^H C L``."""
        L = self.basis.chol
        return L.conj().T @ self.coeffs @ L

    def _check(self, other):
        if other.basis is not self.basis:
            raise ValidationError("operators live on different span bases")

    def __add__(self, other):
        self._check(other)
        return SpanOperator(self.basis, self.coeffs + other.coeffs)

    def __sub__(self, other):
        self._check(other)
        return SpanOperator(self.basis, self.coeffs - other.coeffs)

    def __neg__(self):
        return SpanOperator(self.basis, -self.coeffs)

    def __mul__(self, s):
        return SpanOperator(self.basis, s * self.coeffs)

    __rmul__ = __mul__

    def __matmul__(self, other):
        self._check(other)
        return SpanOperator(self.basis, self.coeffs @ self.basis.gram @ other.coeffs)

    @property
    def H(self):
        return SpanOperator(self.basis, self.coeffs.conj().T)

    def apply(self, a):
        """Coefficients of ``A f`` for ``f = sum a_j k_j``."""
        return self.coeffs @ (self.basis.gram @ np.asarray(a, dtype=complex))

    def is_self_adjoint(self, tol=1e-12):
        M = self.matrix()
        return float(np.max(np.abs(M - M.conj().T))) <= tol * max(1.0, float(np.max(np.abs(M))))

    def trace(self):
        return complex(np.trace(self.matrix()))

    def to_dict(self, kernel_text: str):
        pts = self.basis.points
        return {
            "kernel": kernel_text,
            "points": [_point_json(p) for p in pts],
            "coeffs": [[[float(v.real), float(v.imag)] for v in row] for row in self.coeffs],
        }

    @classmethod
    def from_dict(cls, data, kernel: Kernel, points=None):
        if points is None:
            points = [_point_from_json(p) for p in data["points"]]
        c = np.array([[complex(re, im) for re, im in row] for row in data["coeffs"]])
        return cls(span_basis(kernel, points), c)


def _point_json(p):
    arr = np.asarray(p, dtype=complex)
    if arr.ndim == 0:
        return [float(arr.real), float(arr.imag)]
    return [[float(v.real), float(v.imag)] for v in arr]


def _point_from_json(p):
    if len(p) == 2 and not isinstance(p[0], list):
        return complex(p[0], p[1])
    return np.array([complex(a, b) for a, b in p])


# ---------------------------------------------------------------------------
# operations
# ---------------------------------------------------------------------------


def projection(basis: SpanBasis, index: int) -> SpanOperator:
    """Orthogonal projection onto ``span{k_x}``: ``|k_x><k_x| / K(x, x)``."""
    n = len(basis)
    if not 0 <= index < n:
        raise ValidationError(f"index {index} out of range for a basis of size {n}")
    kxx = float(np.real(basis.gram[index, index]))
    if kxx <= 0:
        raise UndefinedError("undefined projection: zero kernel function")
    c = np.zeros((n, n), dtype=complex)
    c[index, index] = 1.0 / kxx
    return SpanOperator(basis, c)


def singular_values(op: SpanOperator):
    return np.linalg.svd(op.matrix(), compute_uv=False)


def schatten_norm(op: SpanOperator, p=math.inf) -> float:
    s = singular_values(op)
    if p == math.inf or p == "inf":
        return float(s[0]) if len(s) else 0.0
    p = float(p)
    if p < 1:
        raise ValidationError("Schatten norms need p >= 1")
    if len(s) == 0 or s[0] == 0:
        return 0.0
    # scale to avoid overflow for large p
    return float(s[0] * np.sum((s / s[0]) ** p) ** (1.0 / p))


def commutator_norm(basis: SpanBasis, i: int, j: int) -> float:
    """``||[P_i, P_j]||`` in operator norm."""
    if i == j:
        return 0.0
    P, Q = projection(basis, i), projection(basis, j)
    return schatten_norm(P @ Q - Q @ P)


def berezin(op: SpanOperator, x, self_adjoint: Optional[bool] = None) -> complex:
    """``<A k^_x, k^_x> = w^H C w / K(x, x)`` with ``w_i = K(x_i, x)``."""
    spec = op.basis.spec
    kxx = float(spec.diag(x))
    if kxx <= 0:
        raise UndefinedError("undefined Berezin transform: zero kernel function")
    w = op.basis.column(x)
    val = complex(w.conj() @ op.coeffs @ w) / kxx
    if self_adjoint is None:
        self_adjoint = op.is_self_adjoint()
    if self_adjoint and abs(val.imag) >= 1e-12 * max(1.0, abs(val)):
        raise InconsistencyError(f"Berezin transform of a self-adjoint operator has imaginary part {val.imag}")
    return val


def berezin_many(op: SpanOperator, xs):
    spec = op.basis.spec
    W = op.basis.columns(xs)
    kxx = np.asarray(spec.diag(spec.as_points(xs) if spec.vectorized else xs), dtype=float)
    if np.any(kxx <= 0):
        raise UndefinedError("undefined Berezin transform: zero kernel function")
    return np.einsum("im,ij,jm->m", W.conj(), op.coeffs, W) / kxx


def multiplier_adjoint_action(basis: SpanBasis, values) -> SpanOperator:
    """``(M_m)^*`` on the span: ``k_{x_i} -> conj(m(x_i)) k_{x_i}``."""
    m = np.asarray(values, dtype=complex).reshape(-1)
    if len(m) != len(basis):
        raise ValidationError(f"{len(m)} symbol values for a basis of size {len(basis)}")
    ginv = basis.solve(np.eye(len(basis), dtype=complex))
    return SpanOperator(basis, np.diag(m.conj()) @ ginv)


def max_point_value(basis: SpanBasis, y) -> float:
    """``sup Re f(y)`` over the unit ball of the span, ``sqrt(w^H G^{-1} w)``."""
    w = basis.column(y)
    return math.sqrt(max(0.0, float(np.real(w.conj() @ basis.solve(w)))))


@dataclass(frozen=True)
class Extremal:
    func: Callable
    value: float
    coeffs: np.ndarray = field(repr=False)


def extremal_function(spec: Kernel, z, w) -> Extremal:
    """Unit-norm ``F`` vanishing at ``z`` with the largest ``Re F(w)``.

    ``F = (k_w - k_w(z) k_z / K(z, z)) / (||k_w|| delta(z, w))`` and
    ``F(w) = ||k_w|| delta(z, w)``.
    """
    d = delta(spec, z, w)
    if d == 0.0:
        raise DegenerateError("the points are indistinguishable (delta = 0); no extremal function")
    kzz = float(spec.diag(z))
    kww = float(spec.diag(w))
    kzw = complex(spec(z, w))  # k_w(z)
    scale = 1.0 / (math.sqrt(kww) * d)
    a = np.array([-kzw / kzz * scale, scale], dtype=complex)

    def F(zeta):
        return a[0] * spec(zeta, z) + a[1] * spec(zeta, w)

    G = np.array([[kzz, complex(spec(z, w))], [complex(spec(w, z)), kww]])
    norm2 = float(np.real(a.conj() @ G @ a))
    if abs(norm2 - 1.0) > 1e-12 * max(1.0, 1.0 / d**2):
        raise InconsistencyError(f"extremal function has squared norm {norm2}, not 1")
    if abs(complex(F(z))) > 1e-12 * max(1.0, abs(a[1]) * math.sqrt(kzz * kww)):
        raise InconsistencyError("extremal function does not vanish at z")
    return Extremal(F, math.sqrt(kww) * d, a)


def hankel_gap_norm(basis: SpanBasis, i: int, j: int, p=math.inf) -> float:
    """Norm of ``L_x - L_y`` for ``L_a = k^_a (x) k^_a``.

    Computed from ``beta^* beta = P_x + P_y - P_x P_y - P_y P_x`` (reading
    ``beta_y^* beta_x`` as ``P_y P_x``): the result is the Schatten-``p`` norm
    of ``(beta^* beta)^{1/2}``.  See :func:`hankel_form_norm` for the norm of
    the bilinear form itself.
    """
    if i == j:
        return 0.0
    P, Q = projection(basis, i), projection(basis, j)
    BB = P + Q - P @ Q - Q @ P
    M = BB.matrix()
    ev = np.linalg.eigvalsh(0.5 * (M + M.conj().T))
    s = np.sqrt(np.maximum(ev, 0.0))
    if p == math.inf:
        return float(np.max(s))
    return float(np.sum(s**p) ** (1.0 / p))


def hankel_form_norm(basis: SpanBasis, i: int, j: int) -> float:
    """Norm of the bilinear form ``(f, g) -> f(x)g(x)/K(x,x) - f(y)g(y)/K(y,y)``.

    In orthonormal coordinates the form is ``u^T (a a^T - b b^T) v`` where
    ``a, b`` represent evaluation at the two points; its norm is the largest
    singular value of that symmetric matrix.
    """
    L = basis.chol
    n = len(basis)

    def evaluation(k):
        # coordinates of the functional f -> f(x_k)/sqrt(K(x_k,x_k)) on the orthonormal basis
        e = np.zeros(n, dtype=complex)
        e[k] = 1.0
        v = L.conj().T @ e  # k_{x_k} in orthonormal coordinates
        return v.conj() / math.sqrt(float(np.real(basis.gram[k, k])))

    a, b = evaluation(i), evaluation(j)
    B = np.outer(a, a) - np.outer(b, b)
    return float(np.linalg.svd(B, compute_uv=False)[0])


@dataclass(frozen=True)
class VariationResult:
    value: float
    converged: bool
    bound: Optional[float] = None
    length: Optional[LengthResult] = field(default=None, repr=False)


def variation_along_curve(op: SpanOperator, curve: Curve, check: bool = True,
                          tol: float = REFINE_TOL) -> VariationResult:
    """``sup sum |A^(g(t_i)) - A^(g(t_{i+1}))|`` over dyadic partitions.

    With ``check`` the bound ``Var <= 2 ||A|| l_delta(g)`` is verified.
    """
    m = curve.samples
    prev = None
    value = None
    converged = False
    for _ in range(curve.max_level + 1):
        pts = curve(np.linspace(0.0, 1.0, m + 1))
        b = berezin_many(op, pts)
        value = float(math.fsum(np.abs(np.diff(b))))
        if prev is not None and abs(value - prev) < tol:
            converged = True
            break
        prev = value
        m *= 2
    if not check:
        return VariationResult(value, converged)
    length = curve_length("delta", curve, spec=op.basis.spec)
    bound = 2.0 * schatten_norm(op) * length.value
    if value > bound + 1e-8:
        raise InconsistencyError(f"variation {value!r} exceeds 2||A|| l_delta = {bound!r}")
    return VariationResult(value, converged, bound, length)
