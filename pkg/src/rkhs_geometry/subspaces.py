"""Kernels and distances of multiplier-invariant subspaces and their
orthogonal complements.

For a subspace ``J`` of functions vanishing on ``S`` the complement ``J^perp``
is spanned by the representers of the vanishing functionals (``k_s`` for
``f(s) = 0`` and ``k_s^(1)`` for ``f'(s) = 0``), so

    K_perp(x, y) = v_x^H G_S^{-1} v_y,   K_J = K - K_perp,

with ``(v_x)_a = <k_x, r_a>`` and ``G_S`` the Gram matrix of the representers.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np
from scipy import linalg

from .errors import (
    ConditioningError,
    DegenerateError,
    InconsistencyError,
    UndefinedError,
    UnsupportedError,
    ValidationError,
)
from .kernels import DHB, Kernel, normalized_pairing
from .metrics import delta, rho_disk

ZERO_RTOL = 1e-12


class Subspace:
    """Base class; subclasses provide ``perp(x, y)`` and ``parent``."""

    parent: Kernel

    def perp(self, x, y):
        raise NotImplementedError

    def kernels(self, x, y):
        x = self.parent.coerce(x)
        y = self.parent.coerce(y)
        self.parent.check(x)
        self.parent.check(y)
        K = self.parent._eval(x, y)
        Kp = self.perp(x, y)
        return K - Kp, Kp

    @property
    def J(self) -> Kernel:
        return SubspaceKernel(self, "J")

    @property
    def Jperp(self) -> Kernel:
        return SubspaceKernel(self, "Jperp")


@dataclass(frozen=True, eq=False)
class VanishOn(Subspace):
    """Functions vanishing on ``points`` (to second order where ``orders`` is 2)."""

    parent: Kernel
    points: tuple
    orders: tuple = ()

    def __post_init__(self):
        pts = tuple(complex(p) for p in self.points)
        orders = tuple(int(o) for o in self.orders) or (1,) * len(pts)
        if len(orders) != len(pts):
            raise ValidationError("one order flag per point is required")
        if any(o not in (1, 2) for o in orders):
            raise ValidationError("order flags must be 1 or 2")
        if len(set(pts)) != len(pts):
            raise ValidationError("vanishing points must be distinct")
        if self.parent.domain not in ("disk", "plane"):
            raise UnsupportedError("vanish-on subspaces are implemented for scalar domains")
        if 2 in orders and not self.parent.has_derivatives:
            raise UnsupportedError(f"{self.parent!r} exposes no derivative data for order-2 vanishing")
        arr = np.array(pts, dtype=complex)
        self.parent.check(arr)
        object.__setattr__(self, "points", pts)
        object.__setattr__(self, "orders", orders)
        reps = [("eval", s) for s in pts] + [("deriv", s) for s, o in zip(pts, orders) if o == 2]
        object.__setattr__(self, "_reps", reps)
        G = self._gram()
        tr = float(np.real(np.trace(G)))
        ev = np.linalg.eigvalsh(G)
        if ev[0] < 1e-12 * tr:
            G = G + 1e-12 * tr * np.eye(len(G))
        try:
            factor = linalg.cho_factor(G, lower=True)
        except linalg.LinAlgError:
            raise ConditioningError("representer Gram matrix is singular even after jitter") from None
        object.__setattr__(self, "_gram_S", G)
        object.__setattr__(self, "_factor", factor)

    def _gram(self):
        K = self.parent
        r = len(self._reps)
        G = np.empty((r, r), dtype=complex)
        for a, (ka, sa) in enumerate(self._reps):
            for b, (kb, sb) in enumerate(self._reps):
                if ka == "eval" and kb == "eval":
                    v = K(sa, sb)
                elif ka == "eval":
                    v = np.conj(K.dx(sb, sa))
                elif kb == "eval":
                    v = K.dx(sa, sb)
                else:
                    v = K.dxdy(sa, sb)
                G[a, b] = complex(v)
        return 0.5 * (G + G.conj().T)

    def _vectors(self, x):
        K = self.parent
        return [K._eval(s, x) if kind == "eval" else K.dx(s, x) for kind, s in self._reps]

    def perp(self, x, y):
        Vx = self._vectors(x)
        Vy = self._vectors(y)
        r = len(Vy)
        shape = np.broadcast(np.asarray(Vy[0]), np.asarray(Vy[-1])).shape
        stack = np.stack([np.broadcast_to(v, shape) for v in Vy]).reshape(r, -1)
        W = linalg.cho_solve(self._factor, stack).reshape((r,) + shape)
        out = 0
        for a in range(r):
            out = out + np.conj(Vx[a]) * W[a]
        return out

    def representer_gram(self):
        return self._gram_S.copy()

    def perp_coords(self, x):
        """Coordinates of ``P_perp k_x`` in an orthonormal basis of ``J^perp``."""
        v = np.array([complex(c) for c in self._vectors(self.parent.coerce(x))])
        L = self._factor[0]
        return linalg.solve_triangular(L, v, lower=True)


def _blaschke(zeros, constant):
    zeros = np.asarray(zeros, dtype=complex)

    def theta(z):
        z = np.asarray(z, dtype=complex)
        out = np.full(z.shape, constant, dtype=complex)
        for a in zeros:
            out = out * (z - a) / (1.0 - np.conj(a) * z)
        return out

    return theta


@dataclass(frozen=True, eq=False)
class HardyInner(Subspace):
    """``Theta H^2`` for a finite Blaschke product ``Theta`` on the Hardy space."""

    zeros: tuple
    constant: complex = 1.0
    parent: Kernel = field(default_factory=lambda: DHB(1.0))

    def __post_init__(self):
        if not (isinstance(self.parent, DHB) and self.parent.alpha == 1):
            raise ValidationError("inner-function subspaces need the Hardy kernel DHB(1)")
        z = tuple(complex(a) for a in self.zeros)
        if any(abs(a) >= 1 for a in z):
            raise ValidationError("Blaschke zeros must lie in the open unit disk")
        if abs(abs(complex(self.constant)) - 1.0) > 1e-12:
            raise ValidationError("the constant of an inner function must be unimodular")
        object.__setattr__(self, "zeros", z)
        object.__setattr__(self, "theta", _blaschke(z, complex(self.constant)))

    def kernels(self, x, y):
        x = self.parent.coerce(x)
        y = self.parent.coerce(y)
        self.parent.check(x)
        self.parent.check(y)
        K = self.parent._eval(x, y)
        KJ = self.theta(x) * np.conj(self.theta(y)) * K
        return KJ, K - KJ

    def perp(self, x, y):
        return self.kernels(x, y)[1]

    def perp_coords(self, x):
        """Coordinates of ``P_perp k_x`` in the Takenaka-Malmquist basis
        ``e_k = sqrt(1 - |a_k|^2) / (1 - conj(a_k) z) * prod_{j<k} phi_{a_j}``."""
        x = complex(x)
        out = []
        prefix = 1.0 + 0j
        for a in self.zeros:
            out.append(np.conj(math.sqrt(1.0 - abs(a) ** 2) / (1.0 - np.conj(a) * x) * prefix))
            prefix *= (x - a) / (1.0 - np.conj(a) * x)
        return np.array(out, dtype=complex)


@dataclass(frozen=True, eq=False)
class SubspaceKernel(Kernel):
    """Reproducing kernel of ``J`` or ``J^perp`` as a kernel in its own right."""

    sub: Subspace
    which: str = "J"

    def __post_init__(self):
        if self.which not in ("J", "Jperp"):
            raise ValidationError("which must be 'J' or 'Jperp'")

    @property
    def domain(self):
        return self.sub.parent.domain

    def coerce(self, x):
        return self.sub.parent.coerce(x)

    def check(self, x):
        self.sub.parent.check(x)

    def _eval(self, x, y):
        KJ, Kp = self.sub.kernels(x, y)
        return KJ if self.which == "J" else Kp

    def diag(self, x):
        # values below ZERO_RTOL * K(x, x) are treated as a vanishing kernel function
        v = np.real(self(x, x))
        full = self.sub.parent.diag(x)
        return np.where(v <= ZERO_RTOL * full, 0.0, v)


def subspace_kernels(sub: Subspace, x, y):
    """``(K_J(x, y), K_perp(x, y))``; their sum reproduces ``K``."""
    KJ, Kp = sub.kernels(x, y)
    K = sub.parent(x, y)
    scale = max(1.0, float(np.max(np.abs(K))))
    if np.max(np.abs(KJ + Kp - K)) > 1e-13 * scale:
        raise InconsistencyError("K_J + K_perp does not reproduce K")
    if np.ndim(KJ) == 0:
        return complex(KJ), complex(Kp)
    return KJ, Kp


def coords_sine(wx, wy) -> float:
    """Sine of the angle between two vectors given by coordinates.

    Uses the Lagrange identity ``|a|^2 |b|^2 - |<a, b>|^2 = sum_{i<j} |a_i b_j - a_j b_i|^2``,
    which has no cancellation when the vectors are nearly parallel.
    """
    wx = np.asarray(wx, dtype=complex)
    wy = np.asarray(wy, dtype=complex)
    nx = float(np.sum(np.abs(wx) ** 2))
    ny = float(np.sum(np.abs(wy) ** 2))
    minors = np.outer(wx, wy) - np.outer(wy, wx)
    det = 0.5 * float(np.sum(np.abs(minors) ** 2))
    return min(1.0, math.sqrt(det / (nx * ny)))


def delta_sub(sub: Subspace, which: str, x, y) -> float:
    kern = sub.J if which == "J" else sub.Jperp
    if which not in ("J", "Jperp"):
        raise ValidationError("which must be 'J' or 'Jperp'")
    if which == "Jperp" and hasattr(sub, "perp_coords") and np.ndim(x) == 0 and np.ndim(y) == 0:
        # the complement is finite dimensional; work in orthonormal coordinates
        kx = float(kern.diag(x))
        ky = float(kern.diag(y))
        if kx == 0.0 or ky == 0.0:
            raise UndefinedError("undefined distance: the kernel of Jperp vanishes at a query point")
        return coords_sine(sub.perp_coords(x), sub.perp_coords(y))
    try:
        return delta(kern, x, y)
    except UndefinedError:
        raise UndefinedError(f"undefined distance: the kernel of {which} vanishes at a query point") from None


def _multiplicities(zeros):
    counts = {}
    for a in zeros:
        counts[complex(a)] = counts.get(complex(a), 0) + 1
    return counts


def hardy_inner_delta(zeros, x, y, constant=1.0, check=True):
    """Closed forms for ``Theta H^2`` and its complement.

    ``delta_J = rho(x, y)``.  ``delta_perp`` comes from the explicit
    Takenaka-Malmquist basis of the complement; it must satisfy
    ``delta_perp^2 = (rho^2(x,y) - rho^2(T x, T y)) / (1 - rho^2(T x, T y))``,
    which is checked on squares (the square root of that difference loses
    half the digits when ``delta_perp`` is near 0).

    With ``check`` both are compared against Gram projections of the
    subspace of functions vanishing on the zeros (multiplicity at most 2).
    ``delta_J`` is ``None`` where ``Theta`` vanishes at ``x`` or ``y``.
    """
    sub = HardyInner(tuple(zeros), constant)
    tx = complex(sub.theta(x))
    ty = complex(sub.theta(y))
    r = rho_disk(x, y)
    dJ = None if (tx == 0 or ty == 0) else r
    rt = rho_disk(tx, ty)
    dperp = coords_sine(sub.perp_coords(x), sub.perp_coords(y))
    sq = (r * r - rt * rt) / (1.0 - rt * rt)
    if abs(dperp * dperp - sq) > 1e-12 / max(1.0 - rt * rt, 1e-300):
        raise InconsistencyError(f"delta_perp^2 from the basis {dperp * dperp!r} vs the rho formula {sq!r}")
    if check:
        counts = _multiplicities(zeros)
        if counts and max(counts.values()) <= 2:
            van = VanishOn(DHB(1.0), tuple(counts), tuple(counts.values()))
            if dJ is not None:
                g = delta_sub(van, "J", x, y)
                if abs(g - dJ) > 1e-10:
                    raise InconsistencyError(f"delta_J closed form {dJ!r} vs projection {g!r}")
            g = delta_sub(van, "Jperp", x, y)
            if abs(g - dperp) > 1e-10:
                raise InconsistencyError(f"delta_perp closed form {dperp!r} vs projection {g!r}")
    return dJ, dperp


# ---------------------------------------------------------------------------
# shape invariant
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class ShapeData:
    upsilon: float
    delta_sq: tuple  # (xy, yz, zx)
    triple: complex
    delta_J_sq: float  # delta_J(y, z)^2 for J = functions vanishing at x, derivation-line formula
    delta_J_sq_printed: float  # same numerator over delta_xy delta_xz delta_yz
    delta_J_sq_projection: float
    confirmed: str


def _canonical_product(values):
    out = complex(1.0)
    for v in sorted(values, key=lambda c: (c.real, c.imag)):
        out = out * v
    return out


def shape_invariant(spec: Kernel, x, y, z, tol=1e-10) -> ShapeData:
    """``Upsilon = Re(<k^_x,k^_y><k^_y,k^_z><k^_z,k^_x>)`` and the resulting
    distance in the subspace vanishing at ``x``."""
    pxy = normalized_pairing(spec, y, x).value  # <k^_x, k^_y>
    pyz = normalized_pairing(spec, z, y).value
    pzx = normalized_pairing(spec, x, z).value
    triple = _canonical_product([pxy, pyz, pzx])
    ups = triple.real
    dxy = delta(spec, x, y) ** 2
    dyz = delta(spec, y, z) ** 2
    dzx = delta(spec, z, x) ** 2
    if min(dxy, dyz, dzx) == 0.0:
        raise DegenerateError("two of the three points are indistinguishable")
    num = dxy + dzx + dyz - 2.0 + 2.0 * ups
    derived = num / (dxy * dzx)
    printed = num / math.sqrt(dxy * dzx * dyz)
    proj = delta_sub(VanishOn(spec, (complex(np.asarray(x)),)), "J", y, z) ** 2
    if abs(derived - proj) > tol:
        raise InconsistencyError(f"shape formula gives {derived!r}, projection gives {proj!r}")
    confirmed = "derived" if abs(derived - proj) <= abs(printed - proj) else "printed"
    return ShapeData(ups, (dxy, dyz, dzx), triple, derived, printed, proj, confirmed)


# ---------------------------------------------------------------------------
# monotonicity claims
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class MonotonicityRow:
    x: complex
    y: complex
    delta_J: object
    delta_H: float
    delta_perp: object
    ok: bool


@dataclass(frozen=True)
class MonotonicityReport:
    claim: str
    rows: tuple
    failures: tuple

    @property
    def passed(self):
        return not self.failures


def _maybe(fn):
    try:
        return fn()
    except UndefinedError:
        return None


def monotonicity_report(spec: Kernel, sub: Subspace, pairs: Sequence, slack: float = 1e-12) -> MonotonicityReport:
    """Tabulate ``delta_J, delta_H, delta_perp`` and check the ordering that is
    proved for the family.

    Complete Pick kernels: ``delta_J >= delta_H >= delta_perp``.
    DHB with ``1 <= alpha <= 2`` and a vanish-on subspace: ``delta_J <= delta_H``.
    """
    if sub.parent is not spec and sub.parent != spec:
        raise ValidationError("the subspace belongs to a different kernel")
    if spec.complete_np:
        claim = "np"
    elif isinstance(spec, DHB) and 1.0 <= spec.alpha <= 2.0 and isinstance(sub, VanishOn):
        claim = "bergman"
    else:
        raise UnsupportedError(f"no proved monotonicity claim for {spec!r} with {type(sub).__name__}")
    rows = []
    failures = []
    for x, y in pairs:
        dH = delta(spec, x, y)
        dJ = _maybe(lambda: delta_sub(sub, "J", x, y))
        dP = _maybe(lambda: delta_sub(sub, "Jperp", x, y))
        if claim == "np":
            ok = (dJ is None or dJ >= dH - slack) and (dP is None or dH >= dP - slack)
        else:
            ok = dJ is None or dJ <= dH + slack
        row = MonotonicityRow(complex(x), complex(y), dJ, dH, dP, ok)
        rows.append(row)
        if not ok:
            failures.append(row)
    return MonotonicityReport(claim, tuple(rows), tuple(failures))


# ---------------------------------------------------------------------------
# small-t expansion
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class TSeries:
    t: float
    lhs: float
    rhs: float
    difference: float
    lhs_t6: float
    rhs_t6: float
    lhs_t6_error: float
    rhs_t6_error: float


def _t6_coefficient(f, t0=0.1):
    # (f(t) - 1 + 8t^2 - 32t^4)/t^6 = c6 + O(t^2): two Richardson steps in t^2
    g = [(f(t) - 1.0 + 8.0 * t**2 - 32.0 * t**4) / t**6 for t in (t0, t0 / 2, t0 / 4)]
    r1 = [(4.0 * g[i + 1] - g[i]) / 3.0 for i in range(2)]
    return (16.0 * r1[1] - r1[0]) / 15.0


def t_series_check(t: float) -> TSeries:
    """Compare ``(1-2t^2)^2/(1+2t^2)^2`` with ``(1-t^2)^4/(1+t^2)^4``.

    These are ``1 - delta^2`` for the pair ``(t, -t)`` in ``J^perp`` (functions
    vanishing to second order at 0 in the Bergman space) and in the whole
    space.  Both expand as ``1 - 8t^2 + 32t^4 + c t^6``, with ``c = -96`` and
    ``-88`` respectively; the coefficients are extrapolated numerically.
    """
    if not 0.0 < t < 1.0:
        raise ValidationError("t must lie in (0, 1)")

    def lhs_f(s):
        return (1.0 - 2.0 * s * s) ** 2 / (1.0 + 2.0 * s * s) ** 2

    def rhs_f(s):
        return (1.0 - s * s) ** 4 / (1.0 + s * s) ** 4

    lhs = lhs_f(t)
    rhs = rhs_f(t)
    c_l = _t6_coefficient(lhs_f)
    c_r = _t6_coefficient(rhs_f)
    return TSeries(t, lhs, rhs, lhs - rhs, c_l, c_r, abs(c_l + 96.0) / 96.0, abs(c_r + 88.0) / 88.0)
