"""Kernel families and kernel algebra.

Conventions
-----------
``K(x, y) = k_y(x) = <k_y, k_x>``.  The kernel is holomorphic in ``x`` and
antiholomorphic in ``y``.  For scalar domains points are complex numbers (or
complex arrays, evaluated elementwise with broadcasting); for the ball they
are arrays whose last axis has length ``n``.  Direct sums take
:class:`Tagged` points and custom kernels take the points they were built on.

Families exposing derivative data implement

* ``dx(x, y)``   -- ``d/dx K(x, y)`` (holomorphic derivative in the first slot)
* ``dxdy(x, y)`` -- ``d/dx d/d(conj y) K(x, y)``

from which ``d/d(conj y) K(x, y) = conj(dx(y, x))``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, NamedTuple, Optional, Sequence

import numpy as np
from scipy import integrate

from .errors import (
    BranchError,
    DomainError,
    TruncationError,
    UndefinedError,
    UnsupportedError,
    ValidationError,
)

PSD_RTOL = 1e-10
HERMITIAN_RTOL = 1e-14


class Tagged(NamedTuple):
    """A point of a disjoint union: ``side`` is ``"left"`` or ``"right"``."""

    side: str
    point: object


class Kernel:
    """Base class.  Subclasses set ``domain`` and implement ``_eval``."""

    domain = "disk"
    dim = 1
    complete_np = False
    power_safe = False
    has_derivatives = False
    has_log = False

    # -- points -----------------------------------------------------------
    def coerce(self, x):
        return np.asarray(x, dtype=complex)

    def check(self, x):
        if self.domain == "disk":
            bad = ~(np.abs(x) < 1.0)
            if np.any(bad):
                v = complex(np.asarray(x)[bad].flat[0])
                raise DomainError(f"coordinate {v} is not in the open unit disk")
        elif self.domain == "plane":
            bad = ~np.isfinite(x)
            if np.any(bad):
                raise DomainError("non-finite coordinate")

    def __call__(self, x, y):
        x = self.coerce(x)
        y = self.coerce(y)
        self.check(x)
        self.check(y)
        return self._eval(x, y)

    def _eval(self, x, y):
        raise NotImplementedError

    def diag(self, x):
        """``K(x, x)`` as a real array."""
        return np.real(self(x, x))

    def log_eval(self, x, y):
        """Analytic ``log K(x, y)`` for families that have one."""
        raise UnsupportedError(f"{self!r} has no closed-form logarithm")

    def dx(self, x, y):
        raise UnsupportedError(f"{self!r} exposes no derivative data")

    def dxdy(self, x, y):
        raise UnsupportedError(f"{self!r} exposes no derivative data")

    def dy(self, x, y):
        """``d/d(conj y) K(x, y)``."""
        return np.conj(self.dx(y, x))

    # -- matrices ---------------------------------------------------------
    @property
    def vectorized(self):
        return self.domain in ("disk", "plane", "ball")

    def as_points(self, points):
        if self.vectorized:
            pts = np.asarray(points, dtype=complex)
            if self.domain == "ball":
                pts = pts.reshape(-1, self.dim)
            else:
                pts = pts.reshape(-1)
            return pts
        return list(points)

    def matrix(self, xs, ys):
        """``[K(xs[i], ys[j])]``."""
        if self.vectorized:
            xs = self.as_points(xs)
            ys = self.as_points(ys)
            return np.asarray(self(xs[:, None], ys[None, :]), dtype=complex)
        out = np.empty((len(xs), len(ys)), dtype=complex)
        for i, a in enumerate(xs):
            for j, b in enumerate(ys):
                out[i, j] = self(a, b)
        return out


# ---------------------------------------------------------------------------
# families of the form K(x, y) = f(<x, y>)
# ---------------------------------------------------------------------------


class _InnerProductKernel(Kernel):
    """Kernels ``K(x, y) = f(u)`` with ``u = x conj(y)``."""

    has_derivatives = True
    has_log = True

    def _u(self, x, y):
        return x * np.conj(y)

    def _eval(self, x, y):
        return self.f(self._u(x, y))

    def log_eval(self, x, y):
        x = self.coerce(x)
        y = self.coerce(y)
        self.check(x)
        self.check(y)
        return self.logf(self._u(x, y))

    def dx(self, x, y):
        x = self.coerce(x)
        y = self.coerce(y)
        return np.conj(y) * self.f1(self._u(x, y))

    def dxdy(self, x, y):
        x = self.coerce(x)
        y = self.coerce(y)
        u = self._u(x, y)
        return self.f1(u) + u * self.f2(u)


_LOGSERIES_TERMS = 80
_LOGSERIES_SWITCH = 0.5


def _logseries_coeffs(order):
    # coefficients (highest degree first) of d^order/du^order sum u^n/(n+1)
    n = np.arange(_LOGSERIES_TERMS + order, dtype=float)
    c = 1.0 / (n + 1.0)
    for _ in range(order):
        c = c[1:] * np.arange(1, len(c))
    return c[::-1].copy()


_LOGSERIES = [_logseries_coeffs(k) for k in range(3)]


@dataclass(frozen=True)
class DHB(_InnerProductKernel):
    """Dirichlet-Hardy-Bergman scale ``(1 - x conj(y))^(-alpha)`` on the disk.

    ``alpha = 0`` is the Dirichlet kernel ``(1/u) log(1/(1-u))``, ``alpha = 1``
    the Hardy (Szego) kernel and ``alpha = 2`` the Bergman kernel.
    """

    alpha: float = 1.0

    domain = "disk"
    power_safe = True

    def __post_init__(self):
        if not (self.alpha >= 0 and math.isfinite(self.alpha)):
            raise ValidationError(f"DHB requires alpha >= 0, got {self.alpha}")

    @property
    def complete_np(self):
        return self.alpha <= 1

    def f(self, u):
        if self.alpha == 0:
            return self._dirichlet(u, 0)
        return (1.0 - u) ** (-self.alpha)

    def f1(self, u):
        if self.alpha == 0:
            return self._dirichlet(u, 1)
        a = self.alpha
        return a * (1.0 - u) ** (-a - 1.0)

    def f2(self, u):
        if self.alpha == 0:
            return self._dirichlet(u, 2)
        a = self.alpha
        return a * (a + 1.0) * (1.0 - u) ** (-a - 2.0)

    def logf(self, u):
        if self.alpha == 0:
            return np.log(self._dirichlet(u, 0))
        return -self.alpha * np.log(1.0 - u)

    @staticmethod
    def _dirichlet(u, order):
        u = np.asarray(u, dtype=complex)
        small = np.abs(u) < _LOGSERIES_SWITCH
        series = np.polyval(_LOGSERIES[order], u)
        with np.errstate(divide="ignore", invalid="ignore"):
            v = np.where(small, 0.5, u)
            L = -np.log(1.0 - v)
            if order == 0:
                closed = L / v
            elif order == 1:
                closed = 1.0 / (v * (1.0 - v)) - L / v**2
            else:
                closed = (
                    -(1.0 - 2.0 * v) / (v**2 * (1.0 - v) ** 2)
                    - 1.0 / (v**2 * (1.0 - v))
                    + 2.0 * L / v**3
                )
        return np.where(small, series, closed)


@dataclass(frozen=True)
class Fock(_InnerProductKernel):
    """Fock-Segal-Bargmann kernel ``exp(beta x conj(y))`` on the plane."""

    beta: float = 1.0

    domain = "plane"
    power_safe = True

    def __post_init__(self):
        if not (self.beta > 0 and math.isfinite(self.beta)):
            raise ValidationError(f"Fock requires beta > 0, got {self.beta}")

    def f(self, u):
        return np.exp(self.beta * u)

    def f1(self, u):
        return self.beta * np.exp(self.beta * u)

    def f2(self, u):
        return self.beta**2 * np.exp(self.beta * u)

    def logf(self, u):
        return self.beta * u


@dataclass(frozen=True)
class DruryArveson(_InnerProductKernel):
    """``1 / (1 - <x, y>)`` on the unit ball of C^n."""

    n: int = 1

    domain = "ball"
    power_safe = True
    complete_np = True

    def __post_init__(self):
        if int(self.n) != self.n or self.n < 1:
            raise ValidationError(f"Drury-Arveson requires n >= 1, got {self.n}")

    @property
    def dim(self):
        return self.n

    @property
    def has_derivatives(self):
        return self.n == 1

    def coerce(self, x):
        x = np.asarray(x, dtype=complex)
        if self.n == 1 and (x.ndim == 0 or x.shape[-1] != 1):
            x = x[..., None]
        if x.shape[-1] != self.n:
            raise DomainError(f"expected points with {self.n} coordinates, got shape {x.shape}")
        return x

    def check(self, x):
        norm2 = np.sum(np.abs(x) ** 2, axis=-1)
        bad = ~(norm2 < 1.0)
        if np.any(bad):
            idx = np.argwhere(bad)[0]
            v = np.asarray(x)[tuple(idx)]
            raise DomainError(f"coordinate {v.tolist()} is not in the open unit {self.n}-ball")

    def _u(self, x, y):
        return np.sum(x * np.conj(y), axis=-1)

    def dx(self, x, y):
        if self.n != 1:
            raise UnsupportedError("derivative data is only exposed for n = 1")
        x = self.coerce(x)
        y = self.coerce(y)
        return np.conj(y[..., 0]) * self.f1(self._u(x, y))

    def dxdy(self, x, y):
        if self.n != 1:
            raise UnsupportedError("derivative data is only exposed for n = 1")
        x = self.coerce(x)
        y = self.coerce(y)
        u = self._u(x, y)
        return self.f1(u) + u * self.f2(u)

    def f(self, u):
        return 1.0 / (1.0 - u)

    def f1(self, u):
        return 1.0 / (1.0 - u) ** 2

    def f2(self, u):
        return 2.0 / (1.0 - u) ** 3

    def logf(self, u):
        return -np.log(1.0 - u)


@dataclass(frozen=True, eq=False)
class RadialBergman(_InnerProductKernel):
    """Truncated series ``sum_{n<=N} (x conj(y))^n / moments[n]``.

    ``moments[n]`` is the squared norm of ``z^n`` in a radially weighted
    Bergman space; see :func:`moments_from_weight`.
    """

    moments: tuple = ()
    tail_tol: float = 1e-8

    domain = "disk"
    has_log = False

    def __post_init__(self):
        m = np.asarray(self.moments, dtype=float)
        if m.ndim != 1 or len(m) < 3:
            raise ValidationError("radial Bergman kernel needs at least 3 moments (N >= 2)")
        if np.any(~(m > 0)) or not np.all(np.isfinite(m)):
            raise ValidationError("moments must be finite and positive")
        object.__setattr__(self, "moments", tuple(float(v) for v in m))
        inv = 1.0 / m
        n = np.arange(len(m), dtype=float)
        object.__setattr__(self, "_c0", inv[::-1].copy())
        object.__setattr__(self, "_c1", (inv[1:] * n[1:])[::-1].copy())
        object.__setattr__(self, "_c2", (inv[2:] * n[2:] * (n[2:] - 1))[::-1].copy())

    def tail_bound(self, u):
        """Estimated |tail| of the series beyond the last retained term."""
        m = self.moments
        N = len(m) - 1
        a = np.abs(np.asarray(u, dtype=complex))
        q = a * m[N - 1] / m[N]
        last = a**N / m[N]
        with np.errstate(divide="ignore", invalid="ignore"):
            tail = np.where(q < 1.0, last * q / (1.0 - q), np.inf)
        return tail

    def _checked(self, u, value):
        tail = self.tail_bound(u)
        scale = np.maximum(np.abs(value), 1e-300)
        if np.any(tail > self.tail_tol * scale):
            worst = float(np.max(tail / scale))
            raise TruncationError(
                f"estimated relative truncation tail {worst:.3g} exceeds {self.tail_tol:g}; "
                "use more moments or points further from the boundary"
            )
        return value

    def f(self, u):
        return self._checked(u, np.polyval(self._c0, u))

    def f1(self, u):
        return np.polyval(self._c1, u)

    def f2(self, u):
        return np.polyval(self._c2, u)


def moments_from_weight(v: Callable[[float], float], N: int = 512, rtol: float = 1e-10):
    """Moments ``||z^n||^2 = 2 pi int_0^1 r^(2n+1) v(r) dr`` for ``n = 0..N``."""
    out = []
    for n in range(N + 1):
        val, _ = integrate.quad(
            lambda r: r ** (2 * n + 1) * v(r), 0.0, 1.0, epsabs=0.0, epsrel=rtol, limit=200
        )
        out.append(2.0 * math.pi * val)
    return out


def radial_weight_bergman(moments: Sequence[float], tail_tol: float = 1e-8) -> RadialBergman:
    return RadialBergman(tuple(moments), tail_tol)


@dataclass(frozen=True)
class FiniteLengthExample(Kernel):
    """``(2 - x - conj(y)) / (1 - x conj(y))`` on the disk.

    Equal to ``1 + (1-x) conj(1-y) / (1 - x conj(y))``, so positive definite;
    the radius [0, 1) has finite length for its Bergman-style metric.
    """

    domain = "disk"
    has_derivatives = True

    def _eval(self, x, y):
        yc = np.conj(y)
        return (2.0 - x - yc) / (1.0 - x * yc)

    def dx(self, x, y):
        x = self.coerce(x)
        yc = np.conj(self.coerce(y))
        return -((1.0 - yc) ** 2) / (1.0 - x * yc) ** 2

    def dxdy(self, x, y):
        x = self.coerce(x)
        yc = np.conj(self.coerce(y))
        return 2.0 * (1.0 - yc) * (1.0 - x) / (1.0 - x * yc) ** 3


# ---------------------------------------------------------------------------
# kernel algebra
# ---------------------------------------------------------------------------


def _same_domain(a: Kernel, b: Kernel):
    if a.domain != b.domain or a.dim != b.dim:
        raise ValidationError(f"kernels live on different domains: {a!r} vs {b!r}")


@dataclass(frozen=True)
class Product(Kernel):
    """Pointwise product ``K1 K2`` (restriction of the tensor product to the diagonal)."""

    left: Kernel
    right: Kernel

    def __post_init__(self):
        _same_domain(self.left, self.right)

    @property
    def domain(self):
        return self.left.domain

    @property
    def dim(self):
        return self.left.dim

    @property
    def power_safe(self):
        return self.left.power_safe and self.right.power_safe

    @property
    def has_derivatives(self):
        return self.left.has_derivatives and self.right.has_derivatives

    @property
    def has_log(self):
        return self.left.has_log and self.right.has_log

    def coerce(self, x):
        return self.left.coerce(x)

    def check(self, x):
        self.left.check(x)

    def _eval(self, x, y):
        return self.left._eval(x, y) * self.right._eval(x, y)

    def log_eval(self, x, y):
        return self.left.log_eval(x, y) + self.right.log_eval(x, y)

    def dx(self, x, y):
        L, R = self.left, self.right
        return L.dx(x, y) * R(x, y) + L(x, y) * R.dx(x, y)

    def dxdy(self, x, y):
        L, R = self.left, self.right
        return (
            L.dxdy(x, y) * R(x, y)
            + L.dx(x, y) * R.dy(x, y)
            + L.dy(x, y) * R.dx(x, y)
            + L(x, y) * R.dxdy(x, y)
        )


@dataclass(frozen=True)
class Power(Kernel):
    """``K^exponent``.

    Uses the family's closed-form logarithm when available, otherwise the
    principal branch with a right-half-plane guard.
    """

    base: Kernel
    exponent: float

    def __post_init__(self):
        p = self.exponent
        if not (p > 0 and math.isfinite(p)):
            raise ValidationError(f"power exponent must be > 0, got {p}")
        if not self._integral and not self.base.power_safe:
            raise UnsupportedError(
                f"non-integer powers are only exposed for DHB, Fock and Drury-Arveson bases, not {self.base!r}"
            )

    @property
    def _integral(self):
        return float(self.exponent).is_integer()

    @property
    def domain(self):
        return self.base.domain

    @property
    def dim(self):
        return self.base.dim

    @property
    def power_safe(self):
        return self.base.power_safe

    @property
    def has_derivatives(self):
        return self.base.has_derivatives

    has_log = True

    def coerce(self, x):
        return self.base.coerce(x)

    def check(self, x):
        self.base.check(x)

    def _log_base(self, x, y):
        if self.base.has_log:
            return self.base.log_eval(x, y)
        k = self.base._eval(x, y)
        if np.any(np.real(k) <= 0):
            raise BranchError(
                "kernel values leave the right half-plane; the power would cross the branch cut of log"
            )
        return np.log(k)

    def _eval(self, x, y):
        if self._integral:
            return self.base._eval(x, y) ** int(self.exponent)
        return np.exp(self.exponent * self._log_base(x, y))

    def log_eval(self, x, y):
        x = self.coerce(x)
        y = self.coerce(y)
        return self.exponent * self._log_base(x, y)

    def dx(self, x, y):
        p = self.exponent
        k = self.base(x, y)
        return p * self(x, y) / k * self.base.dx(x, y)

    def dxdy(self, x, y):
        p = self.exponent
        b = self.base
        k = b(x, y)
        val = self(x, y)
        return p * (p - 1.0) * val / k**2 * b.dx(x, y) * b.dy(x, y) + p * val / k * b.dxdy(x, y)


@dataclass(frozen=True)
class Scaling:
    """A nonvanishing function ``G`` used to rescale a kernel."""

    name: str
    func: Callable
    deriv: Optional[Callable] = None
    log: Optional[Callable] = None

    def __call__(self, z):
        return self.func(z)


def _first_coord(x, kernel):
    return x[..., 0] if kernel.domain == "ball" else x


def exp_poly_scaling(coeffs, name="exp-poly") -> Scaling:
    """``G(z) = exp(p(z))`` for a polynomial ``p`` (coefficients low to high)."""
    c = np.asarray(coeffs, dtype=complex)
    hi = c[::-1]
    dhi = np.polyder(hi) if len(hi) > 1 else np.array([0j])
    return Scaling(
        name,
        lambda z: np.exp(np.polyval(hi, z)),
        lambda z: np.polyval(dhi, z) * np.exp(np.polyval(hi, z)),
        lambda z: np.polyval(hi, z),
    )


BUILTIN_SCALINGS = {
    "one": Scaling("one", lambda z: np.ones_like(z), lambda z: np.zeros_like(z), lambda z: np.zeros_like(z)),
    "exp": Scaling("exp", np.exp, np.exp, lambda z: z),
    "shift": Scaling("shift", lambda z: 2.0 + z, lambda z: np.ones_like(z), None),
    "exp-quadratic": exp_poly_scaling([0.3, -0.7 + 0.2j, 0.5j], "exp-quadratic"),
}


@dataclass(frozen=True)
class Rescale(Kernel):
    """``G(x) conj(G(y)) K(x, y)`` for a nonvanishing ``G``."""

    base: Kernel
    g: Scaling

    @property
    def domain(self):
        return self.base.domain

    @property
    def dim(self):
        return self.base.dim

    @property
    def has_derivatives(self):
        return self.base.has_derivatives and self.g.deriv is not None and self.base.domain != "ball"

    @property
    def has_log(self):
        return self.base.has_log and self.g.log is not None

    @property
    def power_safe(self):
        return self.has_log and self.base.power_safe

    def coerce(self, x):
        return self.base.coerce(x)

    def check(self, x):
        self.base.check(x)
        gx = self.g(_first_coord(x, self.base))
        if np.any(gx == 0):
            raise DomainError(f"scaling function {self.g.name!r} vanishes at a requested point")

    def _eval(self, x, y):
        gx = self.g(_first_coord(x, self.base))
        gy = self.g(_first_coord(y, self.base))
        return gx * np.conj(gy) * self.base._eval(x, y)

    def log_eval(self, x, y):
        x = self.coerce(x)
        y = self.coerce(y)
        lx = self.g.log(_first_coord(x, self.base))
        ly = self.g.log(_first_coord(y, self.base))
        return lx + np.conj(ly) + self.base.log_eval(x, y)

    def dx(self, x, y):
        x = self.coerce(x)
        y = self.coerce(y)
        g, b = self.g, self.base
        gy = np.conj(g(y))
        return g.deriv(x) * gy * b(x, y) + g(x) * gy * b.dx(x, y)

    def dxdy(self, x, y):
        x = self.coerce(x)
        y = self.coerce(y)
        g, b = self.g, self.base
        A, A1 = g(x), g.deriv(x)
        B, B1 = np.conj(g(y)), np.conj(g.deriv(y))
        return A1 * B1 * b(x, y) + A1 * B * b.dy(x, y) + A * B1 * b.dx(x, y) + A * B * b.dxdy(x, y)


@dataclass(frozen=True)
class DirectSum(Kernel):
    """Block kernel on the disjoint union of the operands' domains."""

    left: Kernel
    right: Kernel

    domain = "sum"

    def coerce(self, x):
        if isinstance(x, Tagged):
            return x
        if isinstance(x, (tuple, list)) and len(x) == 2 and x[0] in ("left", "right"):
            return Tagged(x[0], x[1])
        raise DomainError(f"direct-sum points must be tagged 'left' or 'right', got {x!r}")

    def check(self, x):
        if x.side not in ("left", "right"):
            raise DomainError(f"unknown direct-sum side {x.side!r}")

    def _eval(self, x, y):
        if x.side != y.side:
            return np.complex128(0.0)
        k = self.left if x.side == "left" else self.right
        return np.complex128(k(x.point, y.point))

    def log_eval(self, x, y):
        x, y = self.coerce(x), self.coerce(y)
        if x.side != y.side:
            raise UndefinedError("log of a vanishing cross kernel")
        k = self.left if x.side == "left" else self.right
        return k.log_eval(x.point, y.point)


@dataclass(frozen=True, eq=False)
class Custom(Kernel):
    """An explicit Hermitian PSD matrix on a finite list of points."""

    points: tuple
    entries: np.ndarray = field(repr=False)

    domain = "finite"

    def __post_init__(self):
        pts = tuple(complex(p) for p in self.points)
        m = np.asarray(self.entries, dtype=complex)
        if m.shape != (len(pts), len(pts)):
            raise ValidationError(f"matrix shape {m.shape} does not match {len(pts)} points")
        if len(set(pts)) != len(pts):
            raise ValidationError("custom kernel points must be distinct")
        scale = max(np.max(np.abs(m)), 1e-300)
        if np.max(np.abs(m - m.conj().T)) > HERMITIAN_RTOL * scale * 10:
            raise ValidationError("custom kernel matrix is not Hermitian")
        m = 0.5 * (m + m.conj().T)
        tr = float(np.real(np.trace(m)))
        if len(pts) and np.min(np.linalg.eigvalsh(m)) < -PSD_RTOL * max(abs(tr), 1e-300):
            raise ValidationError("custom kernel matrix is not positive semidefinite")
        object.__setattr__(self, "points", pts)
        object.__setattr__(self, "entries", m)

    def coerce(self, x):
        return complex(x)

    def check(self, x):
        if x not in self.points:
            raise DomainError(f"coordinate {x} is not one of the custom kernel's points")

    def _eval(self, x, y):
        return self.entries[self.points.index(x), self.points.index(y)]


# ---------------------------------------------------------------------------
# public operations
# ---------------------------------------------------------------------------


def product(a: Kernel, b: Kernel) -> Product:
    return Product(a, b)


def power(base: Kernel, exponent: float) -> Power:
    return Power(base, exponent)


def rescale(base: Kernel, g) -> Rescale:
    if isinstance(g, str):
        try:
            g = BUILTIN_SCALINGS[g]
        except KeyError:
            raise ValidationError(f"unknown scaling function {g!r}; choose from {sorted(BUILTIN_SCALINGS)}")
    elif callable(g) and not isinstance(g, Scaling):
        g = Scaling(getattr(g, "__name__", "G"), g)
    return Rescale(base, g)


def direct_sum(a: Kernel, b: Kernel) -> DirectSum:
    return DirectSum(a, b)


def kernel_eval(spec: Kernel, x, y) -> complex:
    return complex(spec(x, y))


@dataclass(frozen=True, eq=False)
class GramMatrix:
    points: list
    entries: np.ndarray
    min_eig: float
    is_psd: bool


def _distinct(spec, points):
    n = len(points)
    if spec.vectorized:
        pts = spec.as_points(points)
        flat = pts.reshape(n, -1)
        for i in range(n):
            if np.any(np.all(flat[i] == flat[i + 1 :], axis=-1)):
                raise ValidationError(f"duplicate point at index {i}")
    else:
        for i in range(n):
            for j in range(i + 1, n):
                if _same_point(points[i], points[j]):
                    raise ValidationError(f"duplicate point at index {i}")


def _same_point(a, b):
    if isinstance(a, Tagged) and isinstance(b, Tagged):
        return a.side == b.side and _same_point(a.point, b.point)
    if isinstance(a, Tagged) or isinstance(b, Tagged):
        return False
    return np.array_equal(np.asarray(a), np.asarray(b))


def gram(spec: Kernel, points) -> GramMatrix:
    """Gram matrix ``entries[i, j] = K(points[i], points[j])`` with a PSD verdict."""
    points = spec.as_points(points)
    _distinct(spec, points)
    m = spec.matrix(points, points)
    scale = max(float(np.max(np.abs(m))), 1e-300)
    if np.max(np.abs(m - m.conj().T)) > 64 * HERMITIAN_RTOL * scale:
        raise ValidationError("Gram matrix is not Hermitian; the kernel is misconfigured")
    eig = np.linalg.eigvalsh(0.5 * (m + m.conj().T))
    tr = float(np.sum(np.real(np.diag(m))))
    min_eig = float(eig[0])
    return GramMatrix(list(points) if not spec.vectorized else points, m, min_eig, min_eig >= -PSD_RTOL * abs(tr))


@dataclass(frozen=True)
class NormalizedPairing:
    value: complex
    magnitude: float
    phase: float


def _use_log_space(kxx, kyy, mag):
    return (kxx > 1e8) | (kyy > 1e8) | (mag < 1e-6) | (mag > 1.0 - 1e-6)


def pairing_arrays(spec: Kernel, x, y):
    """Vectorized ``K(x,y)/sqrt(K(x,x)K(y,y))`` and its stable magnitude."""
    with np.errstate(over="ignore", invalid="ignore"):
        kxy = np.asarray(spec(x, y), dtype=complex)
        kxx = np.asarray(spec.diag(x), dtype=float)
        kyy = np.asarray(spec.diag(y), dtype=float)
    if np.any(kxx <= 0) or np.any(kyy <= 0):
        raise UndefinedError("undefined pairing: zero kernel function")
    with np.errstate(over="ignore", invalid="ignore"):
        root = np.sqrt(kxx * kyy)
        root = np.where(np.isfinite(root), root, np.sqrt(kxx) * np.sqrt(kyy))
        value = kxy / root
    mag = np.abs(value)
    logmode = _use_log_space(kxx, kyy, mag) | ~np.isfinite(mag)
    if np.any(logmode):
        if spec.has_log:
            lxy = np.asarray(spec.log_eval(x, y), dtype=complex)
            lxx = np.real(spec.log_eval(x, x))
            lyy = np.real(spec.log_eval(y, y))
            logval = np.exp(lxy - 0.5 * lxx - 0.5 * lyy)
            value = np.where(logmode, logval, value)
            mag = np.where(logmode, np.abs(logval), mag)
        else:
            with np.errstate(divide="ignore"):
                lxy = np.log(np.abs(kxy))
            lxx, lyy = np.log(kxx), np.log(kyy)
            mag = np.where(logmode, np.exp(lxy - 0.5 * lxx - 0.5 * lyy), mag)
    return value, mag


def normalized_pairing(spec: Kernel, x, y) -> NormalizedPairing:
    value, mag = pairing_arrays(spec, x, y)
    value, mag = complex(value), float(mag)
    if mag > 1.0 + 1e-12:
        raise ValidationError(f"pairing magnitude {mag} exceeds 1; kernel is not positive definite")
    phase = float(np.angle(value)) % (2.0 * math.pi)
    if phase >= 2.0 * math.pi:
        phase = 0.0
    return NormalizedPairing(value, mag, phase)


def kernel_norm(spec: Kernel, x) -> float:
    """``||k_x|| = sqrt(K(x, x))``."""
    kxx = float(spec.diag(x))
    if kxx < 0:
        raise ValidationError(f"K(x, x) = {kxx} < 0: kernel is not positive semidefinite")
    return math.sqrt(kxx)
