"""Distances induced by a kernel, curve lengths, inner distances and the
Riemannian density of ``log K(z, z)``."""
from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np
from scipy import integrate, optimize
from scipy.sparse import coo_matrix
from scipy.sparse.csgraph import dijkstra

from .errors import (
    DomainError,
    InconsistencyError,
    ResolutionError,
    UndefinedError,
    UnsupportedError,
    ValidationError,
)
from .kernels import Kernel, pairing_arrays

METRIC_KINDS = (
    "delta",
    "delta_hat",
    "delta_check",
    "rho_disk",
    "beta_disk",
    "rho_ball",
    "euclidean",
)

REFINE_TOL = 1e-8
DENSITY_RTOL = 1e-6


# ---------------------------------------------------------------------------
# point distances
# ---------------------------------------------------------------------------


def _magnitudes(spec, x, y):
    try:
        _, mag = pairing_arrays(spec, x, y)
    except UndefinedError:
        raise UndefinedError("undefined distance: zero kernel function") from None
    return np.clip(mag, 0.0, 1.0)


def _delta_from_mag(mag):
    return np.sqrt(np.maximum(0.0, (1.0 - mag) * (1.0 + mag)))


def _scalar(v):
    return float(v) if np.ndim(v) == 0 else v


def delta(spec: Kernel, x, y):
    """``sqrt(1 - |<k^_x, k^_y>|^2)``."""
    return _scalar(_delta_from_mag(_magnitudes(spec, x, y)))


def delta_hat(spec: Kernel, x, y):
    """``sqrt(2) sqrt(1 - |<k^_x, k^_y>|)``; lies in ``[0, sqrt 2]``."""
    mag = _magnitudes(spec, x, y)
    return _scalar(math.sqrt(2.0) * np.sqrt(1.0 - mag))


def delta_check(spec: Kernel, x, y):
    """Projective (Fubini-Study) geodesic distance ``arccos |<k^_x, k^_y>|``."""
    mag = _magnitudes(spec, x, y)
    return _scalar(np.arctan2(_delta_from_mag(mag), mag))


def _disk_points(*zs):
    out = []
    for z in zs:
        z = np.asarray(z, dtype=complex)
        if np.any(~(np.abs(z) < 1.0)):
            v = complex(z[~(np.abs(z) < 1.0)].flat[0]) if z.ndim else complex(z)
            raise DomainError(f"coordinate {v} is not in the open unit disk")
        out.append(z)
    return out


def rho_disk(z, w):
    """Pseudohyperbolic distance ``|z - w| / |1 - conj(z) w|``."""
    z, w = _disk_points(z, w)
    return _scalar(np.abs(z - w) / np.abs(1.0 - np.conj(z) * w))


def beta_disk(z, w):
    """Hyperbolic distance ``log((1 + rho)/(1 - rho))``."""
    r = np.asarray(rho_disk(z, w))
    return _scalar(np.log1p(r) - np.log1p(-r))


def _ball_points(n, *zs):
    out = []
    for z in zs:
        z = np.asarray(z, dtype=complex)
        if z.ndim == 0 and n == 1:
            z = z[None]
        if z.shape[-1] != n:
            raise DomainError(f"expected points with {n} coordinates, got shape {z.shape}")
        norm2 = np.sum(np.abs(z) ** 2, axis=-1)
        if np.any(~(norm2 < 1.0)):
            raise DomainError(f"coordinate {z.tolist()} is not in the open unit {n}-ball")
        out.append(z)
    return out


def rho_ball(n: int, z, w):
    """``sqrt(1 - (1-|z|^2)(1-|w|^2)/|1 - <z, w>|^2)`` on the unit ball of C^n."""
    z, w = _ball_points(n, z, w)
    a = 1.0 - np.sum(np.abs(z) ** 2, axis=-1)
    b = 1.0 - np.sum(np.abs(w) ** 2, axis=-1)
    c = np.abs(1.0 - np.sum(z * np.conj(w), axis=-1)) ** 2
    return _scalar(np.sqrt(np.maximum(0.0, 1.0 - a * b / c)))


def metric_function(kind: str, spec: Optional[Kernel] = None, n: int = 1) -> Callable:
    """Vectorized distance ``d(x, y)`` for a metric tag."""
    if kind in ("delta", "delta_hat", "delta_check"):
        if spec is None:
            raise ValidationError(f"metric {kind!r} needs a kernel")
        fn = {"delta": delta, "delta_hat": delta_hat, "delta_check": delta_check}[kind]
        return lambda x, y: fn(spec, x, y)
    if kind == "rho_disk":
        return rho_disk
    if kind == "beta_disk":
        return beta_disk
    if kind == "rho_ball":
        return lambda x, y: rho_ball(n, x, y)
    if kind == "euclidean":
        return lambda x, y: _scalar(np.abs(np.asarray(x, dtype=complex) - np.asarray(y, dtype=complex)))
    raise ValidationError(f"unknown metric {kind!r}; choose from {', '.join(METRIC_KINDS)}")


def _as_metric(metric, spec=None):
    if isinstance(metric, str):
        return metric_function(metric, spec)
    return metric


# ---------------------------------------------------------------------------
# curves and lengths
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class Curve:
    """Parametric path ``t in [0, 1] -> point``.

    ``func`` should accept an array of parameters; scalar-only callables are
    wrapped.  ``derivative`` is optional; tangents otherwise come from
    central differences with step ``1/(8 samples)``.
    """

    func: Callable
    samples: int = 16
    max_level: int = 16
    derivative: Optional[Callable] = None

    def __post_init__(self):
        if self.samples < 2:
            raise ValidationError("a curve needs at least 2 initial samples")

    def __call__(self, t):
        t = np.asarray(t, dtype=float)
        try:
            out = np.asarray(self.func(t), dtype=complex)
            if out.shape[: t.ndim] == t.shape:
                return out
        except (TypeError, ValueError):
            pass
        return np.array([self.func(float(s)) for s in np.ravel(t)], dtype=complex).reshape(
            t.shape + np.shape(self.func(0.0))
        )

    def tangent(self, t):
        if self.derivative is not None:
            return np.asarray(self.derivative(np.asarray(t, dtype=float)), dtype=complex)
        h = 1.0 / (8.0 * self.samples)
        t = np.asarray(t, dtype=float)
        lo = t - h < 0.0
        hi = t + h > 1.0
        central = (self(np.clip(t + h, 0, 1)) - self(np.clip(t - h, 0, 1))) / (2.0 * h)
        # second-order one-sided differences near the ends
        fwd = (-3.0 * self(t) + 4.0 * self(np.minimum(t + h, 1.0)) - self(np.minimum(t + 2 * h, 1.0))) / (2.0 * h)
        bwd = (3.0 * self(t) - 4.0 * self(np.maximum(t - h, 0.0)) + self(np.maximum(t - 2 * h, 0.0))) / (2.0 * h)
        out = np.where(_expand(lo, central), fwd, central)
        return np.where(_expand(hi & ~lo, central), bwd, out)


def _expand(mask, like):
    mask = np.asarray(mask)
    return mask.reshape(mask.shape + (1,) * (np.ndim(like) - mask.ndim))


def segment(a, b, samples=16, max_level=16) -> Curve:
    a = np.asarray(a, dtype=complex)
    b = np.asarray(b, dtype=complex)

    def f(t):
        t = np.asarray(t, dtype=float)
        return a + (t[..., None] if a.ndim else t) * (b - a)

    def df(t):
        t = np.asarray(t, dtype=float)
        return np.broadcast_to(b - a, t.shape + a.shape).astype(complex)

    return Curve(f, samples, max_level, df)


def polyline(points, samples=None, max_level=16) -> Curve:
    """Piecewise-linear curve through ``points`` at equal parameter spacing."""
    pts = np.asarray(points, dtype=complex)
    k = len(pts) - 1
    if k < 1:
        raise ValidationError("a polyline needs at least two vertices")

    def f(t):
        t = np.asarray(t, dtype=float)
        s = np.clip(t * k, 0.0, k)
        i = np.minimum(s.astype(int), k - 1)
        frac = s - i
        return pts[i] + _expand(frac, pts[i]) * (pts[i + 1] - pts[i])

    if samples is None:
        samples = max(2, 1 << int(math.ceil(math.log2(k))))
    return Curve(f, samples, max_level)


@dataclass(frozen=True)
class LengthResult:
    value: float
    error: float
    converged: bool
    samples: int
    history: tuple = field(default=(), repr=False)

    def __float__(self):
        return self.value

    @property
    def status(self):
        return "converged" if self.converged else "unconverged"


def _partition_sum(d, pts):
    steps = np.asarray(d(pts[:-1], pts[1:]), dtype=float)
    return float(math.fsum(steps.ravel()))


def curve_length(metric, curve: Curve, spec: Optional[Kernel] = None, tol: float = REFINE_TOL) -> LengthResult:
    """Length ``sup sum d(g(t_i), g(t_{i+1}))`` by dyadic refinement.

    Stops once successive refinements differ by less than ``tol``.  Refined
    sums must not decrease (triangle inequality); a decrease beyond roundoff
    raises :class:`InconsistencyError`.
    """
    d = _as_metric(metric, spec)
    history = []
    m = curve.samples
    prev = None
    for _ in range(curve.max_level + 1):
        pts = curve(np.linspace(0.0, 1.0, m + 1))
        s = _partition_sum(d, pts)
        history.append(s)
        if prev is not None:
            slack = 1e-9 * max(abs(s), 1.0)
            if s < prev - slack:
                raise InconsistencyError(
                    f"partition sums decreased under refinement ({prev!r} -> {s!r}); "
                    "the distance violates the triangle inequality"
                )
            if abs(s - prev) < tol:
                return LengthResult(s, abs(s - prev), True, m, tuple(history))
        prev = s
        m *= 2
    err = abs(history[-1] - history[-2]) if len(history) > 1 else math.inf
    return LengthResult(history[-1], err, False, m // 2, tuple(history))


# ---------------------------------------------------------------------------
# Riemannian density
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class DensityResult:
    value: float
    finite_difference: float
    analytic: Optional[float]
    fd_error: float
    step: float


def _log_diag(spec, z):
    if spec.has_log:
        return np.real(spec.log_eval(z, z))
    return np.log(spec.diag(z))


def _fd_density(spec, z, h, cond=0.0):
    # fourth-order 9-point Laplacian of u = log K(z, z), divided by 4
    offs = np.array([2, 1, -1, -2], dtype=float) * h
    wts = np.array([-1.0, 16.0, 16.0, -1.0])
    pts = np.concatenate([z + offs, z + 1j * offs, [z]])
    u = _log_diag(spec, pts)
    lap = (wts @ u[:4] + wts @ u[4:8] - 60.0 * u[8]) / (12.0 * h * h)
    # kernels near the boundary circle lose digits in factors like 1 - |z|^2,
    # so the noise in u grows like eps / (1 - |z|)
    noise = np.finfo(float).eps * (float(np.max(np.abs(u))) + cond)
    roundoff = 128.0 * noise / (48.0 * h * h)
    return float(lap) / 4.0, roundoff


def _fd_ladder(spec, z):
    """Finite-difference density on the step ladder ``h 2^k``, ``k = -2..8``,
    with ``h = 1e-3 (1 - |z|)`` on the disk.

    Picks the step whose estimated error (largest difference to a neighbouring
    step plus roundoff) is smallest, and returns ``(value, error estimate, step)``.
    """
    z = complex(z)
    if spec.domain == "disk":
        dist = 1.0 - abs(z)
        h = 1e-3 * dist
    else:
        dist = math.inf
        h = 1e-3
    steps = [h * 2.0**k for k in range(-2, 9) if 2.0 * h * 2.0**k < dist]
    cond = 1.0 / dist if spec.domain == "disk" else 0.0
    vals = [_fd_density(spec, z, s, cond) for s in steps]
    if len(vals) == 1:
        return vals[0][0], math.inf, steps[0]
    if len(vals) == 2:
        return vals[0][0], abs(vals[1][0] - vals[0][0]) + vals[0][1], steps[0]
    # the error at a step is judged against both neighbours, since two
    # adjacent noisy values can agree by accident
    best = None
    for i in range(1, len(vals) - 1):
        err = max(abs(vals[i][0] - vals[i - 1][0]), abs(vals[i + 1][0] - vals[i][0])) + vals[i][1]
        if best is None or err < best[0]:
            best = (err, i)
    err, i = best
    return vals[i][0], err, steps[i]


def _analytic_density(spec, z):
    K = float(spec.diag(z))
    Kx = complex(spec.dx(z, z))
    Kxy = float(np.real(spec.dxdy(z, z)))
    return (Kxy * K - abs(Kx) ** 2) / (K * K)


def bs_density_details(spec: Kernel, z, rtol: float = DENSITY_RTOL) -> DensityResult:
    """Density ``T(z) = d/dz d/dzbar log K(z, z)`` by two independent routes.

    The analytic route uses the kernel's derivative data; the finite-difference
    route uses a 9-point stencil with an adaptive step.  They must agree within
    ``rtol`` relative, or within the finite-difference error estimate when the
    stencil is starved of room near the boundary.
    """
    if spec.domain not in ("disk", "plane") and not (spec.domain == "ball" and spec.dim == 1):
        raise UnsupportedError("the Riemannian density is implemented for scalar domains")
    z = complex(np.asarray(spec.coerce(z)).ravel()[0])
    spec.check(spec.coerce(z))
    fd, fd_err, h = _fd_ladder(spec, z)
    if not spec.has_derivatives:
        return DensityResult(float(fd), float(fd), None, fd_err, h)
    an = _analytic_density(spec, z)
    allowed = max(rtol * abs(an), 10.0 * fd_err)
    if abs(fd - an) > allowed:
        raise InconsistencyError(
            f"density routes disagree at z={z}: analytic {an!r} vs finite difference {fd!r}"
        )
    return DensityResult(float(an), float(fd), float(an), fd_err, h)


def bs_density(spec: Kernel, z) -> float:
    return bs_density_details(spec, z).value


def bs_length(spec: Kernel, curve: Curve, tol: float = 1e-10) -> LengthResult:
    """``int sqrt(T(g(t))) |g'(t)| dt`` by adaptive quadrature."""

    def integrand(t):
        p = complex(np.ravel(curve(np.array(t)))[0])
        v = abs(complex(np.ravel(curve.tangent(np.array(t)))[0]))
        if v == 0.0:
            return 0.0
        return math.sqrt(max(bs_density(spec, p), 0.0)) * v

    def ok(val, err):
        return err <= max(1e-6, 1e3 * tol * max(1.0, abs(val)))

    with warnings.catch_warnings():
        warnings.simplefilter("ignore", integrate.IntegrationWarning)
        val, err = integrate.quad(integrand, 0.0, 1.0, epsabs=tol, epsrel=tol, limit=400)
        ends = [complex(np.ravel(curve(np.array(t)))[0]) for t in (0.0, 1.0)]
        near_edge = spec.domain == "disk" and min(1.0 - abs(e) for e in ends) < 1e-2
        if near_edge or not ok(val, err):
            # near-singular growth at an end (a curve running up to the boundary):
            # quad can converge to the wrong value there, so integrate over
            # pieces graded geometrically towards both ends
            k = np.arange(1, 41)
            edges = np.unique(np.concatenate([[0.0, 0.5, 1.0], 0.5 * 2.0 ** -k, 1.0 - 0.5 * 2.0 ** -k]))
            parts = [integrate.quad(integrand, a, b, epsabs=tol / len(edges), epsrel=tol, limit=100)
                     for a, b in zip(edges[:-1], edges[1:])]
            val = math.fsum(p[0] for p in parts)
            err = math.fsum(p[1] for p in parts)
    return LengthResult(float(val), float(err), ok(val, err), 0)


def length_constant(spec: Kernel, curves, metric="delta"):
    """Least-squares ``c`` with ``l_metric = c * l_BS`` over ``curves``.

    Returns ``(c, max relative residual, [(l_metric, l_BS), ...])``.
    """
    pairs = []
    for g in curves:
        a = curve_length(metric, g, spec=spec).value
        b = bs_length(spec, g).value
        pairs.append((a, b))
    arr = np.array(pairs)
    c = float(arr[:, 0] @ arr[:, 1] / (arr[:, 1] @ arr[:, 1]))
    resid = float(np.max(np.abs(arr[:, 0] - c * arr[:, 1]) / np.maximum(arr[:, 1], 1e-300)))
    return c, resid, pairs


# ---------------------------------------------------------------------------
# inner distance
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class InnerDistance:
    value: float
    graph_value: float
    path: np.ndarray = field(repr=False)
    length: LengthResult = field(repr=False)


def _in_domain(domain, pts):
    if domain in ("disk", "rho_disk", "beta_disk"):
        return np.abs(pts) < 1.0
    return np.isfinite(pts)


def _resample(path, count):
    seg = np.abs(np.diff(path))
    s = np.concatenate([[0.0], np.cumsum(seg)])
    if s[-1] == 0:
        return np.full(count, path[0])
    t = np.linspace(0.0, s[-1], count)
    return np.interp(t, s, path.real) + 1j * np.interp(t, s, path.imag)


def inner_distance(metric, x, y, spec: Optional[Kernel] = None, cells: int = 48,
                   vertices: int = 24, subdivide: int = 8, domain: Optional[str] = None) -> InnerDistance:
    """Approximate ``inf`` of metric lengths of curves from ``x`` to ``y``.

    A grid graph (cells of side ``|y - x| / cells``, aligned with ``y - x``)
    is searched with Dijkstra, edges joining nodes up to two cells apart and
    weighted by the metric; the path is then smoothed by optimizing the
    vertices of a polyline and its length re-measured with
    :func:`curve_length`.
    """
    if cells < 1 or cells > 400:
        raise ValidationError("grid resolution must be between 1 and 400 cells")
    if domain is None:
        if spec is not None:
            domain = spec.domain
        elif isinstance(metric, str):
            domain = "disk" if metric in ("rho_disk", "beta_disk") else "plane"
        else:
            domain = "disk"
    if domain not in ("disk", "plane", "rho_disk", "beta_disk"):
        raise UnsupportedError("inner distances are implemented for scalar domains only")
    d = _as_metric(metric, spec)
    x = complex(x)
    y = complex(y)
    direct = float(d(np.array(x), np.array(y)))
    if x == y:
        return InnerDistance(0.0, 0.0, np.array([x, y]), LengthResult(0.0, 0.0, True, 0))

    h = abs(y - x) / cells
    rot = (y - x) / abs(y - x)
    pad = max(2, cells // 2)
    ii = np.arange(-pad, cells + pad + 1)
    jj = np.arange(-pad - cells // 2, pad + cells // 2 + 1)
    I, J = np.meshgrid(ii, jj, indexing="ij")
    Z = x + h * rot * (I + 1j * J)
    inside = _in_domain(domain, Z)
    ni, nj = Z.shape
    index = -np.ones(Z.shape, dtype=int)
    index[inside] = np.arange(int(inside.sum()))
    nodes = Z[inside]

    src, dst, wts = [], [], []
    for di in range(-2, 3):
        for dj in range(-2, 3):
            if (di, dj) <= (0, 0):
                continue
            a = index[max(0, -di): ni - max(0, di), max(0, -dj): nj - max(0, dj)]
            b = index[max(0, di): ni - max(0, -di) or None, max(0, dj): nj - max(0, -dj) or None]
            ok = (a >= 0) & (b >= 0)
            if not np.any(ok):
                continue
            a, b = a[ok], b[ok]
            w = np.asarray(d(nodes[a], nodes[b]), dtype=float)
            src.append(a)
            dst.append(b)
            wts.append(w)
    src = np.concatenate(src)
    dst = np.concatenate(dst)
    wts = np.maximum(np.concatenate(wts), 1e-300)
    graph = coo_matrix((wts, (src, dst)), shape=(len(nodes), len(nodes))).tocsr()
    s_idx = index[pad, pad + cells // 2]
    t_idx = index[pad + cells, pad + cells // 2]
    if s_idx < 0 or t_idx < 0:
        raise ResolutionError("endpoints do not fall on the search grid")
    dist, pred = dijkstra(graph, directed=False, indices=s_idx, return_predecessors=True)
    if not np.isfinite(dist[t_idx]):
        raise ResolutionError(
            f"grid with {cells} cells cannot connect the points inside the domain; refine the grid"
        )
    chain = [t_idx]
    while chain[-1] != s_idx:
        chain.append(pred[chain[-1]])
    path = nodes[np.array(chain[::-1])]
    path[0], path[-1] = x, y

    poly = _resample(path, vertices)
    poly[0], poly[-1] = x, y
    tt = np.linspace(0.0, 1.0, subdivide + 1)[:-1]

    def fine(p):
        pts = (p[:-1, None] + tt[None, :] * (p[1:] - p[:-1])[:, None]).ravel()
        return np.append(pts, p[-1])

    def objective(v):
        p = np.concatenate([[x], v[0::2] + 1j * v[1::2], [y]])
        q = fine(p)
        if not np.all(_in_domain(domain, q)):
            return 1e6
        try:
            return float(np.sum(d(q[:-1], q[1:])))
        except DomainError:
            return 1e6

    inner = poly[1:-1]
    v0 = np.empty(2 * len(inner))
    v0[0::2], v0[1::2] = inner.real, inner.imag
    res = optimize.minimize(objective, v0, method="L-BFGS-B", options={"maxiter": 400})
    v = res.x if res.fun <= objective(v0) else v0
    best = np.concatenate([[x], v[0::2] + 1j * v[1::2], [y]])

    length = curve_length(d, polyline(best))
    value = length.value
    if value < direct - 1e-9:
        raise InconsistencyError(f"inner distance {value!r} is below the distance {direct!r}")
    return InnerDistance(value, float(dist[t_idx]), best, length)
