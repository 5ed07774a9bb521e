"""Nevanlinna-Pick structure: positivity of ``1 - 1/K``, maximal multipliers,
generalized Blaschke products and zero-set criteria."""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

from .errors import (
    DegenerateError,
    DomainError,
    InconsistencyError,
    UndefinedError,
    UnsupportedError,
    ValidationError,
)
from .kernels import Kernel, gram
from .metrics import delta, rho_ball

NP_RTOL = 1e-10


@dataclass(frozen=True, eq=False)
class NPVerdict:
    points: object
    matrix: np.ndarray = field(repr=False)
    min_eig: float
    is_psd: bool
    witness: Optional[np.ndarray] = None

    note = (
        "positivity of 1 - 1/K on a finite set is necessary for the complete "
        "Pick property; only a failure is conclusive"
    )


def np_test(spec: Kernel, points) -> NPVerdict:
    """Eigen-test of ``[1 - 1/K(x_i, x_j)]`` on a finite set."""
    g = gram(spec, points)
    K = g.entries
    if np.any(K == 0):
        i, j = np.argwhere(K == 0)[0]
        raise UndefinedError(f"K vanishes at the pair ({i}, {j}); 1 - 1/K is not defined")
    A = 1.0 - 1.0 / K
    A = 0.5 * (A + A.conj().T)
    ev, vec = np.linalg.eigh(A)
    tr = abs(float(np.real(np.trace(A))))
    min_eig = float(ev[0])
    ok = min_eig >= -(NP_RTOL * tr + 1e-14)
    return NPVerdict(g.points, A, min_eig, ok, None if ok else vec[:, 0])


def _require_np(spec):
    if not spec.complete_np:
        raise UnsupportedError(
            f"{spec!r} is not flagged as a complete Pick kernel (DHB with alpha <= 1, Drury-Arveson)"
        )


@dataclass(frozen=True)
class MaximalMultiplier:
    func: Callable
    value: float
    delta: float


def maximal_multiplier(spec: Kernel, x, y, tol: float = 1e-12) -> MaximalMultiplier:
    """``G(z) = (1 - K(x,y) K(z,x) / (K(x,x) K(z,y))) / delta(x, y)``.

    ``G`` vanishes at ``x`` and ``G(y) = delta(x, y) > 0``.
    """
    _require_np(spec)
    d = delta(spec, x, y)
    if d == 0.0:
        raise DegenerateError("x and y are indistinguishable (delta = 0)")
    kxy = complex(spec(x, y))
    kxx = float(spec.diag(x))

    def G(z):
        kzy = np.asarray(spec(z, y), dtype=complex)
        if np.any(kzy == 0):
            raise UndefinedError("pole: k_y vanishes at the requested point")
        out = (1.0 - kxy * np.asarray(spec(z, x), dtype=complex) / (kxx * kzy)) / d
        return complex(out) if out.ndim == 0 else out

    gx = G(x)
    gy = G(y)
    if abs(gx) > tol * max(1.0, 1.0 / d):
        raise InconsistencyError(f"maximal multiplier does not vanish at x: {gx}")
    if abs(gy.real - d) > tol or abs(gy.imag) > tol:
        raise InconsistencyError(f"maximal multiplier takes {gy} at y, expected delta = {d}")
    return MaximalMultiplier(G, float(gy.real), d)


# ---------------------------------------------------------------------------
# zero sets
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class ZeroSet:
    """A sequence of disk points given explicitly or by a generator law.

    ``geometric``: ``x_n = 1 - base^{-n}``, n >= 1.
    ``power``:     ``x_n = 1 - n^{-p}``, n >= 2.
    """

    kind: str
    params: dict = field(default_factory=dict)
    prefix: int = 10_000

    def points(self):
        if self.kind == "explicit":
            pts = np.asarray(self.params.get("points", []), dtype=complex)
            return pts, False
        if self.kind == "geometric":
            base = float(self.params.get("base", 2.0))
            if base <= 1:
                raise ValidationError("geometric zero sets need base > 1")
            n = np.arange(1, self.prefix + 1, dtype=float)
            pts = 1.0 - base ** (-n)
        elif self.kind == "power":
            p = float(self.params.get("p", 2.0))
            if p <= 0:
                raise ValidationError("power zero sets need p > 0")
            n = np.arange(2, self.prefix + 2, dtype=float)
            pts = 1.0 - n ** (-p)
        else:
            raise ValidationError(f"unknown zero-set generator {self.kind!r}")
        # points that round onto the circle are dropped and the prefix marked truncated
        keep = pts < 1.0
        if not np.all(keep):
            first = int(np.argmin(keep))
            return pts[:first].astype(complex), True
        return pts.astype(complex), False

    @property
    def infinite(self):
        return self.kind != "explicit"


def _as_zero_set(S):
    if isinstance(S, ZeroSet):
        return S
    return ZeroSet("explicit", {"points": list(S)})


def classify_series(terms, infinite=True):
    """Heuristic convergence verdict for a positive series from a finite prefix.

    The tail half of the prefix is fitted both by a geometric law
    ``log t = a - b n`` and by a power law ``log t = a - q log n``; the
    better fit decides.  Geometric tails converge when ``b > 0``, power tails
    when ``q > 1.1``.  Finite series always converge.
    """
    t = np.asarray(terms, dtype=float)
    if not infinite:
        return "converges"
    t = t[t > 0]
    if len(t) < 8:
        return "converges"
    start = len(t) // 2
    tail = np.log(t[start:])
    n = np.arange(start, len(t)) + 1.0
    geo, geo_res = np.polyfit(n, tail, 1, full=True)[:2]
    pw, pw_res = np.polyfit(np.log(n), tail, 1, full=True)[:2]
    geo_res = float(geo_res[0]) if len(geo_res) else 0.0
    pw_res = float(pw_res[0]) if len(pw_res) else 0.0
    if geo_res < pw_res:
        return "converges" if -geo[0] > 1e-3 else "diverges"
    return "converges" if -pw[0] > 1.1 else "diverges"


@dataclass(frozen=True, eq=False)
class ZeroSetReport:
    points: np.ndarray = field(repr=False)
    basepoint: complex
    partial_products: np.ndarray = field(repr=False)
    criterion_terms: np.ndarray = field(repr=False)
    criterion_sum: float
    classification: str
    truncated: bool = False

    @property
    def criterion_infinite(self):
        return self.classification == "diverges-to-zero"

    @property
    def infimum(self):
        return float(self.partial_products[-1]) if len(self.partial_products) else 1.0


@dataclass(frozen=True, eq=False)
class BlaschkeProduct:
    report: ZeroSetReport
    factors: list = field(repr=False)

    def __call__(self, z, count=None):
        fs = self.factors if count is None else self.factors[:count]
        out = np.ones_like(np.asarray(z, dtype=complex))
        for f in fs:
            out = out * f(z)
        return complex(out) if out.ndim == 0 else out


def blaschke_product(spec: Kernel, S, x0, prefix: Optional[int] = None) -> BlaschkeProduct:
    """Product of maximal multipliers ``G_{s, x0}`` over ``s`` in ``S``.

    ``B^2(x0) = prod delta^2(s_i, x0)``; the product is bounded below iff
    ``sum (1 - delta^2(s_i, x0))`` converges, which is classified from the
    prefix by :func:`classify_series`.
    """
    _require_np(spec)
    zs = _as_zero_set(S)
    pts, truncated = zs.points()
    if prefix is not None:
        pts = pts[:prefix]
    x0 = complex(x0)
    if np.any(pts == x0):
        raise DegenerateError("the base point lies in S; the product vanishes there identically")
    if len(pts) == 0:
        report = ZeroSetReport(pts, x0, np.array([]), np.array([]), 0.0, "converges", truncated)
        return BlaschkeProduct(report, [])
    d2 = np.asarray(delta(spec, pts, np.full(len(pts), x0)), dtype=float) ** 2
    terms = 1.0 - d2
    partial = np.exp(np.cumsum(np.log(d2)))
    verdict = classify_series(terms, zs.infinite)
    classification = "converges" if verdict == "converges" else "diverges-to-zero"
    report = ZeroSetReport(pts, x0, partial, terms, float(math.fsum(terms)), classification, truncated)
    factors = [_factor(spec, s, x0) for s in pts]
    return BlaschkeProduct(report, factors)


def _factor(spec, s, x0):
    # maximal multiplier without the self-checks, for speed on long prefixes
    d = delta(spec, s, x0)
    kxy = complex(spec(s, x0))
    kxx = float(spec.diag(s))

    def G(z):
        return (1.0 - kxy * np.asarray(spec(z, s)) / (kxx * np.asarray(spec(z, x0)))) / d

    return G


@dataclass(frozen=True)
class ZeroSetCriteria:
    space: str
    blaschke_sum: float
    blaschke_verdict: str
    shapiro_shields_sum: float
    shapiro_shields_printed_sum: float
    shapiro_shields_verdict: str
    truncated: bool


def zero_set_criteria(space: str, S) -> ZeroSetCriteria:
    """Blaschke sum ``sum (1 - |x|^2)`` and Shapiro-Shields sums.

    The Shapiro-Shields sufficient condition for Dirichlet zero sets is
    ``sum 1/log(1/(1 - |x|^2)) < inf``.  The logarithmic sum without the
    reciprocal is reported too, as ``shapiro_shields_printed_sum``; it
    diverges for every infinite sequence and is never used for a verdict.
    Only the sufficient direction is claimed: ``"zero-set"`` when the sum
    converges, ``"inconclusive"`` otherwise.
    """
    if space not in ("hardy", "dirichlet"):
        raise ValidationError(f"unknown space {space!r}; choose hardy or dirichlet")
    zs = _as_zero_set(S)
    pts, truncated = zs.points()
    r2 = np.abs(pts) ** 2
    if np.any(r2 >= 1.0):
        raise DomainError("zero-set points must lie in the open unit disk")
    b_terms = 1.0 - r2
    with np.errstate(divide="ignore"):
        logs = -np.log1p(-r2)
    nz = logs > 0
    ss_terms = 1.0 / logs[nz]
    b_verdict = classify_series(b_terms, zs.infinite)
    ss_verdict = classify_series(ss_terms, zs.infinite)
    return ZeroSetCriteria(
        space,
        float(math.fsum(b_terms)),
        b_verdict,
        float(math.fsum(ss_terms)),
        float(math.fsum(logs)),
        "zero-set" if ss_verdict == "converges" else "inconclusive",
        truncated,
    )


@dataclass(frozen=True)
class EmbeddingDefect:
    kernel_defect: float
    distance_defect: float


def da_embedding_check(spec: Kernel, b: Callable, gamma: Callable, points, n: int = 1) -> EmbeddingDefect:
    """Largest mismatch between ``K`` and ``b(x) conj(b(y)) / (1 - <g(x), g(y)>)``
    and between ``delta`` and the ball distance of the images."""
    pts = list(points)
    imgs = []
    for p in pts:
        g = np.atleast_1d(np.asarray(gamma(p), dtype=complex))
        if g.shape != (n,):
            raise ValidationError(f"gamma must map into C^{n}, got shape {g.shape}")
        if float(np.sum(np.abs(g) ** 2)) >= 1.0:
            raise DomainError(f"gamma({p}) = {g.tolist()} is not in the open unit {n}-ball")
        imgs.append(g)
    bs = [complex(b(p)) for p in pts]
    kd = 0.0
    dd = 0.0
    for i, x in enumerate(pts):
        for j, y in enumerate(pts):
            model = bs[i] * np.conj(bs[j]) / (1.0 - np.sum(imgs[i] * np.conj(imgs[j])))
            kd = max(kd, abs(complex(spec(x, y)) - model))
            if i != j:
                dd = max(dd, abs(delta(spec, x, y) - rho_ball(n, imgs[i], imgs[j])))
    return EmbeddingDefect(kd, dd)
