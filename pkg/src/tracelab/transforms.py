"""Smooth compactly supported test functions and the integral transforms
built on J-Bessel kernels: the Hankel transform, its self-inversion, the
Laplace-type product identity used as the archimedean input, and a generic
Poisson-summation checker.

All oscillatory integrals use fixed-order Gauss-Legendre panels whose count
is tied to the local oscillation wavelength; accumulation is in fixed panel
order so results are bitwise reproducible for a given configuration.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from scipy.special import jv

from .errors import PreconditionError, TruncationError
from .specfun import bessel_j_series, ipow

TWO_PI = 2.0 * math.pi


@lru_cache(maxsize=32)
def _leggauss(pts: int):
    return np.polynomial.legendre.leggauss(pts)


def panel_nodes(y0: float, y1: float, n_panels: int, pts: int):
    """Gauss-Legendre nodes/weights on n_panels equal panels of [y0, y1]."""
    x0, w0 = _leggauss(pts)
    edges = np.linspace(y0, y1, n_panels + 1)
    mid = 0.5 * (edges[1:] + edges[:-1])
    half = 0.5 * (edges[1:] - edges[:-1])
    nodes = (mid[:, None] + half[:, None] * x0[None, :]).ravel()
    weights = (half[:, None] * w0[None, :]).ravel()
    return nodes, weights


@dataclass(frozen=True)
class QuadratureConfig:
    """Panelization knobs for every oscillatory integral in the toolkit.

    `panels` is the minimum panel count, `oscillatory_split_threshold` the
    Bessel argument above which panel width is tied to the oscillation
    wavelength, and `target_abs_error` the budget each transform aims for.
    """

    panels: int = 20
    points_per_panel: int = 12
    oscillatory_split_threshold: float = 8.0
    target_abs_error: float = 1e-10
    panels_per_cycle: float = 4.0

    def __post_init__(self):
        if (
            self.panels <= 0
            or self.points_per_panel <= 0
            or self.oscillatory_split_threshold <= 0
            or self.target_abs_error <= 0
            or self.panels_per_cycle <= 0
        ):
            raise PreconditionError("all quadrature parameters must be positive")

    def panel_count(self, cycles: float) -> int:
        return max(self.panels, int(math.ceil(self.panels_per_cycle * cycles)) + 2)


DEFAULT_CFG = QuadratureConfig()


class BumpFunction:
    """A smooth function supported on [a, b] with derivative evaluation.

    First and second derivatives use the closed forms supplied by the
    constructor; higher orders fall back to Richardson-extrapolated central
    differences of the highest closed form available.
    """

    def __init__(self, a, b, fn, d1=None, d2=None, center=None, width=None):
        if not (0.0 < a < b):
            raise PreconditionError(f"support [{a}, {b}] must satisfy 0 < a < b")
        self.support = (float(a), float(b))
        self.center = float(center if center is not None else 0.5 * (a + b))
        self.width = float(width if width is not None else (b - a))
        self._fn = fn
        self._d1 = d1
        self._d2 = d2
        self._l1_cache = None
        self._ft_table = None

    def __call__(self, x):
        arr = np.asarray(x, dtype=float)
        out = np.where(
            (arr > self.support[0]) & (arr < self.support[1]), self._fn(arr), 0.0
        )
        return float(out) if np.isscalar(x) or arr.ndim == 0 else out

    def derivative(self, x, order: int = 1):
        if order == 0:
            return self(x)
        closed = {1: self._d1, 2: self._d2}
        if order in closed and closed[order] is not None:
            arr = np.asarray(x, dtype=float)
            out = np.where(
                (arr > self.support[0]) & (arr < self.support[1]),
                closed[order](arr),
                0.0,
            )
            return float(out) if np.isscalar(x) or arr.ndim == 0 else out
        base_order = 2 if self._d2 is not None else (1 if self._d1 is not None else 0)
        need = order - base_order
        if need <= 0:  # pragma: no cover
            need, base_order = order, 0

        def f(t):
            return self.derivative(t, base_order) if base_order else self(t)

        return _richardson_derivative(f, x, need)

    @property
    def l1(self) -> float:
        """Integral of |g| over the support (g >= 0 for canonical bumps)."""
        if self._l1_cache is None:
            y, w = panel_nodes(*self.support, 32, 12)
            self._l1_cache = float(np.sum(w * np.abs(self(y))))
        return self._l1_cache

    def fourier_magnitude(self, freq: float) -> float:
        """|integral of g(y) e(-freq*y) dy| at a single frequency (cycles/unit)."""
        n_pan = max(8, int(6 * freq) + 6)
        y, w = panel_nodes(*self.support, n_pan, 12)
        return abs(np.sum(w * self(y) * np.exp(-1j * TWO_PI * freq * y)))

    def freq_reach(self, threshold: float, fmax: float = 8192.0) -> float:
        """Smallest frequency beyond which the windowed Fourier integral
        stays under `threshold` (empirical monotone envelope, cached)."""
        if threshold <= 0:
            return fmax
        if self._ft_table is None:
            grid = [2.0 ** (j / 2.0) for j in range(0, 53)]  # 1 .. ~6.7e7 capped below
            grid = [f for f in grid if f <= fmax] + [fmax]
            mags = [self.fourier_magnitude(f) for f in grid]
            # running max from the right makes the table a monotone envelope
            env = mags[:]
            for i in range(len(env) - 2, -1, -1):
                env[i] = max(env[i], env[i + 1])
            self._ft_table = (grid, env)
        grid, env = self._ft_table
        # below the quadrature noise floor the table cannot resolve further
        threshold = max(threshold, 2.0 * max(env[-1], 1e-15))
        if threshold > env[0]:
            return grid[0]
        for f, e in zip(grid, env):
            if e < threshold:
                return f
        return fmax


def _richardson_derivative(f, x, order: int):
    """Central differences with one Richardson step for order-th derivative."""
    x = np.asarray(x, dtype=float)
    h = 0.004 * (1.0 + np.abs(x))

    def stencil(h):
        coeffs = [math.comb(order, j) * (-1) ** j for j in range(order + 1)]
        pts = [x + (order / 2.0 - j) * h for j in range(order + 1)]
        return sum(c * f(p) for c, p in zip(coeffs, pts)) / h**order

    d1, d2 = stencil(h), stencil(h / 2.0)
    out = (4.0 * d2 - d1) / 3.0
    return float(out) if out.ndim == 0 else out


def canonical_bump(a: float, b: float) -> BumpFunction:
    """The standard mollifier exp(-1/(1-u^2)) rescaled to (a, b).

    u = (2t - a - b)/(b - a); value e^(-1) at the midpoint, all derivatives
    vanish at the endpoints.
    """
    if not (0.0 < a < b):
        raise PreconditionError(f"need 0 < a < b, got [{a}, {b}]")
    scale = 2.0 / (b - a)

    def u_of(t):
        return (2.0 * t - a - b) / (b - a)

    def fn(t):
        u = u_of(t)
        v = 1.0 - u * u
        with np.errstate(divide="ignore", over="ignore", invalid="ignore"):
            out = np.where(v > 1e-12, np.exp(-1.0 / np.maximum(v, 1e-12)), 0.0)
        return out

    def d1(t):
        u = u_of(t)
        v = 1.0 - u * u
        with np.errstate(divide="ignore", over="ignore", invalid="ignore"):
            phi = np.where(v > 1e-12, np.exp(-1.0 / np.maximum(v, 1e-12)), 0.0)
        return np.where(v > 1e-12, -2.0 * u / np.maximum(v, 1e-12) ** 2 * phi, 0.0) * scale

    def d2(t):
        u = u_of(t)
        v = 1.0 - u * u
        with np.errstate(divide="ignore", over="ignore", invalid="ignore"):
            phi = np.where(v > 1e-12, np.exp(-1.0 / np.maximum(v, 1e-12)), 0.0)
            vs = np.maximum(v, 1e-12)
            inner = 4.0 * u * u / vs**4 - 2.0 / vs**2 - 8.0 * u * u / vs**3
        return np.where(v > 1e-12, inner * phi, 0.0) * scale**2

    return BumpFunction(a, b, fn, d1, d2, center=0.5 * (a + b), width=b - a)


# ----------------------------------------------------------------------
# Hankel transform and inversion

def _hankel_nodes(F: BumpFunction, alpha: float, cfg: QuadratureConfig):
    w0, w1 = math.sqrt(F.support[0]), math.sqrt(F.support[1])
    cycles = alpha * (w1 - w0) / TWO_PI
    n_pan = cfg.panel_count(cycles)
    return panel_nodes(w0, w1, n_pan, cfg.points_per_panel)


def hankel(k: int, F: BumpFunction, a: float, cfg: QuadratureConfig = DEFAULT_CFG) -> float:
    """(H_k F)(a) = 2 pi * integral of F(x) J_{k-1}(4 pi sqrt(a x)) dx.

    Substituting x = w^2 makes the Bessel phase linear in w, so uniform
    panels resolve the oscillation everywhere including a -> 0.
    """
    if k < 2:
        raise PreconditionError(f"transform order k must be >= 2, got {k}")
    if a <= 0:
        raise PreconditionError(f"argument must be positive, got {a}")
    alpha = 2.0 * TWO_PI * math.sqrt(a)
    w, wt = _hankel_nodes(F, alpha, cfg)
    return float(2.0 * TWO_PI * np.sum(wt * w * F(w * w) * jv(k - 1, alpha * w)))


def hankel_grid(
    k: int, F: BumpFunction, a_values: np.ndarray, cfg: QuadratureConfig = DEFAULT_CFG
) -> np.ndarray:
    """(H_k F) on an ascending grid of arguments, batched in dyadic blocks
    that share a panelization sized for the block's largest argument."""
    a_values = np.asarray(a_values, dtype=float)
    out = np.empty_like(a_values)
    order = np.argsort(a_values)
    sorted_a = a_values[order]
    i = 0
    while i < len(sorted_a):
        hi = sorted_a[i] * 4.0
        j = i
        while j < len(sorted_a) and sorted_a[j] <= hi:
            j += 1
        block = sorted_a[i:j]
        alpha = 2.0 * TWO_PI * np.sqrt(block)
        w, wt = _hankel_nodes(F, float(alpha[-1]), cfg)
        base = wt * w * F(w * w)
        vals = 2.0 * TWO_PI * (jv(k - 1, alpha[:, None] * w[None, :]) @ base)
        out[order[i:j]] = vals
        i = j
    return out


def hankel_roundtrip(
    k: int,
    F: BumpFunction,
    b: float,
    cfg: QuadratureConfig = DEFAULT_CFG,
    tail_cut: float = 20000.0,
) -> float:
    """(H_k (H_k F))(b): outer quadrature of hankel values over a in (0, tail_cut].

    Requires |H_k F| to have decayed below cfg.target_abs_error beyond
    tail_cut (checked by sampling); the result equals F(b) within about
    10 * target_abs_error for interior b.
    """
    probe = np.array([tail_cut, 1.2 * tail_cut, 1.5 * tail_cut, 2.0 * tail_cut])
    tail_mag = np.max(np.abs(hankel_grid(k, F, probe, cfg)))
    if tail_mag >= cfg.target_abs_error:
        raise TruncationError(
            f"|H_k F| ~ {tail_mag:.2e} beyond tail_cut={tail_cut}, "
            f"above target {cfg.target_abs_error:.2e}; increase tail_cut"
        )
    # outer integral in r = sqrt(a): 4 pi * int r H(r^2) J_{k-1}(4 pi r sqrt(b)) dr
    rmax = math.sqrt(tail_cut)
    cycles = 2.0 * math.sqrt(b) * rmax
    n_pan = cfg.panel_count(cycles)
    r, wt = panel_nodes(0.0, rmax, n_pan, cfg.points_per_panel)
    H = hankel_grid(k, F, r * r, cfg)
    return float(2.0 * TWO_PI * np.sum(wt * r * H * jv(k - 1, 2.0 * TWO_PI * math.sqrt(b) * r)))


def hankel_roundtrip_grid(
    k: int,
    F: BumpFunction,
    bs,
    cfg: QuadratureConfig = DEFAULT_CFG,
    tail_cut: float = 20000.0,
) -> np.ndarray:
    """hankel_roundtrip at several points, sharing one transform grid."""
    bs = np.asarray(bs, dtype=float)
    probe = np.array([tail_cut, 1.2 * tail_cut, 1.5 * tail_cut, 2.0 * tail_cut])
    tail_mag = np.max(np.abs(hankel_grid(k, F, probe, cfg)))
    if tail_mag >= cfg.target_abs_error:
        raise TruncationError(
            f"|H_k F| ~ {tail_mag:.2e} beyond tail_cut={tail_cut}; increase tail_cut"
        )
    rmax = math.sqrt(tail_cut)
    n_pan = cfg.panel_count(2.0 * math.sqrt(float(np.max(bs))) * rmax)
    r, wt = panel_nodes(0.0, rmax, n_pan, cfg.points_per_panel)
    H = hankel_grid(k, F, r * r, cfg)
    base = wt * r * H
    out = np.array(
        [
            2.0 * TWO_PI * np.sum(base * jv(k - 1, 2.0 * TWO_PI * math.sqrt(b) * r))
            for b in bs
        ]
    )
    return out


# ----------------------------------------------------------------------
# the Laplace/Bessel product identity (archimedean input)

def weber_check(
    k: int,
    alpha: complex,
    beta: float,
    gamma: float,
    cfg: QuadratureConfig = DEFAULT_CFG,
) -> tuple[complex, complex]:
    """Both sides of

    int_0^inf e^(-2 pi alpha y) J_{k-1}(4 pi beta sqrt y) J_{k-1}(4 pi gamma sqrt y) dy
        = i^(1-k)/(2 pi alpha) * J_{k-1}(4 pi i beta gamma / alpha)
          * exp(-2 pi (beta^2 + gamma^2)/alpha).

    The left side is quadrature (exponential damping truncates the tail);
    the right side uses the ascending series in complex arithmetic, keeping
    the two routes independent.
    """
    alpha = complex(alpha)
    if alpha.real <= 0:
        raise PreconditionError(f"Re alpha must be positive, got {alpha}")
    if k < 2 or beta <= 0 or gamma <= 0:
        raise PreconditionError("need k >= 2 and positive beta, gamma")
    wmax = math.sqrt(44.0 / (TWO_PI * alpha.real))
    cycles = 2.0 * (beta + gamma) * wmax + abs(alpha.imag) * wmax**2
    n_pan = cfg.panel_count(cycles)
    w, wt = panel_nodes(0.0, wmax, n_pan, cfg.points_per_panel)
    vals = (
        np.exp(-TWO_PI * alpha * w * w)
        * jv(k - 1, 2.0 * TWO_PI * beta * w)
        * jv(k - 1, 2.0 * TWO_PI * gamma * w)
        * w
    )
    lhs = complex(2.0 * np.sum(wt * vals))
    rhs = (
        ipow(1 - k)
        / (TWO_PI * alpha)
        * bessel_j_series(k - 1, 2j * TWO_PI * beta * gamma / alpha)
        * cmath.exp(-TWO_PI * (beta**2 + gamma**2) / alpha)
    )
    return lhs, rhs


# ----------------------------------------------------------------------
# Poisson summation checker

def poisson_check(
    K,
    V: BumpFunction,
    X: float,
    mmax: int,
    cfg: QuadratureConfig = DEFAULT_CFG,
) -> tuple[complex, complex]:
    """Both sides of Poisson summation for a c-periodic map against V(./X).

    K is a sequence of length c (the period); lhs = sum_n K(n) V(n/X) and
    rhs = (X/c) sum_{|m|<=mmax} K_hat(m) int V(y) e(-m X y / c) dy, with
    K_hat(m) = sum_{gamma mod c} K(gamma) e(m gamma / c).
    """
    K = list(K)
    c = len(K)
    if c < 1 or X <= 0:
        raise PreconditionError("need a nonempty period and X > 0")
    a, b = V.support
    n_lo = int(math.floor(a * X)) - 1
    n_hi = int(math.ceil(b * X)) + 1
    lhs = sum(K[n % c] * V(n / X) for n in range(n_lo, n_hi + 1))

    rhs = 0j
    for m in range(-mmax, mmax + 1):
        khat = sum(K[g] * cmath.exp(1j * TWO_PI * m * g / c) for g in range(c))
        if abs(khat) < 1e-15:
            continue
        freq = m * X / c
        n_pan = cfg.panel_count(abs(freq) * (b - a))
        y, wt = panel_nodes(a, b, n_pan, cfg.points_per_panel)
        integral = np.sum(wt * V(y) * np.exp(-1j * TWO_PI * freq * y))
        rhs += khat * integral
    return complex(lhs), complex(rhs * X / c)
