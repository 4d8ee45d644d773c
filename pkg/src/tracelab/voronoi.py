"""Both sides of the averaged dual-summation identity for coefficient sums
against a smooth window, computed two independent ways:

* spectral: harmonic averages over a coefficient basis (fixtures), window
  on one side, its Hankel transform on the other;
* geometric: the two pure exponential-sum expansions that are provably
  equal, with no coefficient data at all.

The "initial" geometric expansion opens the trace formula and applies one
Poisson summation; the "final" expansion is the dual Kloosterman/Bessel
sum after reciprocity, sum completion, a second Poisson summation, and the
conductor-splitting identity.  Comparing them end-to-end exercises that
entire chain.
"""

from __future__ import annotations

import cmath
import math

import numpy as np
from scipy.special import jv

from .arith import (
    DirichletCharacter,
    gauss_sum,
    is_squarefree,
    level_split,
    mod_inverse,
    moebius,
    _residue_tables,
)
from .errors import PreconditionError, TruncationError
from .forms import HarmonicBasis
from .specfun import ipow
from .transforms import (
    DEFAULT_CFG,
    BumpFunction,
    QuadratureConfig,
    hankel,
    hankel_grid,
    panel_nodes,
)

TWO_PI = 2.0 * math.pi


def _check_admissible(k: int, D: int, chi: DirichletCharacter) -> None:
    if k < 4:
        raise PreconditionError(f"weight must be >= 4, got {k}")
    if chi.modulus != D:
        raise PreconditionError("character modulus must equal the level")
    if chi.parity != (-1) ** k:
        raise PreconditionError(
            f"character parity {chi.parity} incompatible with weight {k}"
        )


# ----------------------------------------------------------------------
# the oscillatory double sum shared by the initial expansion and the
# dyadic continuation blocks

def geometric_double_sum(
    k: int,
    D: int,
    chi: DirichletCharacter,
    ell: int,
    window: BumpFunction,
    X: float = 1.0,
    s: complex | None = None,
    cfg: QuadratureConfig = DEFAULT_CFG,
    tol: float = 1e-9,
    cmax_cap: int = 4096,
    mmax_cap: int = 2_000_000,
) -> complex:
    """2 pi i^(-k) chi(-1) X * sum_{c >= 1} sum_{m != 0, (m, cD) = 1}
    conj(chi)(m)/(cD) e(-ell * minv / (cD)) * I(c, m), where

    I(c, m) = int amp(y) J_{k-1}(4 pi sqrt(ell y X)/(cD)) e(-m y X/(cD)) dy

    and amp(y) = window(y) * y^(-s) (s = None means no power factor).
    Truncations in c and m are driven by the window's measured Fourier
    decay plus the power-series envelope of the Bessel factor.
    """
    y0, y1 = window.support
    sigma = 0.0 if s is None else float(np.real(s))
    tval = 0.0 if s is None else float(np.imag(s))
    amp_scale = max(y0**-sigma, y1**-sigma)
    l1 = window.l1 * amp_scale
    f_t = abs(tval) / (TWO_PI * y0)
    log_gamma_k = math.lgamma(k)

    def j_envelope(c: int) -> float:
        arg = 2.0 * TWO_PI * math.sqrt(ell * y1 * X) / (c * D)
        if arg >= 2.0:
            return 0.7
        return min(0.7, math.exp((k - 1) * math.log(arg / 2.0) - log_gamma_k))

    def row_bound(c: int) -> float:
        cD = c * D
        f1 = X / cD
        fj = math.sqrt(ell * X / y0) / cD
        shift = max(0.0, f1 - fj - f_t)
        if shift <= 1.0:
            ft = l1
        else:
            ft = window.fourier_magnitude(shift) * amp_scale + 1e-300
        return TWO_PI * X / cD * j_envelope(c) * 3.0 * ft

    # choose the c range from the row majorants
    bounds = []
    c = 1
    while c <= cmax_cap:
        b = row_bound(c)
        bounds.append(b)
        # beyond the Bessel hump rows decay like c^(1-k); stop once the
        # integral-comparison tail estimate is negligible
        if (
            c > 4
            and 2.0 * TWO_PI * math.sqrt(ell * y1 * X) / (c * D) < 1.0
            and b * c / (k - 2.0) < tol / 8.0
        ):
            break
        c += 1
    cstop = len(bounds)
    if cstop >= cmax_cap:
        raise TruncationError(
            f"modulus sum not converged below cmax_cap = {cmax_cap}"
        )

    total = 0.0 + 0.0j
    # row errors carry quasi-random phases; budget them in RMS
    per_row_tol = tol / (8.0 * math.sqrt(max(cstop, 1)))
    chibar_vals = np.conj(np.asarray(chi.values))
    for c in range(1, cstop + 1):
        cD = c * D
        if bounds[c - 1] < per_row_tol / 4.0:
            continue
        jb = j_envelope(c)
        # frequency reach needed for the m sum of this row
        denom = TWO_PI * X / cD * max(jb, 1e-300) * max(amp_scale, 1e-300)
        thresh = per_row_tol / denom
        f_star = window.freq_reach(thresh) + math.sqrt(ell * X / y0) / cD + f_t
        mhi = int(math.ceil(f_star * cD / X)) + 4
        if mhi > mmax_cap:
            raise TruncationError(f"m range {mhi} exceeds cap at c = {c}")
        f_max = mhi * X / cD + math.sqrt(ell * X / y0) / cD + f_t
        n_pan = cfg.panel_count(f_max * (y1 - y0))
        y, wt = panel_nodes(y0, y1, n_pan, cfg.points_per_panel)
        amp = window(y).astype(complex)
        if s is not None:
            amp *= y ** (-complex(s))
        base = wt * amp * jv(k - 1, 2.0 * TWO_PI * np.sqrt(ell * y * X) / cD)
        z = np.exp(-1j * TWO_PI * X * y / cD)
        zp = z.copy()
        zn = np.conj(z)
        row = 0.0 + 0.0j
        for m in range(1, mhi + 1):
            if math.gcd(m, cD) == 1:
                ip = np.dot(base, zp)
                im = np.dot(base, zn)
                mbar = mod_inverse(m, cD)
                ep = cmath.exp(-1j * TWO_PI * ((ell * mbar) % cD) / cD)
                row += chibar_vals[m % D] * ep * ip
                row += chibar_vals[(-m) % D] * np.conj(ep) * im
            if m < mhi:
                zp = zp * z
                zn = zn * np.conj(z)
        total += row / cD
    chi_m1 = chi.values[(D - 1) % D] if D > 1 else 1.0 + 0.0j
    return complex(TWO_PI * ipow(-k) * chi_m1 * X * total)


def _hankel_sequence(
    k: int,
    g: BumpFunction,
    D: int,
    threshold: float,
    nmax_cap: int,
    cfg: QuadratureConfig,
) -> tuple[np.ndarray, int]:
    """(H_k g)(n/D) for n = 1..n_count where n_count is grown until the last
    16 magnitudes sit under `threshold`.  Cached on the window object."""
    cache = g.__dict__.setdefault("_hankel_seq_cache", {})
    key = (k, D, cfg.points_per_panel, cfg.panels_per_cycle)
    cached_n, cached_h = cache.get(key, (0, None))
    n_count = 2048
    while True:
        if n_count <= cached_n:
            h = cached_h[:n_count]
        else:
            # extend incrementally: only the new upper range is computed
            lo = cached_n
            ext = hankel_grid(
                k, g, np.arange(lo + 1, n_count + 1, dtype=float) / D, cfg
            )
            h = np.concatenate([cached_h[:lo], ext]) if lo else ext
            cache[key] = (n_count, h)
            cached_n, cached_h = n_count, h
        if np.max(np.abs(h[-16:])) < threshold:
            # trim to the first point where the tail stays below threshold
            below = np.abs(h) < threshold
            idx = n_count
            while idx > 256 and np.all(below[idx - 64 : idx]):
                idx -= 64
            return h[:idx], idx
        if n_count >= nmax_cap:
            raise TruncationError(
                f"Hankel weights still {np.max(np.abs(h[-16:])):.2e} at n = {n_count}"
            )
        n_count = min(2 * n_count, nmax_cap)


def _hankel_window_power(
    k: int, window: BumpFunction, s: complex | None, a: float, cfg: QuadratureConfig
) -> complex:
    """Hankel transform at a of window(y) * y^(-s) (complex amplitude)."""
    if s is None:
        return hankel(k, window, a, cfg)
    w0, w1 = math.sqrt(window.support[0]), math.sqrt(window.support[1])
    alpha = 2.0 * TWO_PI * math.sqrt(a)
    cycles = alpha * (w1 - w0) / TWO_PI + abs(np.imag(s)) / math.pi
    n_pan = cfg.panel_count(cycles)
    w, wt = panel_nodes(w0, w1, n_pan, cfg.points_per_panel)
    amp = window(w * w).astype(complex) * (w * w) ** (-complex(s))
    return complex(2.0 * TWO_PI * np.sum(wt * w * amp * jv(k - 1, alpha * w)))


def _hankel_power_grid(
    k: int,
    window: BumpFunction,
    s: complex | None,
    a_values: np.ndarray,
    cfg: QuadratureConfig,
) -> np.ndarray:
    """_hankel_window_power on an ascending grid, batched dyadically."""
    a_values = np.asarray(a_values, dtype=float)
    w0, w1 = math.sqrt(window.support[0]), math.sqrt(window.support[1])
    t_extra = 0.0 if s is None else abs(np.imag(s)) / math.pi
    out = np.empty(len(a_values), dtype=complex)
    i = 0
    while i < len(a_values):
        hi = a_values[i] * 4.0
        j = i
        while j < len(a_values) and a_values[j] <= hi:
            j += 1
        block = a_values[i:j]
        alpha = 2.0 * TWO_PI * np.sqrt(block)
        cycles = float(alpha[-1]) * (w1 - w0) / TWO_PI + t_extra
        w, wt = panel_nodes(w0, w1, cfg.panel_count(cycles), cfg.points_per_panel)
        amp = window(w * w).astype(complex)
        if s is not None:
            amp *= (w * w) ** (-complex(s))
        base = wt * w * amp
        out[i:j] = 2.0 * TWO_PI * (jv(k - 1, alpha[:, None] * w[None, :]) @ base)
        i = j
    return out


# ----------------------------------------------------------------------
# geometric expansions

def voronoi_geometric_initial(
    k: int,
    D: int,
    chi: DirichletCharacter,
    ell: int,
    g: BumpFunction,
    cfg: QuadratureConfig = DEFAULT_CFG,
    tol: float = 1e-8,
    cmax_cap: int = 4096,
) -> complex:
    """Window sum after one Poisson summation: diagonal + double sum
    (plus the dual zeroth frequency i^(-k) (H_k g)(ell) when the level is 1).
    """
    _check_admissible(k, D, chi)
    if ell < 1:
        raise PreconditionError("ell must be positive")
    value = complex(g(float(ell)))
    if D == 1:
        value += ipow(-k) * hankel(k, g, float(ell), cfg)
    value += geometric_double_sum(
        k, D, chi, ell, g, X=1.0, s=None, cfg=cfg, tol=tol, cmax_cap=cmax_cap
    )
    return value


def _dual_kloosterman_sums(
    k: int,
    D: int,
    chi: DirichletCharacter,
    ell0: int,
    ell_prime: int,
    ell: int,
    n_count: int,
    h_weights: np.ndarray,
    tol: float,
    osc_margin: float = 1.6,
) -> np.ndarray:
    """inner[n] = sum_c S_chi(ell0*D*n, ell'; cD)/(cD) J_{k-1}(4 pi sqrt(ell n D)/(cD))
    for n = 1..n_count, batched per modulus with n-periodic sum tables.

    Term n keeps moduli through C(n) = max(osc_margin * c0(n), power solve),
    where c0(n) = 2 pi sqrt(ell n / D) is where the Bessel argument passes 2:
    beyond that the power-series envelope decays like c^(1-k) and the tail is
    budgeted explicitly; inside it the terms only carry sign cancellation.
    """
    narr = np.arange(1, n_count + 1, dtype=float)
    jarg_num = 2.0 * TWO_PI * np.sqrt(ell * D * narr)
    # power-regime tail: sum_{c > C} 2 pi * 8/sqrt(cD) * (jarg/(2cD))^(k-1)/Gamma(k)
    #                  <= A(n) * C^(0.5-k) / (k - 0.5)
    A = (
        16.0
        * math.pi
        / math.gamma(k)
        / math.sqrt(D)
        * (jarg_num / (2.0 * D)) ** (k - 1)
    )
    budget = tol * 0.05 / (math.sqrt(n_count) * (np.abs(h_weights) + 1e-300))
    c_pow = (A / ((k - 0.5) * budget)) ** (1.0 / (k - 0.5))
    c_osc = osc_margin * jarg_num / (2.0 * D)
    c_of_n = np.maximum(np.ceil(np.maximum(c_pow, c_osc)), 4.0).astype(np.int64)
    c_of_n = np.maximum.accumulate(c_of_n)  # nondecreasing in n
    c_global = int(c_of_n[-1])

    inner = np.zeros(n_count, dtype=complex)
    chibar_vals = np.conj(np.asarray(chi.values))
    for c in range(1, c_global + 1):
        n_min = int(np.searchsorted(c_of_n, c))  # first n with C(n) >= c
        if n_min >= n_count:
            break
        cD = c * D
        span = n_count - n_min
        xs, inv = _residue_tables(cD)
        vals = chibar_vals[xs % D] * np.exp(
            (1j * TWO_PI / cD) * ((ell_prime % cD) * xs % cD)
        )
        step = (ell0 * D) % cD
        period = cD // math.gcd(step, cD) if step else 1
        rows = min(period, span)
        # geometric in n: e(step*inv*n/cD) = base^n; cumulative multiply with
        # chunked matrix-vector products to keep numpy call overhead low
        base = np.exp((1j * TWO_PI / cD) * (step * inv % cD))
        cur = np.exp((1j * TWO_PI / cD) * (step * ((n_min + 1) % period) * inv % cD))
        s_table = np.empty(rows, dtype=complex)
        chunk = 64
        block = np.empty((min(chunk, rows), len(inv)), dtype=complex)
        r = 0
        while r < rows:
            take = min(chunk, rows - r)
            for j in range(take):
                np.copyto(block[j], cur)
                if r + j + 1 < rows:
                    cur *= base
            s_table[r : r + take] = block[:take] @ vals
            r += take
        idx = (np.arange(n_min + 1, n_count + 1) - (n_min + 1)) % period
        contrib = s_table[idx] / cD * jv(k - 1, jarg_num[n_min:] / cD)
        inner[n_min:] += contrib
    return inner


def voronoi_geometric_final(
    k: int,
    D: int,
    chi: DirichletCharacter,
    ell: int,
    g: BumpFunction,
    cfg: QuadratureConfig = DEFAULT_CFG,
    tol: float = 1e-8,
    nmax_cap: int = 60000,
) -> complex:
    """The dual expansion: Hankel-weighted sum of twisted Kloosterman/Bessel
    modulus sums, with the case prefactor:

    * primitive chi, D > 1:  i^k chi(-1) conj(chi)(ell') eps_chi / sqrt(D)
    * trivial chi, D > 1 squarefree:  mu(D) i^k
    * D = 1:  i^k, plus the dual zeroth frequency i^(-k)(H_k g)(ell) and the
      diagonal subtraction folded into the modulus sums.
    """
    _check_admissible(k, D, chi)
    split = level_split(ell, D)
    if D == 1:
        pref = ipow(k)
    elif chi.is_trivial:
        if not is_squarefree(D):
            raise PreconditionError(
                f"trivial character requires squarefree level, got {D}"
            )
        pref = moebius(D) * ipow(k)
    elif chi.is_primitive:
        chi_m1 = chi.values[(D - 1) % D]
        pref = (
            ipow(k)
            * chi_m1
            * np.conj(chi.values[split.ell_prime % D])
            * gauss_sum(chi)
            / math.sqrt(D)
        )
    else:
        raise PreconditionError(
            "level > 1 requires a primitive or trivial character"
        )

    h, n_count = _hankel_sequence(k, g, D, tol / 30.0, nmax_cap, cfg)

    inner = _dual_kloosterman_sums(
        k, D, chi, split.ell0, split.ell_prime, ell, n_count, h, tol
    )
    dual = TWO_PI * ipow(-k) * inner
    if D == 1:
        # the Petersson diagonal delta(n = ell) is not part of the modulus
        # sums; the assembled dual side carries the zeroth frequency instead
        value = ipow(-k) * hankel(k, g, float(ell), cfg) + ipow(k) * complex(
            np.sum(h * dual)
        )
        return value
    return complex(pref * np.sum(h * dual))


# ----------------------------------------------------------------------
# spectral sides

def voronoi_spectral_lhs(basis: HarmonicBasis, ell: int, g: BumpFunction) -> complex:
    """sum_f omega_f conj(a_f(ell)) sum_n a_f(n) g(n)  (finite support)."""
    if ell < 1:
        raise PreconditionError("ell must be positive")
    a, b = g.support
    n_lo, n_hi = max(1, int(math.floor(a))), int(math.ceil(b))
    total = 0.0 + 0.0j
    for f in basis.forms:
        if f.harmonic_weight is None:
            raise PreconditionError(f"{f.label}: harmonic weight missing")
        if n_hi > f.n_max:
            raise PreconditionError(
                f"{f.label}: needs coefficients to N = {n_hi}, has {f.n_max}"
            )
        inner = sum(f.a(n) * g(float(n)) for n in range(n_lo, n_hi + 1))
        total += f.harmonic_weight * np.conj(f.a(ell)) * inner
    return complex(total)


def voronoi_spectral_rhs(
    basis: HarmonicBasis,
    ell: int,
    g: BumpFunction,
    nmax: int = 0,
    cfg: QuadratureConfig = DEFAULT_CFG,
    tol: float = 1e-8,
) -> complex:
    """The dual spectral sum with the case prefactor (see geometric_final).

    Coefficients at indices ell0*D*n are taken from the fixtures, using the
    multiplicative extension for the level-supported part of the index.
    """
    if not basis.forms:
        return 0.0 + 0.0j
    f0 = basis.forms[0]
    k, D, chi = f0.weight, f0.level, f0.character
    split = level_split(ell, D)
    if D == 1:
        pref = ipow(k)
    elif chi.is_trivial:
        if not is_squarefree(D):
            raise PreconditionError("trivial character requires squarefree level")
        pref = moebius(D) * ipow(k)
    elif chi.is_primitive:
        pref = (
            ipow(k)
            * chi.values[(D - 1) % D]
            * gauss_sum(chi)
            / math.sqrt(D)
        )
    else:
        raise PreconditionError("level > 1 requires primitive or trivial character")

    if nmax <= 0:
        # largest n with fixture-reachable coefficients
        nmax = min(f.n_max for f in basis.forms)
        nmax = min(nmax, 40000)
    narr = np.arange(1, nmax + 1, dtype=float)
    h = hankel_grid(k, g, narr / D, cfg)
    if np.max(np.abs(h[-8:])) > tol:
        raise TruncationError(
            f"Hankel weights still {np.max(np.abs(h[-8:])):.2e} at nmax = {nmax}; "
            "insufficient coefficient range"
        )
    total = 0.0 + 0.0j
    for f in basis.forms:
        if f.harmonic_weight is None:
            raise PreconditionError(f"{f.label}: harmonic weight missing")
        if D == 1:
            coeffs = f.coeffs[1 : nmax + 1]
            inner = np.sum(coeffs * h)
            total += f.harmonic_weight * np.conj(f.a(ell)) * inner
        else:
            dual_coeffs = np.array(
                [np.conj(f.a(split.ell0 * D * n)) for n in range(1, nmax + 1)]
            )
            inner = np.sum(dual_coeffs * h)
            total += (
                f.harmonic_weight
                * f.a(split.ell_prime)
                * np.conj(chi.values[split.ell_prime % D])
                * inner
            )
    return complex(pref * total)


def verify_voronoi(
    mode: str,
    *,
    k: int | None = None,
    D: int | None = None,
    chi: DirichletCharacter | None = None,
    basis: HarmonicBasis | None = None,
    ell: int,
    g: BumpFunction,
    cfg: QuadratureConfig = DEFAULT_CFG,
    tol: float = 1e-8,
) -> float:
    """Residual of the identity in the requested mode.

    mode='geometric' compares the two data-free expansions; mode='spectral'
    compares the fixture-weighted window sum against its dual.
    """
    if mode == "geometric":
        if k is None or D is None or chi is None:
            raise PreconditionError("geometric mode needs k, D, chi")
        lhs = voronoi_geometric_initial(k, D, chi, ell, g, cfg, tol)
        rhs = voronoi_geometric_final(k, D, chi, ell, g, cfg, tol)
        return abs(lhs - rhs)
    if mode == "spectral":
        if basis is None:
            raise PreconditionError("spectral mode needs a basis")
        lhs = voronoi_spectral_lhs(basis, ell, g)
        rhs = voronoi_spectral_rhs(basis, ell, g, cfg=cfg, tol=tol)
        return abs(lhs - rhs)
    raise PreconditionError(f"unknown mode {mode!r}")
