"""Both sides of the Petersson trace formula with controlled truncation.

Geometric side:  delta(m=n) + 2 pi i^(-k) sum_{c = 0 (D)} S_chi(m,n;c)/c
                 * J_{k-1}(4 pi sqrt(mn) / c).
Spectral side:   sum_f omega_f conj(a_f(m)) a_f(n).

The tail bound combines |S_chi(m,n;c)| <= d(c) gcd(m,n,c)^(1/2) c^(1/2)
with |J_{k-1}(y)| <= (y/2)^(k-1)/Gamma(k) and d(c) <= K4 c^(1/4), summed in
closed form by integral comparison.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.special import jv

from .arith import (
    DIVISOR_QUARTER_BOUND,
    DirichletCharacter,
    kloosterman_grid,
    twisted_kloosterman,
)
from .errors import PreconditionError
from .forms import HarmonicBasis
from .specfun import ipow

TWO_PI = 2.0 * math.pi


@dataclass(frozen=True)
class TruncationReport:
    """A truncated-sum value with its error budget."""

    value: complex
    cmax: int
    tail_bound: float
    quadrature_error: float

    @property
    def budget(self) -> float:
        return self.tail_bound + self.quadrature_error


def petersson_tail_bound(k: int, D: int, m: int, n: int, cmax: int) -> float:
    """Upper bound for the absolute sum of geometric terms with c > cmax."""
    if cmax < D:
        return math.inf
    g = math.gcd(m, n)
    lead = TWO_PI * DIVISOR_QUARTER_BOUND * math.sqrt(g)
    lead *= (TWO_PI * math.sqrt(m * n)) ** (k - 1) / math.gamma(k)
    p = k - 0.75  # sum of c^(3/4 - k) over c > cmax, c = 0 mod D
    J = max(cmax // D, 1)
    return lead * D ** (0.75 - k) * J ** (1.75 - k) / (p - 1.0)


def _check_parity(k: int, chi: DirichletCharacter) -> None:
    if chi.parity != (-1) ** k:
        raise PreconditionError(
            f"character parity {chi.parity} incompatible with weight {k}"
        )


def petersson_geometric(
    k: int, D: int, chi: DirichletCharacter, m: int, n: int, cmax: int
) -> TruncationReport:
    """Geometric side of the trace formula, truncated at modulus cmax."""
    if k < 4:
        raise PreconditionError(f"weight must be >= 4, got {k}")
    if m < 1 or n < 1:
        raise PreconditionError("indices must be positive")
    if cmax < D:
        raise PreconditionError(f"cmax = {cmax} below the level {D}")
    _check_parity(k, chi)
    total = 0.0 + 0.0j
    abs_total = 0.0
    count = 0
    for c in range(D, cmax + 1, D):
        term = twisted_kloosterman(chi, m, n, c) / c * jv(
            k - 1, 2.0 * TWO_PI * math.sqrt(m * n) / c
        )
        total += term
        abs_total += abs(term)
        count += 1
    value = (1.0 if m == n else 0.0) + TWO_PI * ipow(-k) * total
    quad = 1e-13 * TWO_PI * abs_total + 1e-16 * max(count, 1)
    return TruncationReport(
        value=complex(value),
        cmax=cmax,
        tail_bound=petersson_tail_bound(k, D, m, n, cmax),
        quadrature_error=quad,
    )


def auto_cmax(k: int, D: int, m: int, n: int, tol: float, cap: int = 200000) -> int:
    """Smallest multiple of D whose tail bound is below tol (doubling search)."""
    c = max(2 * D, 8)
    while petersson_tail_bound(k, D, m, n, c) > tol:
        c *= 2
        if c > cap:
            raise PreconditionError(
                f"tail bound cannot reach {tol:.1e} below cmax = {cap}"
            )
    return c


def petersson_geometric_grid(
    k: int,
    D: int,
    chi: DirichletCharacter,
    ms: list[int],
    ns: list[int],
    cmax: int,
) -> np.ndarray:
    """Geometric values for every (m, n) in ms x ns, one pass over moduli."""
    if k < 4:
        raise PreconditionError(f"weight must be >= 4, got {k}")
    _check_parity(k, chi)
    ms_arr = np.asarray(ms, dtype=np.int64)
    ns_arr = np.asarray(ns, dtype=np.int64)
    total = np.zeros((len(ms_arr), len(ns_arr)), dtype=complex)
    sq = np.sqrt(np.outer(ms_arr.astype(float), ns_arr.astype(float)))
    for c in range(D, cmax + 1, D):
        S = kloosterman_grid(chi, ms_arr, ns_arr, c)
        total += S / c * jv(k - 1, 2.0 * TWO_PI * sq / c)
    value = TWO_PI * ipow(-k) * total
    value[np.equal.outer(ms_arr, ns_arr)] += 1.0
    return value


def petersson_spectral(basis: HarmonicBasis, m: int, n: int) -> complex:
    """sum_f omega_f conj(a_f(m)) a_f(n) over the basis."""
    if m < 1 or n < 1:
        raise PreconditionError("indices must be positive")
    total = 0.0 + 0.0j
    for f in basis.forms:
        if f.harmonic_weight is None:
            raise PreconditionError(f"{f.label}: harmonic weight missing")
        total += f.harmonic_weight * np.conj(f.a(m)) * f.a(n)
    return complex(total)


def verify_petersson(
    basis: HarmonicBasis,
    k: int,
    D: int,
    chi: DirichletCharacter,
    m: int,
    n: int,
    cmax: int,
) -> float:
    """|spectral - geometric|; within budget when the basis spans the space."""
    geo = petersson_geometric(k, D, chi, m, n, cmax)
    spec = petersson_spectral(basis, m, n)
    return abs(spec - geo.value)
