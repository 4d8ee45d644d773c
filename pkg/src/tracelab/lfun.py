"""Dirichlet-series L-values, analytic continuation of harmonically
averaged L-functions through the geometric side of the trace formula, root
numbers, functional-equation residuals, and isolation of single forms.

The continuation follows the dyadic mechanism: with a window g on [1, 4]
forming a smooth partition of unity under x -> x/2^u, and
G_s(y) = y^(-s) g(y),

    sum_f^h conj(a_f(ell)) L(s, f) = sum_{u >= -1} 2^(-us) I_s(2^u; ell),

where each block I_s(X; ell) has a geometric expansion (diagonal + dual
zeroth frequency at level 1 + oscillatory double sum) that converges for
Re s > -(k-4)/2.  No integral representation of the L-function is used,
which keeps the functional-equation check non-circular.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .arith import DirichletCharacter, gauss_sum, is_squarefree, level_split, moebius
from .errors import (
    PreconditionError,
    SingularSystemError,
    TruncationError,
    UnsupportedCaseError,
)
from .forms import CuspFormData, HarmonicBasis
from .specfun import gamma_ratio, ipow
from .transforms import DEFAULT_CFG, BumpFunction, QuadratureConfig, canonical_bump
from .voronoi import (
    _dual_kloosterman_sums,
    _hankel_power_grid,
    _hankel_window_power,
    geometric_double_sum,
)

TWO_PI = 2.0 * math.pi
EULER_GAMMA = 0.5772156649015329


@lru_cache(maxsize=1)
def dyadic_window() -> BumpFunction:
    """The fixed window on [1, 4] with sum_u g(x / 2^u) = 1 for x > 0.

    Built as b/S with b the canonical bump on [1, 4] and
    S(x) = b(x/2) + b(x) + b(2x) (S is multiplicatively 2-periodic on the
    support, so the dilates of g telescope to 1).  The partition property
    is verified on a grid to 1e-12 at construction.
    """
    b = canonical_bump(1.0, 4.0)

    def fn(x):
        x = np.asarray(x, dtype=float)
        denom = b(x / 2.0) + b(x) + b(2.0 * x)
        with np.errstate(invalid="ignore", divide="ignore"):
            out = np.where(denom > 0.0, b(x) / np.where(denom > 0, denom, 1.0), 0.0)
        return out

    g = BumpFunction(1.0, 4.0, fn, center=2.0, width=3.0)
    xs = np.linspace(1.0, 4.0, 701)
    total = sum(g(xs / 2.0**u) for u in range(-3, 4))
    if np.max(np.abs(total - 1.0)) > 1e-12:
        raise PreconditionError("dyadic window failed its partition check")
    return g


# ----------------------------------------------------------------------
# direct Dirichlet series

@dataclass(frozen=True)
class LSeriesValue:
    """Partial Dirichlet sum with a divisor-bound tail estimate."""

    value: complex
    tail_estimate: float
    n_used: int


def dirichlet_L(form: CuspFormData, s: complex, N: int = 0) -> LSeriesValue:
    """sum_{n <= N} a(n) n^(-s) for Re s >= 1.2.

    The tail estimate integrates the divisor-sum envelope
    sum_{n > N} d(n) n^(-sigma) ~ ((ln N + 2 gamma)/(sigma - 1)
    + 1/(sigma-1)^2) N^(1-sigma), honest but not certified near sigma = 1.
    """
    s = complex(s)
    if s.real < 1.2:
        raise PreconditionError(
            f"Re s = {s.real} below the direct-convergence gate 1.2; "
            "use a_ell_continued for the strip"
        )
    if N <= 0:
        N = form.n_max
    if N > form.n_max:
        raise PreconditionError(f"N = {N} beyond coefficient range {form.n_max}")
    n = np.arange(1, N + 1, dtype=float)
    value = complex(np.sum(form.coeffs[1 : N + 1] * n ** (-s)))
    sigma = s.real
    tail = (
        (math.log(N) + 2.0 * EULER_GAMMA) / (sigma - 1.0) + 1.0 / (sigma - 1.0) ** 2
    ) * N ** (1.0 - sigma)
    return LSeriesValue(value=value, tail_estimate=tail, n_used=N)


# ----------------------------------------------------------------------
# the dyadic continuation

def _i_s_dual_form(
    k: int,
    D: int,
    chi: DirichletCharacter,
    ell: int,
    s: complex,
    X: float,
    window: BumpFunction,
    cfg: QuadratureConfig,
    tol: float,
) -> complex:
    """The dyadic block evaluated through its dual expansion.

    The block with window y -> G_s(y/X) has Hankel weights
    w_n = X (H_k G_s)(n X / D), which decay root-exponentially once
    n X / D passes the window's oscillation scale, so for large X only a
    handful of dual terms survive.  Requires chi primitive or trivial.
    """
    split = level_split(ell, D)
    if D == 1:
        pref = ipow(k)
    elif chi.is_trivial:
        if not is_squarefree(D):
            raise PreconditionError("trivial character needs squarefree level")
        pref = moebius(D) * ipow(k)
    else:
        chi_m1 = chi.values[(D - 1) % D]
        pref = (
            ipow(k)
            * chi_m1
            * np.conj(chi.values[split.ell_prime % D])
            * gauss_sum(chi)
            / math.sqrt(D)
        )

    threshold = tol / (40.0 * max(X, 1.0))
    n_count = 64
    w = None
    while True:
        narr = np.arange(1, n_count + 1, dtype=float)
        w = X * _hankel_power_grid(k, window, s, narr * X / D, cfg)
        if np.max(np.abs(w[-16:])) < threshold * max(X, 1.0):
            break
        if n_count >= 60000:
            raise TruncationError("dual block weights failed to decay")
        n_count *= 2
    inner = _dual_kloosterman_sums(
        k, D, chi, split.ell0, split.ell_prime, ell, n_count, w, tol
    )
    value = complex(pref * np.sum(w * TWO_PI * ipow(-k) * inner))
    if D == 1:
        value += ipow(-k) * X * _hankel_window_power(k, window, s, ell * X, cfg)
    return value


def i_s_geometric(
    k: int,
    D: int,
    chi: DirichletCharacter,
    ell: int,
    s: complex,
    X: float,
    g: BumpFunction | None = None,
    cfg: QuadratureConfig = DEFAULT_CFG,
    tol: float = 1e-8,
    force_form: str | None = None,
) -> complex:
    """One dyadic block of the averaged Dirichlet series, geometrically.

    For X up to the switchover (32) this is the opened trace formula:
    diagonal G_s(ell/X) (vanishing for X > 2 ell), the dual zeroth
    frequency i^(-k) X (H_k G_s)(ell X) at level one, and the oscillatory
    double sum over (c, m).  Beyond the switchover the block is evaluated
    through its dual expansion, where the weights collapse; both branches
    agree on the overlap band (tested).
    """
    if k < 4:
        raise PreconditionError(f"weight must be >= 4, got {k}")
    if chi.parity != (-1) ** k:
        raise PreconditionError("character parity incompatible with weight")
    if ell < 1 or X <= 0:
        raise PreconditionError("need ell >= 1 and X > 0")
    window = g if g is not None else dyadic_window()
    s = complex(s)
    dual_ok = D == 1 or chi.is_trivial or chi.is_primitive
    use_dual = force_form != "initial" and dual_ok and (
        force_form == "dual" or X > max(32.0, 2.0 * ell + 1.0)
    )
    if use_dual:
        return _i_s_dual_form(k, D, chi, ell, s, X, window, cfg, tol)
    y_diag = ell / X
    value = complex(window(y_diag)) * (y_diag ** (-s) if window(y_diag) else 1.0)
    if D == 1:
        value += ipow(-k) * X * _hankel_window_power(k, window, s, ell * X, cfg)
    value += geometric_double_sum(
        k, D, chi, ell, window, X=X, s=s, cfg=cfg, tol=tol
    )
    return value


def a_ell_continued(
    k: int,
    D: int,
    chi: DirichletCharacter,
    ell: int,
    s: complex,
    umax: int = 40,
    cfg: QuadratureConfig = DEFAULT_CFG,
    tol: float = 1e-7,
) -> complex:
    """The averaged L-function sum_f^h conj(a_f(ell)) L(s, f), continued to
    Re s > -(k-4)/2 via the dyadic geometric expansion.

    The u-sum starts at -1 and stops adaptively once the blocks are
    negligible (they decay superpolynomially in X at fixed s); umax caps it.
    """
    s = complex(s)
    if s.real <= -(k - 4) / 2.0:
        raise PreconditionError(
            f"Re s = {s.real} outside the continuation region > {-(k - 4) / 2}"
        )
    total = 0.0 + 0.0j
    small_streak = 0
    sigma = max(s.real, 0.0)
    for u in range(-1, umax + 1):
        X = 2.0**u
        # the block weight 2^(-u sigma) lets later blocks run looser
        tol_u = min(tol * 2.0 ** (u * sigma), 1e4 * tol) if u > 2 else tol
        block = 2.0 ** (-u * s) * i_s_geometric(
            k, D, chi, ell, s, X, cfg=cfg, tol=tol_u
        )
        total += block
        if X > 2 * ell and abs(block) < tol / 8.0:
            small_streak += 1
            if small_streak >= 2:
                break
        else:
            small_streak = 0
    return complex(total)


# ----------------------------------------------------------------------
# root numbers and functional-equation residuals

@dataclass(frozen=True)
class RootNumber:
    """The arithmetic constant of the functional equation, by level case."""

    value: complex
    case: str  # 'primitive' | 'trivial_squarefree' | 'level_one'


def root_number(form: CuspFormData) -> RootNumber:
    """Root number of the fixture form.

    level 1:                    i^k
    trivial chi, squarefree D:  i^k sqrt(D) mu(D) conj(a(D))
    primitive chi, D > 1:       i^k chi(-1) gauss_sum(chi) conj(a(D))
    The modulus is checked to be 1 within 1e-8 (a diagnostic on the
    coefficient data, not an a-priori input).
    """
    k, D, chi = form.weight, form.level, form.character
    if D == 1:
        rn = RootNumber(value=ipow(k), case="level_one")
    elif chi.is_trivial:
        if not is_squarefree(D):
            raise UnsupportedCaseError(
                f"trivial character with non-squarefree level {D} is not covered"
            )
        rn = RootNumber(
            value=ipow(k) * math.sqrt(D) * moebius(D) * np.conj(form.a(D)),
            case="trivial_squarefree",
        )
    elif chi.is_primitive:
        rn = RootNumber(
            value=ipow(k)
            * chi.values[(D - 1) % D]
            * gauss_sum(chi)
            * np.conj(form.a(D)),
            case="primitive",
        )
    else:
        raise UnsupportedCaseError(
            "imprimitive nontrivial characters are not covered"
        )
    if abs(abs(rn.value) - 1.0) > 1e-8:
        raise PreconditionError(
            f"{form.label}: root number modulus {abs(rn.value):.3e} != 1"
        )
    return rn


def fe_residual(
    s: complex,
    form: CuspFormData | None = None,
    k: int | None = None,
    D: int | None = None,
    chi: DirichletCharacter | None = None,
    ell: int = 1,
    umax: int = 40,
    cfg: QuadratureConfig = DEFAULT_CFG,
    tol: float = 1e-7,
) -> float:
    """|A_ell(s) - rootfactor * D^(1/2-s) * gamma_ratio(k, s) * dual(1-s)|.

    Both sides come from the trace-formula continuation: the primal average
    in (k, D, chi) at s, the dual average in the conjugate character at
    1 - s.  For D > 1 the root factor needs conj(a(D)) from a fixture form;
    at level one only (k, D, chi) are required.  ell must be coprime to D.
    """
    s = complex(s)
    if not (0.0 < s.real < 1.0):
        raise PreconditionError("functional-equation checks live in 0 < Re s < 1")
    if form is not None:
        k, D, chi = form.weight, form.level, form.character
    if k is None or D is None or chi is None:
        raise PreconditionError("need a fixture form or explicit (k, D, chi)")
    if math.gcd(ell, D) != 1:
        raise PreconditionError("ell must be coprime to the level")
    if D > 1 and form is None:
        raise PreconditionError("levels > 1 need fixture data for conj(a(D))")

    if D == 1:
        root = ipow(k)
    else:
        root = root_number(form).value
    lhs = a_ell_continued(k, D, chi, ell, s, umax, cfg, tol)
    dual = a_ell_continued(k, D, chi.conjugate(), ell, 1.0 - s, umax, cfg, tol)
    factor = (
        root
        * D ** (0.5 - s)
        * gamma_ratio(k, s)
        * np.conj(chi.values[ell % D])
    )
    return abs(lhs - factor * dual)


# ----------------------------------------------------------------------
# isolating individual forms

def isolate_lvalues(
    basis: HarmonicBasis,
    ells: list[int] | None,
    s: complex,
    umax: int = 40,
    cfg: QuadratureConfig = DEFAULT_CFG,
    tol: float = 1e-7,
    g_values: list[complex] | None = None,
    cond_cap: float = 1e6,
) -> list[complex]:
    """Per-form L(s, f_i) from the averaged continuations.

    Solves G_{ell_j}(s) = sum_i conj(a_{f_i}(ell_j)) [omega_i L(s, f_i)]
    and rescales by the harmonic weights.  When `ells` is None a greedy
    search over ell <= 20 picks a well-conditioned coefficient matrix.
    `g_values`, when given, supplies the averaged values directly (used by
    synthetic bases that do not span a true eigenspace).
    """
    d = basis.dimension
    if d < 1 or d > 3:
        raise PreconditionError("isolation supports dimensions 1..3")
    forms = basis.forms

    def matrix_for(chosen: list[int]) -> np.ndarray:
        return np.array(
            [[np.conj(f.a(ell)) for f in forms] for ell in chosen], dtype=complex
        )

    if ells is None:
        best: tuple[float, list[int]] | None = None
        from itertools import combinations

        for combo in combinations(range(1, 21), d):
            A = matrix_for(list(combo))
            c = np.linalg.cond(A)
            if best is None or c < best[0]:
                best = (c, list(combo))
        if best is None or best[0] > cond_cap:
            raise SingularSystemError(
                f"no well-conditioned index set found below ell = 20 "
                f"(best condition {best[0] if best else math.inf:.2e})"
            )
        ells = best[1]
    ells = list(ells)
    if len(ells) != d:
        raise PreconditionError("need exactly dimension-many indices")
    A = matrix_for(ells)
    cond = np.linalg.cond(A)
    if cond > cond_cap:
        raise SingularSystemError(
            f"coefficient matrix at ells={ells} has condition {cond:.2e}"
        )

    f0 = forms[0]
    if g_values is None:
        g_vec = np.array(
            [
                a_ell_continued(
                    f0.weight, f0.level, f0.character, ell, s, umax, cfg, tol
                )
                for ell in ells
            ],
            dtype=complex,
        )
    else:
        if len(g_values) != d:
            raise PreconditionError("g_values must have dimension-many entries")
        g_vec = np.asarray(g_values, dtype=complex)
    weighted = np.linalg.solve(A, g_vec)
    out = []
    for f, wl in zip(forms, weighted):
        if f.harmonic_weight is None:
            raise PreconditionError(f"{f.label}: harmonic weight missing")
        out.append(complex(wl / f.harmonic_weight))
    return out
