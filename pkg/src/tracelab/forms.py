"""Cusp-form coefficient fixtures: data model, JSON ingestion, coefficient
validation, and harmonic weights for one-dimensional spaces.

Fixtures carry exact integer (arithmetic) coefficients lambda(n); the
analytic normalization a(n) = lambda(n) / n^((k-1)/2) happens at load time.
"""

from __future__ import annotations

import json
import math
import os
from dataclasses import dataclass, replace
from fractions import Fraction
from pathlib import Path

import numpy as np

from .arith import DirichletCharacter, build_characters, factorize
from .errors import FixtureError, PreconditionError, TruncationError

_ALLOWED_KEYS = {"label", "weight", "level", "character", "an", "harmonic_weight", "source"}


@dataclass(frozen=True)
class CuspFormData:
    """Normalized Fourier coefficients of one cusp form.

    `coeffs[n]` is a(n) for 1 <= n <= N (index 0 unused).  Coefficients at
    indices m*n with every prime of m dividing the level extend beyond N via
    the multiplicative clause a(m*n) = a(m) a(n), which all shipped fixtures
    satisfy (see validate_assumption).
    """

    label: str
    weight: int
    level: int
    character: DirichletCharacter
    coeffs: np.ndarray
    harmonic_weight: float | None = None
    source: str = ""

    @property
    def n_max(self) -> int:
        return len(self.coeffs) - 1

    def a(self, n: int) -> complex:
        if n < 1:
            raise PreconditionError(f"coefficient index must be >= 1, got {n}")
        if n <= self.n_max:
            return complex(self.coeffs[n])
        # peel off the part of n supported on primes of the level
        rest = n
        level_part = 1.0 + 0.0j
        for p, _ in factorize(math.gcd(n, self.level**8) if self.level > 1 else 1):
            e = 0
            while rest % p == 0:
                rest //= p
                e += 1
            if p > self.n_max:
                raise FixtureError(
                    f"{self.label}: need a({p}) to extend to index {n}"
                )
            level_part *= complex(self.coeffs[p]) ** e
        if rest > self.n_max:
            raise FixtureError(
                f"{self.label}: coefficient a({n}) out of range (N = {self.n_max}, "
                f"coprime part {rest})"
            )
        return level_part * complex(self.coeffs[rest])

    def lam(self, n: int) -> complex:
        """Arithmetic-normalization coefficient lambda(n) = a(n) n^((k-1)/2)."""
        return self.a(n) * n ** ((self.weight - 1) / 2.0)


@dataclass(frozen=True)
class HarmonicBasis:
    """An orthogonal family sharing (weight, level, character)."""

    forms: tuple[CuspFormData, ...]
    dimension: int

    def __post_init__(self):
        if self.dimension != len(self.forms):
            raise PreconditionError("dimension must equal the number of forms")
        if self.forms:
            k0, d0 = self.forms[0].weight, self.forms[0].level
            i0 = (self.forms[0].character.modulus, self.forms[0].character.index)
            for f in self.forms[1:]:
                if (
                    f.weight != k0
                    or f.level != d0
                    or (f.character.modulus, f.character.index) != i0
                ):
                    raise PreconditionError(
                        "all forms in a basis must share weight, level, character"
                    )


def _parse_coefficient(raw, n: int, label: str) -> complex:
    if isinstance(raw, bool):
        raise FixtureError(f"{label}: coefficient {n} has invalid type bool")
    if isinstance(raw, int):
        return complex(raw)
    if isinstance(raw, float):
        raise FixtureError(
            f"{label}: coefficient {n} is a float; fixtures carry exact values"
        )
    if isinstance(raw, list) and len(raw) == 2:
        x, y = raw
        if isinstance(x, int) and isinstance(y, int) and y > 0:
            # rational num/den
            return complex(Fraction(x, y))
        return complex(float(x), float(y))
    raise FixtureError(f"{label}: cannot parse coefficient {n}: {raw!r}")


def load_fixture(path: str | os.PathLike) -> CuspFormData:
    """Load one form from its JSON fixture and check the load-time invariants.

    Schema: {label, weight, level, character: {modulus, index} | {values},
    an: [lambda(1), lambda(2), ...], harmonic_weight?, source}.  Unknown keys
    are rejected.
    """
    path = Path(path)
    if not path.exists():
        raise FixtureError(f"fixture file not found: {path}")
    with open(path, "r", encoding="utf-8") as fh:
        data = json.load(fh)
    unknown = set(data) - _ALLOWED_KEYS
    if unknown:
        raise FixtureError(f"{path.name}: unknown fixture keys {sorted(unknown)}")
    for key in ("label", "weight", "level", "character", "an"):
        if key not in data:
            raise FixtureError(f"{path.name}: missing required key '{key}'")
    label = data["label"]
    k = int(data["weight"])
    D = int(data["level"])
    if k < 4:
        raise FixtureError(f"{label}: weight {k} below the supported minimum 4")

    charspec = data["character"]
    if "modulus" in charspec and "index" in charspec:
        if int(charspec["modulus"]) != D:
            raise FixtureError(f"{label}: character modulus != level")
        chars = build_characters(D)
        idx = int(charspec["index"])
        if not 0 <= idx < len(chars):
            raise FixtureError(f"{label}: character index {idx} out of range")
        chi = chars[idx]
    elif "values" in charspec:
        vals = tuple(complex(v[0], v[1]) for v in charspec["values"])
        if len(vals) != D:
            raise FixtureError(f"{label}: character value table has wrong length")
        chi = next(
            (
                c
                for c in build_characters(D)
                if max(abs(a - b) for a, b in zip(c.values, vals)) < 1e-8
            ),
            None,
        )
        if chi is None:
            raise FixtureError(f"{label}: character values match no character mod {D}")
    else:
        raise FixtureError(f"{label}: character needs modulus+index or values")

    if chi.parity != (-1) ** k:
        raise FixtureError(
            f"{label}: character parity {chi.parity} incompatible with weight {k}"
        )

    raw_an = data["an"]
    lam = [0.0 + 0.0j] + [
        _parse_coefficient(raw, n + 1, label) for n, raw in enumerate(raw_an)
    ]
    if abs(lam[1] - 1.0) > 1e-12:
        raise FixtureError(f"{label}: lambda(1) = {lam[1]} but fixtures must be "
                           "normalized with a(1) = 1")
    n_arr = np.arange(len(lam), dtype=float)
    n_arr[0] = 1.0
    coeffs = np.asarray(lam, dtype=complex) / n_arr ** ((k - 1) / 2.0)

    hw = data.get("harmonic_weight")
    if hw is not None:
        hw = float(hw)
        if hw <= 0:
            raise FixtureError(f"{label}: harmonic weight must be positive")

    return CuspFormData(
        label=label,
        weight=k,
        level=D,
        character=chi,
        coeffs=coeffs,
        harmonic_weight=hw,
        source=str(data.get("source", "")),
    )


def default_fixture_dir() -> Path:
    """Directory of shipped fixtures; TRACE_LAB_FIXTURE_DIR overrides it."""
    env = os.environ.get("TRACE_LAB_FIXTURE_DIR")
    if env:
        return Path(env)
    return Path(__file__).parent / "fixtures"


def load_named(name: str) -> CuspFormData:
    return load_fixture(default_fixture_dir() / name)


@dataclass(frozen=True)
class AssumptionReport:
    """Outcome of the coefficient-structure validation."""

    passed: bool
    n_checked_adjoint: int
    n_checked_multiplicative: int
    violations: tuple[str, ...]


def validate_assumption(form: CuspFormData, n_max: int | None = None) -> AssumptionReport:
    """Check the two coefficient identities the functional equation relies on.

    (1) conj(a(l)) = a(l) * conj(chi)(l) for all l <= N coprime to the level;
    (2) a(n m) = a(n) a(m) for all n m <= N with m supported on level primes.
    Both at 1e-9 relative tolerance; violations are reported, not raised.
    """
    N = min(form.n_max, n_max) if n_max else form.n_max
    D = form.level
    chi = form.character
    violations: list[str] = []

    checked1 = 0
    for l in range(1, N + 1):
        if math.gcd(l, D) != 1:
            continue
        checked1 += 1
        lhs = np.conj(form.coeffs[l])
        rhs = form.coeffs[l] * np.conj(chi.values[l % D])
        if abs(lhs - rhs) > 1e-9 * (1.0 + abs(lhs)):
            violations.append(f"adjoint clause fails at l={l}: {lhs} vs {rhs}")

    checked2 = 0
    level_powers = [1]
    if D > 1:
        stack = [1]
        while stack:
            m = stack.pop()
            for p in [p for p, _ in factorize(D)]:
                nm = m * p
                if nm <= N and nm not in level_powers:
                    level_powers.append(nm)
                    stack.append(nm)
    for m in sorted(level_powers):
        if m == 1:
            continue
        for n in range(1, N // m + 1):
            checked2 += 1
            lhs = form.coeffs[m * n]
            rhs = form.coeffs[m] * form.coeffs[n]
            if abs(lhs - rhs) > 1e-9 * (1.0 + abs(lhs)):
                violations.append(
                    f"multiplicative clause fails at (n,m)=({n},{m}): {lhs} vs {rhs}"
                )

    return AssumptionReport(
        passed=not violations,
        n_checked_adjoint=checked1,
        n_checked_multiplicative=checked2,
        violations=tuple(violations),
    )


def harmonic_weight_dim1(
    k: int, D: int, chi: DirichletCharacter, cmax: int = 4000
) -> float:
    """Harmonic weight of the unique form in a one-dimensional space.

    Evaluates the (1,1) Petersson average geometrically:
    1 + 2 pi i^(-k) sum_{c = 0 mod D} S_chi(1,1;c)/c * J_{k-1}(4 pi / c).
    The caller asserts dim = 1; the tail bound must be below 1e-10.
    """
    from . import traceformula  # local import to avoid a module cycle

    report = traceformula.petersson_geometric(k, D, chi, 1, 1, cmax)
    if report.tail_bound > 1e-10:
        raise TruncationError(
            f"tail bound {report.tail_bound:.2e} above 1e-10; increase cmax"
        )
    if abs(report.value.imag) > 1e-10:
        raise PreconditionError(
            f"(1,1) average has imaginary part {report.value.imag:.2e}"
        )
    value = float(report.value.real)
    if value <= 0:
        raise PreconditionError(f"harmonic weight came out nonpositive: {value}")
    return value


def attach_harmonic_weight(form: CuspFormData, cmax: int = 4000) -> CuspFormData:
    """Copy of the form with the dim-1 harmonic weight filled in."""
    if form.harmonic_weight is not None:
        return form
    w = harmonic_weight_dim1(form.weight, form.level, form.character, cmax)
    return replace(form, harmonic_weight=w)


def basis_of(form: CuspFormData, cmax: int = 4000) -> HarmonicBasis:
    """One-dimensional harmonic basis around a single fixture form."""
    return HarmonicBasis(forms=(attach_harmonic_weight(form, cmax),), dimension=1)
