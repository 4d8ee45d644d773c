"""Exact modular arithmetic, Dirichlet characters, and complete exponential sums.

Everything here is a pure function of its arguments.  Exponential sums are
evaluated in complex double precision with e(z) = exp(2*pi*i*z); "exact"
claims are therefore tolerance claims that scale with the term count
(tol = 1e-9 * c is used by the vanishing checks).
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache

import numpy as np

from .errors import InvariantViolation, PreconditionError

TWO_PI = 2.0 * math.pi


# ----------------------------------------------------------------------
# elementary integer functions

def mod_inverse(x: int, c: int) -> int:
    """Inverse of x modulo c, normalized to [0, c), via extended Euclid.

    Raises PreconditionError when gcd(x, c) > 1.
    """
    if c < 1:
        raise PreconditionError(f"modulus must be positive, got {c}")
    if c == 1:
        return 0
    a, b = x % c, c
    u0, u1 = 1, 0
    while b:
        q, r = divmod(a, b)
        a, b = b, r
        u0, u1 = u1, u0 - q * u1
    if a != 1:
        raise PreconditionError(f"{x} is not invertible mod {c} (gcd = {a})")
    return u0 % c


def moebius(n: int) -> int:
    """Moebius function by trial division."""
    if n < 1:
        raise PreconditionError(f"moebius needs n >= 1, got {n}")
    result = 1
    p = 2
    while p * p <= n:
        if n % p == 0:
            n //= p
            if n % p == 0:
                return 0
            result = -result
        p += 1 if p == 2 else 2
    if n > 1:
        result = -result
    return result


def euler_phi(n: int) -> int:
    """Euler totient by trial division."""
    result = n
    p = 2
    while p * p <= n:
        if n % p == 0:
            while n % p == 0:
                n //= p
            result -= result // p
        p += 1 if p == 2 else 2
    if n > 1:
        result -= result // n
    return result


def divisor_count(n: int) -> int:
    """Number of divisors of n."""
    count = 1
    p = 2
    while p * p <= n:
        if n % p == 0:
            e = 0
            while n % p == 0:
                n //= p
                e += 1
            count *= e + 1
        p += 1 if p == 2 else 2
    if n > 1:
        count *= 2
    return count


def prime_factors(n: int) -> list[int]:
    """Distinct prime divisors of n, ascending."""
    out = []
    p = 2
    while p * p <= n:
        if n % p == 0:
            out.append(p)
            while n % p == 0:
                n //= p
        p += 1 if p == 2 else 2
    if n > 1:
        out.append(n)
    return out


def factorize(n: int) -> list[tuple[int, int]]:
    """Prime factorization of n as (p, exponent) pairs, ascending in p."""
    out = []
    p = 2
    while p * p <= n:
        if n % p == 0:
            e = 0
            while n % p == 0:
                n //= p
                e += 1
            out.append((p, e))
        p += 1 if p == 2 else 2
    if n > 1:
        out.append((n, 1))
    return out


def is_squarefree(n: int) -> bool:
    return all(e == 1 for _, e in factorize(n))


# d(c) <= K4 * c^(1/4) for every c >= 1: the maximum of d(c)/c^(1/4) is a
# finite product over primes p with max_a (a+1) p^(-a/4) > 1, i.e. p <= 13.
DIVISOR_QUARTER_BOUND = 1.0
for _p in (2, 3, 5, 7, 11, 13):
    DIVISOR_QUARTER_BOUND *= max((_a + 1) * _p ** (-_a / 4.0) for _a in range(0, 80))


# ----------------------------------------------------------------------
# Dirichlet characters

@dataclass(frozen=True)
class DirichletCharacter:
    """A Dirichlet character mod D held as its full value table.

    `values[x]` is chi(x) for x in 0..D-1 (zero exactly on non-units).
    `exponents` are the discrete-log exponents on the fixed generators of
    the unit group; they define the deterministic enumeration `index`.
    """

    modulus: int
    values: tuple[complex, ...]
    is_primitive: bool
    parity: int
    index: int
    exponents: tuple[int, ...]

    def __call__(self, n: int) -> complex:
        return self.values[n % self.modulus]

    @property
    def is_trivial(self) -> bool:
        return all(e == 0 for e in self.exponents)

    def conjugate(self) -> "DirichletCharacter":
        gens = _unit_group(self.modulus)
        orders = [g[1] for g in gens]
        conj_exp = tuple((-e) % o for e, o in zip(self.exponents, orders))
        for chi in build_characters(self.modulus):
            if chi.exponents == conj_exp:
                return chi
        raise InvariantViolation("conjugate character not found")  # pragma: no cover

    def __repr__(self) -> str:
        kind = "primitive" if self.is_primitive else "imprimitive"
        return f"DirichletCharacter(mod {self.modulus}, index {self.index}, {kind})"


@lru_cache(maxsize=None)
def _unit_group(q: int) -> tuple[tuple[int, int], ...]:
    """Generators of (Z/qZ)* as ((g, order), ...), CRT-lexicographic.

    Odd prime powers are cyclic; 2^a with a >= 3 splits as <-1> x <5>.
    For composite q the generators of each prime-power factor are lifted
    by CRT to be 1 modulo the complementary factor.
    """
    if q == 1:
        return ()
    gens: list[tuple[int, int]] = []
    for p, a in factorize(q):
        pa = p ** a
        rest = q // pa
        rest_inv = mod_inverse(rest % pa, pa) if pa > 1 else 0

        def lift(g: int) -> int:
            # x = g mod pa, x = 1 mod rest
            if rest == 1:
                return g % q
            return (1 + rest * ((rest_inv * (g - 1)) % pa)) % q

        if p == 2:
            if a == 1:
                continue
            if a == 2:
                gens.append((lift(3), 2))
            else:
                gens.append((lift(pa - 1), 2))
                gens.append((lift(5), 2 ** (a - 2)))
        else:
            phi_pa = pa - pa // p
            for g in range(2, pa):
                if math.gcd(g, p) != 1:
                    continue
                seen = 1
                x = g % pa
                while x != 1:
                    x = (x * g) % pa
                    seen += 1
                if seen == phi_pa:
                    gens.append((lift(g), phi_pa))
                    break
    return tuple(gens)


@lru_cache(maxsize=None)
def _dlog_table(q: int) -> dict[int, tuple[int, ...]]:
    """residue -> exponent tuple on the _unit_group(q) generators."""
    gens = _unit_group(q)
    table = {1 % q: tuple(0 for _ in gens)}
    if q == 1:
        return {0: ()}
    # breadth of the abelian group: enumerate all exponent tuples
    from itertools import product

    for exps in product(*[range(o) for _, o in gens]):
        x = 1
        for (g, _), e in zip(gens, exps):
            x = (x * pow(g, e, q)) % q
        table[x] = exps
    return table


@lru_cache(maxsize=None)
def build_characters(D: int) -> tuple[DirichletCharacter, ...]:
    """All phi(D) Dirichlet characters mod D in a deterministic order.

    Enumeration is row-major over the generator exponent tuples (the same
    CRT-lexicographic generator order as _unit_group), so (modulus, index)
    is a stable identity across runs.
    """
    if D < 1:
        raise PreconditionError(f"modulus must be >= 1, got {D}")
    if D == 1:
        chi = DirichletCharacter(1, (1.0 + 0.0j,), True, 1, 0, ())
        return (chi,)

    gens = _unit_group(D)
    orders = [o for _, o in gens]
    dlog = _dlog_table(D)
    from itertools import product

    chars = []
    for index, exps in enumerate(product(*[range(o) for o in orders])):
        values = [0.0 + 0.0j] * D
        for x, xlog in dlog.items():
            t = Fraction(0)
            for e, d, o in zip(exps, xlog, orders):
                t += Fraction((e * d) % o, o)
            values[x] = cmath.exp(1j * TWO_PI * float(t % 1))
        parity = 1 if abs(values[D - 1] - 1) < 1e-9 else -1
        chi = DirichletCharacter(D, tuple(values), False, parity, index, tuple(exps))
        chars.append(chi)

    # primitivity: chi is induced from modulus D/p iff it is trivial on the
    # kernel of (Z/D)* -> (Z/(D/p))*
    out = []
    for chi in chars:
        primitive = True
        for p in prime_factors(D):
            d = D // p
            trivial_on_kernel = True
            for x in range(1, D, max(d, 1)):
                if math.gcd(x, D) != 1 or x % d != 1 % max(d, 1):
                    continue
                if abs(chi.values[x] - 1) > 1e-9:
                    trivial_on_kernel = False
                    break
            # the loop above only walks x = 1 + k*d which is exactly the kernel
            if trivial_on_kernel:
                primitive = False
                break
        out.append(
            DirichletCharacter(
                D, chi.values, primitive, chi.parity, chi.index, chi.exponents
            )
        )
    return tuple(out)


def trivial_character(D: int) -> DirichletCharacter:
    """The principal character mod D."""
    for chi in build_characters(D):
        if chi.is_trivial:
            return chi
    raise InvariantViolation("no trivial character found")  # pragma: no cover


# ----------------------------------------------------------------------
# exponential sums

@lru_cache(maxsize=4096)
def _residue_tables(c: int) -> tuple[np.ndarray, np.ndarray]:
    """(units mod c, their inverses) as int64 arrays, ascending in x.

    Inverses come from one extended Euclid on the product of all units plus
    a back-substitution sweep (batch inversion), which is several times
    cheaper than a per-unit Euclid.
    """
    if c == 1:
        return np.array([0], dtype=np.int64), np.array([0], dtype=np.int64)
    xs = [x for x in range(1, c) if math.gcd(x, c) == 1]
    prefix = [1] * (len(xs) + 1)
    for i, x in enumerate(xs):
        prefix[i + 1] = prefix[i] * x % c
    running = mod_inverse(prefix[-1], c)
    inv = [0] * len(xs)
    for i in range(len(xs) - 1, -1, -1):
        inv[i] = prefix[i] * running % c
        running = running * xs[i] % c
    return np.array(xs, dtype=np.int64), np.array(inv, dtype=np.int64)


def kloosterman(m: int, n: int, c: int) -> float:
    """Complete sum S(m,n;c) over reduced residues; real by conjugation symmetry."""
    if c < 1:
        raise PreconditionError(f"modulus must be positive, got {c}")
    if c == 1:
        return 1.0
    xs, inv = _residue_tables(c)
    phase = ((m % c) * inv + (n % c) * xs) % c
    total = np.exp((1j * TWO_PI / c) * phase).sum()
    if abs(total.imag) > 1e-9 * c:
        raise InvariantViolation(
            f"S({m},{n};{c}) has imaginary part {total.imag:.3e}"
        )
    return float(total.real)


def twisted_kloosterman(chi: DirichletCharacter, m: int, n: int, c: int) -> complex:
    """Character-twisted Kloosterman sum; requires chi's modulus to divide c."""
    D = chi.modulus
    if c < 1 or c % D != 0:
        raise PreconditionError(f"modulus {c} must be a positive multiple of {D}")
    if c == 1:
        return 1.0 + 0.0j
    xs, inv = _residue_tables(c)
    phase = ((m % c) * inv + (n % c) * xs) % c
    chibar = np.conj(np.array([chi.values[int(x) % D] for x in xs]))
    return complex((chibar * np.exp((1j * TWO_PI / c) * phase)).sum())


def gauss_sum(chi: DirichletCharacter) -> complex:
    """Normalized Gauss sum: D^(-1/2) * sum_a chi(a) e(a/D)."""
    D = chi.modulus
    total = sum(
        chi.values[a] * cmath.exp(1j * TWO_PI * a / D) for a in range(D)
    )
    return total / math.sqrt(D)


def ramanujan_sum(D: int) -> int:
    """sum over units of e(a/D), rounded from its real value; equals moebius(D)."""
    if D < 1:
        raise PreconditionError(f"modulus must be positive, got {D}")
    value = kloosterman(0, 1, D)
    nearest = round(value)
    if abs(value - nearest) > 1e-6 * D:
        raise InvariantViolation(f"Ramanujan sum for {D} not near an integer: {value}")
    return int(nearest)


# ----------------------------------------------------------------------
# level decomposition and the arithmetic lemmas as checkable operations

@dataclass(frozen=True)
class LevelSplit:
    """ell = ell0 * ell_prime with ell0 carrying exactly the primes of D."""

    ell: int
    ell0: int
    ell_prime: int


def level_split(ell: int, D: int) -> LevelSplit:
    if ell < 1 or D < 1:
        raise PreconditionError("level_split needs positive arguments")
    ell_prime = ell
    g = math.gcd(ell_prime, D)
    while g > 1:
        ell_prime //= g
        g = math.gcd(ell_prime, D)
    return LevelSplit(ell, ell // ell_prime, ell_prime)


def check_twisted_multiplicativity(
    chi: DirichletCharacter, ell: int, n: int, c: int
) -> tuple[complex, complex]:
    """Both sides of the conductor-splitting identity for twisted sums.

    lhs = S_chi(ell0*D*n, ell'; c*D) and
    rhs = S(n, ell*Dbar; c) * conj(chi)(c) * chi(ell') * gauss_sum(conj chi) * sqrt(D),
    which agree for primitive chi and gcd(c, D) = 1.
    """
    D = chi.modulus
    if not chi.is_primitive or D <= 1:
        raise PreconditionError("identity requires a primitive character mod D > 1")
    if math.gcd(c, D) != 1:
        raise PreconditionError(f"c = {c} must be coprime to D = {D}")
    split = level_split(ell, D)
    lhs = twisted_kloosterman(chi, split.ell0 * D * n, split.ell_prime, c * D)
    Dbar = mod_inverse(D % c, c) if c > 1 else 0
    chibar = chi.conjugate()
    rhs = (
        kloosterman(n, ell * Dbar, c)
        * chibar(c)
        * chi(split.ell_prime)
        * gauss_sum(chibar)
        * math.sqrt(D)
    )
    return lhs, rhs


def check_vanishing(chi: DirichletCharacter, m: int, n: int, c: int) -> bool:
    """True iff some prime p has p | m, p coprime to n, p^2 | c.

    When the hypothesis holds the twisted sum must vanish; that is asserted
    to within 1e-9 * c before returning.
    """
    hypothesis = False
    for p, e in factorize(c):
        if e >= 2 and m % p == 0 and n % p != 0:
            hypothesis = True
            break
    if hypothesis:
        value = twisted_kloosterman(chi, m, n, c)
        if abs(value) > 1e-9 * c:
            raise InvariantViolation(
                f"S_chi({m},{n};{c}) = {value:.3e} should vanish"
            )
    return hypothesis


def kloosterman_grid(
    chi: DirichletCharacter, ms: "np.ndarray", ns: "np.ndarray", c: int
) -> np.ndarray:
    """Matrix of S_chi(m, n; c) over all (m, n) in ms x ns (one pass over x).

    Used by the exhaustive scans and the Petersson grid; identical values to
    twisted_kloosterman, just batched.
    """
    D = chi.modulus
    if c % D != 0:
        raise PreconditionError(f"modulus {c} must be a multiple of {D}")
    if c == 1:
        return np.ones((len(ms), len(ns)), dtype=complex)
    xs, inv = _residue_tables(c)
    E = np.exp((1j * TWO_PI / c) * ((np.asarray(ms, dtype=np.int64)[:, None] % c) * inv[None, :] % c))
    chibar = np.conj(np.array([chi.values[int(x) % D] for x in xs]))
    F = np.exp((1j * TWO_PI / c) * ((np.asarray(ns, dtype=np.int64)[:, None] % c) * xs[None, :] % c))
    return E @ (chibar[None, :] * F).T
