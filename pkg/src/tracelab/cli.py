"""Command-line front end: every verification as a subcommand with
machine-readable output.

Each run prints a report (one line per check: name, value, residual,
budget, pass/fail) as JSON (default) or an aligned table, and exits 0 when
every residual is inside its budget, 1 on a residual failure, 2 on usage
or input errors.  Identical argv + fixtures produce byte-identical JSON:
all accumulation orders are fixed.
"""

from __future__ import annotations

import argparse
import cmath
import json
import math
import os
import sys
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path

import numpy as np

from . import arith, forms, lfun, specfun, traceformula, transforms, voronoi
from .errors import TraceLabError

USAGE_EXIT = 2
FAIL_EXIT = 1


def parse_complex(text: str) -> complex:
    """Parse 'a+bi' strings ('0.5+0.3i', '2', '-1.5i')."""
    cleaned = text.strip().replace(" ", "").replace("i", "j")
    try:
        return complex(cleaned)
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"cannot parse complex number {text!r}") from exc


def _c2pair(z: complex) -> list[float]:
    z = complex(z)
    return [z.real, z.imag]


class Report:
    def __init__(self, command: str):
        self.command = command
        self.checks: list[dict] = []

    def add(self, name: str, value, residual: float, budget: float) -> None:
        self.checks.append(
            {
                "name": name,
                "value": _c2pair(value) if value is not None else None,
                "residual": float(residual),
                "budget": float(budget),
                "pass": bool(residual <= budget),
            }
        )

    @property
    def passed(self) -> bool:
        return all(c["pass"] for c in self.checks)

    def emit(self, fmt: str) -> int:
        if fmt == "json":
            payload = {
                "command": self.command,
                "checks": self.checks,
                "pass": self.passed,
            }
            print(json.dumps(payload, sort_keys=True, indent=2))
        else:
            width = max((len(c["name"]) for c in self.checks), default=10)
            for c in self.checks:
                flag = "PASS" if c["pass"] else "FAIL"
                val = (
                    f"{c['value'][0]:+.6e}{c['value'][1]:+.6e}i"
                    if c["value"] is not None
                    else " " * 12
                )
                print(
                    f"{c['name']:<{width}}  {val}  residual {c['residual']:.3e}  "
                    f"budget {c['budget']:.3e}  {flag}"
                )
            print(f"overall: {'PASS' if self.passed else 'FAIL'}")
        return 0 if self.passed else FAIL_EXIT


def _resolve_fixture(name: str) -> Path:
    p = Path(name)
    if p.exists():
        return p
    candidate = forms.default_fixture_dir() / name
    if candidate.exists():
        return candidate
    raise TraceLabError(f"fixture not found: {name}")


def _load_fixtures(names: list[str]) -> list[forms.CuspFormData]:
    if not names:
        raise TraceLabError("at least one --fixture is required")
    return [forms.load_fixture(_resolve_fixture(n)) for n in names]


def _character(D: int, index: int) -> arith.DirichletCharacter:
    chars = arith.build_characters(D)
    if not 0 <= index < len(chars):
        raise TraceLabError(f"char index {index} out of range for modulus {D}")
    return chars[index]


# ----------------------------------------------------------------------
# subcommand bodies

def cmd_arith_check(args) -> int:
    rep = Report("arith-check")
    tol = args.tol if args.tol else 1e-9

    cmax = args.cmax or 200
    cases = []
    for c in range(1, cmax + 1):
        sq = [p for p, e in arith.factorize(c) if e >= 2]
        if not sq:
            continue
        for D in [d for d in range(1, 13) if c % d == 0]:
            for chi in arith.build_characters(D):
                cases.append((chi, c, sq))

    def worst_for(case) -> float:
        chi, c, sq = case
        worst = 0.0
        for m in range(1, 13):
            for n in range(1, 13):
                if any(m % p == 0 and n % p != 0 for p in sq):
                    val = abs(arith.twisted_kloosterman(chi, m, n, c))
                    worst = max(worst, val / c)
        return worst

    if args.threads > 1:
        with ThreadPoolExecutor(max_workers=args.threads) as pool:
            worst = max(pool.map(worst_for, cases), default=0.0)
    else:
        worst = max(map(worst_for, cases), default=0.0)
    rep.add(f"kloosterman-vanishing c<={cmax}", None, worst, tol)

    dev = 0.0
    for D in (5, 8):
        for chi in arith.build_characters(D):
            if not chi.is_primitive:
                continue
            for c in [c for c in range(1, 21) if math.gcd(c, D) == 1]:
                for ell in range(1, 9):
                    for n in range(1, 9):
                        lhs, rhs = arith.check_twisted_multiplicativity(chi, ell, n, c)
                        dev = max(dev, abs(lhs - rhs) / (1.0 + abs(lhs)))
    rep.add("twisted-multiplicativity D in {5,8}", None, dev, 1e-8)

    gdev = 0.0
    for D in range(1, 31):
        for chi in arith.build_characters(D):
            if chi.is_primitive:
                gdev = max(gdev, abs(abs(arith.gauss_sum(chi)) - 1.0))
    rep.add("gauss-sum-modulus D<=30", None, gdev, 1e-10)

    rdev = max(
        abs(arith.ramanujan_sum(D) - arith.moebius(D)) for D in range(1, 201)
    )
    rep.add("ramanujan-equals-moebius D<=200", None, rdev, 0.0)
    return rep.emit(args.format)


def cmd_specfun_check(args) -> int:
    rep = Report("specfun-check")
    worst = 0.0
    for k in range(4, 17, 2):
        for s in (0.3 + 2j, 1.5 - 1j, 2.0, 0.5 + 0.25j, -0.2 + 1j):
            lhs = specfun.gamma_factor(k, s)
            w = complex(s + (k - 1) / 2.0)
            rhs = (
                math.pi**-complex(s).real
                * cmath.exp(
                    -1j * complex(s).imag * math.log(math.pi)
                    + __import__("scipy.special", fromlist=["loggamma"]).loggamma(w / 2)
                    + __import__("scipy.special", fromlist=["loggamma"]).loggamma(
                        (w + 1) / 2
                    )
                )
            )
            worst = max(worst, abs(lhs - rhs) / abs(rhs))
    rep.add("gamma-factor-duplication", None, worst, 1e-10)

    mb_cases = [
        (12, 0.5, 3.0, 200.0),
        (12, 0.5, 5.0, 100.0),
        (4, 0.1, 2.0, 400.0),
        (6, 1.0, 3.0, 300.0),
    ]
    worst = 0.0
    for k, x, sigma, tmax in mb_cases:
        ref = specfun.bessel_j(k - 1, 4 * math.pi * x)
        got = specfun.mellin_barnes_j(k, x, sigma, tmax)
        worst = max(worst, abs(got - ref) / abs(ref))
    rep.add("mellin-barnes-vs-bessel", None, worst, 1e-8)

    worst = 0.0
    for k in (4, 8, 12):
        for x in np.linspace(0.1, 100.0, 41):
            d = (specfun.bessel_j(k, x + 5e-6) - specfun.bessel_j(k, x - 5e-6)) / 1e-5
            res = abs(specfun.bessel_j(k - 1, x) - specfun.bessel_j(k + 1, x) - 2 * d)
            worst = max(worst, res)
    rep.add("bessel-recurrence", None, worst, 1e-9)
    return rep.emit(args.format)


def cmd_transforms_check(args) -> int:
    rep = Report("transforms-check")
    g = transforms.canonical_bump(1.0, 2.0)
    cfg = transforms.QuadratureConfig(target_abs_error=1e-7)
    worst = 0.0
    for k, b in ((4, 1.25), (6, 1.5), (12, 1.75)):
        got = transforms.hankel_roundtrip(k, g, b, cfg, tail_cut=6000.0)
        worst = max(worst, abs(got - g(b)))
    rep.add("hankel-inversion", None, worst, 1e-6)

    worst = 0.0
    for k, alpha, beta, gamma in (
        (4, 1.0, 0.3, 0.3),
        (6, 2 + 1j, 0.2, 0.5),
        (8, 0.5, 0.6, 0.8),
    ):
        lhs, rhs = transforms.weber_check(k, alpha, beta, gamma)
        worst = max(worst, abs(lhs - rhs) / (1.0 + abs(rhs)))
    rep.add("bessel-product-laplace", None, worst, 1e-8)

    lhs, rhs = transforms.poisson_check([1], g, 10.0, 60)
    worst = abs(lhs - rhs)
    K3 = [cmath.exp(2j * math.pi * n / 3) for n in range(3)]
    lhs, rhs = transforms.poisson_check(K3, g, 10.0, 80)
    worst = max(worst, abs(lhs - rhs))
    rep.add("poisson-summation", None, worst, 1e-8)
    return rep.emit(args.format)


def cmd_petersson(args) -> int:
    rep = Report("petersson")
    form = _load_fixtures(args.fixture)[0]
    basis = forms.basis_of(form, cmax=args.cmax or 4096)
    k, D, chi = form.weight, form.level, form.character
    grid_max = 6
    tol = args.tol if args.tol else 1e-9
    worst = 0.0
    for m in range(1, grid_max + 1):
        for n in range(1, grid_max + 1):
            cmax = args.cmax or traceformula.auto_cmax(k, D, m, n, tol / 10.0)
            worst = max(
                worst, traceformula.verify_petersson(basis, k, D, chi, m, n, cmax)
            )
    rep.add(f"trace-formula {form.label} grid {grid_max}x{grid_max}", None, worst, tol)
    return rep.emit(args.format)


def cmd_voronoi_geometric(args) -> int:
    rep = Report("voronoi-geometric")
    chi = _character(args.level, args.char_index)
    g = transforms.canonical_bump(1.5, 3.5)
    tol = args.tol if args.tol else 1e-5
    res = voronoi.verify_voronoi(
        "geometric", k=args.weight, D=args.level, chi=chi, ell=args.ell, g=g,
        tol=tol / 10.0,
    )
    rep.add(
        f"dual-expansion-identity k={args.weight} D={args.level} ell={args.ell}",
        None,
        res,
        tol,
    )
    return rep.emit(args.format)


def cmd_voronoi_spectral(args) -> int:
    rep = Report("voronoi-spectral")
    form = _load_fixtures(args.fixture)[0]
    basis = forms.basis_of(form, cmax=args.cmax or 4096)
    g = transforms.canonical_bump(1.5, 3.5)
    tol = args.tol if args.tol else 1e-6
    res = voronoi.verify_voronoi(
        "spectral", basis=basis, ell=args.ell, g=g, tol=tol / 10.0
    )
    rep.add(f"dual-sum-vs-data {form.label} ell={args.ell}", None, res, tol)
    return rep.emit(args.format)


def cmd_continue_l(args) -> int:
    rep = Report("continue-l")
    form = _load_fixtures(args.fixture)[0]
    k, D, chi = form.weight, form.level, form.character
    s = args.s
    tol = args.tol if args.tol else 1e-5
    value = lfun.a_ell_continued(
        k, D, chi, args.ell, s, umax=args.umax or 40, tol=tol / 10.0
    )
    if s.real >= 1.2:
        basis = forms.basis_of(form, cmax=args.cmax or 4096)
        f = basis.forms[0]
        L = lfun.dirichlet_L(f, s)
        spectral = f.harmonic_weight * np.conj(f.a(args.ell)) * L.value
        rep.add(
            f"continuation-vs-series ell={args.ell} s={s}",
            value,
            abs(value - spectral),
            tol + L.tail_estimate,
        )
    else:
        rep.add(f"continuation ell={args.ell} s={s}", value, 0.0, tol)
    return rep.emit(args.format)


def cmd_fe_check(args) -> int:
    rep = Report("fe-check")
    form = _load_fixtures(args.fixture)[0]
    tol = args.tol if args.tol else 1e-4
    res = lfun.fe_residual(
        args.s, form=form, ell=args.ell, umax=args.umax or 40, tol=tol / 30.0
    )
    rep.add(f"functional-equation {form.label} s={args.s}", None, res, tol)
    return rep.emit(args.format)


def cmd_isolate(args) -> int:
    rep = Report("isolate")
    fixtures = _load_fixtures(args.fixture)
    basis = forms.HarmonicBasis(
        forms=tuple(forms.attach_harmonic_weight(f, args.cmax or 4096) for f in fixtures),
        dimension=len(fixtures),
    )
    s = args.s
    tol = args.tol if args.tol else 1e-4
    ells = [args.ell] if args.ell and len(fixtures) == 1 else None
    values = lfun.isolate_lvalues(basis, ells, s, umax=args.umax or 40, tol=tol / 10.0)
    for f, v in zip(basis.forms, values):
        if s.real >= 1.2:
            L = lfun.dirichlet_L(f, s)
            rep.add(
                f"isolated-L {f.label} s={s}", v, abs(v - L.value), tol + L.tail_estimate
            )
        else:
            rep.add(f"isolated-L {f.label} s={s}", v, 0.0, tol)
    return rep.emit(args.format)


def cmd_fixtures_validate(args) -> int:
    rep = Report("fixtures-validate")
    names = args.fixture or [
        p.name for p in sorted(forms.default_fixture_dir().glob("*.json"))
    ]
    for name in names:
        form = forms.load_fixture(_resolve_fixture(name))
        report = forms.validate_assumption(form)
        rep.add(
            f"coefficient-structure {form.label}",
            None,
            0.0 if report.passed else 1.0,
            0.5,
        )
        rn = lfun.root_number(form)
        rep.add(
            f"root-number-modulus {form.label} ({rn.case})",
            rn.value,
            abs(abs(rn.value) - 1.0),
            1e-8,
        )
    return rep.emit(args.format)


# ----------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="tracelab",
        description=(
            "Numerical verification of trace-formula identities for "
            "holomorphic cusp forms: exponential sums, Hankel analysis, "
            "Petersson averages, dual summation identities, and L-function "
            "functional equations. TRACE_LAB_FIXTURE_DIR overrides the "
            "fixture directory."
        ),
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, fixtures=False):
        p.add_argument("-k", "--weight", type=int, default=6)
        p.add_argument("-D", "--level", type=int, default=1)
        p.add_argument("--char-index", type=int, default=0)
        p.add_argument("--ell", type=int, default=1)
        p.add_argument("--s", type=parse_complex, default=complex(2.0))
        p.add_argument("--cmax", type=int, default=0)
        p.add_argument("--mmax", type=int, default=0)
        p.add_argument("--nmax", type=int, default=0)
        p.add_argument("--umax", type=int, default=0)
        p.add_argument("--tol", type=float, default=0.0)
        p.add_argument("--fixture", action="append", default=[])
        p.add_argument("--format", choices=("json", "table"), default="json")
        p.add_argument("--threads", type=int, default=1)

    specs = [
        ("arith-check", cmd_arith_check,
         "exponential-sum suite: Kloosterman vanishing under a square prime "
         "divisor, conductor-splitting twisted multiplicativity, Gauss-sum "
         "modulus, Ramanujan sums vs Moebius"),
        ("specfun-check", cmd_specfun_check,
         "gamma-factor duplication identity, contour representation of the "
         "Bessel kernel, Bessel three-term recurrence"),
        ("transforms-check", cmd_transforms_check,
         "Hankel self-inversion, the Laplace/Bessel product identity, "
         "Poisson summation"),
        ("petersson", cmd_petersson,
         "spectral vs geometric sides of the Petersson trace formula on a "
         "coefficient grid"),
        ("voronoi-geometric", cmd_voronoi_geometric,
         "data-free equality of the two geometric expansions of the "
         "averaged dual summation identity"),
        ("voronoi-spectral", cmd_voronoi_spectral,
         "fixture-weighted window sum against its Hankel-dual sum"),
        ("continue-l", cmd_continue_l,
         "trace-formula continuation of the averaged L-function, checked "
         "against the Dirichlet series where it converges"),
        ("fe-check", cmd_fe_check,
         "functional-equation residual of the averaged L-function between "
         "s and 1-s"),
        ("isolate", cmd_isolate,
         "per-form L-values recovered from averaged continuations by "
         "inverting the coefficient matrix"),
        ("fixtures-validate", cmd_fixtures_validate,
         "fixture coefficient structure (adjoint and multiplicative "
         "clauses) and root-number modulus"),
    ]
    for name, fn, help_text in specs:
        p = sub.add_parser(name, help=help_text, description=help_text)
        common(p)
        p.set_defaults(fn=fn)
    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.fn(args)
    except TraceLabError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return USAGE_EXIT


if __name__ == "__main__":
    sys.exit(main())
