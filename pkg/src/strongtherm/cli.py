"""Command-line front end.

    strongtherm zeta    --s 0.75 --nu 1 --route both
    strongtherm thermo  --beta 1 --omega 1 --lambda 1 --method strong --mode paper
    strongtherm compare --beta 1 --omega 1 --lambda 1,10,100 --format json

Exit codes: 0 success, 2 usage or domain error, 3 numerical convergence failure.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

from . import report, specfun
from .errors import ConvergenceError, DomainError
from .strongcoupling import Mode
from .weakcoupling import Variant

EXIT_OK = 0
EXIT_USAGE = 2
EXIT_CONVERGENCE = 3

# keys accepted in a config file, mapped to argparse destinations
CONFIG_KEYS = {
    "beta": "beta", "omega": "omega", "lambda": "lam", "sigma": "sigma", "p": "p",
    "potential": "potential", "method": "method", "methods": "method", "mode": "mode",
    "variant": "variant", "tol": "tol", "basis_size": "basis_size",
    "basis_frequency": "basis_frequency", "format": "format", "output": "output",
    "emit": "emit", "threads": "threads",
}

DEFAULTS = {
    "beta": "1", "omega": "1", "lam": "1", "sigma": "0", "p": "2", "potential": "power",
    "mode": "both", "variant": "both", "tol": "1e-10", "basis_size": None,
    "basis_frequency": None, "output": "-", "emit": "report", "threads": None,
}


class UsageError(Exception):
    pass


def read_config(path) -> dict:
    """Parse a flat ``key = value`` file; ``#`` starts a comment."""
    values = {}
    text = Path(path).read_text(encoding="utf-8")
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise UsageError(f"{path}:{lineno}: expected 'key = value'")
        key, value = (part.strip() for part in line.split("=", 1))
        key = key.replace("-", "_")
        if key not in CONFIG_KEYS:
            raise UsageError(f"{path}:{lineno}: unknown key {key!r}")
        values[CONFIG_KEYS[key]] = value
    return values


def _floats(text, name):
    try:
        out = [float(x) for x in str(text).split(",") if x.strip()]
    except ValueError:
        raise UsageError(f"--{name} expects a comma-separated list of numbers, got {text!r}") from None
    if not out:
        raise UsageError(f"--{name} is empty")
    return out


def _number(text, name, kind=float):
    if text is None:
        return None
    try:
        return kind(text)
    except ValueError:
        raise UsageError(f"--{name} expects a number, got {text!r}") from None


def _settings(args, command_defaults):
    merged = dict(DEFAULTS)
    merged.update(command_defaults)
    if getattr(args, "config", None):
        merged.update(read_config(args.config))
    for key in list(merged) + ["method", "format"]:
        value = getattr(args, key, None)
        if value is not None:
            merged[key] = value
    return merged


def _choices(text, allowed, name):
    items = [x.strip() for x in str(text).split(",") if x.strip()]
    if not items:
        raise UsageError(f"--{name} list is empty")
    for item in items:
        if item not in allowed:
            raise UsageError(f"--{name}: unknown value {item!r}; choose from {', '.join(allowed)}")
    return items


def _compare_options(s):
    methods = _choices(s.get("method", ""), report.METHODS, "method")
    modes = {"paper": [Mode.PAPER.value], "derived": [Mode.DERIVED.value],
             "both": [Mode.PAPER.value, Mode.DERIVED.value]}
    variants = {"printed": [Variant.AS_PRINTED.value], "restored": [Variant.OMEGA_RESTORED.value],
                "both": [Variant.AS_PRINTED.value, Variant.OMEGA_RESTORED.value]}
    if s["mode"] not in modes:
        raise UsageError(f"--mode must be paper, derived or both, got {s['mode']!r}")
    if s["variant"] not in variants:
        raise UsageError(f"--variant must be printed, restored or both, got {s['variant']!r}")
    return report.CompareOptions(
        methods=tuple(methods), modes=tuple(modes[s["mode"]]),
        variants=tuple(variants[s["variant"]]), oracle_tol=_number(s["tol"], "tol"),
        basis_size=_number(s["basis_size"], "basis-size", int),
        basis_frequency=_number(s["basis_frequency"], "basis-frequency"),
    )


def _write(text, output):
    if output in (None, "-"):
        sys.stdout.write(text)
    else:
        Path(output).write_text(text, encoding="utf-8", newline="")


def _run_grid(s):
    opts = _compare_options(s)
    betas = _floats(s["beta"], "beta")
    omegas = _floats(s["omega"], "omega")
    lams = _floats(s["lam"], "lambda")
    threads = _number(s["threads"], "threads", int)
    reports = report.sweep(
        betas, omegas, lams, opts, sigma=_number(s["sigma"], "sigma"),
        p=_number(s["p"], "p", int), potential=s["potential"], threads=threads,
    )
    inputs = {
        "beta": betas, "omega": omegas, "lambda": lams,
        "sigma": float(s["sigma"]), "p": int(s["p"]), "potential": s["potential"],
        "methods": list(opts.methods), "modes": list(opts.modes),
        "variants": list(opts.variants), "tol": opts.oracle_tol,
    }
    return reports, inputs


def _single_point_errors(reports):
    """A one-point run whose point failed entirely is a domain error."""
    if len(reports) == 1 and reports[0].error:
        raise DomainError(reports[0].error)


def _status(reports):
    for rep in reports:
        for r in rep.results:
            if r.method == "oracle" and r.status == "failed":
                return EXIT_CONVERGENCE
    return EXIT_OK


def cmd_thermo(args) -> int:
    s = _settings(args, {"method": "strong,weak,free,oracle", "format": "csv"})
    reports, inputs = _run_grid(s)
    _single_point_errors(reports)
    if s["format"] == "csv":
        text = report.to_csv(reports)
    elif s["format"] == "json":
        text = report.to_json(reports, inputs)
    else:
        raise UsageError(f"--format must be csv or json, got {s['format']!r}")
    _write(text, s["output"])
    return _status(reports)


def cmd_compare(args) -> int:
    s = _settings(args, {"method": "strong,weak,free,oracle", "format": "json"})
    reports, inputs = _run_grid(s)
    _single_point_errors(reports)
    if s["emit"] == "plotdata":
        text = report.to_plotdata(reports)
    elif s["emit"] != "report":
        raise UsageError(f"--emit must be report or plotdata, got {s['emit']!r}")
    elif s["format"] == "json":
        text = report.to_json(reports, inputs)
    elif s["format"] == "csv":
        text = report.to_csv(reports)
    else:
        raise UsageError(f"--format must be csv or json, got {s['format']!r}")
    _write(text, s["output"])
    return _status(reports)


def _zeta_rows(args):
    rows = []
    if args.beta is not None or args.omega is not None:
        beta = args.beta if args.beta is not None else 1.0
        omega = args.omega if args.omega is not None else 1.0
        sigma = args.sigma
        nu = specfun.thermal_nu(beta, omega, sigma)
        if args.ds0:
            rows.append(("half_operator_zeta_prime(0)",
                         specfun.half_operator_zeta_prime_at_zero(beta, omega, sigma), 0.0,
                         specfun.Route.CLOSED_FORM.value))
            if args.printed_form:
                rows.append(("half_operator_zeta_prime(0)[printed]",
                             specfun.half_operator_zeta_prime_at_zero(beta, omega, sigma, printed=True),
                             0.0, specfun.Route.CLOSED_FORM.value))
        if args.s is not None:
            z = specfun.operator_zeta(args.s, beta, omega, sigma, args.tol)
            rows.append((f"operator_zeta({args.s!r})", z.value, z.abs_error_estimate, z.route.value))
        rows.insert(0, ("nu", nu, 0.0, "-"))
        return rows

    if args.nu is None:
        raise UsageError("zeta needs --nu (or --beta/--omega for the operator zeta)")
    if args.ds0:
        rows.append(("dzeta/ds(0)", specfun.epstein_ds_at_zero(args.nu), 0.0,
                     specfun.Route.CLOSED_FORM.value))
    if args.s is not None:
        routes = {
            "auto": [specfun.epstein],
            "series": [specfun.epstein_series],
            "continued": [specfun.epstein_continued],
            "both": [specfun.epstein_series, specfun.epstein_continued],
        }[args.route]
        for fn in routes:
            z = fn(args.s, args.nu, args.tol)
            rows.append((f"zeta({args.s!r})", z.value, z.abs_error_estimate, z.route.value))
        if args.route == "both":
            diff = abs(rows[-1][1] - rows[-2][1])
            rows.append(("|series-continued|", diff, 0.0, "-"))
    if not rows:
        raise UsageError("zeta needs --s and/or --ds0")
    return rows


def cmd_zeta(args) -> int:
    rows = _zeta_rows(args)
    width = max(len(r[0]) for r in rows)
    lines = [f"{'quantity':<{width}}  {'value':>24}  {'abs_error':>24}  route"]
    for name, value, err, route in rows:
        lines.append(f"{name:<{width}}  {value!r:>24}  {err!r:>24}  {route}")
    sys.stdout.write("\n".join(lines) + "\n")
    return EXIT_OK


def _add_grid_flags(p):
    p.add_argument("--config", help="flat key = value file; flags override it")
    p.add_argument("--beta", help="inverse temperature(s), comma separated")
    p.add_argument("--omega", help="frequency(ies), comma separated")
    p.add_argument("--lambda", dest="lam", help="coupling(s), comma separated")
    p.add_argument("--sigma")
    p.add_argument("--p", help="anharmonic order: lambda/(2p)! x^(2p)")
    p.add_argument("--potential", choices=["power", "cosh"])
    p.add_argument("--method", "--methods", dest="method",
                   help="comma-separated subset of strong,weak,free,oracle")
    p.add_argument("--mode", help="strong-coupling constant: paper, derived or both")
    p.add_argument("--variant", help="weak-coupling form: printed, restored or both")
    p.add_argument("--tol", help="oracle tolerance on ln Z")
    p.add_argument("--basis-size", dest="basis_size")
    p.add_argument("--basis-frequency", dest="basis_frequency")
    p.add_argument("--format", choices=["csv", "json"])
    p.add_argument("--output", "-o", help="output file ('-' for stdout)")
    p.add_argument("--threads", help="sweep threads (0 = auto; env STRONGTHERM_THREADS)")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="strongtherm", description=__doc__.split("\n\n")[0])
    sub = parser.add_subparsers(dest="command", required=True)

    z = sub.add_parser("zeta", help="Epstein and operator zeta values")
    z.add_argument("--s", type=float)
    z.add_argument("--nu", type=float)
    z.add_argument("--ds0", action="store_true", help="derivative at s=0 (closed form)")
    z.add_argument("--route", choices=["auto", "series", "continued", "both"], default="auto")
    z.add_argument("--tol", type=float, default=1e-12)
    z.add_argument("--beta", type=float)
    z.add_argument("--omega", type=float)
    z.add_argument("--sigma", type=float, default=0.0)
    z.add_argument("--printed-form", action="store_true",
                   help="also print the (1-sigma) variant of the s=0 derivative")
    z.set_defaults(func=cmd_zeta)

    t = sub.add_parser("thermo", help="ln Z, Z, F, E per method (CSV by default)")
    _add_grid_flags(t)
    t.set_defaults(func=cmd_thermo)

    c = sub.add_parser("compare", help="full comparison report (JSON by default)")
    _add_grid_flags(c)
    c.add_argument("--emit", choices=["report", "plotdata"])
    c.set_defaults(func=cmd_compare)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0) and EXIT_USAGE
    try:
        return args.func(args)
    except (UsageError, DomainError) as exc:
        print(f"strongtherm {args.command}: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except ConvergenceError as exc:
        print(f"strongtherm {args.command}: convergence failure: {exc}", file=sys.stderr)
        return EXIT_CONVERGENCE
    except OSError as exc:
        print(f"strongtherm {args.command}: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
