"""Command-line front end: ``realspec {exact,table,mc,asym,density}``."""

from __future__ import annotations

import argparse
import csv
import io
import json
import os
import sys
import time
from dataclasses import asdict, dataclass, field
from importlib import resources

import mpmath
import yaml
from mpmath import mp, mpf

from . import __version__
from .ensemble import EnsembleSpec
from .equilibrium import (
    EquilibriumMeasure,
    decay_base,
    density_normalization,
    log_p_asymptotic,
)
from .mellin_barnes import alpha_entries
from .montecarlo import DiscardRateError, MCConfig, estimate_p
from .precision import DEFAULT_PRECISION, MIN_PRECISION, NumericalError
from .probability import PiRationalForm, p_all_real_exact, recognize_pi_rational

EXIT_OK = 0
EXIT_TOLERANCE = 1
EXIT_NUMERICAL = 2
EXIT_USAGE = 3

PRECISION_ENV = "REALSPEC_PRECISION"
# exact comparison for mc is only attempted up to this N
MC_EXACT_MAX_N = 8


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        sys.stderr.write(f"{self.prog}: error: {message}\n")
        sys.exit(EXIT_USAGE)


@dataclass
class RunManifest:
    command: list
    config: dict
    seed: int | None
    precision: int | None
    version: str
    wall_time: float = 0.0
    errors: list = field(default_factory=list)


def load_golden() -> dict:
    text = resources.files("realspec").joinpath("data/golden.yaml").read_text()
    return yaml.safe_load(text)


def _fmt(x, digits: int = 20) -> str:
    if isinstance(x, mpf):
        if mpmath.isinf(x):
            return "inf" if x > 0 else "-inf"
        return mpmath.nstr(x, digits, strip_zeros=False, min_fixed=-4, max_fixed=8)
    if isinstance(x, float):
        return repr(x)
    if x is None:
        return ""
    return str(x)


# ---------------------------------------------------------------------------
# output
# ---------------------------------------------------------------------------


def render(rows: list[dict], fmt: str) -> str:
    if not rows:
        return ""
    keys = list(rows[0])
    if fmt == "json":
        return "".join(json.dumps(r, sort_keys=True) + "\n" for r in rows)
    if fmt == "csv":
        buf = io.StringIO()
        writer = csv.DictWriter(buf, fieldnames=keys, lineterminator="\n")
        writer.writeheader()
        writer.writerows(rows)
        return buf.getvalue()
    widths = {k: max(len(k), *(len(str(r[k])) for r in rows)) for k in keys}
    lines = ["  ".join(k.ljust(widths[k]) for k in keys)]
    lines.append("  ".join("-" * widths[k] for k in keys))
    for r in rows:
        lines.append("  ".join(str(r[k]).ljust(widths[k]) for k in keys))
    return "\n".join(lines) + "\n"


def roundtrip_json(text: str) -> str:
    """Parse JSON-lines output and emit it again."""
    rows = [json.loads(line) for line in text.splitlines() if line.strip()]
    return render(rows, "json")


# ---------------------------------------------------------------------------
# subcommands; each returns (rows, exit code, manifest errors)
# ---------------------------------------------------------------------------


def _result_row(spec, method, value, log_value, error, form, seed, precision, digits):
    return {
        "N": spec.N,
        "m": spec.m,
        "method": method,
        "value": _fmt(value, digits),
        "log_value": _fmt(log_value, digits),
        "error": _fmt(error, 3),
        "recognized_form": str(form) if form is not None else "",
        "seed": "" if seed is None else seed,
        "precision": precision,
    }


def cmd_exact(args):
    spec = EnsembleSpec(args.N, args.m)
    res = p_all_real_exact(spec, args.precision, args.workers)
    row = _result_row(spec, res.method, res.value, res.log_value, res.error_estimate,
                      res.recognized_form, None, args.precision, args.precision)
    # the m = 2 pi-rational forms are identified numerically except at N = 2
    conjectural = "recognized_status" in res.metadata and spec.N > 2
    row["status"] = "conjectural" if conjectural else ""
    return [row], EXIT_OK, [f"error_estimate={_fmt(res.error_estimate, 3)}"]


def _table1(args, golden):
    tol = mpf(args.tolerance if args.tolerance is not None else 5e-11)
    rows, ok = [], True
    for m, printed in sorted(golden["table1"]["values"].items()):
        res = p_all_real_exact(EnsembleSpec(2, int(m)), args.precision, args.workers)
        with mp.workdps(args.precision):
            diff = abs(res.value - mpf(printed))
        good = diff <= tol
        ok &= bool(good)
        rows.append({"m": int(m), "computed": _fmt(res.value, 15), "published": printed,
                     "abs_diff": _fmt(diff, 3), "ok": bool(good)})
    return rows, ok


def _eqaa(args, golden):
    tol = mpf(args.tolerance if args.tolerance is not None else 1e-20)
    rows, ok = [], True
    for N, form in sorted(golden["eqAA"]["values"].items()):
        ref = PiRationalForm(form["numerator"], form["pi_power"], form["two_power"])
        res = p_all_real_exact(EnsembleSpec(int(N), 2), args.precision, args.workers)
        with mp.workdps(args.precision):
            rel = abs(res.value / ref.value(args.precision) - 1)
        found = recognize_pi_rational(res.value, precision=args.precision)
        good = rel <= tol and found == ref
        ok &= bool(good)
        rows.append({"N": int(N), "computed": _fmt(res.value, 25), "published": str(ref),
                     "recognized": str(found) if found else "", "rel_diff": _fmt(rel, 3),
                     "status": "conjectural" if int(N) > 2 else "proved", "ok": bool(good)})
    return rows, ok


def _m2matrix(args, golden):
    tol = mpf(args.tolerance if args.tolerance is not None else 1e-25)
    table = golden["m2matrix"]
    rows, ok = [], True
    for j, printed_row in enumerate(table["rows"], start=1):
        values, _, _ = alpha_entries(2, j, (1, 2, 3), args.precision)
        fixed_row = table["determinant_consistent"][j - 1]
        for k, (cell, fixed) in enumerate(zip(printed_row, fixed_row), start=1):
            with mp.workdps(args.precision + 10):
                pi2 = mpmath.pi**2
                ref = pi2 * mpf(cell["numerator"]) / mpf(2) ** cell["two_power"]
                alt = pi2 * mpf(fixed["numerator"]) / mpf(2) ** fixed["two_power"]
                rel = abs(values[k - 1] / ref - 1)
                rel_alt = abs(values[k - 1] / alt - 1)
            good = rel <= tol
            ok &= bool(good)
            rows.append({
                "j": j, "k": k, "computed": _fmt(values[k - 1], 30),
                "published": f"{cell['numerator']}pi^2/2^{cell['two_power']}",
                "rel_diff": _fmt(rel, 3),
                "determinant_consistent": f"{fixed['numerator']}pi^2/2^{fixed['two_power']}",
                "rel_diff_consistent": _fmt(rel_alt, 3),
                "status": "conjectural", "ok": bool(good),
            })
    return rows, ok


def cmd_table(args):
    golden = load_golden()
    handler = {"table1": _table1, "eqAA": _eqaa, "m2matrix": _m2matrix}[args.which]
    rows, ok = handler(args, golden)
    return rows, EXIT_OK if ok else EXIT_TOLERANCE, []


def cmd_mc(args):
    spec = EnsembleSpec(args.N, args.m)
    cfg = MCConfig(spec, args.trials, args.seed, args.workers)
    res = estimate_p(cfg)
    exact = None
    if spec.N <= MC_EXACT_MAX_N:
        exact = p_all_real_exact(spec, max(MIN_PRECISION, min(args.precision, 40))).value
    sigmas = args.tolerance if args.tolerance is not None else 4.0
    rows, code = [], EXIT_OK
    for k in range(spec.N % 2, spec.N + 1, 2):
        lo, hi = res.confidence_interval(k)
        row = {"N": spec.N, "m": spec.m, "k": k, "count": res.counts.get(k, 0),
               "trials": res.trials, "p_hat": repr(res.estimate(k)),
               "stderr": repr(res.standard_error(k)), "ci_low": repr(lo), "ci_high": repr(hi),
               "exact": "", "z": "", "seed": res.seed}
        if k == spec.N and exact is not None:
            se = res.standard_error(k)
            z = (res.estimate(k) - float(exact)) / se if se > 0 else 0.0
            row["exact"] = _fmt(exact, 12)
            row["z"] = f"{z:.3f}"
            if abs(z) > sigmas:
                code = EXIT_TOLERANCE
        rows.append(row)
    errs = [f"discarded={res.discarded}", f"extended={res.extended}"]
    return rows, code, errs


def cmd_asym(args):
    spec = EnsembleSpec(args.N, args.m)
    b = decay_base(spec.m, args.precision)
    pred = log_p_asymptotic(spec, args.precision)
    row = {"N": spec.N, "m": spec.m, "decay_base": _fmt(b, 20),
           "log_p_predicted": _fmt(pred, 20), "log_p_exact": "", "ratio": ""}
    if spec.N <= MC_EXACT_MAX_N and args.exact:
        res = p_all_real_exact(spec, args.precision, args.workers)
        row["log_p_exact"] = _fmt(res.log_value, 20)
        with mp.workdps(args.precision):
            row["ratio"] = _fmt(res.log_value / pred, 12) if pred != 0 else ""
    return [row], EXIT_OK, []


def cmd_density(args):
    if args.grid < 1:
        raise UsageError("--grid must be >= 1")
    meas = EquilibriumMeasure.build(args.m, args.grid, min(args.precision, 30))
    rows = [{"x": _fmt(x, 17), "rho": _fmt(r, 17)} for x, r in meas.density_samples]
    norm = density_normalization(args.m, min(args.precision, 30))
    summary = [f"normalization={_fmt(norm, 15)}"]
    code = EXIT_OK
    tol = args.tolerance if args.tolerance is not None else 1e-6
    if abs(norm - 1) > tol:
        code = EXIT_TOLERANCE
    if args.m == 1:
        with mp.workdps(40):
            worst = max(abs(r - 2 / mpmath.pi * mpmath.sqrt(1 - x * x))
                        for x, r in meas.density_samples)
        summary.append(f"max_semicircle_deviation={_fmt(worst, 3)}")
    return rows, code, summary


# ---------------------------------------------------------------------------
# argument parsing
# ---------------------------------------------------------------------------


def _default_precision() -> int:
    env = os.environ.get(PRECISION_ENV)
    if env is None:
        return DEFAULT_PRECISION
    try:
        return int(env)
    except ValueError:
        raise UsageError(f"{PRECISION_ENV} must be an integer, got {env!r}") from None


def _u64(text: str) -> int:
    value = int(text, 0)
    if not 0 <= value < 2**64:
        raise argparse.ArgumentTypeError("seed must be an unsigned 64-bit integer")
    return value


def _positive(text: str) -> int:
    value = int(text)
    if value < 1:
        raise argparse.ArgumentTypeError("must be a positive integer")
    return value


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--precision", type=int, default=None,
                        help=f"decimal digits (default ${PRECISION_ENV} or {DEFAULT_PRECISION})")
    common.add_argument("--format", choices=("table", "json", "csv"), default="table")
    common.add_argument("--workers", type=_positive, default=1)
    common.add_argument("--tolerance", type=float, default=None,
                        help="override the acceptance tolerance of the command")
    common.add_argument("--out", default=None, help="write results here instead of stdout")
    common.add_argument("--manifest", default=None, help="write a JSON run manifest here")

    parser = _Parser(prog="realspec", description=__doc__)
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("exact", parents=[common], help="p_{N,N} from the determinant")
    p.add_argument("-N", type=_positive, required=True)
    p.add_argument("-m", type=_positive, required=True)
    p.set_defaults(func=cmd_exact)

    p = sub.add_parser("table", parents=[common], help="reproduce a published table")
    p.add_argument("which", choices=("table1", "eqAA", "m2matrix"))
    p.set_defaults(func=cmd_table)

    p = sub.add_parser("mc", parents=[common], help="Monte Carlo histogram of real eigenvalues")
    p.add_argument("-N", type=_positive, required=True)
    p.add_argument("-m", type=_positive, required=True)
    p.add_argument("-t", "--trials", type=_positive, default=100_000)
    p.add_argument("-s", "--seed", type=_u64, default=0)
    p.set_defaults(func=cmd_mc)

    p = sub.add_parser("asym", parents=[common], help="large-N decay base and prediction")
    p.add_argument("-N", type=_positive, required=True)
    p.add_argument("-m", type=_positive, required=True)
    p.add_argument("--no-exact", dest="exact", action="store_false",
                   help="skip the exact comparison")
    p.set_defaults(func=cmd_asym)

    p = sub.add_parser("density", parents=[common], help="equilibrium density samples")
    p.add_argument("-m", type=_positive, required=True)
    p.add_argument("--grid", type=int, default=101)
    p.set_defaults(func=cmd_density)
    return parser


def main(argv=None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    parser = build_parser()
    args = parser.parse_args(argv)
    start = time.perf_counter()
    try:
        if args.precision is None:
            args.precision = _default_precision()
        if args.precision < MIN_PRECISION:
            raise UsageError(f"--precision must be >= {MIN_PRECISION}")
        rows, code, notes = args.func(args)
    except UsageError as exc:
        sys.stderr.write(f"realspec: error: {exc}\n")
        return EXIT_USAGE
    except (NumericalError, DiscardRateError) as exc:
        sys.stderr.write(f"realspec: numerical failure: {exc}\n")
        return EXIT_NUMERICAL
    except ValueError as exc:
        sys.stderr.write(f"realspec: error: {exc}\n")
        return EXIT_USAGE

    fmt = args.format
    if args.command == "density" and args.out and fmt == "table":
        fmt = "csv"
    text = render(rows, fmt)
    if args.out:
        with open(args.out, "w", newline="") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    for note in notes:
        sys.stderr.write(f"# {note}\n")

    if args.manifest:
        config = {k: v for k, v in vars(args).items() if k not in ("func", "manifest")}
        manifest = RunManifest(
            command=["realspec", *argv],
            config=config,
            seed=getattr(args, "seed", None),
            precision=args.precision,
            version=__version__,
            wall_time=round(time.perf_counter() - start, 6),
            errors=notes,
        )
        with open(args.manifest, "w") as fh:
            json.dump(asdict(manifest), fh, sort_keys=True, indent=2, default=str)
            fh.write("\n")
    return code


if __name__ == "__main__":
    sys.exit(main())
