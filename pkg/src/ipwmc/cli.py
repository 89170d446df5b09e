"""Command-line entry point: ``ipwmc <subcommand> [flags]``.

Values come from three layers, later ones winning: built-in defaults, a
``--config`` file of ``key = value`` lines, then flags on the command line.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

from . import harness, semiparam
from .errors import IpwmcError
from .wasserman import WassermanConfig

COMMON_DEFAULTS = {"seed": 2022, "reps": None, "out": None, "workers": 1}
WASSERMAN_DEFAULTS = {
    "n": 100,
    "B": 1000,
    "delta": 0.01,
    "theta_lo": 0.6,
    "theta_hi": 0.9,
    "alpha_f": 1.0,
    "k_bins": 5,
    "estimators": ",".join(harness.DEFAULT_ESTIMATORS),
    "tt_lambda": 0.5,
    "eps": 0.05,
}


def read_config(path) -> dict:
    """Parse a ``key = value`` file; ``#`` starts a comment, dashes in keys become underscores."""
    out = {}
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise IpwmcError(f"cannot read config {path}: {exc.strerror}") from exc
    for lineno, line in enumerate(text.splitlines(), 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise IpwmcError(f"{path}:{lineno}: expected 'key = value'")
        key, value = (part.strip() for part in line.split("=", 1))
        out[key.replace("-", "_")] = value
    return out


def _add_common(p: argparse.ArgumentParser) -> None:
    p.add_argument("--seed", type=int, default=None, help="64-bit base seed (default 2022)")
    p.add_argument("--reps", type=int, default=None, help="number of replicates")
    p.add_argument("--out", default=None, help="output directory for CSV files")
    p.add_argument("--config", default=None, help="key = value file; flags override it")
    p.add_argument("--workers", type=int, default=None, help="parallel worker threads")


def _add_wasserman(p: argparse.ArgumentParser) -> None:
    p.add_argument("--n", type=int, default=None)
    p.add_argument("--B", type=int, default=None)
    p.add_argument("--delta", type=float, default=None)
    p.add_argument("--theta-lo", dest="theta_lo", type=float, default=None)
    p.add_argument("--theta-hi", dest="theta_hi", type=float, default=None)
    p.add_argument("--alpha-f", dest="alpha_f", type=float, default=None)
    p.add_argument("--k-bins", dest="k_bins", type=int, default=None)
    p.add_argument("--estimators", default=None, help="comma list from " + ",".join(harness.ESTIMATORS))
    p.add_argument("--tt-lambda", dest="tt_lambda", type=float, default=None)
    p.add_argument("--eps", type=float, default=None, help="tail threshold for the consistency check")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="ipwmc", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("simulate-wasserman", help="MSE study of the IPW and Bayes estimators")
    _add_common(p)
    _add_wasserman(p)

    p = sub.add_parser("check-consistency", help="bias/variance sweep over n with Hoeffding-type bounds")
    _add_common(p)
    _add_wasserman(p)
    p.add_argument("--sizes", default=None, help="comma list of sample sizes (default 100,1000,10000)")

    p = sub.add_parser("rate-riemann", help="variance decay of Riemann and trapezoid estimators")
    _add_common(p)

    p = sub.add_parser("demo-basu", help="Basu's circus example")
    _add_common(p)

    p = sub.add_parser("nested", help="vertical-likelihood quadrature on a built-in problem")
    _add_common(p)
    p.add_argument("--problem", default=None, help="built-in problem name (default linear-uniform)")
    p.add_argument("--m", default=None, help="comma list of grid sizes (default 10,100,500,1000)")
    p.add_argument("--K", type=float, default=None, help="grid rate K (default 50)")

    p = sub.add_parser("semiparam", help="semiparametric MLE of normalizing-constant ratios")
    _add_common(p)
    p.add_argument("--input", default=None, help="instance file: 'n k anchor' then rows 'label v1..vk'")
    p.add_argument("--instance", default=None, help="built-in instance name (default hand-k2)")
    p.add_argument("--anchor", type=int, default=None, help="1-based anchor sampler (overrides the file)")
    return parser


def _resolve(args: argparse.Namespace, defaults: dict) -> dict:
    file_values = read_config(args.config) if args.config else {}
    merged = {}
    for key, default in defaults.items():
        cli = getattr(args, key, None)
        if cli is not None:
            merged[key] = cli
        elif key in file_values:
            merged[key] = type(default)(file_values[key]) if default is not None else file_values[key]
        else:
            merged[key] = default
    unknown = set(file_values) - set(defaults)
    if unknown:
        raise IpwmcError(f"unknown config keys: {', '.join(sorted(unknown))}")
    return merged


def _ints(text) -> tuple:
    return tuple(int(v) for v in str(text).split(",") if v.strip())


def _reps(opts: dict, default: int) -> int:
    return default if opts["reps"] is None else int(opts["reps"])


def _wasserman_cfg(opts: dict, experiment: str, reps_default: int, sizes=()) -> harness.BenchConfig:
    wcfg = WassermanConfig(
        B=int(opts["B"]),
        n=int(opts["n"]),
        delta=float(opts["delta"]),
        theta_lo=float(opts["theta_lo"]),
        theta_hi=float(opts["theta_hi"]),
        alpha_f=float(opts["alpha_f"]),
        k_bins=int(opts["k_bins"]),
    )
    return harness.BenchConfig(
        experiment=experiment,
        seed=int(opts["seed"]),
        reps=_reps(opts, reps_default),
        wasserman=wcfg,
        estimators=tuple(e.strip() for e in str(opts["estimators"]).split(",") if e.strip()),
        output_path=Path(opts["out"]) if opts["out"] else None,
        workers=int(opts["workers"]),
        tt_lambda=float(opts["tt_lambda"]),
        eps=float(opts["eps"]),
        sizes=sizes,
    )


def _print_rows(header, rows) -> None:
    print(",".join(header))
    for row in rows:
        print(",".join(harness._fmt(v) for v in row))


def run(argv=None) -> int:
    args = build_parser().parse_args(argv)
    cmd = args.command

    if cmd == "simulate-wasserman":
        opts = _resolve(args, {**COMMON_DEFAULTS, **WASSERMAN_DEFAULTS})
        result = harness.run_wasserman_study(_wasserman_cfg(opts, "wasserman", 100))
        _print_rows(harness.SUMMARY_HEADER, result.summary)

    elif cmd == "check-consistency":
        opts = _resolve(args, {**COMMON_DEFAULTS, **WASSERMAN_DEFAULTS, "sizes": "100,1000,10000"})
        cfg = _wasserman_cfg(opts, "consistency", 1000, _ints(opts["sizes"]))
        rows = harness.run_consistency_check(cfg)
        _print_rows(harness.CONSISTENCY_HEADER, [[r[k] for k in harness.CONSISTENCY_HEADER] for r in rows])

    elif cmd == "rate-riemann":
        opts = _resolve(args, COMMON_DEFAULTS)
        cfg = harness.BenchConfig(
            experiment="riemann_rate",
            seed=int(opts["seed"]),
            reps=_reps(opts, 200),
            output_path=Path(opts["out"]) if opts["out"] else None,
            workers=int(opts["workers"]),
        )
        result = harness.run_riemann_rate_study(cfg)
        _print_rows(("scheme", "slope"), list(result.slopes.items()))

    elif cmd == "demo-basu":
        _resolve(args, COMMON_DEFAULTS)
        print(harness.run_basu_demo().text)

    elif cmd == "nested":
        opts = _resolve(args, {**COMMON_DEFAULTS, "problem": "linear-uniform", "m": "10,100,500,1000", "K": 50.0})
        rows = harness.run_nested(opts["problem"], _ints(opts["m"]), float(opts["K"]), opts["out"])
        _print_rows(("m", "K", "estimate", "truth", "abs_error"), rows)

    elif cmd == "semiparam":
        opts = _resolve(args, {**COMMON_DEFAULTS, "input": None, "instance": None, "anchor": None})
        if opts["input"] and opts["instance"]:
            raise IpwmcError("give either --input or --instance, not both")
        if opts["input"]:
            data, anchor = semiparam.read_instance(opts["input"])
        else:
            data, anchor = semiparam.get_instance(opts["instance"] or "hand-k2"), 0
        if opts["anchor"] is not None:
            anchor = int(opts["anchor"]) - 1
        sol, rows = harness.run_semiparam(data, anchor, opts["out"])
        _print_rows(("sampler", "psi_ratio_to_anchor"), rows)
        status = "converged" if sol.converged else "NOT converged"
        print(f"# {status} after {sol.iterations} sweeps, residual {sol.residual:.3e}", file=sys.stderr)
        if not sol.converged:
            return 3
    return 0


def main(argv=None) -> int:
    try:
        return run(argv)
    except (IpwmcError, OSError, ValueError) as exc:
        print(f"ipwmc: error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
