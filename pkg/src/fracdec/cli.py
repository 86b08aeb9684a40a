"""Command-line front end binding flat config files and flags to the
experiment harness.

Exit codes: 0 on success, 1 on validation/usage errors, 2 when a run
violates a hard numerical guarantee (exactness or sparsity mismatch).
"""

from __future__ import annotations

import argparse
import sys

from .fraccalc import QuadratureSpec
from .grid import build_grid, dump_incidence_csv
from .harness import (
    ExactnessError,
    ExperimentConfig,
    SparsityMismatchError,
    run_alpha_sweep,
    run_convergence,
    run_exactness,
    run_sparsity_audit,
    run_variants,
)
from .operators import VARIANTS, assemble_dI
from .sparsekit import save_triplets_csv

__all__ = ["main"]

SUBCOMMANDS = (
    "convergence",
    "alpha-sweep",
    "exactness",
    "sparsity",
    "variants",
    "dump-operators",
)

# flat key=value config keys and the flag each one feeds
CONFIG_KEYS = {
    "field": "field",
    "p": "p",
    "alpha": "alpha",
    "n": "n",
    "variant": "variant",
    "quad-points": "quad_points",
    "quad-panels": "quad_panels",
    "out": "out",
    "jobs": "jobs",
    "seed": "seed",
}


class UsageError(ValueError):
    """Raised for invalid flags, config keys, or value formats."""


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        # argparse defaults to exit code 2; usage problems are validation
        # errors here, so route them through the exit-1 path instead.
        raise UsageError(message)


def _build_parser():
    parser = _Parser(prog="fracdec", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    def add(name, help_text):
        p = sub.add_parser(name, help=help_text)
        p.add_argument("--config", help="flat key=value config file")
        p.add_argument("--field", help="test field name")
        p.add_argument("--p", help="comma-separated cochain degrees, e.g. 0,1,2")
        p.add_argument("--alpha", help="comma-separated fractional orders in (0,1)")
        p.add_argument("--n", help="comma-separated subdivision counts")
        p.add_argument("--variant", choices=VARIANTS, help="operator construction")
        p.add_argument("--quad-points", type=int, help="quadrature points per panel")
        p.add_argument("--quad-panels", type=int, help="quadrature panels")
        p.add_argument("--out", help="artifact output directory")
        p.add_argument("--jobs", type=int, help="max concurrent cases")
        p.add_argument("--seed", type=int, help="seed for sampled diagnostics")
        return p

    add("convergence", "error vs subdivisions for the fractional derivatives")
    add("alpha-sweep", "error vs fractional order at a fixed grid")
    add("exactness", "verify the composed derivatives vanish to roundoff")
    add("sparsity", "audit matrix sizes and nonzero counts")
    add("variants", "compare exactness across operator constructions")
    add("dump-operators", "write incidence and integral matrices as CSV triplets")
    return parser


def _parse_config_file(path):
    values = {}
    with open(path, encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, 1):
            line = raw.strip()
            if not line or line.startswith("#"):
                continue
            if "=" not in line:
                raise UsageError(f"{path}:{lineno}: expected key=value, got {line!r}")
            key, _, value = line.partition("=")
            key = key.strip()
            if key not in CONFIG_KEYS:
                raise UsageError(
                    f"{path}:{lineno}: unknown config key {key!r} "
                    f"(known: {', '.join(sorted(CONFIG_KEYS))})"
                )
            values[CONFIG_KEYS[key]] = value.strip()
    return values


def _merged(args):
    """File values first, flags override."""
    merged = _parse_config_file(args.config) if args.config else {}
    for attr in set(CONFIG_KEYS.values()):
        flag_value = getattr(args, attr, None)
        if flag_value is not None:
            merged[attr] = flag_value
    return merged


def _int_list(text, what):
    try:
        return tuple(int(tok) for tok in str(text).split(","))
    except ValueError:
        raise UsageError(f"{what} must be a comma-separated integer list, got {text!r}")


def _float_list(text, what):
    try:
        return tuple(float(tok) for tok in str(text).split(","))
    except ValueError:
        raise UsageError(f"{what} must be a comma-separated number list, got {text!r}")


def _experiment_config(values):
    kwargs = {}
    if values.get("field"):
        kwargs["field"] = str(values["field"])
    if values.get("p") is not None:
        kwargs["ps"] = _int_list(values["p"], "--p")
    if values.get("alpha") is not None:
        kwargs["alphas"] = _float_list(values["alpha"], "--alpha")
    if values.get("n") is not None:
        kwargs["ns"] = _int_list(values["n"], "--n")
    if values.get("variant") is not None:
        kwargs["variant"] = str(values["variant"])
    points = int(values.get("quad_points", 16))
    panels = int(values.get("quad_panels", 4))
    kwargs["quad"] = QuadratureSpec(points=points, panels=panels)
    if values.get("out"):
        kwargs["out_dir"] = str(values["out"])
    if values.get("jobs") is not None:
        kwargs["jobs"] = int(values["jobs"])
    if values.get("seed") is not None:
        kwargs["seed"] = int(values["seed"])
    try:
        return ExperimentConfig(**kwargs)
    except ValueError as exc:
        raise UsageError(str(exc))


def _cmd_sparsity(values):
    ns = _int_list(values["n"], "--n") if values.get("n") is not None else None
    betas = (
        _float_list(values["alpha"], "--alpha")
        if values.get("alpha") is not None
        else None
    )
    kwargs = {"out_dir": str(values.get("out", "") or "")}
    if ns is not None:
        kwargs["ns"] = ns
    if betas is not None:
        kwargs["betas"] = betas
    table = run_sparsity_audit(**kwargs)
    print(f"sparsity audit passed for {len(table)} (p, beta, n) cases")
    return 0


def _cmd_dump_operators(values):
    if not values.get("out"):
        raise UsageError("dump-operators requires --out")
    ns = _int_list(values.get("n", "4"), "--n")
    ps = _int_list(values.get("p", "0,1,2"), "--p")
    alphas = _float_list(values.get("alpha", "0.5"), "--alpha")
    out = str(values["out"])
    import os

    os.makedirs(out, exist_ok=True)
    written = []
    for n in ns:
        grid = build_grid(((0.0, 1.0),) * 3, (n, n, n))
        for p in ps:
            if p in (0, 1, 2):
                path = os.path.join(out, f"incidence_D{p}_n{n}.csv")
                dump_incidence_csv(grid, p, path)
                written.append(path)
            for alpha in alphas:
                beta = 1.0 - alpha
                path = os.path.join(out, f"integral_dI{p}_beta{beta:g}_n{n}.csv")
                save_triplets_csv(assemble_dI(grid, p, beta), path)
                written.append(path)
    for path in written:
        print(path)
    return 0


def _print_rows(rows):
    for r in rows:
        eoc = f"{r.eoc:.3f}" if r.eoc is not None else "-"
        print(
            f"{r.experiment:<18} {r.field:<10} p={r.p} alpha={r.alpha:<6g} "
            f"n={r.n:<3d} rms={r.rms_error:.6e} eoc={eoc}"
        )


def main(argv=None):
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
        values = _merged(args)
        if args.command == "sparsity":
            return _cmd_sparsity(values)
        if args.command == "dump-operators":
            return _cmd_dump_operators(values)
        config = _experiment_config(values)
        runner = {
            "convergence": run_convergence,
            "alpha-sweep": run_alpha_sweep,
            "exactness": run_exactness,
            "variants": run_variants,
        }[args.command]
        rows = runner(config)
        _print_rows(rows)
        if args.command == "exactness":
            print("exactness verified: all residuals within tolerance")
        return 0
    except UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        parser.print_usage(sys.stderr)
        return 1
    except (ExactnessError, SparsityMismatchError) as exc:
        print(f"numerical guarantee violated: {exc}", file=sys.stderr)
        return 2
    except (ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
