"""Experiment harness: convergence studies, exactness verification,
variant comparison, and sparsity audits, with CSV/SVG/manifest artifacts.

The CSV files are the source of truth and are byte-reproducible for a
fixed configuration: rows are sorted, floats are written with 17
significant digits, and volatile data (wall-clock timings) goes to the
JSON-lines manifest instead of the result table.
"""

from __future__ import annotations

import csv
import json
import math
import os
import random
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, replace

import numpy as np

from .forms import (
    continuous_d_alpha,
    de_rham,
    get_field,
    rms_error_cochain,
)
from .fraccalc import DEFAULT_QUAD, QuadratureSpec
from .grid import build_grid
from .operators import (
    VARIANTS,
    OperatorSet,
    apply_fdec_variant,
    assemble_B,
    assemble_M,
    assemble_V,
)

__all__ = [
    "ExperimentConfig",
    "ResultRow",
    "ExactnessError",
    "SparsityMismatchError",
    "run_convergence",
    "run_alpha_sweep",
    "run_exactness",
    "run_variants",
    "run_sparsity_audit",
    "write_rows_csv",
    "read_rows_csv",
    "EXACTNESS_TOLERANCE",
]

EXACTNESS_TOLERANCE = 1e-12

CSV_HEADER = ["experiment", "field", "p", "alpha", "n", "rms_error", "eoc", "wall_ms"]

# Per-degree defaults for the convergence study and the alpha sweep.
DEFAULT_CONVERGENCE_NS = {0: (2, 4, 8, 16), 1: (2, 4, 8, 16), 2: (2, 4, 8)}
DEFAULT_SWEEP_N = {0: 16, 1: 16, 2: 8}
DEFAULT_CONVERGENCE_ALPHAS = (0.25, 0.9)
DEFAULT_SWEEP_ALPHAS = (0.25, 0.5, 0.75, 0.9, 0.99, 0.999)
DEFAULT_EXACTNESS_ALPHAS = (0.25, 0.5, 0.9)
DEFAULT_EXACTNESS_NS = (4, 8, 16)
DEFAULT_SPARSITY_NS = (1, 2, 3, 4, 8)
DEFAULT_SPARSITY_BETAS = (0.1, 0.5, 0.75)


class ExactnessError(AssertionError):
    """Raised when a composed-derivative residual exceeds the tolerance."""


class SparsityMismatchError(AssertionError):
    """Raised when measured nonzero counts deviate from the closed forms."""


@dataclass(frozen=True)
class ExperimentConfig:
    """Shared configuration for all experiment runners.

    ``field`` empty means the per-degree default test field; ``alphas`` or
    ``ns`` equal to ``None`` means the per-experiment default lists.
    """

    domain: tuple = ((0.0, 1.0), (0.0, 1.0), (0.0, 1.0))
    field: str = ""
    ps: tuple = (0, 1, 2)
    alphas: tuple | None = None
    ns: tuple | None = None
    quad: QuadratureSpec = DEFAULT_QUAD
    variant: str = "paper"
    out_dir: str = ""
    seed: int = 0
    jobs: int = 1

    def __post_init__(self):
        if self.alphas is not None:
            if not self.alphas or any(not 0.0 < a < 1.0 for a in self.alphas):
                raise ValueError("alphas must be a nonempty list of values in (0, 1)")
        if self.ns is not None:
            if not self.ns or any(b <= a for a, b in zip(self.ns, self.ns[1:])):
                raise ValueError("ns must be a nonempty strictly increasing list")
            if any(n < 1 for n in self.ns):
                raise ValueError("ns must be positive")
        if self.variant not in VARIANTS:
            raise ValueError(f"variant must be one of {VARIANTS}")
        if self.jobs < 1:
            raise ValueError("jobs must be >= 1")
        if any(p not in (0, 1, 2) for p in self.ps):
            raise ValueError("ps must be a subset of {0, 1, 2}")


@dataclass(frozen=True)
class ResultRow:
    """One measured error: sorted by (p, alpha, n) within an experiment."""

    experiment: str
    field: str
    p: int
    alpha: float
    n: int
    rms_error: float
    eoc: float | None = None


def _field_name(config, p):
    if config.field:
        return config.field
    return "paper-f" if p == 0 else "paper-F"


def _ns_for(config, p, defaults):
    if config.ns is not None:
        return config.ns
    return defaults[p] if isinstance(defaults, dict) else defaults


def _alphas_for(config, defaults):
    return config.alphas if config.alphas is not None else defaults


def _run_cases(cases, worker, jobs):
    """Evaluate independent cases, optionally in a thread pool.

    Each case is computed with plain sequential numpy arithmetic, so the
    merged output (in input order) is deterministic regardless of ``jobs``.
    """
    if jobs <= 1 or len(cases) <= 1:
        return [worker(c) for c in cases]
    with ThreadPoolExecutor(max_workers=jobs) as pool:
        return list(pool.map(worker, cases))


def _eoc_chain(rows):
    """Fill the eoc column between successive n within each (p, alpha)."""
    out = []
    prev = {}
    for row in rows:
        key = (row.p, row.alpha)
        eoc = None
        if key in prev:
            e_coarse, n_coarse = prev[key]
            if e_coarse > 0.0 and row.rms_error > 0.0 and row.n == 2 * n_coarse:
                eoc = math.log2(e_coarse / row.rms_error)
        prev[key] = (row.rms_error, row.n)
        out.append(replace(row, eoc=eoc))
    return out


# ---------------------------------------------------------------------------
# Experiments


def _convergence_case(experiment, config, p, alpha, n):
    t0 = time.perf_counter()
    name = _field_name(config, p)
    grid = build_grid(config.domain, (n, n, n))
    omega = get_field(name, p)
    opset = OperatorSet(grid, 1.0 - alpha)
    cochain = de_rham(omega, grid, config.quad)
    approx = apply_fdec_variant(opset, config.variant, p, cochain)
    oracle = de_rham(continuous_d_alpha(omega, alpha, config.quad), grid, config.quad)
    v = assemble_V(grid, p + 1)
    err = rms_error_cochain(approx, oracle, v)
    wall_ms = 1000.0 * (time.perf_counter() - t0)
    row = ResultRow(experiment, name, p, alpha, n, err)
    return row, wall_ms, (approx, oracle, v)


def run_convergence(config=ExperimentConfig()):
    """Error of D_p^alpha (R_p omega) against R_{p+1} d_p^alpha omega vs n."""
    alphas = _alphas_for(config, DEFAULT_CONVERGENCE_ALPHAS)
    cases = [
        (p, a, n)
        for p in config.ps
        for a in alphas
        for n in _ns_for(config, p, DEFAULT_CONVERGENCE_NS)
    ]
    results = _run_cases(
        cases, lambda c: _convergence_case("convergence", config, *c), config.jobs
    )
    rows = _eoc_chain([r for r, _, _ in results])
    _emit(config, "convergence", rows, results, x_axis="n")
    return rows


def run_alpha_sweep(config=ExperimentConfig()):
    """Error at a fixed n per degree as alpha approaches 1."""
    alphas = _alphas_for(config, DEFAULT_SWEEP_ALPHAS)
    cases = []
    for p in config.ps:
        if config.ns is not None:
            if len(config.ns) != 1:
                raise ValueError("the alpha sweep uses a single n per degree")
            n = config.ns[0]
        else:
            n = DEFAULT_SWEEP_N[p]
        cases.extend((p, a, n) for a in alphas)
    results = _run_cases(
        cases, lambda c: _convergence_case("alpha-sweep", config, *c), config.jobs
    )
    rows = [r for r, _, _ in results]
    loglog = [
        (math.log(1.0 - r.alpha), math.log(r.rms_error))
        for r in rows
        if r.rms_error > 0.0
    ]
    _emit(config, "alpha-sweep", rows, results, x_axis="alpha", extra={"loglog_pairs": loglog})
    return rows


def _exactness_case(experiment, config, variant, p, alpha, n):
    t0 = time.perf_counter()
    name = _field_name(config, p)
    grid = build_grid(config.domain, (n, n, n))
    omega = get_field(name, p)
    opset = OperatorSet(grid, 1.0 - alpha)
    cochain = de_rham(omega, grid, config.quad)
    once = apply_fdec_variant(opset, variant, p, cochain)
    twice = apply_fdec_variant(opset, variant, p + 1, once)
    v = assemble_V(grid, p + 2)
    residual = rms_error_cochain(twice, np.zeros_like(twice), v)
    wall_ms = 1000.0 * (time.perf_counter() - t0)
    row = ResultRow(experiment, name, p, alpha, n, residual)
    return row, wall_ms, (twice, np.zeros_like(twice), v)


def run_exactness(config=ExperimentConfig()):
    """Residual RMS(V_{p+2}^{-1} D_{p+1}^alpha D_p^alpha R_p omega).

    Raises :class:`ExactnessError` when any residual exceeds 1e-12 (the
    rows and artifacts are still produced first).
    """
    alphas = _alphas_for(config, DEFAULT_EXACTNESS_ALPHAS)
    ps = [p for p in config.ps if p in (0, 1)]
    cases = [
        (p, a, n)
        for p in ps
        for a in alphas
        for n in _ns_for(config, p, DEFAULT_EXACTNESS_NS)
    ]
    results = _run_cases(
        cases,
        lambda c: _exactness_case("exactness", config, config.variant, *c),
        config.jobs,
    )
    rows = [r for r, _, _ in results]
    _emit(config, "exactness", rows, results, x_axis="n")
    bad = [r for r in rows if r.rms_error > EXACTNESS_TOLERANCE]
    if bad:
        detail = ", ".join(
            f"(p={r.p}, alpha={r.alpha}, n={r.n}): {r.rms_error:.3e}" for r in bad
        )
        raise ExactnessError(
            f"exactness residual above {EXACTNESS_TOLERANCE:g} for {detail}"
        )
    return rows


def run_variants(config=ExperimentConfig()):
    """Exactness residuals of all operator variants, for comparison.

    No tolerance is asserted here: the point of the table is that the
    one-sided variant violates the exact-sequence property while the
    other two satisfy it to roundoff.
    """
    alphas = _alphas_for(config, (0.5,))
    ps = [p for p in config.ps if p in (0, 1)]
    rows_all, results_all = [], []
    for variant in VARIANTS:
        cases = [
            (p, a, n)
            for p in ps
            for a in alphas
            for n in _ns_for(config, p, DEFAULT_EXACTNESS_NS)
        ]
        results = _run_cases(
            cases,
            lambda c, v=variant: _exactness_case(f"variants-{v}", config, v, *c),
            config.jobs,
        )
        rows_all.extend(r for r, _, _ in results)
        results_all.extend(results)
    _emit(config, "variants", rows_all, results_all, x_axis="n")
    return rows_all


def _kernel_nnz_1d(n):
    # strictly lower triangular (n+1) x n kernel matrix
    return n * (n + 1) // 2


def expected_sparsity(n, p):
    """Closed-form sizes and nonzero counts on a uniform n^3 grid."""
    n0 = (n + 1) ** 3
    counts = {
        0: n0,
        1: 3 * n * (n + 1) ** 2,
        2: 3 * n**2 * (n + 1),
        3: n**3,
    }
    k = _kernel_nnz_1d(n)
    if p == 1:
        b_nnz = 2 * counts[1]
        m_nnz = 3 * k * (n + 1) ** 2
    elif p == 2:
        b_nnz = 4 * counts[2]
        m_nnz = 3 * (n + 1) * k**2
    elif p == 3:
        b_nnz = 8 * counts[3]
        m_nnz = k**3
    else:
        raise ValueError(f"p must be in {{1,2,3}}, got {p}")
    return {
        "n_cells": counts[p],
        "B_shape": (counts[p], 3 * n0) if p in (1, 2) else (counts[3], n0),
        "B_nnz": b_nnz,
        "M_nnz": m_nnz,
    }


def run_sparsity_audit(
    ns=DEFAULT_SPARSITY_NS, betas=DEFAULT_SPARSITY_BETAS, out_dir="", seed=0
):
    """Compare measured matrix sizes/nnz against the closed-form counts.

    Any mismatch raises :class:`SparsityMismatchError`.  Returns one dict
    per (p, beta, n) with measured and expected values.
    """
    table = []
    for n in ns:
        grid = build_grid(((0.0, 1.0),) * 3, (n, n, n))
        for p in (1, 2, 3):
            b = assemble_B(grid, p)
            want = expected_sparsity(n, p)
            for beta in betas:
                m = assemble_M(grid, p, beta)
                density = m.nnz / (m.shape[0] * m.shape[1])
                entry = {
                    "p": p,
                    "beta": beta,
                    "n": n,
                    "B_nnz": int(b.nnz),
                    "B_expected": want["B_nnz"],
                    "M_nnz": int(m.nnz),
                    "M_expected": want["M_nnz"],
                    "M_density": density,
                }
                table.append(entry)
                mismatches = []
                if b.shape != want["B_shape"]:
                    mismatches.append(f"B shape {b.shape} != {want['B_shape']}")
                if b.nnz != want["B_nnz"]:
                    mismatches.append(f"nnz(B_{p}) {b.nnz} != {want['B_nnz']}")
                if m.nnz != want["M_nnz"]:
                    mismatches.append(f"nnz(M_{p}) {m.nnz} != {want['M_nnz']}")
                if p == 3 and density != 0.125:
                    mismatches.append(f"M_3 density {density!r} != 0.125")
                if mismatches:
                    raise SparsityMismatchError(
                        f"(p={p}, beta={beta}, n={n}): " + "; ".join(mismatches)
                    )
    if out_dir:
        os.makedirs(out_dir, exist_ok=True)
        path = os.path.join(out_dir, "sparsity.csv")
        fields = list(table[0].keys())
        _atomic_write(
            path,
            lambda fh: _write_dict_rows(fh, fields, table),
        )
        _append_manifest(
            out_dir,
            [
                {"kind": "config", "experiment": "sparsity", "ns": list(ns), "betas": list(betas)},
                {"kind": "artifact", "path": path},
            ],
        )
    return table


# ---------------------------------------------------------------------------
# Artifacts


def _fmt(x):
    if x is None:
        return ""
    if isinstance(x, float):
        return f"{x:.17g}"
    return str(x)


def _atomic_write(path, writer):
    tmp = f"{path}.tmp"
    with open(tmp, "w", newline="", encoding="utf-8") as fh:
        writer(fh)
    os.replace(tmp, path)


def _write_dict_rows(fh, fields, table):
    w = csv.writer(fh, lineterminator="\n")
    w.writerow(fields)
    for entry in table:
        w.writerow([_fmt(entry[k]) for k in fields])


def write_rows_csv(path, rows):
    """Write result rows in the fixed schema (timings live in the manifest,
    keeping the table byte-reproducible)."""

    def body(fh):
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(CSV_HEADER)
        for r in rows:
            w.writerow(
                [
                    r.experiment,
                    r.field,
                    r.p,
                    _fmt(float(r.alpha)),
                    r.n,
                    _fmt(float(r.rms_error)),
                    _fmt(r.eoc),
                    "",
                ]
            )

    _atomic_write(path, body)


def read_rows_csv(path):
    """Read back a result table written by :func:`write_rows_csv`."""
    rows = []
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.DictReader(fh)
        if reader.fieldnames != CSV_HEADER:
            raise ValueError(f"unexpected result CSV header: {reader.fieldnames}")
        for rec in reader:
            rows.append(
                ResultRow(
                    rec["experiment"],
                    rec["field"],
                    int(rec["p"]),
                    float(rec["alpha"]),
                    int(rec["n"]),
                    float(rec["rms_error"]),
                    float(rec["eoc"]) if rec["eoc"] else None,
                )
            )
    return rows


def _dump_cochains(path, approx, oracle, measures):
    def body(fh):
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["index", "computed", "oracle", "measure"])
        for i, (a, o, v) in enumerate(zip(approx, oracle, measures)):
            w.writerow([i, _fmt(float(a)), _fmt(float(o)), _fmt(float(v))])

    _atomic_write(path, body)


def _audit_round_trip(path, expected_rms):
    """Recompute one row's RMS error from its dumped cochains."""
    data = np.loadtxt(path, delimiter=",", skiprows=1)
    data = np.atleast_2d(data)
    rms = rms_error_cochain(data[:, 1], data[:, 2], data[:, 3])
    if not np.isclose(rms, expected_rms, rtol=1e-12, atol=0.0):
        raise AssertionError(
            f"round-trip RMS {rms!r} does not reproduce the table value {expected_rms!r}"
        )
    return rms


def _append_manifest(out_dir, records):
    path = os.path.join(out_dir, "manifest.jsonl")
    from . import __version__

    with open(path, "a", encoding="utf-8") as fh:
        for rec in records:
            fh.write(json.dumps({"version": __version__, **rec}, sort_keys=True))
            fh.write("\n")
    return path


def _config_record(config, experiment):
    rec = asdict(config)
    rec["quad"] = {"points": config.quad.points, "panels": config.quad.panels}
    return {"kind": "config", "experiment": experiment, "config": rec}


def _plot_rows(rows, path, x_axis):
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    with matplotlib.rc_context({"svg.hashsalt": "fracdec"}):
        fig, ax = plt.subplots(figsize=(5.0, 3.75))
        if x_axis == "n":
            series = sorted({r.alpha for r in rows})
            for a in series:
                pts = sorted((r.n, r.rms_error) for r in rows if r.alpha == a)
                ax.loglog(*zip(*pts), marker="o", base=2, label=f"alpha={a:g}")
            ax.set_xlabel("subdivisions n")
        else:
            pts = sorted((1.0 - r.alpha, r.rms_error) for r in rows)
            ax.loglog(*zip(*pts), marker="o", label=f"n={rows[0].n}")
            ax.set_xlabel("1 - alpha")
        ax.set_ylabel("RMS error")
        ax.legend(fontsize=8)
        ax.grid(True, which="both", alpha=0.3)
        fig.tight_layout()
        fig.savefig(path, format="svg", metadata={"Date": None})
        plt.close(fig)


def _emit(config, experiment, rows, results, x_axis, extra=None):
    """Write the CSV, per-degree SVGs, cochain dump + audit, and manifest."""
    if not config.out_dir or not rows:
        return
    out = config.out_dir
    os.makedirs(out, exist_ok=True)
    records = [_config_record(config, experiment)]
    csv_path = os.path.join(out, f"{experiment}.csv")
    write_rows_csv(csv_path, rows)
    records.append({"kind": "artifact", "path": csv_path})
    for (row, wall_ms, _) in results:
        records.append(
            {
                "kind": "timing",
                "experiment": experiment,
                "p": row.p,
                "alpha": row.alpha,
                "n": row.n,
                "wall_ms": wall_ms,
            }
        )
    for p in sorted({r.p for r in rows}):
        svg_path = os.path.join(out, f"{experiment}_p{p}.svg")
        _plot_rows([r for r in rows if r.p == p], svg_path, x_axis)
        records.append({"kind": "artifact", "path": svg_path})
    # one sampled row per run is dumped and its RMS recomputed from disk
    pick = random.Random(config.seed).randrange(len(results))
    row, _, (approx, oracle, v) = results[pick]
    dump_path = os.path.join(
        out, f"{experiment}_cochains_p{row.p}_a{row.alpha:g}_n{row.n}.csv"
    )
    _dump_cochains(dump_path, approx, oracle, v)
    audited = _audit_round_trip(dump_path, row.rms_error)
    records.append(
        {
            "kind": "audit",
            "experiment": experiment,
            "p": row.p,
            "alpha": row.alpha,
            "n": row.n,
            "path": dump_path,
            "rms_recomputed": audited,
        }
    )
    if extra:
        records.append({"kind": "extra", "experiment": experiment, **extra})
    _append_manifest(out, records)
