"""Command-line entry point: ``arbound {select,simulate,coverage}``.

Exit codes: 0 success, 2 configuration error, 3 infeasible block plan,
4 input/output error.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import logging
import math
import os
import sys
import tempfile
from dataclasses import asdict, dataclass
from datetime import date, timedelta
from pathlib import Path

import numpy as np

from . import __version__
from .mixing import fit_surrogate, mixing_profile
from .riskbound import InfeasiblePlanError, srm_select
from .simgen import SimSpec, coverage_experiment, simulate
from .stability import DEFAULT_MARGIN
from .timeseries import DataError, GrowthSeries, cumulative_levels, load_csv, log_growth, summary

log = logging.getLogger("arbound")

SCHEMA_VERSION = 1
EXIT_CONFIG, EXIT_INFEASIBLE, EXIT_IO = 2, 3, 4
CAP_SENSITIVITY = (0.03, 0.05, 0.1)
SURROGATE_SENSITIVITY = (5, 10, 20)


class ConfigError(ValueError):
    pass


@dataclass
class RunConfig:
    input: str
    value_column: str = "value"
    p_max: int = 50
    cap: float = 0.05
    eta: float = 0.05
    surrogate_order: int = 20
    m_min: int = 1
    m_max: int = 100
    block: tuple[int, int] | None = None
    seed: int = 0
    out_dir: str = "out"
    center: bool = False
    index_count: str = "mu"
    transform: str = "log-growth"
    margin: float = DEFAULT_MARGIN
    mc_samples: int = 100_000
    emit_plots: bool = True
    workers: int = 1

    def validate(self):
        if self.p_max < 1:
            raise ConfigError("--p-max must be >= 1")
        if not self.cap > 0:
            raise ConfigError("--cap must be positive")
        if not 0 < self.eta < 1:
            raise ConfigError("--eta must lie in (0, 1)")
        if self.surrogate_order < 1:
            raise ConfigError("--surrogate-order must be >= 1")
        if not 1 <= self.m_min <= self.m_max:
            raise ConfigError("need 1 <= --m-min <= --m-max")
        if self.index_count not in ("mu", "mu-plus-1"):
            raise ConfigError("--index-count must be mu or mu-plus-1")
        if self.block is not None and not self.m_min <= self.block[0] <= self.m_max:
            raise ConfigError("--block m must lie within [--m-min, --m-max]")

    def report_view(self) -> dict:
        out = asdict(self)
        out.pop("workers")
        out.pop("out_dir")
        out["block"] = list(self.block) if self.block else None
        return out


def _clean(obj):
    """JSON-safe copy: numpy to Python, non-finite floats to None."""
    if isinstance(obj, dict):
        return {str(k): _clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_clean(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return _clean(obj.tolist())
    if isinstance(obj, (np.floating, float)):
        f = float(obj)
        return f if math.isfinite(f) else None
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (np.bool_,)):
        return bool(obj)
    return obj


def write_atomic(path: Path, text: str):
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def _csv_text(header, rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for row in rows:
        w.writerow([repr(float(v)) if isinstance(v, (float, np.floating)) else v for v in row])
    return buf.getvalue()


def load_series(cfg: RunConfig) -> GrowthSeries:
    raw = load_csv(cfg.input, cfg.value_column)
    if cfg.transform == "log-growth":
        return log_growth(raw)
    present = [(d, v) for d, v in zip(raw.dates, raw.values) if v is not None]
    return GrowthSeries(np.array([v for _, v in present]), provenance=raw.source_id,
                        dates=tuple(d for d, _ in present))


def run_select(cfg: RunConfig) -> dict:
    """Whole pipeline; writes the report files and returns the report dict."""
    cfg.validate()
    series = load_series(cfg)
    if series.n <= 2 * max(cfg.p_max, cfg.surrogate_order):
        raise ConfigError(f"series of length {series.n} too short for p_max={cfg.p_max} "
                          f"and surrogate order {cfg.surrogate_order}")
    root = np.random.SeedSequence(cfg.seed)
    profile_seed, sens_seed = root.spawn(2)

    surrogate = fit_surrogate(series, cfg.surrogate_order, cfg.margin)
    lags = range(cfg.m_min, min(cfg.m_max, series.n // 2) + 1)
    log.info("computing beta(m) for m in %d..%d (q=%d)", lags.start, lags.stop - 1,
             surrogate.q)
    profile = mixing_profile(surrogate, lags, samples=cfg.mc_samples, seed=profile_seed,
                             workers=cfg.workers)
    result = srm_select(series, cfg.p_max, cfg.cap, cfg.eta, profile, cfg.margin,
                        block=cfg.block, index_count=cfg.index_count, center=cfg.center,
                        workers=cfg.workers)
    block = result.block

    cap_sens = {}
    for cap in CAP_SENSITIVITY:
        alt = srm_select(series, cfg.p_max, cap, cfg.eta, profile, cfg.margin,
                         block=(block.m, block.mu), index_count=cfg.index_count,
                         center=cfg.center, workers=cfg.workers)
        cap_sens[repr(cap)] = {"srm_choice": alt.srm_choice,
                               "bound_total": [r.bound_total for r in alt.per_order]}

    beta_sens = {}
    for q, s in zip(SURROGATE_SENSITIVITY, sens_seed.spawn(len(SURROGATE_SENSITIVITY))):
        if series.n <= 2 * q:
            continue
        sur_q = fit_surrogate(series, q, cfg.margin)
        prof_q = mixing_profile(sur_q, [block.m], samples=cfg.mc_samples, seed=s,
                                workers=cfg.workers)
        beta_sens[str(q)] = prof_q.betas[block.m]

    aic_min = min(a for _, a in result.aic_per_order)
    report = {
        "schema_version": SCHEMA_VERSION,
        "arbound_version": __version__,
        "config": cfg.report_view(),
        "data": {"provenance": series.provenance, **summary(series)},
        "decisions": {
            "missing_values": "dropped before differencing",
            "index_set": "I = {floor(m/2) + 2 m k}, block-spacing symbol read as m",
            "index_count": cfg.index_count,
            "m1_offset": "offset floor(m/2) raised to 1 when m = 1",
            "complexity_scale": "1/mu over rows in I",
            "ar1_complexity": "order-1 form (4/mu) sqrt(M/2) ||X_I||; general form recorded",
            "aic_formula": "n_eff ln(RSS/n_eff) + 2(p+1), n_eff = n - p_max, common rows",
            "stationarity": "OLS shrunk radially into the stationary region when needed",
            "beta_reading": "scalar beta(m) = state-chain beta at lag m+q-1",
            "beta_monotone": "running minimum over m",
            "block_choice": ("fixed by --block" if cfg.block else
                             "feasible (m, mu) minimizing the bound averaged over p"),
            "unused_points": block.unused,
            "projection_engaged": [f.p for f in result.fits
                                   if not f.stationary_before_projection],
        },
        "surrogate": {"q": surrogate.q, "phi": surrogate.phi, "sigma": surrogate.sigma,
                      "method": profile.method},
        "mixing": {"beta": profile.betas, "beta_raw": profile.raw_betas,
                   "beta_stderr": profile.stderr},
        "block": {"m": block.m, "mu": block.mu, "beta_m": block.beta,
                  "eta_prime": block.eta_prime},
        "block_candidates": result.candidates,
        "per_order": [r.as_dict() for r in result.per_order],
        "aic": [{"p": p, "aic": a, "aic_gap": a - aic_min} for p, a in result.aic_per_order],
        "srm_choice": result.srm_choice,
        "aic_choice": result.aic_choice,
        "sensitivity": {"loss_cap": cap_sens, "beta_m_by_surrogate_order": beta_sens},
        "fits": [{"p": f.p, "coef": f.coef, "ols_coef": f.ols_coef,
                  "stationary_before_projection": f.stationary_before_projection,
                  "sigma2": f.sigma2} for f in result.fits],
    }
    report = _clean(report)

    out = Path(cfg.out_dir)
    write_atomic(out / "report.json", json.dumps(report, indent=2, sort_keys=False) + "\n")
    write_atomic(out / "bounds.csv", _csv_text(
        ["p", "train_error", "complexity_term", "confidence_term", "bound_total"],
        [(r.p, r.train_error, r.complexity_term, r.confidence_term, r.bound_total)
         for r in result.per_order]))
    if cfg.emit_plots:
        write_atomic(out / "aic.csv", _csv_text(
            ["p", "aic_gap"], [(p, a - aic_min) for p, a in result.aic_per_order]))
        dates = series.dates or [None] * series.n
        write_atomic(out / "growth.csv", _csv_text(
            ["date", "growth"],
            [(d.isoformat() if d else k + 1, v) for k, (d, v) in
             enumerate(zip(dates, series.values))]))
    return report


def simulate_csv_text(spec: SimSpec, start_level: float = 1.0,
                      start_date: date = date(2000, 1, 1), column: str = "value") -> str:
    """Levels whose log growth is the simulated path, one row per day."""
    series = simulate(spec)
    levels = cumulative_levels(series, start_level)
    rows = [((start_date + timedelta(days=k)).isoformat(), float(v))
            for k, v in enumerate(levels)]
    return _csv_text(["date", column], rows)


def _floats(text: str) -> list[float]:
    try:
        return [float(t) for t in text.split(",") if t.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}")


def _block(text: str) -> tuple[int, int]:
    try:
        m, mu = (int(t) for t in text.split(","))
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected M,MU integers, got {text!r}")
    return m, mu


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="arbound",
        description="Risk bounds and structural risk minimization for stationary AR models.")
    parser.add_argument("--version", action="version", version=__version__)
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    sel = sub.add_parser("select", help="fit AR(1..p_max), bound each order, select by SRM")
    sel.add_argument("--input", required=True)
    sel.add_argument("--value-column", default="value")
    sel.add_argument("--p-max", type=int, default=50)
    sel.add_argument("--cap", type=float, default=0.05, help="loss cap M")
    sel.add_argument("--eta", type=float, default=0.05)
    sel.add_argument("--surrogate-order", type=int, default=20)
    sel.add_argument("--m-min", type=int, default=1)
    sel.add_argument("--m-max", type=int, default=100)
    sel.add_argument("--block", type=_block, default=None, metavar="M,MU",
                     help="fix the block plan instead of searching m")
    sel.add_argument("--seed", type=int, default=0)
    sel.add_argument("--out-dir", default="out")
    sel.add_argument("--center", action="store_true")
    sel.add_argument("--index-count", choices=["mu", "mu-plus-1"], default="mu")
    sel.add_argument("--transform", choices=["log-growth", "none"], default="log-growth")
    sel.add_argument("--mc-samples", type=int, default=100_000)
    sel.add_argument("--no-plots", dest="emit_plots", action="store_false")
    sel.add_argument("--workers", type=int, default=1)

    sim = sub.add_parser("simulate", help="write a synthetic level series as CSV")
    sim.add_argument("--phi", type=_floats, required=True)
    sim.add_argument("--sigma", type=float, default=0.01)
    sim.add_argument("--n", type=int, default=5000)
    sim.add_argument("--burn-in", type=int, default=None)
    sim.add_argument("--seed", type=int, default=0)
    sim.add_argument("--start-level", type=float, default=100.0)
    sim.add_argument("--value-column", default="value")
    sim.add_argument("--out", required=True)

    cov = sub.add_parser("coverage", help="empirical violation rate of the bound")
    cov.add_argument("--phi", type=_floats, default=[0.5, -0.3])
    cov.add_argument("--sigma", type=float, default=1.0)
    cov.add_argument("--n", type=int, default=2048)
    cov.add_argument("--holdout", type=int, default=512)
    cov.add_argument("--p-fit", type=int, default=None, help="defaults to the true order")
    cov.add_argument("--cap", type=float, default=10.0)
    cov.add_argument("--eta", type=float, default=0.05)
    cov.add_argument("--replicates", type=int, default=200)
    cov.add_argument("--seed", type=int, default=0)
    cov.add_argument("--mc-samples", type=int, default=100_000)
    cov.add_argument("--workers", type=int, default=1)
    cov.add_argument("--out", default=None, help="JSON file; stdout when omitted")
    return parser


def _cmd_select(args) -> int:
    cfg = RunConfig(
        input=args.input, value_column=args.value_column, p_max=args.p_max, cap=args.cap,
        eta=args.eta, surrogate_order=args.surrogate_order, m_min=args.m_min,
        m_max=args.m_max, block=args.block, seed=args.seed, out_dir=args.out_dir,
        center=args.center, index_count=args.index_count, transform=args.transform,
        mc_samples=args.mc_samples, emit_plots=args.emit_plots, workers=args.workers)
    report = run_select(cfg)
    print(f"srm_choice={report['srm_choice']} aic_choice={report['aic_choice']} "
          f"m={report['block']['m']} mu={report['block']['mu']} -> {cfg.out_dir}")
    return 0


def _cmd_simulate(args) -> int:
    spec = SimSpec(args.phi, args.sigma, args.n, args.burn_in, args.seed)
    text = simulate_csv_text(spec, args.start_level, column=args.value_column)
    write_atomic(Path(args.out), text)
    return 0


def _cmd_coverage(args) -> int:
    spec = SimSpec(args.phi, args.sigma, args.n, None, args.seed)
    p_fit = args.p_fit or spec.p
    from .simgen import truth_profile

    profile = truth_profile(spec, spec.n, samples=args.mc_samples, seed=args.seed,
                            workers=args.workers)
    res = coverage_experiment(spec, p_fit, args.cap, args.eta, args.replicates, args.holdout,
                              profile=profile, workers=args.workers)
    payload = _clean({"schema_version": SCHEMA_VERSION,
                      "config": {"phi": spec.phi, "sigma": spec.sigma, "n": spec.n,
                                 "holdout": args.holdout, "p_fit": p_fit, "cap": args.cap,
                                 "eta": args.eta, "replicates": args.replicates,
                                 "seed": args.seed, "mc_samples": args.mc_samples},
                      **res.as_dict()})
    text = json.dumps(payload, indent=2) + "\n"
    if args.out:
        write_atomic(Path(args.out), text)
    else:
        sys.stdout.write(text)
    return 0 if res.skipped < res.replicates else EXIT_INFEASIBLE


COMMANDS = {"select": _cmd_select, "simulate": _cmd_simulate, "coverage": _cmd_coverage}


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return COMMANDS[args.command](args)
    except InfeasiblePlanError as exc:
        print(f"arbound: infeasible block plan: {exc}", file=sys.stderr)
        return EXIT_INFEASIBLE
    except (OSError, DataError) as exc:
        print(f"arbound: input/output error: {exc}", file=sys.stderr)
        return EXIT_IO
    except (ConfigError, ValueError) as exc:
        print(f"arbound: configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
