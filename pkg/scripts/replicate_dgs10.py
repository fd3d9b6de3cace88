"""Rerun the 10-year Treasury application on a FRED DGS10 export.

Usage::

    python scripts/replicate_dgs10.py DGS10.csv --out dgs10_replication.json

The series is cut at 2010-08-31, converted to daily log growth, and bounded
with the block plan m=7, mu=867. Because the mixing surrogate is not pinned
down, the script reports feasibility and the AR(1) bound for several
surrogate orders side by side.
"""

from __future__ import annotations

import argparse
import json
import sys
from datetime import date

from arbound.cli import _clean
from arbound.mixing import fit_surrogate, mixing_profile
from arbound.riskbound import InfeasiblePlanError, srm_select
from arbound.timeseries import RawSeries, load_csv, log_growth, summary


def truncate(raw: RawSeries, end: date) -> RawSeries:
    keep = [k for k, d in enumerate(raw.dates) if d <= end]
    return RawSeries(tuple(raw.dates[k] for k in keep), tuple(raw.values[k] for k in keep),
                     raw.source_id)


def main(argv=None) -> int:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("csv")
    ap.add_argument("--value-column", default="DGS10")
    ap.add_argument("--end", type=date.fromisoformat, default=date(2010, 8, 31))
    ap.add_argument("--block", default="7,867")
    ap.add_argument("--cap", type=float, default=0.05)
    ap.add_argument("--eta", type=float, default=0.05)
    ap.add_argument("--p-max", type=int, default=50)
    ap.add_argument("--orders", default="1,2,5,10,20", help="surrogate orders to try")
    ap.add_argument("--mc-samples", type=int, default=100_000)
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--out", default=None)
    args = ap.parse_args(argv)

    m, mu = (int(v) for v in args.block.split(","))
    series = log_growth(truncate(load_csv(args.csv, args.value_column), args.end))
    if 2 * m * mu > series.n:
        print(f"block plan m={m}, mu={mu} needs n >= {2 * m * mu}; got n={series.n}",
              file=sys.stderr)
        return 2
    result = {"data": summary(series), "block": {"m": m, "mu": mu}, "by_surrogate_order": {}}
    print(f"n={series.n} max squared change={result['data']['max_squared_value']:.4f}")
    for q in (int(v) for v in args.orders.split(",")):
        surrogate = fit_surrogate(series, q)
        profile = mixing_profile(surrogate, [m], samples=args.mc_samples, seed=args.seed)
        beta = profile.betas[m]
        row = {"beta_m": beta, "eta_prime": args.eta - 4 * (mu - 1) * beta}
        try:
            sel = srm_select(series, args.p_max, args.cap, args.eta, profile, block=(m, mu))
            row.update(ar1_bound=sel.per_order[0].bound_total, srm_choice=sel.srm_choice,
                       aic_choice=sel.aic_choice)
            print(f"q={q:>2} beta({m})={beta:.3g} AR(1) bound={row['ar1_bound']:.5f} "
                  f"srm={sel.srm_choice} aic={sel.aic_choice}")
        except InfeasiblePlanError:
            row["infeasible"] = True
            print(f"q={q:>2} beta({m})={beta:.3g} infeasible (eta'={row['eta_prime']:.3g})")
        result["by_surrogate_order"][str(q)] = row
    if args.out:
        with open(args.out, "w") as fh:
            json.dump(_clean(result), fh, indent=2)
    return 0


if __name__ == "__main__":
    sys.exit(main())
