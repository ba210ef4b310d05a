"""Command-line front end.

    narygw tau       --law geometric --m 13 --N 2
    narygw pmf       --law poisson --m 13 --N 3
    narygw critical  --law poisson --N 2..5
    narygw joint     --law one-or-many --p 0.5 --r 3 --N 2 --n 2
    narygw simulate  --law geometric --m 13 --N 2 --n 8 --reps 1e5 --seed 7
    narygw tables    1

``--law`` takes a family name (geometric, poisson, fractional-linear,
one-or-many, generic) or a JSON object such as
``{"family": "geometric", "p": 0.9285714285714286}``.

Exit codes: 0 ok, 2 numerical or parameter failure, 3 simulation quality
failure (too many replicates hit the node budget).
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import sys

from . import dist, joint, mc, solver, tables
from .errors import BudgetDominated, NarygwError, UnsupportedFamily
from .offspring import OffspringLaw, make_law

EXIT_NUMERIC = 2
EXIT_QUALITY = 3


def parse_range(text: str) -> list[int]:
    """'3' -> [3]; '2..5' -> [2, 3, 4, 5]; '1,3' -> [1, 3]."""
    out = []
    for part in text.split(","):
        if ".." in part:
            a, b = part.split("..")
            out.extend(range(int(a), int(b) + 1))
        else:
            out.append(int(part))
    return out


def parse_count(text: str) -> int:
    value = float(text)
    if value != int(value):
        raise argparse.ArgumentTypeError(f"expected an integer, got {text}")
    return int(value)


def law_from_args(args) -> OffspringLaw:
    text = args.law.strip()
    if text.startswith("{"):
        return make_law(json.loads(text))
    spec = {"family": text}
    for key in ("p", "b", "m", "r"):
        val = getattr(args, key, None)
        if val is not None:
            spec[key] = val
    if args.coeffs is not None:
        spec["coeffs"] = [float(c) for c in args.coeffs.split(",")]
    return make_law(spec)


def _emit(args, text: str) -> None:
    if args.out:
        with open(args.out, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _records_out(args, records: list[dict], footer: dict | None = None) -> None:
    if args.format == "json":
        payload = {"records": records}
        if footer:
            payload.update(footer)
        _emit(args, json.dumps(payload, indent=2) + "\n")
        return
    buf = io.StringIO()
    if records:
        writer = csv.DictWriter(buf, fieldnames=list(records[0]), lineterminator="\n")
        writer.writeheader()
        writer.writerows(records)
    for key, val in (footer or {}).items():
        buf.write(f"# {key}={val}\n")
    _emit(args, buf.getvalue())


# -- subcommands -------------------------------------------------------------

def cmd_tau(args) -> int:
    law = law_from_args(args)
    records = []
    for N in parse_range(args.N):
        it = solver.tau_iterate(law, N, tol=args.tol)
        rec = {"N": N, "tau": it.tau, "residual": it.residual, "iterations": it.iterations}
        try:
            fam = solver.tau_family(law, N)
            rec["tau_family"] = fam.tau
            rec["delta"] = abs(fam.tau - it.tau)
        except UnsupportedFamily:
            rec["tau_family"] = ""
            rec["delta"] = ""
        records.append(rec)
    _records_out(args, records)
    return 0


def cmd_pmf(args) -> int:
    law = law_from_args(args)
    records, meta = [], {}
    for N in parse_range(args.N):
        if args.method == "closed":
            table = dist.pmf_closed_form(law, N)
        else:
            table = dist.pmf_vn(law, N, tol=args.tol)
        upto = table.probs.size if args.jmax is None else min(table.probs.size, args.jmax + 1)
        for j in range(upto):
            records.append({"N": N, "j": j, "prob": float(table.probs[j])})
        meta[f"N{N}"] = f"tau={table.tau!r} mean={table.mean!r} tail={table.tail!r}"
    _records_out(args, records, meta)
    return 0


def cmd_critical(args) -> int:
    family = args.law.strip().lower()
    records = []
    for N in parse_range(args.N):
        cv = solver.critical_mean(family, N, r=args.r)
        records.append({"N": N, "family": cv.family, "m_crit": cv.m_crit,
                        "tau_crit": cv.tau_crit, "y": cv.y})
    _records_out(args, records)
    return 0


def cmd_joint(args) -> int:
    law = law_from_args(args)
    (N,) = parse_range(args.N)
    table = joint.joint_run(law, N, args.n, T=args.T, j_max=args.jmax)
    retained = table.retained_mass[-1]
    if retained < 0.5:
        print(f"warning: only {retained:.3g} of the progeny mass lies within T={args.T}",
              file=sys.stderr)
    records = [{"j": j, "t": t, "prob": p} for j, t, p in table.records()]
    _records_out(args, records, {"retained_mass": retained, "deficit": table.deficit})
    return 0


def cmd_simulate(args) -> int:
    law = law_from_args(args)
    (N,) = parse_range(args.N)
    try:
        summary = mc.mc_estimate(law, N, args.n, args.reps, seed=args.seed, workers=args.workers,
                                 budget=args.budget, progeny=args.progeny)
        code = 0
    except BudgetDominated as exc:
        print(f"error: {exc}", file=sys.stderr)
        summary, code = exc.summary, EXIT_QUALITY
    if args.format == "json":
        _emit(args, json.dumps(summary.to_dict(), indent=2) + "\n")
        return code
    records = [{"j": j, "p_hat": e[0], "stderr": e[1], "ci_low": e[2][0], "ci_high": e[2][1]}
               for j, e in summary.estimates.items()]
    footer = {
        "reps": summary.reps, "seed": summary.seed,
        "tau_hat": summary.tau_hat, "tau_ci_low": summary.tau_ci[0], "tau_ci_high": summary.tau_ci[1],
        "mean_v": summary.mean_v, "censored_frac": summary.censored_frac,
    }
    if summary.mean_nu is not None:
        footer["mean_nu"] = summary.mean_nu
    _records_out(args, records, footer)
    return code


def cmd_tables(args) -> int:
    _emit(args, tables.table_csv(args.which))
    return 0


# -- parser ------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="narygw", description=__doc__.split("\n\n")[0])
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, need_law=True):
        if need_law:
            p.add_argument("--law", required=True, help="family name or JSON law spec")
        p.add_argument("--p", type=float)
        p.add_argument("--b", type=float)
        p.add_argument("--m", type=float)
        p.add_argument("--r", type=int)
        p.add_argument("--coeffs", help="comma-separated p_0,p_1,... for --law generic")
        p.add_argument("--N", default="2", help="N, a range a..b, or a list a,b")
        p.add_argument("--tol", type=float, default=1e-12)
        p.add_argument("--format", choices=("csv", "json"), default="csv")
        p.add_argument("--out", help="output path (default stdout)")

    p = sub.add_parser("tau", help="P(V_N > 0) by iteration and, where available, the family equation")
    common(p)
    p.set_defaults(func=cmd_tau)

    p = sub.add_parser("pmf", help="distribution of V_N")
    common(p)
    p.add_argument("--method", choices=("theorem", "closed"), default="theorem")
    p.add_argument("--jmax", type=int)
    p.set_defaults(func=cmd_pmf)

    p = sub.add_parser("critical", help="critical offspring means")
    common(p)
    p.set_defaults(func=cmd_critical)

    p = sub.add_parser("joint", help="joint law of V_{N,n} and total progeny")
    common(p)
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--T", type=int, default=64)
    p.add_argument("--jmax", type=int)
    p.set_defaults(func=cmd_joint)

    p = sub.add_parser("simulate", help="Monte Carlo estimate of the law of V_{N,n}")
    common(p)
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--reps", type=parse_count, default=10**5)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--workers", type=int, default=1)
    p.add_argument("--budget", type=parse_count, default=mc.DEFAULT_BUDGET)
    p.add_argument("--progeny", action="store_true", help="generate full trees and report nu_n")
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("tables", help="reproduce published table 1, 2 or 3 as CSV")
    p.add_argument("which", type=int, choices=(1, 2, 3))
    p.add_argument("--out")
    p.set_defaults(func=cmd_tables)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except BudgetDominated as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_QUALITY
    except (NarygwError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_NUMERIC


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
