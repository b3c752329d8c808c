"""Command-line interface: shortpath-lab <subcommand>.

Subcommands:
  params         print gamma, b_max and speedup constants for given (k, eta, ratio)
  table          runtime-exponent table for the concrete problem families
  run            one end-to-end algorithm run, JSON diagnostics on stdout
  spectrum-scan  lowest three eigenvalues across a b grid        (config-driven)
  overlap-scan   <+|psi_b> and <z*|psi_b> across a b grid        (config-driven)
  conditions     per-(instance, b) condition verdicts CSV        (config-driven)
  scaling        inverse-overlap scaling study with an OLS fit   (config-driven)
  bounds         measured-vs-predicted overlap bound suite CSV
"""

from __future__ import annotations

import argparse
import dataclasses
import json
import sys
from pathlib import Path

from . import bounds as bounds_mod
from . import transform
from .experiments import ExperimentConfig, rows_to_csv, write_experiment


def _cmd_params(args) -> int:
    digits = args.digits
    gamma_c = transform.gamma_csp(args.k, args.ratio, args.eta, digits=digits)
    gamma_s = transform.gamma_kspin(args.k, args.eta, digits=digits)
    rows = [
        ("gamma_csp(k, |E*|/m, eta)", gamma_c),
        ("gamma_kspin(k, eta)", gamma_s),
        ("b_max(gamma_csp)", transform.b_max(float(gamma_c), digits=digits)),
        ("b_max(gamma_kspin)", transform.b_max(float(gamma_s), digits=digits)),
        ("c max_k_csp (published eta)", bounds_mod.speedup_c("max_k_csp", k=args.k, ratio=args.ratio).c),
        ("c k_spin (published eta)", bounds_mod.speedup_c("k_spin", k=args.k).c),
    ]
    print(f"k={args.k} eta={args.eta} |E*|/m={args.ratio}")
    for name, value in rows:
        print(f"  {name:32s} {value}")
    return 0


def _cmd_table(args) -> int:
    ks = tuple(args.k_values)
    rows = bounds_mod.table1_quantum_rows(ks)
    print(f"{'problem':12s} {'c':>12s} {'runtime exponent (0.5 - c)':>28s}")
    for row in rows:
        print(f"{row['problem']:12s} {row['c']:12.4g} {row['runtime_exponent']:28.12f}")
    return 0


def _cmd_run(args) -> int:
    from . import algo
    from .cost import sample_k_spin, sample_random_kcnf

    if args.ensemble == "kspin":
        cost = sample_k_spin(args.n, args.k, args.seed)
    else:
        if args.m is None:
            raise SystemExit("--m is required for the kcnf ensemble")
        cost = sample_random_kcnf(args.n, args.k, args.m, args.seed)
    doc: dict = {"ensemble": args.ensemble, "n": args.n, "k": args.k, "m": args.m,
                 "eta": args.eta, "b": args.b, "seed": args.seed}
    e_star = None
    if args.unknown_estar:
        from .cost import enumerate_spectrum

        table = enumerate_spectrum(cost)
        q = abs(table.e_star) / 2.0
        big_q = 2.0 * abs(table.e_star)
        search = algo.estimate_estar_binary_search(cost, q_lower=q, q_upper=big_q, seed=args.seed)
        e_star = search.estimate
        doc["estar_search"] = {
            "estimate": search.estimate,
            "exact": search.exact,
            "gridpoints": len(search.gridpoint_logs),
            "max_iterations": max(g.iterations for g in search.gridpoint_logs),
        }
    run = algo.run_algorithm_1(cost, eta=args.eta, b=args.b, seed=args.seed, e_star=e_star)
    doc["result"] = {
        "z_out": run.z_out,
        "value": run.value,
        "optimal": run.optimal,
        "overlap_plus": run.overlap_plus,
        "overlap_opt": run.overlap_opt,
        "success_prob_step2": run.success_prob_step2,
        "success_prob_step3": run.success_prob_step3,
        "query_cost": run.query_cost,
        "conditions_ok": run.conditions_ok,
        "warnings": run.warnings,
        **run.details,
    }
    text = json.dumps(doc, indent=2, sort_keys=True, default=str)
    if args.out:
        Path(args.out).write_text(text + "\n")
    print(text)
    return 0


def _cmd_experiment(args) -> int:
    config = ExperimentConfig.from_json_file(args.config)
    if config.kind != args.kind:
        raise SystemExit(f"config kind {config.kind!r} does not match subcommand {args.kind!r}")
    out_dir = args.out or f"out-{config.kind}-{config.digest()[:8]}"
    manifest = write_experiment(config, out_dir)
    print(json.dumps({k: manifest[k] for k in ("config_sha256", "wall_time_s", "outputs")}, indent=2))
    if "fit" in manifest:
        print(json.dumps(manifest["fit"], indent=2))
    print(f"wrote {out_dir}/")
    return 0


def _cmd_bounds(args) -> int:
    specs = []
    for k in args.k_values:
        for n in args.n_values:
            specs.extend([(k, n)] * args.per_size)
    rows = bounds_mod.lemma_suite(specs, eta=args.eta, master_seed=args.seed)
    dicts = [dataclasses.asdict(r) for r in rows]
    for d in dicts:
        d["lemma_passed_ells"] = " ".join(str(x) for x in d["lemma_passed_ells"])
        for key in ("agsp_bound", "agsp_ok"):
            if d[key] is None:
                d[key] = ""
    columns = list(dicts[0].keys())
    text = rows_to_csv(dicts, columns)
    if args.out:
        Path(args.out).write_text(text)
        print(f"wrote {args.out}")
    else:
        sys.stdout.write(text)
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="shortpath-lab", description=__doc__,
                                     formatter_class=argparse.RawDescriptionHelpFormatter)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("params", help="parameter formulas for one (k, eta, ratio)")
    p.add_argument("--k", type=int, default=3)
    p.add_argument("--eta", type=float, default=0.5)
    p.add_argument("--ratio", type=float, default=1.0, help="|E*|/m for CSP formulas")
    p.add_argument("--digits", type=int, default=None, help="mpmath precision for the formula values")
    p.set_defaults(func=_cmd_params)

    p = sub.add_parser("table", help="runtime-exponent table for concrete families")
    p.add_argument("--k-values", type=int, nargs="+", default=[3, 4, 5])
    p.set_defaults(func=_cmd_table)

    p = sub.add_parser("run", help="one end-to-end idealized algorithm run")
    p.add_argument("--ensemble", choices=["kspin", "kcnf"], default="kspin")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--k", type=int, default=3)
    p.add_argument("--m", type=int, default=None)
    p.add_argument("--eta", type=float, default=0.5)
    p.add_argument("--b", type=float, default=0.3)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--unknown-estar", action="store_true",
                   help="recover E* by grid + binary search before running")
    p.add_argument("--out", default=None, help="also write the JSON diagnostics here")
    p.set_defaults(func=_cmd_run)

    for kind in ("spectrum-scan", "overlap-scan", "conditions", "scaling"):
        p = sub.add_parser(kind, help=f"{kind} experiment from a JSON config")
        p.add_argument("--config", required=True)
        p.add_argument("--out", default=None, help="output directory (default derived from config hash)")
        p.set_defaults(func=_cmd_experiment, kind=kind)

    p = sub.add_parser("bounds", help="measured vs predicted overlap bounds CSV")
    p.add_argument("--k-values", type=int, nargs="+", default=[2, 3])
    p.add_argument("--n-values", type=int, nargs="+", default=[6, 8, 10])
    p.add_argument("--per-size", type=int, default=2)
    p.add_argument("--eta", type=float, default=0.5)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", default=None)
    p.set_defaults(func=_cmd_bounds)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
