"""Command-line interface.

Subcommands: capacity, run, sweep, leakage, verify, serve, fetch.  Setting
parameters come from flags (--setting, -N, -M, -K, -T) or a config file
(--config); flags override the file.  Seeds resolve as --seed, then the
WPIR_SEED environment variable, then the config value.
"""

from __future__ import annotations

import argparse
import hashlib
import sys

import numpy as np

from .core import capacity
from .experiment import (ExperimentConfig, dist_from_mapping, experiment_from_mapping,
                         field_from_mapping, load_config_file, resolve_seed,
                         run_experiment, setting_from_mapping)
from .leakage import leakage_report
from .tradeoff import (curve_csv_text, optimal_dist_for_budget, sweep_curve,
                       theorem_tradeoff, write_curve_csv)
from .transport import fetch, serve
from .verify import run_checks
from .core import generate_library


def _add_setting_args(p: argparse.ArgumentParser):
    p.add_argument("--setting", choices=["replicated", "mds", "tcollusion"])
    p.add_argument("-N", type=int, dest="N")
    p.add_argument("-M", type=int, dest="M")
    p.add_argument("-K", type=int, dest="K")
    p.add_argument("-T", type=int, dest="T")
    p.add_argument("--config", help="flat key = value config file")
    p.add_argument("--seed", type=int, default=None)


def _mapping_from_args(args) -> dict[str, str]:
    mapping = load_config_file(args.config) if args.config else {}
    if args.setting:
        mapping["setting.variant"] = args.setting
    for key in ("N", "M", "K", "T"):
        val = getattr(args, key, None)
        if val is not None:
            mapping[f"setting.{key}"] = str(val)
    if getattr(args, "dist", None):
        mapping["dist.pmf"] = args.dist
    return mapping


def _setting(args):
    return setting_from_mapping(_mapping_from_args(args))


def cmd_capacity(args) -> int:
    print(capacity(_setting(args)))
    return 0


def cmd_run(args) -> int:
    mapping = _mapping_from_args(args)
    cfg = experiment_from_mapping(mapping, seed=args.seed, trials=args.trials,
                                  out=args.out)
    result = run_experiment(cfg)
    print(f"setting            {cfg.setting.describe()}")
    print(f"trials             {cfg.trials}")
    print(f"analytic rate      {result.analytic_rate} = {result.analytic_rate_float:.6f}")
    print(f"empirical rate     {result.empirical_rate:.6f}")
    print(f"mean download bits {result.mean_download_bits:.1f}")
    for rep in result.leakage:
        print(f"{rep['metric']:<5} analytic {rep['analytic_value']:.6f} "
              f"empirical {rep['empirical_value']:.6f} ({rep['method']})")
    print(f"wall clock         {result.wall_clock_seconds:.2f}s")
    if cfg.out:
        print(f"wrote {cfg.out}.json and {cfg.out}.csv")
    return 0


def cmd_sweep(args) -> int:
    setting = _setting(args)
    if args.rho is not None:
        pt = theorem_tradeoff(setting, args.metric, args.rho)
        dist = optimal_dist_for_budget(setting, args.metric, args.rho)
        print(f"rho_budget     {pt.rho_budget:.12g}")
        print(f"rho_achieved   {pt.rho_achieved:.12g}")
        print(f"rho_normalized {pt.rho_normalized:.12g}")
        print(f"rate           {float(pt.rate):.12g}")
        print(f"pmf            {','.join(f'{p:.12g}' for p in dist.pmf)}")
        return 0
    points = sweep_curve(setting, args.metric, args.grid_points)
    if args.out:
        write_curve_csv(points, args.out)
        print(f"wrote {len(points)} points to {args.out}")
    else:
        sys.stdout.write(curve_csv_text(points))
    return 0


def cmd_leakage(args) -> int:
    mapping = _mapping_from_args(args)
    setting = setting_from_mapping(mapping)
    dist = dist_from_mapping(mapping, setting.M)
    field = field_from_mapping(mapping)
    seed = resolve_seed(args.seed, mapping)
    metrics = ["MIL", "MaxL"] if args.metric == "both" else [args.metric]
    for metric in metrics:
        rep = leakage_report(setting, dist, metric, method=args.method,
                             samples=args.samples, seed=seed, field=field)
        print(f"{metric:<5} analytic {rep.analytic_value:.10f}  "
              f"empirical {rep.empirical_value:.10f}  "
              f"method {rep.method}  samples {rep.sample_count}  "
              f"collusion {rep.collusion_size}")
    return 0


def cmd_verify(args) -> int:
    return 0 if run_checks(full=args.full) else 1


def _parse_address(text: str) -> tuple[str, int]:
    host, _, port = text.rpartition(":")
    return host or "127.0.0.1", int(port)


def cmd_serve(args) -> int:
    mapping = _mapping_from_args(args)
    setting = setting_from_mapping(mapping)
    field = field_from_mapping(mapping)
    seed = resolve_seed(args.seed, mapping)
    library = generate_library(setting.M, setting.file_length, field, seed)
    server = serve(setting, args.server_index, library, _parse_address(args.address))
    host, port = server.address
    print(f"serving {setting.describe()} column {args.server_index} on {host}:{port}",
          flush=True)
    try:
        server.serve_forever(max_requests=args.max_requests)
    except KeyboardInterrupt:
        pass
    finally:
        server.stop()
    return 0


def cmd_fetch(args) -> int:
    mapping = _mapping_from_args(args)
    setting = setting_from_mapping(mapping)
    field = field_from_mapping(mapping)
    seed = resolve_seed(args.seed, mapping)
    dist = dist_from_mapping(mapping, setting.M)
    addresses = [_parse_address(a) for a in args.addresses.split(",")]
    decoded = fetch(addresses, setting, field, args.theta, dist, seed)
    digest = hashlib.sha256(np.asarray(decoded, dtype=np.int64).tobytes()).hexdigest()
    print(f"fetched file {args.theta}: {len(decoded)} symbols, sha256 {digest}")
    if args.library_seed is not None:
        library = generate_library(setting.M, setting.file_length, field,
                                   args.library_seed)
        ok = np.array_equal(decoded, library.file(args.theta))
        print(f"library check: {'match' if ok else 'MISMATCH'}")
        return 0 if ok else 1
    if args.out:
        with open(args.out, "wb") as fh:
            fh.write(np.asarray(decoded, dtype=np.int64).astype("u2").tobytes())
        print(f"wrote {args.out}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="wpir", description=__doc__)
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("capacity", help="print the zero-leakage capacity, exactly")
    _add_setting_args(p)
    p.set_defaults(fn=cmd_capacity)

    p = sub.add_parser("run", help="run retrieval trials and report rates")
    _add_setting_args(p)
    p.add_argument("--dist", help="comma-separated pmf of M'")
    p.add_argument("--trials", type=int, default=None)
    p.add_argument("--out", help="output prefix for .json/.csv results")
    p.set_defaults(fn=cmd_run)

    p = sub.add_parser("sweep", help="trade-off curves as CSV")
    _add_setting_args(p)
    p.add_argument("--metric", choices=["MIL", "MaxL"], required=True)
    p.add_argument("--rho", type=float, default=None,
                   help="print the single theorem point at this budget")
    p.add_argument("--grid-points", type=int, default=101)
    p.add_argument("--out")
    p.set_defaults(fn=cmd_sweep)

    p = sub.add_parser("leakage", help="analytic and empirical leakage reports")
    _add_setting_args(p)
    p.add_argument("--dist", help="comma-separated pmf of M'")
    p.add_argument("--metric", choices=["MIL", "MaxL", "both"], default="both")
    p.add_argument("--method", choices=["exhaustive", "monte_carlo"],
                   default="exhaustive")
    p.add_argument("--samples", type=int, default=0)
    p.set_defaults(fn=cmd_leakage)

    p = sub.add_parser("verify", help="run the invariant suites")
    p.add_argument("--full", action="store_true",
                   help="include the statistical suites (minutes, not seconds)")
    p.set_defaults(fn=cmd_verify)

    p = sub.add_parser("serve", help="serve one storage column over a socket")
    _add_setting_args(p)
    p.add_argument("--server-index", type=int, required=True)
    p.add_argument("--address", default="127.0.0.1:0")
    p.add_argument("--max-requests", type=int, default=None)
    p.set_defaults(fn=cmd_serve)

    p = sub.add_parser("fetch", help="retrieve a file from running servers")
    _add_setting_args(p)
    p.add_argument("--addresses", required=True, help="host:port,host:port,...")
    p.add_argument("--theta", type=int, required=True)
    p.add_argument("--dist", help="comma-separated pmf of M'")
    p.add_argument("--library-seed", type=int, default=None,
                   help="verify against the library this seed generates")
    p.add_argument("--out", help="write the file as little-endian uint16 symbols")
    p.set_defaults(fn=cmd_fetch)
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    return args.fn(args)


if __name__ == "__main__":
    sys.exit(main())
