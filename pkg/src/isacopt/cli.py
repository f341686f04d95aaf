"""Command line entry point: ``isacopt run`` and ``isacopt compare``."""
from __future__ import annotations

import argparse
import logging
import sys

from .config import ALGOS, ConfigError, ConfigurationError, load_config
from .experiment import ScenarioMismatch, compare, run_experiment


def _parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="isacopt", description=__doc__)
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="cmd", required=True)

    r = sub.add_parser("run", help="run one (algorithm, seed) cell")
    r.add_argument("--config", help="JSON config; omitted keys take the defaults")
    r.add_argument("--algo", choices=ALGOS)
    r.add_argument("--seed", type=int)
    r.add_argument("--backend", choices=("mock", "http"))
    r.add_argument("--out", help="parent directory for the timestamped run directory")

    c = sub.add_parser("compare", help="union-normalize several runs and rank them by HV")
    c.add_argument("runs", nargs="+", help="run directories")
    c.add_argument("--out", required=True)
    return p


def main(argv=None) -> int:
    args = _parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(name)s: %(message)s")
    if args.cmd == "run":
        try:
            cfg = load_config(args.config, algo=args.algo, seed=args.seed, backend=args.backend, output_dir=args.out)
        except (ConfigError, ConfigurationError) as exc:
            print(f"config error: {exc}", file=sys.stderr)
            return 2
        except (OSError, ValueError) as exc:
            print(f"cannot read config: {exc}", file=sys.stderr)
            return 2
        try:
            art = run_experiment(cfg)
        except OSError as exc:
            print(f"I/O error: {exc}", file=sys.stderr)
            return 1
        s = art.summary
        print(f"{art.path}\tevaluations={s['evaluations']}\tep_size={s['ep_size']}\tfinal_hv={s['final_hv']:.6f}")
        return 0
    try:
        res = compare(args.runs, args.out)
    except ScenarioMismatch as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except (OSError, ValueError, KeyError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    print("rank\trun\talgo\tseed\thv")
    for i, r in enumerate(res["table"], 1):
        print(f"{i}\t{r['run']}\t{r['algo']}\t{r['seed']}\t{r['hv']:.6f}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
