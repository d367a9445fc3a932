"""``ringmes`` command line.

Exit codes: 0 success, 2 configuration error, 3 numerical failure.
"""

from __future__ import annotations

import argparse
import logging
import os
import sys

from ..errors import ConfigError, DomainError, NumericalError
from .config import TASKS, Grid, RunConfig
from .commands import run

log = logging.getLogger("ringmes")

EXIT_OK, EXIT_CONFIG, EXIT_NUMERICAL = 0, 2, 3


def _common(p: argparse.ArgumentParser) -> None:
    g = p.add_argument_group("model and run")
    g.add_argument("--config", help="JSON run configuration; flags override its fields")
    g.add_argument("--L", type=int)
    g.add_argument("--N", type=int)
    g.add_argument("--C", type=float)
    g.add_argument("--U", type=float)
    g.add_argument("--V", type=float)
    g.add_argument("--phi-a", type=float, dest="phi_a")
    g.add_argument("--phi-b", type=float, dest="phi_b")
    g.add_argument("--out", help="output file (default: stdout)")
    g.add_argument("--threads", type=int)
    g.add_argument("--seed", type=int)
    g.add_argument("--dump-config", action="store_true", help="print the resolved configuration and exit")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="ringmes", description=__doc__.splitlines()[0])
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="task", required=True)

    sp = sub.add_parser("spectrum", help="energies vs. Peierls phase")
    _common(sp)
    sp.add_argument("--phi-start", type=float)
    sp.add_argument("--phi-stop", type=float)
    sp.add_argument("--phi-num", type=int)

    mp = sub.add_parser("mes-check", help="residuals and observables of the analytic MES")
    _common(mp)
    mp.add_argument("--m", type=int, nargs="+", dest="m_list")
    mp.add_argument("--delta", type=float, dest="mes_delta", help="phi_a = phi~ + delta, phi_b = phi~ - delta")
    mp.add_argument("--tol", type=float, dest="residual_tol")

    pp = sub.add_parser("protocol", help="single phase-ramp run")
    _common(pp)
    pp.add_argument("--alpha", type=float, help="ramp velocity in units of C/hbar")
    pp.add_argument("--samples", type=int)
    pp.add_argument("--eps", type=float)

    ap = sub.add_parser("alpha-scan", help="final fidelity vs. ramp velocity")
    _common(ap)
    ap.add_argument("--alpha-start", type=float)
    ap.add_argument("--alpha-stop", type=float)
    ap.add_argument("--alpha-num", type=int)
    ap.add_argument("--linear", action="store_true", help="linear instead of log spacing")
    ap.add_argument("--samples", type=int)
    ap.add_argument("--eps", type=float)

    up = sub.add_parser("uv-sweep", help="entanglement and current of the most entangled eigenstate over (U, V)")
    _common(up)
    up.add_argument("--phi", type=float, dest="uv_phi")
    up.add_argument("--u-max", type=float)
    up.add_argument("--v-max", type=float)
    up.add_argument("--u-num", type=int)
    up.add_argument("--v-num", type=int)
    return parser


def _grid(base: Grid, start=None, stop=None, num=None, log=None) -> Grid:
    return Grid(
        start=base.start if start is None else start,
        stop=base.stop if stop is None else stop,
        num=base.num if num is None else num,
        log=base.log if log is None else log,
    )


def resolve_config(args: argparse.Namespace) -> RunConfig:
    cfg = RunConfig.load(args.config) if args.config else RunConfig()
    ns = vars(args)
    simple = {
        k: ns.get(k)
        for k in ("L", "N", "C", "U", "V", "phi_a", "phi_b", "out", "threads", "seed",
                  "mes_delta", "residual_tol", "alpha", "samples", "eps", "uv_phi")
    }
    if ns.get("m_list") is not None:
        simple["m_list"] = tuple(ns["m_list"])
    cfg = cfg.override(task=args.task, **simple)
    if args.task == "spectrum":
        cfg = cfg.override(phi_grid=_grid(cfg.phi_grid, ns.get("phi_start"), ns.get("phi_stop"), ns.get("phi_num")))
    elif args.task == "alpha-scan":
        cfg = cfg.override(
            alpha_grid=_grid(cfg.alpha_grid, ns.get("alpha_start"), ns.get("alpha_stop"), ns.get("alpha_num"),
                             False if ns.get("linear") else None)
        )
    elif args.task == "uv-sweep":
        u, v = cfg.u_grid, cfg.v_grid
        u_num = ns.get("u_num") or u.num
        v_num = ns.get("v_num") or v.num
        u_max = ns.get("u_max") or u.stop
        v_max = ns.get("v_max") or v.stop
        cfg = cfg.override(
            u_grid=Grid(u_max / u_num, u_max, u_num) if (ns.get("u_num") or ns.get("u_max")) else u,
            v_grid=Grid(v_max / v_num, v_max, v_num) if (ns.get("v_num") or ns.get("v_max")) else v,
        )
    return cfg.validate()


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")
    try:
        cfg = resolve_config(args)
        if args.dump_config:
            sys.stdout.write(cfg.dumps() + "\n")
            return EXIT_OK
        text = run(cfg)
    except (ConfigError, DomainError) as exc:
        print(f"ringmes: configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except NumericalError as exc:
        print(f"ringmes: numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    if cfg.out is None:
        try:
            sys.stdout.write(text)
            sys.stdout.flush()
        except BrokenPipeError:
            # reader went away (e.g. piped into head); not an error of ours
            os.dup2(os.open(os.devnull, os.O_WRONLY), sys.stdout.fileno())
            return EXIT_OK
    else:
        log.info("wrote %s", cfg.out)
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
