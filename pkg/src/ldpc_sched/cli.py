"""Command line entry point: ``ldpc-sched <subcommand>``.

CSV layouts (fixed column order):
  simulate    schedule_name,avg_nmp,reduction_ratio,ber,bler,trials
  trajectory  schedule_name,nmp,ber,bler   (<out>.mc.csv)
              schedule_name,nmp,ae,gap     (<out>.de.csv)
  de-curve    schedule_name,nmp,ae,gap
  optimize    round,tau,accepted           (trace; schedule goes to --out)
"""

from __future__ import annotations

import argparse
import sys
from dataclasses import replace
from pathlib import Path


from .channel import channel_densities
from .de import TauConfig, TauEvaluator, write_de_curve
from .decoder import ScheduleError, ScheduleSequence
from .density import GridSpec
from .graph import GraphFormatError, load_code
from .sim import ConfigError, ExperimentConfig, run_average_nmp, run_trajectory
from .ssbp import POLICIES, SsbpConfig, policy_schedule, ssbp

EXIT_USAGE = 2
EXIT_INVALID = 1
EXIT_IO = 3

# flag dest -> config key
_CONFIG_FLAGS = ("code", "ebn0_db", "rate", "schedule", "mode", "iterations", "trials",
                 "seed", "out", "stop_check", "punctured")


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: usage error: {message}\n")


def _common(p: argparse.ArgumentParser, schedule_help: str):
    p.add_argument("--config", help="JSON file with keys code, ebn0_db, rate, schedule, mode, "
                                    "iterations, trials, seed, out (flags override it)")
    p.add_argument("--code", help="parity-check matrix: .alist, or .qc base matrix")
    p.add_argument("--ebn0-db", dest="ebn0_db", type=float)
    p.add_argument("--rate", type=float, help="code rate override (default: design rate)")
    p.add_argument("--schedule", help=schedule_help)
    p.add_argument("--mode", choices=["serial", "flooding"])
    p.add_argument("--iterations", type=int)
    p.add_argument("--trials", type=int)
    p.add_argument("--seed", type=int)
    p.add_argument("--out")
    p.add_argument("--stop-check", dest="stop_check", choices=["step", "iteration"],
                   help="syndrome check after every check step or after every iteration")
    p.add_argument("--punctured", type=lambda s: tuple(int(x) for x in s.split(",") if x),
                   help="comma-separated punctured variable indices")


def _grid_flags(p):
    p.add_argument("--bins", type=int, default=4096, help="density lattice bins (even)")
    p.add_argument("--l-max", dest="l_max", type=float, default=30.0)


def build_parser() -> argparse.ArgumentParser:
    policies = ", ".join(sorted(POLICIES))
    sched_help = f"schedule file or policy ({policies}); comma-separated for several"
    p = _Parser(prog="ldpc-sched", description=__doc__,
                formatter_class=argparse.RawDescriptionHelpFormatter)
    sub = p.add_subparsers(dest="command", parser_class=_Parser, metavar="command")
    sub.required = True

    info = sub.add_parser("info", help="print code size and degree histograms")
    info.add_argument("code")
    info.add_argument("--punctured", type=lambda s: tuple(int(x) for x in s.split(",") if x),
                      default=())

    opt = sub.add_parser("optimize", help="search a low-tau schedule and write it to --out")
    _common(opt, "initial schedule (file or policy, default row)")
    _grid_flags(opt)
    opt.set_defaults(bins=256)
    opt.add_argument("--b", type=int, default=100, help="candidates per round")
    opt.add_argument("--big-s", dest="big_s", type=int, default=10, help="failure limit")
    opt.add_argument("--h", type=int, default=None, help="swaps per candidate")
    opt.add_argument("--metric", choices=["AE", "GAP"], default="AE")
    opt.add_argument("--max-evaluations", dest="max_evaluations", type=int)
    opt.add_argument("--reset-on-success", dest="reset_on_success", action="store_true")
    opt.add_argument("--trace", help="trace CSV path (default <out>.trace.csv)")
    opt.add_argument("--verbose", action="store_true")

    sim = sub.add_parser("simulate", help="paired Monte Carlo average NMP, BER, BLER")
    _common(sim, sched_help)
    sim.add_argument("--no-baseline", dest="no_baseline", action="store_true",
                     help="do not add the row-order baseline")
    sim.add_argument("--json", help="also write the report as JSON")

    tr = sub.add_parser("trajectory", help="per-step BER/BLER and DE AE/GAP curves")
    _common(tr, sched_help)
    _grid_flags(tr)

    dc = sub.add_parser("de-curve", help="AE/GAP curve and tau of schedules (no Monte Carlo)")
    _common(dc, sched_help)
    _grid_flags(dc)
    return p


def _resolve_config(args) -> ExperimentConfig:
    cfg = ExperimentConfig.from_file(args.config) if args.config else ExperimentConfig()
    over = {k: getattr(args, k) for k in _CONFIG_FLAGS if getattr(args, k, None) is not None}
    return replace(cfg, **over).validate()


def _load_schedules(spec: str, graph, cfg: ExperimentConfig) -> dict[str, ScheduleSequence]:
    out = {}
    for item in [s.strip() for s in spec.split(",") if s.strip()]:
        if item in POLICIES:
            out[item] = policy_schedule(item, graph, cfg.iterations, cfg.seed)
        else:
            path = Path(item)
            if not path.is_file():
                raise ConfigError(f"schedule {item!r} is neither a policy ({', '.join(sorted(POLICIES))}) "
                                  "nor an existing file")
            sched = ScheduleSequence.load(path)
            sched.check_graph(graph)
            out[path.stem] = sched.with_iterations(cfg.iterations)
    if not out:
        raise ConfigError("empty schedule list")
    return out


def _write(path, text: str):
    if path is None:
        sys.stdout.write(text)
    else:
        Path(path).write_text(text)


def _cmd_info(args):
    g = load_code(args.code, args.punctured)
    print(f"N={g.n_vars} M={g.n_checks} E={g.n_edges}")
    for side, hist in zip(("var", "check"), g.degree_histogram()):
        items = " ".join(f"{d}:{c}" for d, c in sorted(hist.items()))
        print(f"{side} degrees {items}")
    if g.punctured:
        print(f"punctured {len(g.punctured)}")
    return 0


def _cmd_optimize(args):
    cfg = _resolve_config(args)
    if cfg.out is None:
        raise ConfigError("optimize needs --out for the schedule file")
    g = cfg.load_graph()
    init = next(iter(_load_schedules(cfg.schedule, g, cfg).values()))
    grid = GridSpec(args.l_max, args.bins)
    conf = SsbpConfig(b=args.b, big_s=args.big_s, h=args.h, iterations=cfg.iterations,
                      metric=args.metric, seed=cfg.seed, reset_on_success=args.reset_on_success,
                      max_evaluations=args.max_evaluations)
    log = (lambda s: print(s, file=sys.stderr)) if args.verbose else None
    best, trace = ssbp(g, channel_densities(cfg.channel(g), g, grid), init, conf, log)
    best.save(cfg.out)
    trace.save(args.trace or f"{cfg.out}.trace.csv")
    print(f"tau {trace.taus[0]:.9g} -> {trace.taus[-1]:.9g} after {len(trace) - 1} rounds, "
          f"{trace.evaluations} evaluations ({trace.stop_reason})")
    return 0


def _cmd_simulate(args):
    cfg = _resolve_config(args)
    g = cfg.load_graph()
    scheds = _load_schedules(cfg.schedule, g, cfg)
    if not args.no_baseline and "row" not in scheds:
        scheds = {"row": policy_schedule("row", g, cfg.iterations), **scheds}
    rep = run_average_nmp(cfg, scheds, g, baseline=None if args.no_baseline else "row")
    _write(cfg.out, rep.to_csv())
    if args.json:
        Path(args.json).write_text(rep.to_json())
    return 0


def _cmd_trajectory(args):
    cfg = _resolve_config(args)
    g = cfg.load_graph()
    scheds = _load_schedules(cfg.schedule, g, cfg)
    rep = run_trajectory(cfg, scheds, g, GridSpec(args.l_max, args.bins))
    if cfg.out is None:
        sys.stdout.write(rep.mc_csv())
        sys.stdout.write(rep.de_csv())
    else:
        Path(f"{cfg.out}.mc.csv").write_text(rep.mc_csv())
        Path(f"{cfg.out}.de.csv").write_text(rep.de_csv())
    return 0


def _cmd_de_curve(args):
    cfg = _resolve_config(args)
    g = cfg.load_graph()
    scheds = _load_schedules(cfg.schedule, g, cfg)
    dens = channel_densities(cfg.channel(g), g, GridSpec(args.l_max, args.bins))
    curves = {}
    for name, s in scheds.items():
        ev = TauEvaluator(g, dens, TauConfig(iterations=cfg.iterations))
        curves[name] = ev.curve(s)
        d2 = 2 * g.check_degrees()[s.full_sequence()]
        c = curves[name]
        print(f"{name}: tau_AE={float(d2 @ c[1:, 1]):.9g} tau_GAP={float(d2 @ c[1:, 2]):.9g}",
              file=sys.stderr)
    if cfg.out is None:
        lines = ["schedule_name,nmp,ae,gap"]
        for name, c in curves.items():
            lines += [f"{name},{int(r[0])},{r[1]:.12e},{r[2]:.12e}" for r in c]
        sys.stdout.write("\n".join(lines) + "\n")
    else:
        write_de_curve(cfg.out, curves)
    return 0


_COMMANDS = {"info": _cmd_info, "optimize": _cmd_optimize, "simulate": _cmd_simulate,
             "trajectory": _cmd_trajectory, "de-curve": _cmd_de_curve}


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return _COMMANDS[args.command](args)
    except (ConfigError, GraphFormatError, ScheduleError, ValueError) as exc:
        print(f"ldpc-sched: invalid input: {exc}", file=sys.stderr)
        return EXIT_INVALID
    except OSError as exc:
        print(f"ldpc-sched: cannot access {exc.filename}: {exc.strerror}", file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
