"""``socialnav`` command line: run, bench, ablate, sweep, gen, snapshot."""

from __future__ import annotations

import argparse
import json
import logging
import sys
from dataclasses import fields, replace
from importlib import resources
from pathlib import Path

from . import artifacts
from .config import ABLATIONS, RunConfig, load_config
from .runner import SWEEP_PARAMS, run_ablation, run_bench, run_episode, run_sweep
from .scenegen import GenerationError, GenParams, generate_suite
from .sim import ScenarioError, load_scenario

EXIT_USAGE = 2
EXIT_INVALID = 1

log = logging.getLogger("socnavmap")


def bundled_suite() -> Path:
    return Path(str(resources.files("socnavmap") / "data" / "suite"))


def _add_config_flags(p: argparse.ArgumentParser) -> None:
    g = p.add_argument_group("run configuration (override the config file)")
    g.add_argument("--config", help="TOML or JSON file with RunConfig fields")
    for f in fields(RunConfig):
        flag = "--" + f.name.replace("_", "-")
        if f.type in ("bool", bool):
            g.add_argument(flag, dest=f.name, action="store_const", const=True, default=None)
        else:
            kind = {"int": int, "float": float, "str": str}[f.type if isinstance(f.type, str) else f.type.__name__]
            g.add_argument(flag, dest=f.name, type=kind, default=None)
    g.add_argument("--ablate", action="append", default=[], choices=ABLATIONS, help="disable one component (repeatable)")
    p.add_argument("--trace", action="store_true", help="write planner and prediction JSONL traces")
    p.add_argument("--snapshot-every", type=int, default=0, metavar="N", help="map snapshot every N steps")
    p.add_argument("--run-id", default=None, help="output sub-directory name")


def resolve_config(args) -> RunConfig:
    cfg = load_config(args.config) if getattr(args, "config", None) else RunConfig()
    changes = {f.name: getattr(args, f.name) for f in fields(RunConfig) if getattr(args, f.name, None) is not None}
    for flag in getattr(args, "ablate", []):
        changes[flag] = True
    return replace(cfg, **changes)


def _run_dir(cfg: RunConfig, args, default: str) -> Path:
    return cfg.out_dir / (args.run_id or default)


def cmd_run(args) -> int:
    cfg = resolve_config(args)
    spec = load_scenario(args.scenario)
    out = _run_dir(cfg, args, f"run_{Path(args.scenario).stem}_s{cfg.seed}")
    spec = replace(spec, seed=cfg.seed ^ spec.seed)
    outcome = run_episode(spec, cfg, out / "episodes" / "ep0", 0, args.trace, args.snapshot_every)
    artifacts.write_json(out / "config.json", cfg.to_dict())
    r = outcome.result
    print(
        f"{spec.name}: success={r.success} steps={r.total_steps} path={r.path_length:.2f}m "
        f"shortest={r.shortest_path:.2f}m collided={r.collided} psc={r.psc:.3f} ({outcome.reason})"
    )
    print(f"results in {out}")
    return 0


def _suite(args) -> Path:
    return Path(args.suite) if args.suite else bundled_suite()


def cmd_bench(args) -> int:
    cfg = resolve_config(args)
    out = _run_dir(cfg, args, f"bench_s{cfg.seed}")
    report = run_bench(_suite(args), cfg, out, args.trace, args.snapshot_every)
    print(report.table())
    for e in report.errors:
        print(f"errored: {e['id']}: {e['error']}", file=sys.stderr)
    print(f"report in {out}")
    return 0


def cmd_ablate(args) -> int:
    cfg = resolve_config(args)
    out = _run_dir(cfg, args, f"ablate_s{cfg.seed}")
    rows = run_ablation(_suite(args), cfg, out, trace=args.trace, snapshot_every=args.snapshot_every)
    print(artifacts.format_table(rows, "variant"))
    print(f"table in {out / 'ablation.csv'}")
    return 0


def cmd_sweep(args) -> int:
    cfg = resolve_config(args)
    out = _run_dir(cfg, args, f"sweep_{args.param}_s{cfg.seed}")
    rows = run_sweep(_suite(args), args.param, args.values, cfg, out, trace=args.trace, snapshot_every=args.snapshot_every)
    print(artifacts.format_table(rows, args.param))
    print(f"table in {out / 'sweep.csv'}")
    return 0


def cmd_gen(args) -> int:
    params = GenParams(
        rooms=tuple(args.rooms),
        corridor_width=tuple(args.corridor_width),
        humans=tuple(args.humans),
        retries=args.retries,
    )
    paths = generate_suite(args.out_dir, args.count, args.seed, params)
    print(f"wrote {len(paths)} scenarios to {args.out_dir}")
    return 0


def cmd_snapshot(args) -> int:
    cfg = resolve_config(args)
    spec = load_scenario(args.scenario)
    out = _run_dir(cfg, args, f"snapshot_{Path(args.scenario).stem}_s{cfg.seed}")
    spec = replace(spec, seed=cfg.seed ^ spec.seed)
    ep = out / "episodes" / "ep0"
    run_episode(spec, cfg, ep, 0, args.trace, args.every)
    snaps = sorted((ep / "snapshots").glob("*.pgm"))
    if args.format == "png":
        for s in snaps:
            artifacts.write_png(s.with_suffix(".png"), artifacts.read_pgm(s))
    print(f"{len(snaps)} snapshot layers in {ep / 'snapshots'}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="socialnav", description="Zero-shot social navigation harness")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("run", help="run one scenario")
    p.add_argument("scenario")
    _add_config_flags(p)
    p.set_defaults(func=cmd_run)

    for name, func, help_ in (
        ("bench", cmd_bench, "run a scenario suite and aggregate metrics"),
        ("ablate", cmd_ablate, "full configuration plus each ablation"),
    ):
        p = sub.add_parser(name, help=help_)
        p.add_argument("suite", nargs="?", help="directory of scenario JSON files (default: bundled suite)")
        _add_config_flags(p)
        p.set_defaults(func=func)

    p = sub.add_parser("sweep", help="benchmark over values of one parameter")
    p.add_argument("suite", nargs="?")
    p.add_argument("--param", required=True, choices=SWEEP_PARAMS)
    p.add_argument("--values", required=True, type=float, nargs="+")
    _add_config_flags(p)
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("gen", help="generate procedural scenarios")
    p.add_argument("out_dir")
    p.add_argument("--count", type=int, default=20)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--rooms", type=int, nargs=2, default=(1, 3), metavar=("MIN", "MAX"))
    p.add_argument("--corridor-width", type=float, nargs=2, default=(1.2, 1.8), metavar=("MIN", "MAX"))
    p.add_argument("--humans", type=int, nargs=2, default=(3, 6), metavar=("MIN", "MAX"))
    p.add_argument("--retries", type=int, default=200)
    p.set_defaults(func=cmd_gen)

    p = sub.add_parser("snapshot", help="run one scenario and dump map snapshots")
    p.add_argument("scenario")
    p.add_argument("--every", type=int, default=10, help="snapshot interval in steps")
    p.add_argument("--format", choices=("pgm", "png"), default="pgm")
    _add_config_flags(p)
    p.set_defaults(func=cmd_snapshot)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except FileNotFoundError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except ScenarioError as exc:
        print(f"error: invalid scenario: {exc}", file=sys.stderr)
        return EXIT_INVALID
    except (ValueError, GenerationError, json.JSONDecodeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INVALID


if __name__ == "__main__":
    sys.exit(main())
