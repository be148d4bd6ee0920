"""``memplan`` command line.

Every verb writes machine-readable output (JSON or CSV) to ``--out`` or
standard output.  Exit status is 0 on success, 2 on usage errors and 1 on
domain errors, with ``<ErrorName>: <message>`` on standard error.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from dataclasses import asdict, fields, replace
from typing import Optional

from . import __version__
from .cost import CostModel, estimates_to_csv
from .errors import PlannerError, UnknownPreset
from .hardware import HardwareProfile, load_profile, profile_to_dict
from .layout import (MiB, chunk_size_search, compute_interval, load_plan, make_config, pack_chunks,
                     plan_to_dict, schedule_for)
from .presets import CALIBRATION_PLACEHOLDERS, HARDWARE, MODELS, NOMINAL_PARAMS, get_hardware, get_model
from .search import evaluate_candidates, find_optimal, sample_feasible
from .sim import simulate, validate
from .trace import CalibrationConstants, ModelSpec, load_trace, save_trace, synthesize_trace

PRESET_DIR_ENV = "MEMPLAN_PRESET_DIR"


def _emit(text: str, path: Optional[str]) -> None:
    if not text.endswith("\n"):
        text += "\n"
    if path is None or path == "-":
        sys.stdout.write(text)
    else:
        with open(path, "w") as fh:
            fh.write(text)


def _dump(obj) -> str:
    return json.dumps(obj, indent=2, sort_keys=True)


# -- shared loaders ------------------------------------------------------------------

def _resolve_hw(args) -> HardwareProfile:
    name = args.hw
    if os.path.isfile(name):
        with open(name) as fh:
            hw = load_profile(fh)
    else:
        try:
            hw = get_hardware(name)
        except UnknownPreset:
            preset_dir = os.environ.get(PRESET_DIR_ENV)
            candidate = os.path.join(preset_dir, f"{name}.json") if preset_dir else None
            if not candidate or not os.path.isfile(candidate):
                raise
            with open(candidate) as fh:
                hw = load_profile(fh)
    overrides = {f.name: getattr(args, f.name, None) for f in fields(HardwareProfile)}
    return hw.with_overrides(**overrides)


def _load_trace(path: str):
    with open(path) as fh:
        return load_trace(fh)


def _layout(trace, args, s_chunk: Optional[int] = None):
    if s_chunk is not None:
        return pack_chunks(trace, s_chunk)
    if getattr(args, "s_chunk", None):
        return pack_chunks(trace, args.s_chunk)
    return chunk_size_search(trace, _grid(getattr(args, "grid", None)))[1]


def _grid(text: Optional[str]):
    if not text:
        return None
    try:
        return [int(float(x) * MiB) for x in text.split(",") if x.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"bad grid {text!r}") from None


def _config_from_args(trace, layout, hw, args):
    if args.plan:
        with open(args.plan) as fh:
            cfg = load_plan(fh)
        if cfg.s_chunk != layout.s_chunk:
            layout = pack_chunks(trace, cfg.s_chunk)
        return cfg, layout
    missing = [k for k in ("n_persist", "n_buffer") if getattr(args, k) is None]
    if missing:
        raise argparse.ArgumentTypeError("either --plan or --n-persist/--n-buffer is required")
    k = args.n_interval or compute_interval(trace, hw)
    return make_config(layout, trace, k, args.n_persist, args.n_buffer, args.n_swap, args.n_checkpoint), layout


def _range(text: Optional[str]):
    if text is None:
        return None
    lo, _, hi = text.partition(":")
    lo = int(lo)
    return range(lo, (int(hi) if hi else lo) + 1)


# -- verbs ---------------------------------------------------------------------------

def cmd_gen_trace(args) -> None:
    if args.spec_file:
        with open(args.spec_file) as fh:
            spec = ModelSpec(**json.load(fh))
        name = os.path.splitext(os.path.basename(args.spec_file))[0]
    else:
        spec, name = get_model(args.model), args.model
    spec = replace(spec, batch_size=args.batch, **({"seq_len": args.seq_len} if args.seq_len else {}))
    calib = CalibrationConstants(**{k: v for k, v in (("flops_per_s", args.flops_per_s),
                                                      ("act_coeff", args.act_coeff),
                                                      ("temp_frac", args.temp_frac)) if v is not None})
    _emit(save_trace(synthesize_trace(spec, calib, name=name)), args.out)


def cmd_pack(args) -> None:
    trace = _load_trace(args.trace)
    layout = _layout(trace, args)
    doc = plan_to_dict(make_config(layout, trace, 1, layout.n_chunk, 0), layout)
    out = {"s_chunk": layout.s_chunk, "n_chunk": layout.n_chunk, "waste_bytes": layout.waste_bytes,
           "chunks": doc["chunks"]}
    _emit(_dump(out), args.out)


def cmd_plan(args) -> None:
    trace = _load_trace(args.trace)
    hw = _resolve_hw(args)
    layout = _layout(trace, args)
    outcome = find_optimal(trace, layout, hw)
    doc = outcome.to_dict()
    doc.update(plan_to_dict(outcome.best, None, schedule_for(outcome.best)))
    if not args.frontier:
        doc.pop("frontier")
    _emit(_dump(doc), args.out)


def cmd_estimate(args) -> None:
    trace = _load_trace(args.trace)
    hw = _resolve_hw(args)
    cfg, layout = _config_from_args(trace, _layout(trace, args), hw, args)
    est = CostModel(trace, layout, hw, args.alpha).estimate(cfg)
    if args.csv:
        _emit(estimates_to_csv([(cfg, est)]), args.out)
    else:
        _emit(_dump({"config": asdict(cfg), "estimate": est.to_dict()}), args.out)


def cmd_simulate(args) -> None:
    trace = _load_trace(args.trace)
    hw = _resolve_hw(args)
    cfg, layout = _config_from_args(trace, _layout(trace, args), hw, args)
    res = simulate(trace, layout, None, cfg, hw)
    if args.events:
        _emit(res.timeline_csv(), args.events)
    if args.chrome:
        _emit(res.chrome_trace(), args.chrome)
    if args.mem_trace:
        _emit(res.mem_trace_csv(), args.mem_trace)
    _emit(_dump({"config": asdict(cfg), "result": res.summary()}), args.out)


def cmd_validate(args) -> None:
    trace = _load_trace(args.trace)
    hw = _resolve_hw(args)
    layout = _layout(trace, args)
    if args.plan:
        configs = [_config_from_args(trace, layout, hw, args)[0]]
    else:
        configs = sample_feasible(trace, layout, hw, args.n_samples, args.seed)
        if not configs:
            from .errors import NoFeasibleConfig
            raise NoFeasibleConfig("no candidate configuration fits in GPU memory")
    _emit(validate(trace, layout, hw, configs).to_csv(), args.out)


def cmd_sweep(args) -> None:
    trace = _load_trace(args.trace)
    hw = _resolve_hw(args)
    layout = _layout(trace, args)
    rows = evaluate_candidates(trace, layout, hw, feasible_only=args.feasible_only)
    filters = {k: _range(getattr(args, k)) for k in ("n_persist", "n_buffer", "n_swap", "n_checkpoint")}
    rows = [(c, e) for c, e in rows if all(r is None or getattr(c, k) in r for k, r in filters.items())]
    _emit(estimates_to_csv(rows), args.out)


def cmd_list_presets(args) -> None:
    doc = {}
    if args.kind in ("all", "models"):
        doc["models"] = {k: dict(asdict(v), nominal_params=NOMINAL_PARAMS.get(k),
                                 param_count=v.param_count()) for k, v in sorted(MODELS.items())}
    if args.kind in ("all", "hardware"):
        doc["hardware"] = {k: profile_to_dict(v) for k, v in sorted(HARDWARE.items())}
        doc["calibration_placeholders"] = list(CALIBRATION_PLACEHOLDERS)
    _emit(_dump(doc), args.out)


# -- parser --------------------------------------------------------------------------

def _add_hw(p) -> None:
    p.add_argument("--hw", required=True, help="hardware preset name or profile JSON path")
    for f in fields(HardwareProfile):
        kind = int if f.name == "world_size" else float
        p.add_argument(f"--{f.name.replace('_', '-')}", dest=f.name, type=kind, default=None,
                       help=f"override {f.name}")


def _add_layout(p) -> None:
    p.add_argument("--s-chunk", type=int, default=None, help="fixed chunk size in bytes (skips the grid search)")
    p.add_argument("--grid", default=None, help="comma-separated chunk sizes in MiB")


def _add_config(p) -> None:
    p.add_argument("--plan", default=None, help="plan JSON (output of 'plan')")
    p.add_argument("--n-persist", type=int, default=None)
    p.add_argument("--n-buffer", type=int, default=None)
    p.add_argument("--n-swap", type=int, default=0)
    p.add_argument("--n-checkpoint", type=int, default=0)
    p.add_argument("--n-interval", type=int, default=None)


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="memplan", description=__doc__.splitlines()[0])
    ap.add_argument("--version", action="version", version=f"memplan {__version__}")
    sub = ap.add_subparsers(dest="verb", required=True)

    p = sub.add_parser("gen-trace", help="synthesize an operator trace")
    src = p.add_mutually_exclusive_group(required=True)
    src.add_argument("--model", help="model preset name")
    src.add_argument("--spec-file", help="JSON ModelSpec")
    p.add_argument("--batch", type=int, required=True)
    p.add_argument("--seq-len", type=int, default=None)
    p.add_argument("--flops-per-s", type=float, default=None)
    p.add_argument("--act-coeff", type=float, default=None)
    p.add_argument("--temp-frac", type=float, default=None)
    p.add_argument("--out", default=None)
    p.set_defaults(func=cmd_gen_trace)

    p = sub.add_parser("pack", help="chunk-size search and packing")
    p.add_argument("--trace", required=True)
    _add_layout(p)
    p.add_argument("--out", default=None)
    p.set_defaults(func=cmd_pack)

    p = sub.add_parser("plan", help="search the optimal configuration")
    p.add_argument("--trace", required=True)
    _add_hw(p)
    _add_layout(p)
    p.add_argument("--frontier", action="store_true", help="include the memory/runtime frontier")
    p.add_argument("--out", default=None)
    p.set_defaults(func=cmd_plan)

    p = sub.add_parser("estimate", help="analytic cost of one configuration")
    p.add_argument("--trace", required=True)
    _add_hw(p)
    _add_layout(p)
    _add_config(p)
    p.add_argument("--alpha", type=float, default=1.05, help="fragmentation factor")
    p.add_argument("--csv", action="store_true", help="one CSV row instead of JSON")
    p.add_argument("--out", default=None)
    p.set_defaults(func=cmd_estimate)

    p = sub.add_parser("simulate", help="discrete-event simulation of one configuration")
    p.add_argument("--trace", required=True)
    _add_hw(p)
    _add_layout(p)
    _add_config(p)
    p.add_argument("--events", default=None, help="event log CSV path")
    p.add_argument("--chrome", default=None, help="Chrome trace JSON path")
    p.add_argument("--mem-trace", default=None, help="memory trace CSV path")
    p.add_argument("--out", default=None)
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("validate", help="estimate-vs-simulation error table")
    p.add_argument("--trace", required=True)
    _add_hw(p)
    _add_layout(p)
    _add_config(p)
    p.add_argument("--n-samples", type=int, default=50)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", default=None)
    p.set_defaults(func=cmd_validate)

    p = sub.add_parser("sweep", help="CSV of every candidate's estimate")
    p.add_argument("--trace", required=True)
    _add_hw(p)
    _add_layout(p)
    for k in ("n-persist", "n-buffer", "n-swap", "n-checkpoint"):
        p.add_argument(f"--{k}", default=None, metavar="LO[:HI]", help="restrict to an inclusive range")
    p.add_argument("--feasible-only", action="store_true")
    p.add_argument("--out", default=None)
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("list-presets", help="model and hardware presets")
    p.add_argument("--kind", choices=("all", "models", "hardware"), default="all")
    p.add_argument("--out", default=None)
    p.set_defaults(func=cmd_list_presets)
    return ap


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        args.func(args)
    except argparse.ArgumentTypeError as exc:
        parser.print_usage(sys.stderr)
        print(f"memplan: error: {exc}", file=sys.stderr)
        return 2
    except PlannerError as exc:
        print(f"{type(exc).__name__}: {exc}", file=sys.stderr)
        return 1
    except (OSError, ValueError) as exc:
        print(f"{type(exc).__name__}: {exc}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
