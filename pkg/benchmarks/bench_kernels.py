"""Compare the compiled and pure-Python cost kernels on a realistic search workload.

    python benchmarks/bench_kernels.py [--model gpt2-10b] [--hw rtx3090x4] [--batch 16] [--repeat 3]

Both backends are fed identical inputs taken from the search over every
candidate schedule; the script also checks their outputs are bit-identical.
"""

import argparse
import time
from dataclasses import replace

import numpy as np

from memplan import _kernels_py
from memplan.cost import CostModel
from memplan.layout import build_block_schedule, chunk_size_search, compute_interval, schedule_feasible
from memplan.presets import get_hardware, get_model
from memplan.search import buffer_floor, swap_limit
from memplan.trace import synthesize_trace

try:
    from memplan import _kernels as _kernels_c
except ImportError:
    _kernels_c = None


def workload(model_name, hw_name, batch):
    hw = get_hardware(hw_name)
    trace = synthesize_trace(replace(get_model(model_name), batch_size=batch), name=model_name)
    layout = chunk_size_search(trace)[1]
    k = compute_interval(trace, hw)
    model = CostModel(trace, layout, hw)
    n, nb = layout.n_chunk, trace.n_blocks
    pairs = [(p, b) for p in range(n + 1) for b in range(buffer_floor(n, p), n - p + 1)]
    ps = np.array([p for p, _ in pairs], dtype=np.int64)
    bs = np.array([b for _, b in pairs], dtype=np.int64)
    sweeps, replays = [], []
    for ns in range(swap_limit(trace, hw, k) + 1):
        for nc in range(nb - ns + 1):
            if not schedule_feasible(nb, ns, nc, k):
                continue
            sched = build_block_schedule(nb, ns, nc, k)
            pref_f, pref_b, recomp, _ = model.schedule_terms(sched, k)
            sweeps.append((model.comp_f, pref_f, model.comp_b, recomp, pref_b, model.red, model.off, ps, bs))
            opt, bump, cur0 = model.memory_inputs(sched.strategies)
            replays.append((model.dcp, model.dpp, model.dco, model.dpo, model.act, opt, bump, cur0))
    return sweeps, replays


def run(backend, sweeps, replays):
    t0 = time.perf_counter()
    times = [backend.sweep_times(*args) for args in sweeps]
    t1 = time.perf_counter()
    peaks = [backend.replay_peak(*args) for args in replays]
    t2 = time.perf_counter()
    return t1 - t0, t2 - t1, times, peaks


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--model", default="gpt2-10b")
    ap.add_argument("--hw", default="rtx3090x4")
    ap.add_argument("--batch", type=int, default=16)
    ap.add_argument("--repeat", type=int, default=3)
    args = ap.parse_args()

    sweeps, replays = workload(args.model, args.hw, args.batch)
    n_eval = sum(len(s[-1]) for s in sweeps)
    print(f"workload: {len(sweeps)} block schedules, {n_eval} runtime evaluations, {len(replays)} memory replays")

    backends = [("python", _kernels_py)] + ([("cython", _kernels_c)] if _kernels_c else [])
    results = {}
    for name, mod in backends:
        best = None
        for _ in range(args.repeat):
            out = run(mod, sweeps, replays)
            best = out if best is None or out[0] + out[1] < best[0] + best[1] else best
        results[name] = best
        print(f"{name:>7}: sweep {best[0] * 1e3:9.2f} ms   replay {best[1] * 1e3:9.2f} ms")

    if "cython" in results:
        py, cy = results["python"], results["cython"]
        same = all(np.array_equal(np.asarray(a[0]), b[0]) and np.array_equal(np.asarray(a[1]), b[1])
                   for a, b in zip(py[2], cy[2])) and py[3] == cy[3]
        print(f"speedup: sweep {py[0] / cy[0]:.1f}x   replay {py[1] / cy[1]:.1f}x   bit-identical: {same}")
    else:
        print("compiled extension not built; only the Python backend was timed")


if __name__ == "__main__":
    main()
