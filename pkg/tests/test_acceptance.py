"""Acceptance criteria.  Each test prints one ``[PASS]``/``[FAIL]`` line with the
measured numbers, then asserts at the stated tolerance."""

import random
import time
from dataclasses import replace

import pytest

from memplan.cost import estimate_iteration, estimate_peak_memory
from memplan.layout import PlanConfig, build_block_schedule, chunk_size_search, pack_chunks
from memplan.presets import MODELS, NOMINAL_PARAMS, get_hardware, get_model
from memplan.search import brute_force_optimal, find_optimal, sample_feasible
from memplan.sim import simulate, validate
from memplan.trace import ModelTrace, synthesize_trace

from conftest import make_op, random_trace
from oracles import ledger_peak, small_instance
from test_cost import check_monotonicity

pytestmark = pytest.mark.acceptance


def report(capsys, n, title, ok, detail):
    with capsys.disabled():
        print(f"\n[{'PASS' if ok else 'FAIL'}] criterion {n}: {title}: {detail}")
    assert ok, detail


def preset_trace(name, batch):
    trace = synthesize_trace(replace(get_model(name), batch_size=batch), name=name)
    return trace, chunk_size_search(trace)[1]


@pytest.fixture(scope="module")
def fidelity():
    trace, layout = preset_trace("gpt2-10b", 16)
    hw = get_hardware("rtx3090x4")
    t0 = time.perf_counter()
    rep = validate(trace, layout, hw, sample_feasible(trace, layout, hw, 50, seed=0))
    return rep, time.perf_counter() - t0


def test_1_runtime_fidelity(capsys, fidelity):
    rep, dt = fidelity
    ok = len(rep.ok_rows) == 50 and rep.max_runtime_error <= 0.10 and rep.median_runtime_error <= 0.05
    report(capsys, 1, "runtime estimate vs simulation (gpt2-10b, rtx3090x4, 50 configs)", ok,
           f"{len(rep.ok_rows)}/50 simulated, max err {rep.max_runtime_error:.2%}, "
           f"median {rep.median_runtime_error:.2%}, {dt:.1f} s")


def test_2_memory_fidelity(capsys, fidelity):
    rep, _ = fidelity
    ratios = [r["est_m_peak"] / r["sim_m_peak"] for r in rep.ok_rows]
    ok = len(ratios) == 50 and min(ratios) >= 1.0 and max(ratios) <= 1.10
    report(capsys, 2, "peak-memory estimate vs simulation", ok,
           f"est/sim ratio in [{min(ratios):.4f}, {max(ratios):.4f}]")


def test_3_search_matches_brute_force(capsys):
    rng = random.Random(0)
    bad, n_cfgs = [], 0
    for i in range(20):
        trace, layout, hw = small_instance(rng)
        ref = brute_force_optimal(trace, layout, hw)
        out = find_optimal(trace, layout, hw)
        n_cfgs += out.n_evaluated + out.n_pruned
        if out.estimate.t_iter != ref[1].t_iter or out.best != ref[0]:
            bad.append(i)
    report(capsys, 3, "search optimum equals brute-force argmin (20 instances)", not bad,
           f"{20 - len(bad)}/20 identical over {n_cfgs} candidates; mismatches {bad}")


def test_4a_generous_memory_pattern(capsys):
    trace, layout = preset_trace("gpt2-1b", 8)
    out = find_optimal(trace, layout, get_hardware("a100x4"))
    b = out.best
    ok = b.n_checkpoint == 0 and b.n_swap == 0 and b.n_persist == layout.n_chunk
    report(capsys, "4a", "gpt2-1b on a100x4 keeps everything on GPU", ok,
           f"n_persist={b.n_persist}/{layout.n_chunk} n_buffer={b.n_buffer} n_swap={b.n_swap} "
           f"n_checkpoint={b.n_checkpoint}")


def test_4b_tight_memory_pattern(capsys):
    trace, layout = preset_trace("gpt2-10b", 32)
    out = find_optimal(trace, layout, get_hardware("rtx3090x4"))
    b = out.best
    ok = b.n_checkpoint == trace.n_blocks and b.n_swap == 0 and b.n_persist <= layout.n_chunk // 4
    report(capsys, "4b", "gpt2-10b on rtx3090x4 checkpoints every block", ok,
           f"n_persist={b.n_persist}/{layout.n_chunk} n_buffer={b.n_buffer} n_swap={b.n_swap} "
           f"n_checkpoint={b.n_checkpoint}/{trace.n_blocks}")


def test_5_peak_memory_ledger(capsys):
    rng = random.Random(0)
    done, bad = 0, 0
    while done < 100:
        t = random_trace(rng, n_ops=rng.randint(5, 20))
        k = rng.randint(1, 3)
        ns = rng.randint(0, (t.n_blocks - 1) // (k + 1) + 1)
        nc = rng.randint(0, t.n_blocks - ns)
        try:
            sched = build_block_schedule(t.n_blocks, ns, nc, k)
        except Exception:
            continue
        cfg = PlanConfig(1, 1, 1, 0, t.n_blocks, k, ns, nc)
        bad += estimate_peak_memory(t, sched, cfg, raw=True) != ledger_peak(t, sched)
        done += 1
    report(capsys, 5, "pre-alpha peak equals allocation-ledger replay (100 traces)", bad == 0,
           f"{100 - bad}/100 exact")


def test_6_monotonicity(capsys):
    violations = check_monotonicity(200, seed=0)
    report(capsys, 6, "monotonicity properties (200 pairs)", not violations,
           f"{len(violations)} violations {violations[:3]}")


def test_7_chunk_size_search(capsys):
    rng = random.Random(0)
    bad = 0
    for _ in range(50):
        sizes = [rng.randint(1, 1000) for _ in range(rng.randint(1, 30))]
        ops = [make_op(i, i, params=p, act=1) for i, p in enumerate(sizes)]
        t = ModelTrace(ops, 0, len(sizes))
        grid = sorted(rng.sample(range(max(sizes), 4 * max(sizes) + 2), 6))
        _, layout = chunk_size_search(t, grid)
        bad += layout.waste_bytes != min(pack_chunks(t, g).waste_bytes for g in grid)
    report(capsys, 7, "chunk-size search waste equals grid minimum (50 lists)", bad == 0, f"{50 - bad}/50 exact")


def test_8_simulator_determinism_and_conservation(capsys):
    trace, layout = preset_trace("gpt2-10b", 16)
    problems, n = [], 0
    for hw_name in ("rtx3090x4", "a100x4"):
        hw = get_hardware(hw_name)
        bws = {"h2d": hw.h2d_bw, "d2h": hw.d2h_bw, "coll": hw.coll_bw}
        for cfg in sample_feasible(trace, layout, hw, 5, seed=0):
            a, b = simulate(trace, layout, None, cfg, hw), simulate(trace, layout, None, cfg, hw)
            n += 1
            if (a.timeline_csv(), a.mem_trace_csv(), a.chrome_trace()) != \
               (b.timeline_csv(), b.mem_trace_csv(), b.chrome_trace()):
                problems.append(("nondeterministic", cfg.key))
            util = max((moved / (bws[name] * (t1 - t0) / 1e9)
                        for name, segs in a.link_segments.items() for t0, t1, _, moved in segs if t1 > t0),
                       default=0.0)
            if util > 1 + 1e-9:
                problems.append(("utilization", util))
            if a.final_allocated != a.initial_allocated:
                problems.append(("ledger", a.final_allocated - a.initial_allocated))
    report(capsys, 8, f"simulator determinism, link utilization, ledger conservation ({n} runs)",
           not problems, f"{len(problems)} problems {problems[:3]}")


def test_9_preset_sizes(capsys):
    errs = {m: get_model(m).param_count() / NOMINAL_PARAMS[m] - 1 for m in NOMINAL_PARAMS}
    worst = max(errs, key=lambda m: abs(errs[m]))
    ok = len(errs) >= 8 and all(abs(e) <= 0.10 for e in errs.values())
    report(capsys, 9, f"preset parameter totals within 10% ({len(errs)} models)", ok,
           f"worst {worst} {errs[worst]:+.2%}")


@pytest.mark.parametrize("hw_name", ["rtx3090x4", "a100x4"])
def test_10_search_cost(capsys, hw_name):
    trace, layout = preset_trace("gpt2-10b", 16)
    hw = get_hardware(hw_name)
    t0 = time.perf_counter()
    out = find_optimal(trace, layout, hw)
    dt = time.perf_counter() - t0
    report(capsys, 10, f"search time on gpt2-10b ({hw_name})", dt < 5.0,
           f"{dt:.3f} s for {out.n_evaluated + out.n_pruned} candidates")
