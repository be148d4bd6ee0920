import json
import random

import pytest

from memplan.cost import CostModel
from memplan.errors import DeadlockDetected, LedgerUnderflow
from memplan.layout import build_block_schedule, make_config, pack_chunks, schedule_for, PlanConfig
from memplan.search import sample_feasible
from memplan.sim import NS, _Ledger, _Link, _Sim, sample_configs, simulate, validate
from memplan.trace import ModelTrace

from conftest import make_op, toy_hw


def tiny():
    ops = [make_op(0, None, 1, 2, params=100, act=10),
           make_op(1, 0, 1, 2, params=100, act=20, dpp=5, dpo=7),
           make_op(2, None, 1, 2, params=100, act=30)]
    t = ModelTrace(ops, 50, 1)
    return t, pack_chunks(t, 200)


def spans(res):
    out, open_ = {}, {}
    for t, r, ev, subj in res.timeline:
        if ev == "start":
            open_[subj] = t
        elif ev == "end":
            out[subj] = (open_.pop(subj) / NS, t / NS)
    return out


def test_link_processor_sharing():
    link = _Link("x", 100.0)
    link.start("a", 100, 0)
    link.start("b", 100, 0)
    assert link.next_done() == 2 * NS
    assert link.pop_finished(2 * NS) == ["a", "b"]
    # staggered: a runs alone for 0.5 s, then both share until a ends at 1.5 s
    link = _Link("y", 100.0)
    link.start("a", 100, 0)
    link.advance(NS // 2)
    link.start("b", 100, NS // 2)
    assert link.next_done() == 3 * NS // 2
    assert link.pop_finished(3 * NS // 2) == ["a"]
    assert link.next_done() == 2 * NS
    link.pop_finished(2 * NS)
    for _, t0, t1, n, moved in [(None, *s) for s in link.segments]:
        assert moved <= 100.0 * (t1 - t0) / NS + 1e-6


def test_ledger_underflow():
    led = _Ledger()
    led.alloc(0, "a", 10)
    with pytest.raises(LedgerUnderflow):
        led.free(1, "a", 11)
    with pytest.raises(LedgerUnderflow):
        led.free(1, "missing", 1)
    with pytest.raises(LedgerUnderflow):
        led.adjust(1, -100)


def test_all_persistent_single_rank_is_exact():
    t, layout = tiny()
    hw = toy_hw()
    cfg = make_config(layout, t, 1, layout.n_chunk, 0)
    res = simulate(t, layout, None, cfg, hw)
    # serial GPU: forward, backward, then the GPU update of 300 fp16 bytes
    assert res.t_iter == pytest.approx(3 + 6 + 150 / 1e4)
    # chunks (400) + residual (50) + all activations (60)
    assert res.m_peak == 510
    est = CostModel(t, layout, hw).estimate(cfg)
    assert est.t_iter == pytest.approx(res.t_iter, rel=1e-9)
    assert est.m_peak == pytest.approx(res.m_peak * 1.05)
    assert res.n_backward_gathers == 0


def test_offloaded_gantt():
    t, layout = tiny()
    res = simulate(t, layout, None, make_config(layout, t, 1, 0, 2), toy_hw())
    s = spans(res)
    assert s["upload:c0"] == (0.0, 2.0)          # 200 B at 100 B/s
    assert s["fwd:0"] == (2.0, 3.0)
    assert s["upload:c1"] == (2.0, 3.0)          # overlaps fwd:0
    assert s["fwd:2"] == (4.0, 5.0)
    assert s["bwd:2"] == (5.0, 7.0)
    assert s["offload:c1"] == (7.0, 8.0)         # overlaps bwd:1
    assert s["cpu_optim:c1"] == (8.0, 8.05)
    assert s["offload:c0"] == (11.0, 13.0)
    assert res.t_iter == pytest.approx(13.1)
    assert res.n_backward_gathers == 0           # both buffers keep the chunks resident


def test_single_buffer_regathers_in_backward():
    t, layout = tiny()
    res = simulate(t, layout, None, make_config(layout, t, 1, 0, 1), toy_hw())
    assert res.n_backward_gathers >= 1
    assert res.final_allocated == res.initial_allocated


def test_deadlock_without_buffers():
    t, layout = tiny()
    cfg = PlanConfig(s_chunk=layout.s_chunk, n_chunk=layout.n_chunk, n_block=1, n_interval=1,
                     n_persist=0, n_buffer=0, n_swap=0, n_checkpoint=0)
    with pytest.raises(DeadlockDetected):
        _Sim(t, layout, build_block_schedule(1, 0, 0, 1), cfg, toy_hw()).run()


@pytest.fixture(scope="module")
def runs(gpt2_10b_16, a100):
    trace, layout = gpt2_10b_16
    cfgs = sample_feasible(trace, layout, a100, 6, seed=3)
    return trace, layout, a100, [(c, simulate(trace, layout, None, c, a100)) for c in cfgs]


def test_deterministic(runs):
    trace, layout, hw, rs = runs
    cfg, res = rs[0]
    again = simulate(trace, layout, None, cfg, hw)
    assert again.timeline_csv() == res.timeline_csv()
    assert again.chrome_trace() == res.chrome_trace()
    assert again.mem_trace_csv() == res.mem_trace_csv()


def test_links_never_exceed_bandwidth(runs):
    _, _, hw, rs = runs
    bws = {"h2d": hw.h2d_bw, "d2h": hw.d2h_bw, "coll": hw.coll_bw}
    for _, res in rs:
        for name, segs in res.link_segments.items():
            for t0, t1, _, moved in segs:
                assert moved <= bws[name] * (t1 - t0) / NS * (1 + 1e-9) + 1e-6
        for link, _, size, moved, t0, t1 in res.transfers:
            assert moved == pytest.approx(size, rel=1e-6)
            assert t1 >= t0


def test_ledger_returns_to_initial(runs):
    for _, res in runs[3]:
        assert res.final_allocated == res.initial_allocated
        assert min(b for _, b in res.mem_trace) >= 0


def test_causality(runs):
    trace, _, _, rs = runs
    for cfg, res in rs:
        s = spans(res)
        sched = schedule_for(cfg)
        for b, strat in enumerate(sched.strategies):
            ops = [op.index for op in trace.ops if op.block_id == b]
            if strat.name == "CHECKPOINT":
                assert s[f"recompute:b{b}"][1] <= s[f"bwd:{ops[-1]}"][0]
            if strat.name == "SWAP":
                assert s[f"swap_out:b{b}"][0] >= s[f"fwd:{ops[-1]}"][1]
                assert s[f"swap_in:b{b}"][1] <= s[f"bwd:{ops[-1]}"][0]
        gpu = sorted(v for k, v in s.items() if k.startswith(("fwd:", "bwd:", "recompute:", "gpu_optim")))
        assert all(a[1] <= b[0] for a, b in zip(gpu, gpu[1:]))


def test_no_backward_gathers_when_everything_fits(gpt2_1b_8, rtx):
    trace, layout = gpt2_1b_8
    for p in (0, 2):
        cfg = make_config(layout, trace, 1, p, layout.n_chunk - p)
        assert simulate(trace, layout, None, cfg, rtx).n_backward_gathers == 0


def test_chrome_trace_is_json(runs):
    doc = json.loads(runs[3][0][1].chrome_trace())
    assert any(e["ph"] == "X" for e in doc["traceEvents"])


def test_validate_report(gpt2_1b_8, rtx):
    trace, layout = gpt2_1b_8
    cfgs = sample_configs(trace, layout, rtx, 4, seed=1)
    rep = validate(trace, layout, rtx, cfgs)
    assert len(rep.ok_rows) == 4
    text = rep.to_csv().splitlines()
    assert text[0].startswith("n_persist,n_buffer") and len(text) == 5
    assert rep.max_memory_error == pytest.approx(0.05, abs=1e-9)
    with pytest.raises(ValueError):
        validate(trace, layout, rtx, [])
