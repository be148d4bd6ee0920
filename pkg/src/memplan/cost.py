"""Analytic runtime and peak-memory cost models.

Runtime is evaluated per chunk: each forward/backward step costs the larger
of its compute and the communication it overlaps with.  Peak memory is an
operator-wise replay of the backward pass starting from the memory alive at
the end of forward, plus the fixed chunk/buffer footprint, scaled by a
fragmentation factor.
"""

from __future__ import annotations

import csv
import io
from dataclasses import asdict, dataclass, field
from typing import Optional

import numpy as np

from . import kernels
from .hardware import HardwareProfile, contended_bandwidth, gather_time, reduce_time, transfer_time
from .layout import BlockSchedule, ChunkLayout, PlanConfig, Strategy, schedule_for
from .trace import ModelTrace

DEFAULT_ALPHA = 1.05


@dataclass
class CostEstimate:
    t_fwd: float
    t_bwd: float
    t_gpu_optim: float
    t_cpu_optim: float
    t_iter: float
    m_peak: float
    m_peak_raw: int = 0  # replay peak before model-state terms and fragmentation factor
    per_chunk: list = field(default_factory=list)

    def to_dict(self, with_breakdown: bool = True) -> dict:
        d = asdict(self)
        if not with_breakdown:
            d.pop("per_chunk")
        return d


CONFIG_COLUMNS = ["s_chunk", "n_chunk", "n_persist", "n_buffer", "n_block", "n_interval", "n_swap", "n_checkpoint"]
ESTIMATE_COLUMNS = ["t_fwd", "t_bwd", "t_gpu_optim", "t_cpu_optim", "t_iter", "m_peak"]


def csv_row(config: PlanConfig, est: CostEstimate) -> list:
    return [getattr(config, c) for c in CONFIG_COLUMNS] + [repr(getattr(est, c)) for c in ESTIMATE_COLUMNS]


def estimates_to_csv(rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(CONFIG_COLUMNS + ESTIMATE_COLUMNS)
    for config, est in rows:
        w.writerow(csv_row(config, est))
    return buf.getvalue()


class CostModel:
    """Precomputed per-chunk and per-operator quantities for one (trace, layout, hw).

    Schedule-dependent terms are cached by ``(n_swap, n_checkpoint, n_interval)``
    so that evaluating many configurations only reruns the kernels.
    """

    def __init__(self, trace: ModelTrace, layout: ChunkLayout, hw: HardwareProfile, alpha: float = DEFAULT_ALPHA):
        self.trace, self.layout, self.hw, self.alpha = trace, layout, hw, alpha
        n = layout.n_chunk
        ops = trace.ops
        op_chunk = layout.op_chunk
        self.comp_f = np.zeros(n)
        self.comp_b = np.zeros(n)
        for op in ops:
            self.comp_f[op_chunk[op.index]] += op.t_fwd
            self.comp_b[op_chunk[op.index]] += op.t_bwd
        w = hw.world_size
        used = [float(c.used_bytes) for c in layout.chunks]
        self.used = used
        gath = np.array([gather_time(u, hw) for u in used])
        self.pref_plain = gath + np.array([transfer_time(u / w, hw.h2d_bw) for u in used])
        self.pref_shared = gath + np.array([transfer_time(u / w, contended_bandwidth(hw.h2d_bw, 2)) for u in used])
        self.red = np.array([reduce_time(u, hw) for u in used])
        self.off = np.array([transfer_time(u / w, hw.d2h_bw) for u in used])

        nb = trace.n_blocks
        self.block_t_fwd = [0.0] * nb
        self.block_act = [0] * nb
        self.block_first_act = [0] * nb
        self.block_last_op = [-1] * nb
        self.block_chunk = [0] * nb
        seen = set()
        for op in ops:
            b = op.block_id
            if b is None:
                continue
            if b not in seen:
                seen.add(b)
                self.block_first_act[b] = op.act_bytes
                self.block_chunk[b] = op_chunk[op.index]
            self.block_t_fwd[b] += op.t_fwd
            self.block_act[b] += op.act_bytes
            self.block_last_op[b] = op.index
        self.op_block = [op.block_id for op in ops]
        self.dcp = [op.d_cur_prior for op in ops]
        self.dpp = [op.d_peak_prior for op in ops]
        self.dco = [op.d_cur_op for op in ops]
        self.dpo = [op.d_peak_op for op in ops]
        self.act = [op.act_bytes for op in ops]
        self.total_act = sum(self.act)
        self._sched_cache = {}

    # -- schedule-dependent terms ------------------------------------------

    def schedule_terms(self, schedule: BlockSchedule, n_interval: int):
        key = (schedule.strategies, n_interval)
        hit = self._sched_cache.get(key)
        if hit is not None:
            return hit
        n = self.layout.n_chunk
        strat = schedule.strategies
        swaps = [b for b, s in enumerate(strat) if s is Strategy.SWAP]
        # blocks whose compute overlaps an activation swap (out in forward, in during backward)
        overlapped = [False] * len(strat)
        for b in swaps:
            for x in range(b + 1, min(b + n_interval, len(strat) - 1) + 1):
                overlapped[x] = True
        chunk_busy = [False] * n
        for b, flag in enumerate(overlapped):
            if flag:
                chunk_busy[self.block_chunk[b]] = True
        pref_f = np.array([self.pref_shared[c] if c >= 1 and chunk_busy[c - 1] else self.pref_plain[c] for c in range(n)])
        pref_b = np.array([self.pref_shared[c] if c + 1 < n and chunk_busy[c + 1] else self.pref_plain[c] for c in range(n)])
        recomp = np.zeros(n)
        for b, s in enumerate(strat):
            if s is Strategy.CHECKPOINT:
                recomp[self.block_chunk[b]] += self.block_t_fwd[b]
        raw_peak = self._replay(strat)
        terms = (pref_f, pref_b, recomp, raw_peak)
        self._sched_cache[key] = terms
        return terms

    def memory_inputs(self, strat):
        """Per-op replay inputs: (optimized flags, checkpoint bump, initial current memory)."""
        n_ops = len(self.act)
        optimized = [0] * n_ops
        bump = [0] * n_ops
        saved = 0
        for i, b in enumerate(self.op_block):
            if b is not None and strat[b] is not Strategy.NONE:
                optimized[i] = 1
        for b, s in enumerate(strat):
            if s is Strategy.SWAP:
                saved += self.block_act[b]
            elif s is Strategy.CHECKPOINT and self.block_last_op[b] >= 0:
                m_ckpt = self.block_act[b] - self.block_first_act[b]
                saved += m_ckpt
                # recompute happens right before the block's first backward operator
                bump[self.block_last_op[b]] = m_ckpt
        cur0 = self.trace.m_fwd + self.total_act - saved
        return optimized, bump, cur0

    def _replay(self, strat) -> int:
        optimized, bump, cur0 = self.memory_inputs(strat)
        peak, _ = kernels.replay_peak(self.dcp, self.dpp, self.dco, self.dpo, self.act, optimized, bump, cur0)
        return peak

    # -- estimates ----------------------------------------------------------

    def optim_times(self, n_persist: int):
        d = self.layout.dtype_bytes
        persist = sum(self.used[:n_persist]) / d
        rest = sum(self.used[n_persist:]) / d
        return persist / self.hw.gpu_optim_rate, rest / self.hw.cpu_optim_rate

    def memory(self, raw_peak: int, config: PlanConfig) -> float:
        return (raw_peak + self.layout.s_chunk * config.n_persist + self.layout.s_chunk * config.n_buffer) * self.alpha

    def estimate(self, config: PlanConfig, schedule: Optional[BlockSchedule] = None, breakdown: bool = True) -> CostEstimate:
        schedule = schedule if schedule is not None else schedule_for(config)
        pref_f, pref_b, recomp, raw_peak = self.schedule_terms(schedule, config.n_interval)
        t_fwd = kernels.fwd_time(self.comp_f, pref_f, config.n_persist)
        t_bwd = kernels.bwd_time(self.comp_b, recomp, pref_b, self.red, self.off, config.n_persist, config.n_buffer)
        t_gpu, t_cpu = self.optim_times(config.n_persist)
        t_iter = t_fwd + max(t_bwd + t_gpu, t_cpu)
        per_chunk = self._breakdown(config, pref_f, pref_b, recomp) if breakdown else []
        return CostEstimate(t_fwd, t_bwd, t_gpu, t_cpu, t_iter, self.memory(raw_peak, config), raw_peak, per_chunk)

    def _breakdown(self, config, pref_f, pref_b, recomp):
        n, np_, nb = self.layout.n_chunk, config.n_persist, config.n_buffer
        rows = []
        for c in range(n):
            i = c + 1
            f_comm = pref_f[c] if i > np_ else 0.0
            b_comm = pref_b[c] if np_ < i <= n - nb else 0.0
            ro = self.red[c] + (self.off[c] if i > np_ else 0.0)
            rows.append({
                "chunk": c,
                "fwd_comp": float(self.comp_f[c]),
                "fwd_prefetch": float(f_comm),
                "bwd_comp": float(self.comp_b[c] + recomp[c]),
                "bwd_prefetch": float(b_comm),
                "reduce_offload": float(ro),
                "persistent": i <= np_,
            })
        return rows


# -- functional interface ------------------------------------------------------

def estimate_fwd(trace, layout, schedule, config, hw) -> float:
    model = CostModel(trace, layout, hw)
    pref_f, _, _, _ = model.schedule_terms(schedule, config.n_interval)
    return kernels.fwd_time(model.comp_f, pref_f, config.n_persist)


def estimate_bwd(trace, layout, schedule, config, hw) -> float:
    model = CostModel(trace, layout, hw)
    _, pref_b, recomp, _ = model.schedule_terms(schedule, config.n_interval)
    return kernels.bwd_time(model.comp_b, recomp, pref_b, model.red, model.off, config.n_persist, config.n_buffer)


def estimate_optim(layout: ChunkLayout, config: PlanConfig, hw: HardwareProfile):
    """(t_gpu_optim, t_cpu_optim) from persistent / non-persistent parameter counts."""
    d = layout.dtype_bytes
    used = [c.used_bytes for c in layout.chunks]
    persist = sum(used[:config.n_persist]) / d
    rest = sum(used[config.n_persist:]) / d
    return persist / hw.gpu_optim_rate, rest / hw.cpu_optim_rate


def estimate_peak_memory(trace, schedule, config, hw=None, alpha: float = DEFAULT_ALPHA, raw: bool = False):
    """Backward-pass replay peak plus chunk footprint, times ``alpha``.

    With ``raw=True`` returns the integer replay peak alone (no chunk terms, no alpha).
    """
    strat = schedule.strategies
    act = [op.act_bytes for op in trace.ops]
    blocks = [op.block_id for op in trace.ops]
    n_ops = len(act)
    optimized = [1 if b is not None and strat[b] is not Strategy.NONE else 0 for b in blocks]
    bump = [0] * n_ops
    block_act, first_act, last_op = {}, {}, {}
    for op in trace.ops:
        b = op.block_id
        if b is None:
            continue
        block_act[b] = block_act.get(b, 0) + op.act_bytes
        first_act.setdefault(b, op.act_bytes)
        last_op[b] = op.index
    saved = 0
    for b, s in enumerate(strat):
        if s is Strategy.SWAP:
            saved += block_act.get(b, 0)
        elif s is Strategy.CHECKPOINT and b in block_act:
            m_ckpt = block_act[b] - first_act[b]
            saved += m_ckpt
            bump[last_op[b]] = m_ckpt
    cur0 = trace.m_fwd + sum(act) - saved
    peak, _ = kernels.replay_peak([op.d_cur_prior for op in trace.ops], [op.d_peak_prior for op in trace.ops],
                                  [op.d_cur_op for op in trace.ops], [op.d_peak_op for op in trace.ops],
                                  act, optimized, bump, cur0)
    if raw:
        return peak
    return (peak + config.s_chunk * config.n_persist + config.s_chunk * config.n_buffer) * alpha


def estimate_iteration(trace, layout, schedule, config, hw, alpha: float = DEFAULT_ALPHA) -> CostEstimate:
    return CostModel(trace, layout, hw, alpha).estimate(config, schedule)
