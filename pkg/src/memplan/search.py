"""Configuration search: enumerate candidates in ascending estimated memory and pick
the fastest one that fits on the GPU."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterator, List, Optional

import numpy as np

from . import kernels
from .cost import CostEstimate, CostModel
from .errors import NoFeasibleConfig
from .hardware import HardwareProfile, contended_bandwidth, transfer_time
from .layout import ChunkLayout, PlanConfig, build_block_schedule, compute_interval, schedule_feasible
from .trace import ModelTrace


@dataclass
class SearchOutcome:
    best: PlanConfig
    estimate: CostEstimate
    n_evaluated: int
    n_pruned: int
    frontier: List[tuple] = field(default_factory=list)

    def to_dict(self) -> dict:
        from dataclasses import asdict
        return {
            "best": asdict(self.best),
            "estimate": self.estimate.to_dict(),
            "n_evaluated": self.n_evaluated,
            "n_pruned": self.n_pruned,
            "frontier": [{"config": asdict(c), "t_iter": e.t_iter, "m_peak": e.m_peak} for c, e in self.frontier],
        }


def buffer_floor(n_chunk: int, n_persist: int) -> int:
    return 0 if n_persist >= n_chunk else min(3, n_chunk - n_persist)


def geometric_swap_max(n_block: int, n_interval: int) -> int:
    return (n_block - 1) // (n_interval + 1) + 1 if n_block > 0 else 0


def swap_bandwidth_cap(trace: ModelTrace, hw: HardwareProfile, n_interval: int) -> int:
    """Largest n whose swap-outs each drain, at contended device-to-host bandwidth and
    queued behind the previous ones, before the forward pass has finished the
    ``n_interval`` blocks that follow the swapped block."""
    n_block = trace.n_blocks
    t_block = [0.0] * n_block
    act = [0] * n_block
    for op in trace.ops:
        if op.block_id is not None:
            t_block[op.block_id] += op.t_fwd
            act[op.block_id] += op.act_bytes
    ends = list(np.cumsum(t_block)) if n_block else []
    bw = contended_bandwidth(hw.d2h_bw, 2)
    link_free = 0.0
    cap = 0
    for j in range(geometric_swap_max(n_block, n_interval)):
        b = j * (n_interval + 1)
        start = max(ends[b], link_free)
        link_free = start + transfer_time(act[b], bw)
        if link_free > ends[min(b + n_interval, n_block - 1)]:
            break
        cap = j + 1
    return cap


def swap_limit(trace: ModelTrace, hw: HardwareProfile, n_interval: int) -> int:
    return min(geometric_swap_max(trace.n_blocks, n_interval), swap_bandwidth_cap(trace, hw, n_interval))


class _Candidates:
    """Column arrays (m_peak, n_swap, n_checkpoint, n_persist, n_buffer), sorted by
    ascending memory with a deterministic secondary order."""

    def __init__(self, model: CostModel, n_interval: int, n_swap_max: int):
        layout, trace = model.layout, model.trace
        n_chunk, n_block, s = layout.n_chunk, trace.n_blocks, layout.s_chunk
        pairs = [(p, b) for p in range(n_chunk + 1) for b in range(buffer_floor(n_chunk, p), n_chunk - p + 1)]
        P = np.array([p for p, _ in pairs], dtype=np.int64)
        B = np.array([b for _, b in pairs], dtype=np.int64)
        cols = {"m": [], "ns": [], "nc": [], "np": [], "nb": []}
        for ns in range(n_swap_max + 1):
            for nc in range(n_block - ns + 1):
                if not schedule_feasible(n_block, ns, nc, n_interval):
                    continue
                raw = model.schedule_terms(build_block_schedule(n_block, ns, nc, n_interval), n_interval)[3]
                cols["m"].append((raw + s * P + s * B) * model.alpha)
                cols["ns"].append(np.full(len(pairs), ns, dtype=np.int64))
                cols["nc"].append(np.full(len(pairs), nc, dtype=np.int64))
                cols["np"].append(P)
                cols["nb"].append(B)
        m, ns_, nc_, np_, nb_ = (np.concatenate(cols[k]) if cols[k] else np.empty(0)
                                 for k in ("m", "ns", "nc", "np", "nb"))
        # equal memory: fewer swaps, fewer checkpoints, more persistence, fewer buffers
        order = np.lexsort((nb_, -np_, nc_, ns_, m))
        self.m, self.ns, self.nc, self.np, self.nb = m[order], ns_[order], nc_[order], np_[order], nb_[order]

    def __len__(self):
        return len(self.m)

    def row(self, i: int):
        return (float(self.m[i]), int(self.ns[i]), int(self.nc[i]), int(self.np[i]), int(self.nb[i]))

    def n_below(self, limit: float) -> int:
        return int(np.searchsorted(self.m, limit, side="left"))


def _config(layout, trace, n_interval, row) -> PlanConfig:
    _, ns, nc, np_, nb = row
    return PlanConfig(layout.s_chunk, layout.n_chunk, np_, nb, trace.n_blocks, n_interval, ns, nc)


def _prepare(trace, layout, hw, n_interval, respect_bandwidth_cap=True):
    n_interval = compute_interval(trace, hw) if n_interval is None else n_interval
    model = CostModel(trace, layout, hw)
    ns_max = (swap_limit(trace, hw, n_interval) if respect_bandwidth_cap
              else geometric_swap_max(trace.n_blocks, n_interval))
    return n_interval, model, _Candidates(model, n_interval, ns_max)


def enumerate_candidates(layout: ChunkLayout, trace: ModelTrace, hw: HardwareProfile,
                         n_interval: Optional[int] = None,
                         respect_bandwidth_cap: bool = True) -> Iterator[PlanConfig]:
    """All candidate configurations in non-decreasing estimated peak memory."""
    n_interval, _, cands = _prepare(trace, layout, hw, n_interval, respect_bandwidth_cap)
    for i in range(len(cands)):
        yield _config(layout, trace, n_interval, cands.row(i))


def tie_key(config: PlanConfig, est: CostEstimate) -> tuple:
    """Total order used to pick among equal-runtime configurations."""
    return (est.t_iter, est.m_peak, config.n_checkpoint, -config.n_persist, config.n_buffer, config.n_swap)


def _times(model: CostModel, cands: _Candidates, n: int, n_interval: int):
    """(t_fwd, t_bwd, t_gpu_optim, t_cpu_optim, t_iter) arrays for the first ``n`` candidates."""
    n_block = model.trace.n_blocks
    ns, nc, P, B = cands.ns[:n], cands.nc[:n], cands.np[:n], cands.nb[:n]
    tf = np.empty(n)
    tb = np.empty(n)
    group = ns * (n_block + 1) + nc
    order = np.lexsort((B, P, group))
    bounds = np.flatnonzero(np.diff(group[order])) + 1
    for idxs in np.split(order, bounds) if n else []:
        s_, c_ = int(ns[idxs[0]]), int(nc[idxs[0]])
        pref_f, pref_b, recomp, _ = model.schedule_terms(build_block_schedule(n_block, s_, c_, n_interval), n_interval)
        f, b = kernels.sweep_times(model.comp_f, pref_f, model.comp_b, recomp, pref_b, model.red, model.off,
                                   P[idxs], B[idxs])
        tf[idxs] = f
        tb[idxs] = b
    optim = np.array([model.optim_times(p) for p in range(model.layout.n_chunk + 1)]).reshape(-1, 2)
    tg, tc = optim[P, 0], optim[P, 1]
    return tf, tb, tg, tc, tf + np.maximum(tb + tg, tc)


def evaluate_candidates(trace: ModelTrace, layout: ChunkLayout, hw: HardwareProfile,
                        n_interval: Optional[int] = None, feasible_only: bool = False):
    """(config, estimate) for every candidate in enumeration order, without per-chunk breakdowns."""
    n_interval, model, cands = _prepare(trace, layout, hw, n_interval)
    n = cands.n_below(hw.gpu_mem) if feasible_only else len(cands)
    times = _times(model, cands, n, n_interval)
    out = []
    for i in range(n):
        row = cands.row(i)
        cfg = _config(layout, trace, n_interval, row)
        out.append((cfg, _light_estimate(model, cfg, row, times, i)))
    return out


def _light_estimate(model, cfg, row, times, i) -> CostEstimate:
    raw = model.schedule_terms(build_block_schedule(cfg.n_block, cfg.n_swap, cfg.n_checkpoint, cfg.n_interval),
                               cfg.n_interval)[3]
    return CostEstimate(*(float(a[i]) for a in times), m_peak=row[0], m_peak_raw=raw)


def find_optimal(trace: ModelTrace, layout: ChunkLayout, hw: HardwareProfile,
                 n_interval: Optional[int] = None) -> SearchOutcome:
    n_interval, model, cands = _prepare(trace, layout, hw, n_interval)
    # ascending memory: everything from the first infeasible candidate onwards is infeasible too
    n_feasible = cands.n_below(hw.gpu_mem)
    if n_feasible == 0:
        raise NoFeasibleConfig(
            f"smallest estimated peak {cands.m[0] / 1e9:.3f} GB does not fit in {hw.gpu_mem / 1e9:.3f} GB"
            if len(cands) else "no candidate configurations")
    times = _times(model, cands, n_feasible, n_interval)
    t_iter = times[4]
    sl = slice(0, n_feasible)
    # np.lexsort: last key is primary; mirrors tie_key
    order = np.lexsort((cands.ns[sl], cands.nb[sl], -cands.np[sl], cands.nc[sl], cands.m[sl], t_iter))
    best_i = int(order[0])
    best = _config(layout, trace, n_interval, cands.row(best_i))
    est = model.estimate(best)
    # Pareto frontier in (memory, runtime): candidates that beat every cheaper-memory one
    run_min = np.minimum.accumulate(t_iter)
    improving = np.flatnonzero(np.concatenate(([True], t_iter[1:] < run_min[:-1])))
    frontier = []
    for i in improving:
        row = cands.row(int(i))
        cfg = _config(layout, trace, n_interval, row)
        frontier.append((cfg, _light_estimate(model, cfg, row, times, int(i))))
    return SearchOutcome(best, est, n_feasible, len(cands) - n_feasible, frontier)


def brute_force_optimal(trace: ModelTrace, layout: ChunkLayout, hw: HardwareProfile,
                        n_interval: Optional[int] = None):
    """Exhaustive reference: estimate every schedule-feasible configuration independently
    (no ordering, no early stop) and return the best (config, estimate) or None."""
    from .cost import estimate_iteration
    n_interval = compute_interval(trace, hw) if n_interval is None else n_interval
    n_chunk, n_block = layout.n_chunk, trace.n_blocks
    best = None
    for np_ in range(n_chunk + 1):
        for nb in range(buffer_floor(n_chunk, np_), n_chunk - np_ + 1):
            for ns in range(swap_limit(trace, hw, n_interval) + 1):
                for nc in range(n_block - ns + 1):
                    if not schedule_feasible(n_block, ns, nc, n_interval):
                        continue
                    cfg = PlanConfig(layout.s_chunk, n_chunk, np_, nb, n_block, n_interval, ns, nc)
                    est = estimate_iteration(trace, layout, build_block_schedule(n_block, ns, nc, n_interval), cfg, hw)
                    if est.m_peak >= hw.gpu_mem:
                        continue
                    if best is None or tie_key(cfg, est) < tie_key(*best):
                        best = (cfg, est)
    return best


def sample_feasible(trace: ModelTrace, layout: ChunkLayout, hw: HardwareProfile, n: int, seed: int = 0,
                    n_interval: Optional[int] = None) -> List[PlanConfig]:
    """``n`` distinct memory-feasible candidates drawn uniformly without replacement,
    returned in enumeration order."""
    n_interval, _, cands = _prepare(trace, layout, hw, n_interval)
    n_feasible = cands.n_below(hw.gpu_mem)
    if n_feasible == 0:
        return []
    rng = np.random.default_rng(seed)
    idx = np.sort(rng.choice(n_feasible, size=min(n, n_feasible), replace=False))
    return [_config(layout, trace, n_interval, cands.row(int(i))) for i in idx]
