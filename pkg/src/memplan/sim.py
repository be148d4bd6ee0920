"""Discrete-event simulation of one training iteration under a plan.

The simulator is the independent check on the analytic cost model.  It runs
the GPU program (forward ops, recomputes, backward ops, GPU optimizer)
serially, moves parameters, gradients and swapped activations over
bandwidth-shared links, runs per-chunk CPU updates FIFO, and keeps an
explicit allocation ledger.  Time is integer nanoseconds.
"""

from __future__ import annotations

import csv
import heapq
import io
import json
import math
from dataclasses import dataclass, field
from typing import Dict, List, Optional

import numpy as np

from .cost import CostModel
from .errors import DeadlockDetected, LedgerUnderflow, PlannerError
from .hardware import HardwareProfile
from .layout import BlockSchedule, ChunkLayout, PlanConfig, Strategy, schedule_for
from .trace import ModelTrace

NS = 1_000_000_000

# event priorities at equal timestamps: compute, then transfer completion, then the rest
_P_COMPUTE, _P_OTHER = 0, 2


def _ns(seconds: float) -> int:
    return int(round(seconds * NS))


@dataclass
class SimulationResult:
    t_iter: float
    t_fwd: float
    t_bwd: float
    t_cpu_optim_span: float
    m_peak: int
    timeline: list          # (time_ns, resource, event, subject)
    mem_trace: list         # (time_ns, allocated bytes)
    link_segments: dict = field(default_factory=dict)   # link -> [(t0_ns, t1_ns, n_active, bytes_moved)]
    transfers: list = field(default_factory=list)       # (link, subject, bytes, bytes_moved, t_start_ns, t_end_ns)
    final_allocated: int = 0
    initial_allocated: int = 0
    n_backward_gathers: int = 0

    def summary(self) -> dict:
        return {
            "t_iter": self.t_iter,
            "t_fwd": self.t_fwd,
            "t_bwd": self.t_bwd,
            "t_cpu_optim_span": self.t_cpu_optim_span,
            "m_peak": self.m_peak,
            "n_events": len(self.timeline),
            "n_backward_gathers": self.n_backward_gathers,
        }

    def timeline_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["time_ns", "resource", "event", "subject"])
        w.writerows(self.timeline)
        return buf.getvalue()

    def mem_trace_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["time_ns", "bytes"])
        w.writerows(self.mem_trace)
        return buf.getvalue()

    def chrome_trace(self) -> str:
        """Complete events ("ph": "X") per resource, loadable by chrome://tracing or Perfetto."""
        open_, events = {}, []
        tids = {}
        for t, res, ev, subj in self.timeline:
            tid = tids.setdefault(res, len(tids))
            if ev == "start":
                open_[(res, subj)] = t
            elif ev == "end" and (res, subj) in open_:
                t0 = open_.pop((res, subj))
                events.append({"name": subj, "cat": res, "ph": "X", "pid": 0, "tid": tid,
                               "ts": t0 / 1000.0, "dur": (t - t0) / 1000.0})
            else:
                events.append({"name": f"{ev}:{subj}", "cat": res, "ph": "i", "s": "t", "pid": 0, "tid": tid,
                               "ts": t / 1000.0})
        meta = [{"name": "thread_name", "ph": "M", "pid": 0, "tid": tid, "args": {"name": res}}
                for res, tid in tids.items()]
        return json.dumps({"traceEvents": meta + events}, sort_keys=True)


class _Link:
    """Processor-sharing link: active transfers split the bandwidth equally."""

    def __init__(self, name: str, bw: float):
        self.name, self.bw = name, bw
        self.active: Dict[str, list] = {}   # subject -> [remaining, size, t_start, moved]
        self.last = 0
        self.segments: List[tuple] = []
        self.done: List[tuple] = []

    def advance(self, t: int) -> None:
        if t <= self.last:
            return
        if self.active:
            share = self.bw / len(self.active) * (t - self.last) / NS
            moved = 0.0
            for rec in self.active.values():
                step = min(share, rec[0])
                rec[0] -= share
                rec[3] += step
                moved += step
            self.segments.append((self.last, t, len(self.active), moved))
        self.last = t

    def start(self, subject: str, nbytes: float, t: int) -> None:
        self.advance(t)
        self.active[subject] = [float(nbytes), float(nbytes), t, 0.0]

    @staticmethod
    def _finished(rec) -> bool:
        return rec[0] <= 1e-9 * max(rec[1], 1.0)

    def next_done(self) -> Optional[int]:
        if not self.active:
            return None
        if any(self._finished(r) for r in self.active.values()):
            return self.last
        rate = self.bw / len(self.active)
        rem = min(r[0] for r in self.active.values())
        return self.last + max(1, math.ceil(rem / rate * NS))

    def pop_finished(self, t: int) -> List[str]:
        self.advance(t)
        fin = sorted(s for s, r in self.active.items() if self._finished(r))
        for s in fin:
            rem, size, t0, moved = self.active.pop(s)
            self.done.append((self.name, s, size, moved, t0, t))
        return fin


class _Ledger:
    def __init__(self):
        self.cur = 0
        self.peak = 0
        self.tags: Dict[str, int] = {}
        self.trace: List[tuple] = []

    def _sample(self, t: int, value: int) -> None:
        self.trace.append((t, value))
        if value > self.peak:
            self.peak = value

    def alloc(self, t: int, tag: str, nbytes: int) -> None:
        if nbytes == 0:
            return
        self.tags[tag] = self.tags.get(tag, 0) + nbytes
        self.cur += nbytes
        self._sample(t, self.cur)

    def free(self, t: int, tag: str, nbytes: Optional[int] = None) -> None:
        held = self.tags.get(tag, 0)
        nbytes = held if nbytes is None else nbytes
        if nbytes == 0:
            return
        if nbytes > held:
            raise LedgerUnderflow(f"free of {nbytes} bytes for '{tag}' exceeds its allocation of {held}")
        self.tags[tag] = held - nbytes
        if not self.tags[tag]:
            del self.tags[tag]
        self.cur -= nbytes
        self._sample(t, self.cur)

    def adjust(self, t: int, delta: int) -> None:
        """Signed untracked change (trace-measured current-memory deltas)."""
        if delta == 0:
            return
        self.tags["delta"] = self.tags.get("delta", 0) + delta
        self.cur += delta
        if self.cur < 0:
            raise LedgerUnderflow(f"allocated bytes went negative ({self.cur}) at t={t}")
        self._sample(t, self.cur)

    def spike(self, t: int, extra: int) -> None:
        if extra > 0:
            self._sample(t, self.cur + extra)
            self._sample(t, self.cur)


class _Sim:
    def __init__(self, trace: ModelTrace, layout: ChunkLayout, schedule: BlockSchedule,
                 config: PlanConfig, hw: HardwareProfile):
        self.trace, self.layout, self.sched, self.cfg, self.hw = trace, layout, schedule, config, hw
        ops = trace.ops
        self.n_ops = len(ops)
        self.op_chunk = layout.op_chunk
        self.n_chunk = layout.n_chunk
        self.persistent = [c < config.n_persist for c in range(self.n_chunk)]
        self.strat = schedule.strategies
        self.t = 0
        self.seq = 0
        self.heap: List[tuple] = []
        self.timeline: List[tuple] = []
        self.ledger = _Ledger()
        w = hw.world_size
        self.w = w
        self.links = {
            "h2d": _Link("h2d", hw.h2d_bw),
            "d2h": _Link("d2h", hw.d2h_bw),
            "coll": _Link("coll", hw.coll_bw),
        }

        # block bookkeeping
        nb = trace.n_blocks
        self.block_ops: List[List[int]] = [[] for _ in range(nb)]
        for op in ops:
            if op.block_id is not None:
                self.block_ops[op.block_id].append(op.index)
        self.block_act = [sum(ops[i].act_bytes for i in self.block_ops[b]) for b in range(nb)]
        self.block_t_fwd = [sum(ops[i].t_fwd for i in self.block_ops[b]) for b in range(nb)]

        # GPU program and chunk use sequence
        prog = [("fwd", i) for i in range(self.n_ops)]
        for i in range(self.n_ops - 1, -1, -1):
            b = ops[i].block_id
            if b is not None and self.strat[b] is Strategy.CHECKPOINT and i == self.block_ops[b][-1]:
                prog.append(("recomp", b))
            prog.append(("bwd", i))
        prog.append(("gpu_optim", -1))
        self.prog = prog
        self.uses: List[int] = []
        self.task_use: List[Optional[int]] = []
        for kind, x in prog:
            c = self._task_chunk(kind, x)
            if c is None or self.persistent[c]:
                self.task_use.append(None)
                continue
            if not self.uses or self.uses[-1] != c:
                self.uses.append(c)
            self.task_use.append(len(self.uses) - 1)
        # next use index at or after each program position (for tasks on persistent chunks)
        self.next_use_at = [0] * (len(prog) + 1)
        nxt = len(self.uses)
        for p in range(len(prog) - 1, -1, -1):
            if self.task_use[p] is not None:
                nxt = self.task_use[p]
            self.next_use_at[p] = nxt
        self.next_use_at[len(prog)] = len(self.uses)
        # a use that straddles the fwd/bwd boundary belongs to the forward pass
        self.bwd_first_use = len({u for u in self.task_use[:self.n_ops] if u is not None})

        # dynamic state
        self.pc = 0                 # next GPU program index
        self.gpu_busy = False
        self.resident = set()       # non-persistent chunks occupying a buffer slot
        self.free_slots = config.n_buffer
        self.loading: Optional[int] = None
        self.grad_pending = set()   # chunks whose gradients are not yet offloaded
        self.reduces_left = sum(1 for c in range(self.n_chunk) if self.persistent[c])
        self.cpu_queue: List[int] = []
        self.cpu_busy = False
        self.cpu_first = None
        self.cpu_last = 0
        self.swap_state: Dict[int, str] = {}   # block -> out | host | in | ready
        self.swapin_busy = False
        self.t_fwd_end = None
        self.t_bwd_end = None
        self.gpu_end = 0
        self.bwd_gathers = 0

    # -- helpers --------------------------------------------------------------

    def _task_chunk(self, kind, x):
        if kind in ("fwd", "bwd"):
            return self.op_chunk[x]
        if kind == "recomp":
            return self.op_chunk[self.block_ops[x][0]]
        return None

    def log(self, resource, event, subject):
        self.timeline.append((self.t, resource, event, subject))

    def push(self, dt_ns, prio, kind, payload):
        self.seq += 1
        heapq.heappush(self.heap, (self.t + dt_ns, prio, self.seq, kind, payload))

    def _current_use(self) -> int:
        return self.next_use_at[self.pc]

    def _next_use_of(self, c: int, after: int) -> int:
        for u in range(after, len(self.uses)):
            if self.uses[u] == c:
                return u
        return len(self.uses) + 1

    def _resident(self, c: Optional[int]) -> bool:
        return c is None or self.persistent[c] or c in self.resident

    # -- collectives ------------------------------------------------------------

    def _collective(self, subject: str, nbytes: float, then: str, payload):
        """Latency then ring traffic on the collective link; ``then`` fires on completion."""
        self.log("coll", "start", subject)
        if self.w == 1:
            self.log("coll", "end", subject)
            self._on_done(then, payload)
            return
        self.push(_ns(self.hw.coll_alpha), _P_OTHER, "coll_latency", (subject, nbytes * (self.w - 1) / self.w, then, payload))

    # -- dispatch ---------------------------------------------------------------

    def dispatch(self):
        progress = True
        while progress:
            progress = self._try_gpu() | self._try_prefetch() | self._try_swap_in() | self._try_cpu()

    def _try_gpu(self) -> bool:
        if self.gpu_busy or self.pc >= len(self.prog):
            return False
        kind, x = self.prog[self.pc]
        ops = self.trace.ops
        c = self._task_chunk(kind, x)
        if not self._resident(c):
            return False
        if kind == "bwd":
            b = ops[x].block_id
            if b is not None and self.strat[b] is Strategy.SWAP and self.swap_state.get(b) != "ready":
                return False
        if kind == "gpu_optim" and self.reduces_left:
            return False
        led = self.ledger
        if kind == "fwd":
            op = ops[x]
            led.spike(self.t, op.d_peak_prior)
            led.spike(self.t, op.d_peak_op)
            dur, subj = op.t_fwd, f"fwd:{x}"
        elif kind == "bwd":
            op = ops[x]
            led.spike(self.t, op.d_peak_prior)
            led.adjust(self.t, op.d_cur_prior)
            led.spike(self.t, op.d_peak_op)
            dur, subj = op.t_bwd, f"bwd:{x}"
        elif kind == "recomp":
            for i in self.block_ops[x][1:]:
                led.alloc(self.t, f"act:{i}", ops[i].act_bytes)
            dur, subj = self.block_t_fwd[x], f"recompute:b{x}"
        else:
            d = self.layout.dtype_bytes
            params = sum(ch.used_bytes for ch in self.layout.chunks[:self.cfg.n_persist]) / d
            dur, subj = params / self.hw.gpu_optim_rate, "gpu_optim"
        self.gpu_busy = True
        self.log("gpu", "start", subj)
        self.push(_ns(dur), _P_COMPUTE, "gpu_done", (kind, x, subj))
        return True

    def _try_prefetch(self) -> bool:
        if self.loading is not None:
            return False
        cur = self._current_use()
        # only the chunk needed next: one use ahead of the GPU (or the one it waits on)
        target_use = None
        for u in (cur, cur + 1):
            if u < len(self.uses) and self.uses[u] not in self.resident:
                target_use = u
                break
        if target_use is None:
            return False
        c = self.uses[target_use]
        if self.free_slots == 0:
            pinned = set(self.grad_pending)
            if self.pc < len(self.prog):
                pc_chunk = self._task_chunk(*self.prog[self.pc])
                if pc_chunk is not None:
                    pinned.add(pc_chunk)
            victims = [(self._next_use_of(v, cur), v) for v in self.resident if v not in pinned]
            if not victims:
                return False
            far, v = max(victims)
            if far <= target_use:
                return False
            self.resident.discard(v)
            self.free_slots += 1
            self.log("buffer", "evict", f"c{v}")
        self.free_slots -= 1
        self.loading = c
        if target_use >= self.bwd_first_use:
            self.bwd_gathers += 1
        used = self.layout.chunks[c].used_bytes
        self.links["h2d"].start(f"upload:c{c}", used / self.w, self.t)
        self.log("h2d", "start", f"upload:c{c}")
        return True

    def _next_bwd_block(self) -> Optional[int]:
        for p in range(self.pc, len(self.prog)):
            kind, x = self.prog[p]
            if kind == "bwd":
                b = self.trace.ops[x].block_id
                return self.trace.n_blocks if b is None else b
            if kind == "recomp":
                return x
        return None

    def _try_swap_in(self) -> bool:
        if self.swapin_busy or self.t_fwd_end is None:
            return False
        waiting = sorted((b for b, s in self.swap_state.items() if s == "host"), reverse=True)
        if not waiting:
            return False
        b = waiting[0]
        nxt = self._next_bwd_block()
        if nxt is None:
            return False
        kind, x = self.prog[self.pc] if self.pc < len(self.prog) else (None, None)
        forced = kind == "bwd" and self.trace.ops[x].block_id == b
        near = nxt <= b + self.cfg.n_interval
        roomy = self.ledger.cur + self.block_act[b] <= self.ledger.peak
        if not (forced or (near and roomy)):
            return False
        self.swap_state[b] = "in"
        self.swapin_busy = True
        for i in self.block_ops[b]:
            self.ledger.alloc(self.t, f"act:{i}", self.trace.ops[i].act_bytes)
        self.links["h2d"].start(f"swap_in:b{b}", self.block_act[b], self.t)
        self.log("h2d", "start", f"swap_in:b{b}")
        return True

    def _try_cpu(self) -> bool:
        if self.cpu_busy or not self.cpu_queue:
            return False
        c = self.cpu_queue.pop(0)
        params = self.layout.chunks[c].used_bytes / self.layout.dtype_bytes
        self.cpu_busy = True
        if self.cpu_first is None:
            self.cpu_first = self.t
        self.log("cpu", "start", f"cpu_optim:c{c}")
        self.push(_ns(params / self.hw.cpu_optim_rate), _P_COMPUTE, "cpu_done", c)
        return True

    # -- completions --------------------------------------------------------------

    def _on_done(self, kind, payload):
        if kind == "gathered":
            c = payload
            self.resident.add(c)
            self.loading = None
        elif kind == "reduced":
            c = payload
            if self.persistent[c]:
                self.reduces_left -= 1
            else:
                used = self.layout.chunks[c].used_bytes
                self.links["d2h"].start(f"offload:c{c}", used / self.w, self.t)
                self.log("d2h", "start", f"offload:c{c}")

    def _on_gpu_done(self, kind, x, subj):
        self.gpu_busy = False
        self.log("gpu", "end", subj)
        ops = self.trace.ops
        led = self.ledger
        self.pc += 1
        self.gpu_end = self.t
        if kind == "fwd":
            led.alloc(self.t, f"act:{x}", ops[x].act_bytes)
            b = ops[x].block_id
            if b is not None and x == self.block_ops[b][-1]:
                s = self.strat[b]
                if s is Strategy.SWAP:
                    self.swap_state[b] = "out"
                    self.links["d2h"].start(f"swap_out:b{b}", self.block_act[b], self.t)
                    self.log("d2h", "start", f"swap_out:b{b}")
                elif s is Strategy.CHECKPOINT:
                    for i in self.block_ops[b][1:]:
                        led.free(self.t, f"act:{i}")
            if x == self.n_ops - 1:
                led.alloc(self.t, "m_fwd", self.trace.m_fwd)
                self.t_fwd_end = self.t
        elif kind == "bwd":
            led.adjust(self.t, ops[x].d_cur_op)
            led.free(self.t, f"act:{x}")
            c = self.op_chunk[x]
            if x == 0 or self.op_chunk[x - 1] != c:
                if x == 0:
                    self.t_bwd_end = self.t
                if not self.persistent[c]:
                    self.grad_pending.add(c)
                used = self.layout.chunks[c].used_bytes
                self._collective(f"reduce:c{c}", used, "reduced", c)

    def _on_transfer_done(self, link: str, subject: str):
        self.log(link, "end", subject)
        kind, _, tag = subject.partition(":")
        n = int(tag[1:])
        if kind == "upload":
            used = self.layout.chunks[n].used_bytes
            self._collective(f"gather:c{n}", used, "gathered", n)
        elif kind == "swap_out":
            for i in self.block_ops[n]:
                self.ledger.free(self.t, f"act:{i}")
            self.swap_state[n] = "host"
        elif kind == "swap_in":
            self.swap_state[n] = "ready"
            self.swapin_busy = False
        elif kind == "offload":
            self.grad_pending.discard(n)
            if n in self.resident:
                self.resident.discard(n)
                self.free_slots += 1
            self.cpu_queue.append(n)

    def _on_cpu_done(self, c: int):
        self.cpu_busy = False
        self.cpu_last = self.t
        self.log("cpu", "end", f"cpu_optim:c{c}")

    # -- main loop ----------------------------------------------------------------

    def run(self) -> SimulationResult:
        led = self.ledger
        resid = self.layout.s_chunk * (self.cfg.n_persist + self.cfg.n_buffer)
        led.alloc(0, "chunks", resid)
        self.dispatch()
        while True:
            cand = [self.heap[0][0]] if self.heap else []
            cand += [x for x in (l.next_done() for l in self.links.values()) if x is not None]
            if not cand:
                break
            t = min(cand)
            self.t = t
            for l in self.links.values():
                l.advance(t)
            # compute completions first, then transfers, then timers
            while self.heap and self.heap[0][0] == t and self.heap[0][1] == _P_COMPUTE:
                _, _, _, kind, payload = heapq.heappop(self.heap)
                if kind == "gpu_done":
                    self._on_gpu_done(*payload)
                else:
                    self._on_cpu_done(payload)
            for name in ("coll", "d2h", "h2d"):
                for subj in self.links[name].pop_finished(t):
                    if name == "coll":
                        self.log("coll", "end", subj)
                        kind, _, tag = subj.partition(":")
                        self._on_done("gathered" if kind == "gather" else "reduced", int(tag[1:]))
                    else:
                        self._on_transfer_done(name, subj)
            while self.heap and self.heap[0][0] == t:
                _, _, _, kind, payload = heapq.heappop(self.heap)
                if kind == "coll_latency":
                    subject, nbytes, then, arg = payload
                    self.links["coll"].start(subject, nbytes, t)
                elif kind == "gpu_done":
                    self._on_gpu_done(*payload)
                else:
                    self._on_cpu_done(payload)
            self.dispatch()
        done = self.pc >= len(self.prog) and not self.cpu_queue and not self.cpu_busy
        if not done:
            where = self.prog[self.pc] if self.pc < len(self.prog) else ("cpu", -1)
            raise DeadlockDetected(f"no runnable event at t={self.t} ns; GPU blocked on {where[0]} {where[1]}")
        end = max(self.gpu_end, self.cpu_last)
        # iteration over: drop forward residuals and trace deltas, keep chunk residency
        led.free(end, "m_fwd")
        if led.tags.get("delta"):
            led.adjust(end, -led.tags["delta"])
        leftover = {k: v for k, v in led.tags.items() if k not in ("chunks", "delta")}
        if leftover:
            raise LedgerUnderflow(f"allocations still live at end of iteration: {sorted(leftover)[:5]}")
        t_fwd = self.t_fwd_end / NS
        t_bwd = (self.t_bwd_end - self.t_fwd_end) / NS
        span = (self.cpu_last - self.cpu_first) / NS if self.cpu_first is not None else 0.0
        transfers = sorted(x for l in self.links.values() for x in l.done)
        segs = {n: l.segments for n, l in self.links.items()}
        return SimulationResult(end / NS, t_fwd, t_bwd, span, led.peak, self.timeline, led.trace,
                                segs, transfers, led.cur, resid, self.bwd_gathers)


def simulate(trace: ModelTrace, layout: ChunkLayout, schedule: Optional[BlockSchedule],
             config: PlanConfig, hw: HardwareProfile) -> SimulationResult:
    config.validate()
    schedule = schedule if schedule is not None else schedule_for(config)
    return _Sim(trace, layout, schedule, config, hw).run()


# -- validation -------------------------------------------------------------------

VALIDATION_COLUMNS = ["n_persist", "n_buffer", "n_swap", "n_checkpoint", "est_t_iter", "sim_t_iter",
                      "t_iter_rel_err", "est_m_peak", "sim_m_peak", "m_peak_rel_err", "status"]


@dataclass
class ValidationReport:
    rows: list

    @property
    def ok_rows(self):
        return [r for r in self.rows if r["status"] == "ok"]

    @property
    def max_runtime_error(self) -> float:
        return max((abs(r["t_iter_rel_err"]) for r in self.ok_rows), default=0.0)

    @property
    def median_runtime_error(self) -> float:
        errs = [abs(r["t_iter_rel_err"]) for r in self.ok_rows]
        return float(np.median(errs)) if errs else 0.0

    @property
    def max_memory_error(self) -> float:
        return max((abs(r["m_peak_rel_err"]) for r in self.ok_rows), default=0.0)

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(VALIDATION_COLUMNS)
        for r in self.rows:
            w.writerow([r[c] if not isinstance(r[c], float) else repr(r[c]) for c in VALIDATION_COLUMNS])
        return buf.getvalue()


def validate(trace: ModelTrace, layout: ChunkLayout, hw: HardwareProfile, configs: list) -> ValidationReport:
    if not configs:
        raise ValueError("validate needs at least one configuration")
    model = CostModel(trace, layout, hw)
    rows = []
    for cfg in configs:
        row = {"n_persist": cfg.n_persist, "n_buffer": cfg.n_buffer, "n_swap": cfg.n_swap,
               "n_checkpoint": cfg.n_checkpoint}
        est = model.estimate(cfg, breakdown=False)
        row.update(est_t_iter=est.t_iter, est_m_peak=est.m_peak)
        try:
            sim = simulate(trace, layout, None, cfg, hw)
        except PlannerError as exc:
            row.update(sim_t_iter="", sim_m_peak="", t_iter_rel_err="", m_peak_rel_err="",
                       status=f"failed:{type(exc).__name__}")
        else:
            row.update(sim_t_iter=sim.t_iter, sim_m_peak=sim.m_peak,
                       t_iter_rel_err=(est.t_iter - sim.t_iter) / sim.t_iter,
                       m_peak_rel_err=(est.m_peak - sim.m_peak) / sim.m_peak, status="ok")
        rows.append(row)
    return ValidationReport(rows)


def sample_configs(trace: ModelTrace, layout: ChunkLayout, hw: HardwareProfile, n: int, seed: int = 0,
                   n_interval: Optional[int] = None) -> list:
    from .search import sample_feasible
    return sample_feasible(trace, layout, hw, n, seed, n_interval)
