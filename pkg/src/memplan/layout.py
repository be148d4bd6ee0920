"""Chunk packing, chunk-size search, persistence split and the interleaved block schedule."""

from __future__ import annotations

import json
from dataclasses import asdict, dataclass
from enum import Enum
from typing import IO, Optional, Sequence, Union

from .errors import (ChunkTooSmall, InfeasibleLayout, InvalidConfig, MalformedTrace,
                     NoFeasibleChunkSize, OutOfRange)
from .hardware import HardwareProfile, transfer_time
from .trace import ModelTrace, block_activation_bytes

MiB = 2**20
DEFAULT_GRID = tuple(MiB * 2**k for k in range(4, 11))  # 16 MiB .. 1 GiB


@dataclass(frozen=True)
class PlanConfig:
    s_chunk: int
    n_chunk: int
    n_persist: int
    n_buffer: int
    n_block: int
    n_interval: int
    n_swap: int
    n_checkpoint: int

    def validate(self) -> "PlanConfig":
        if not 0 <= self.n_persist <= self.n_chunk:
            raise InvalidConfig(f"n_persist={self.n_persist} outside [0, {self.n_chunk}]")
        if not 0 <= self.n_buffer <= self.n_chunk - self.n_persist:
            raise InvalidConfig(f"n_buffer={self.n_buffer} outside [0, {self.n_chunk - self.n_persist}]")
        if self.n_persist < self.n_chunk and self.n_buffer < 1:
            raise InvalidConfig("non-persistent chunks need at least one buffer")
        if self.n_swap < 0 or self.n_checkpoint < 0 or self.n_swap + self.n_checkpoint > self.n_block:
            raise InvalidConfig("n_swap + n_checkpoint must lie in [0, n_block]")
        if self.n_interval < 1:
            raise InvalidConfig("n_interval must be >= 1")
        return self

    @property
    def key(self) -> tuple:
        return (self.n_persist, self.n_buffer, self.n_swap, self.n_checkpoint)


@dataclass(frozen=True)
class Chunk:
    chunk_id: int
    used_bytes: int
    op_index_span: tuple  # (first, last) operator index, inclusive
    block_ids: tuple


@dataclass(frozen=True)
class ChunkLayout:
    chunks: tuple
    s_chunk: int
    waste_bytes: int
    op_chunk: tuple  # operator index -> chunk id
    dtype_bytes: int = 2

    @property
    def n_chunk(self) -> int:
        return len(self.chunks)

    def block_chunk(self, block: int) -> int:
        for c in self.chunks:
            if block in c.block_ids:
                return c.chunk_id
        raise KeyError(block)


def _units(trace: ModelTrace):
    """Group operators into packing units: one per block, one per non-block op."""
    units = []
    for op in trace.ops:
        if op.block_id is not None and units and units[-1][0] == op.block_id:
            units[-1][1].append(op)
        else:
            units.append((op.block_id, [op]))
    return units


def max_unit_bytes(trace: ModelTrace) -> int:
    return max(sum(op.param_bytes for op in ops) for _, ops in _units(trace))


def pack_chunks(trace: ModelTrace, s_chunk: int) -> ChunkLayout:
    """Greedy execution-order packing that never splits a block across chunks."""
    chunks = []  # [used, first_op, last_op, block_ids]
    op_chunk = []
    for block, ops in _units(trace):
        nbytes = sum(op.param_bytes for op in ops)
        if nbytes > s_chunk:
            what = f"block {block}" if block is not None else f"operator {ops[0].index}"
            raise ChunkTooSmall(f"{what} needs {nbytes} bytes > s_chunk={s_chunk}")
        if not chunks or (nbytes > 0 and chunks[-1][0] + nbytes > s_chunk):
            chunks.append([0, ops[0].index, ops[0].index, []])
        cur = chunks[-1]
        cur[0] += nbytes
        cur[2] = ops[-1].index
        if block is not None:
            cur[3].append(block)
        op_chunk.extend([len(chunks) - 1] * len(ops))
    out = tuple(Chunk(i, used, (a, b), tuple(bids)) for i, (used, a, b, bids) in enumerate(chunks))
    waste = sum(s_chunk - c.used_bytes for c in out)
    return ChunkLayout(out, int(s_chunk), waste, tuple(op_chunk), trace.dtype_bytes)


def chunk_size_search(trace: ModelTrace, grid: Optional[Sequence[int]] = None):
    """Return ``(s_chunk, layout)`` minimizing waste over ``grid``; ties go to the smaller size."""
    grid = DEFAULT_GRID if grid is None else grid
    if not grid:
        raise NoFeasibleChunkSize("empty grid")
    floor = max_unit_bytes(trace)
    best = None
    for size in sorted(set(int(g) for g in grid)):
        if size < floor:
            continue
        layout = pack_chunks(trace, size)
        if best is None or layout.waste_bytes < best[1].waste_bytes:
            best = (size, layout)
    if best is None:
        raise NoFeasibleChunkSize(f"no grid size holds the largest block ({floor} bytes)")
    return best


def assign_persistent(layout: ChunkLayout, n_persist: int):
    """Split chunk ids into (persistent, non_persistent); persistent ones come first."""
    if not 0 <= n_persist <= layout.n_chunk:
        raise OutOfRange(f"n_persist={n_persist} outside [0, {layout.n_chunk}]")
    ids = [c.chunk_id for c in layout.chunks]
    return tuple(ids[:n_persist]), tuple(ids[n_persist:])


def block_fwd_time(trace: ModelTrace, block: int) -> float:
    return sum(op.t_fwd for op in trace.ops if op.block_id == block)


def compute_interval(trace: ModelTrace, hw: HardwareProfile) -> int:
    """Smallest k >= 1 such that k average blocks of forward compute cover one block swap-out."""
    n = trace.n_blocks
    if n < 1:
        raise ValueError("trace has no transformer blocks")
    mean_compute = sum(block_fwd_time(trace, b) for b in range(n)) / n
    mean_swap = transfer_time(sum(block_activation_bytes(trace, b) for b in range(n)) / n, hw.d2h_bw)
    if mean_compute <= 0:
        return n
    k = max(1, -int(-mean_swap // mean_compute))
    # guard the float division at exact multiples
    while k > 1 and (k - 1) * mean_compute >= mean_swap:
        k -= 1
    while k < n and k * mean_compute < mean_swap:
        k += 1
    return min(k, n)


class Strategy(str, Enum):
    SWAP = "swap"
    CHECKPOINT = "checkpoint"
    NONE = "none"


@dataclass(frozen=True)
class BlockSchedule:
    strategies: tuple

    def count(self, s: Strategy) -> int:
        return sum(1 for x in self.strategies if x is s)

    def blocks(self, s: Strategy) -> list:
        return [b for b, x in enumerate(self.strategies) if x is s]


def schedule_feasible(n_block: int, n_swap: int, n_checkpoint: int, n_interval: int) -> bool:
    if n_swap < 0 or n_checkpoint < 0 or n_swap + n_checkpoint > n_block:
        return False
    return n_swap == 0 or (n_swap - 1) * (n_interval + 1) < n_swap + n_checkpoint


def build_block_schedule(n_block: int, n_swap: int, n_checkpoint: int, n_interval: int) -> BlockSchedule:
    """Swap blocks every ``n_interval + 1`` positions from block 0, checkpoints in the
    gaps, unoptimized blocks as the tail."""
    if n_swap < 0 or n_checkpoint < 0 or n_swap + n_checkpoint > n_block or n_interval < 1:
        raise InfeasibleLayout(f"invalid counts n_block={n_block} n_swap={n_swap} "
                               f"n_checkpoint={n_checkpoint} n_interval={n_interval}")
    if not schedule_feasible(n_block, n_swap, n_checkpoint, n_interval):
        raise InfeasibleLayout(f"{n_swap} swap blocks spaced by {n_interval} do not fit in "
                               f"an optimized prefix of {n_swap + n_checkpoint} blocks")
    prefix = n_swap + n_checkpoint
    swaps = {j * (n_interval + 1) for j in range(n_swap)}
    out = []
    for b in range(n_block):
        if b in swaps:
            out.append(Strategy.SWAP)
        elif b < prefix:
            out.append(Strategy.CHECKPOINT)
        else:
            out.append(Strategy.NONE)
    return BlockSchedule(tuple(out))


def schedule_for(config: PlanConfig) -> BlockSchedule:
    return build_block_schedule(config.n_block, config.n_swap, config.n_checkpoint, config.n_interval)


def make_config(layout: ChunkLayout, trace: ModelTrace, n_interval: int, n_persist: int,
                n_buffer: int, n_swap: int = 0, n_checkpoint: int = 0) -> PlanConfig:
    return PlanConfig(layout.s_chunk, layout.n_chunk, n_persist, n_buffer, trace.n_blocks,
                      n_interval, n_swap, n_checkpoint).validate()


# -- plan files ---------------------------------------------------------------

def plan_to_dict(config: PlanConfig, layout: Optional[ChunkLayout] = None,
                 schedule: Optional[BlockSchedule] = None) -> dict:
    doc = {"config": asdict(config)}
    if layout is not None:
        doc["chunks"] = [
            {"chunk_id": c.chunk_id, "used_bytes": c.used_bytes,
             "op_index_span": list(c.op_index_span), "block_ids": list(c.block_ids)}
            for c in layout.chunks
        ]
    if schedule is not None:
        doc["strategies"] = [s.value for s in schedule.strategies]
    return doc


def load_plan(source: Union[IO, str, bytes, dict]) -> PlanConfig:
    """Read the PlanConfig from a plan document (plan, estimate or outcome file)."""
    if isinstance(source, dict):
        doc = source
    else:
        if hasattr(source, "read"):
            source = source.read()
        try:
            doc = json.loads(source)
        except json.JSONDecodeError as exc:
            raise MalformedTrace(f"invalid plan JSON: {exc}") from exc
    cfg = doc.get("config", doc.get("best")) if isinstance(doc, dict) else None
    if not isinstance(cfg, dict):
        raise MalformedTrace("plan document has no 'config' object")
    try:
        return PlanConfig(**{k: int(cfg[k]) for k in PlanConfig.__dataclass_fields__}).validate()
    except KeyError as exc:
        raise MalformedTrace(f"plan config missing {exc}") from None

