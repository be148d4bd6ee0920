"""Execution-trace data model, JSON (de)serialization and synthetic trace generation.

A trace is the per-operator record of one training iteration: compute
times, parameter and retained-activation sizes, and the four memory deltas
(current/peak, before/within each operator) that the peak-memory replay
consumes.  Traces are immutable once built.
"""

from __future__ import annotations

import json
from dataclasses import asdict, dataclass, field, fields
from typing import IO, Any, Optional, Union

from .errors import BlockOutOfRange, InvariantViolation, MalformedTrace

_INT_FIELDS = ("param_bytes", "act_bytes", "d_cur_prior", "d_peak_prior", "d_cur_op", "d_peak_op")
_FLOAT_FIELDS = ("t_fwd", "t_bwd")


@dataclass(frozen=True)
class OperatorRecord:
    index: int
    name: str
    block_id: Optional[int]
    t_fwd: float
    t_bwd: float
    param_bytes: int
    act_bytes: int
    d_cur_prior: int = 0
    d_peak_prior: int = 0
    d_cur_op: int = 0
    d_peak_op: int = 0

    def check(self) -> None:
        """Raise InvariantViolation for the first record-level invariant broken."""
        i = self.index
        if self.t_fwd < 0 or self.t_bwd < 0:
            raise InvariantViolation("negative compute time", i)
        if self.param_bytes < 0 or self.act_bytes < 0:
            raise InvariantViolation("negative byte count", i)
        if self.d_peak_op < max(0, self.d_cur_op):
            raise InvariantViolation("d_peak_op below max(0, d_cur_op)", i)
        if self.d_peak_prior < max(0, self.d_cur_prior):
            raise InvariantViolation("d_peak_prior below max(0, d_cur_prior)", i)


@dataclass(frozen=True)
class ModelTrace:
    ops: tuple
    m_fwd: int
    n_blocks: int
    meta: dict = field(default_factory=dict, compare=True, hash=False)

    def __post_init__(self):
        object.__setattr__(self, "ops", tuple(self.ops))
        validate_trace(self)

    def __len__(self):
        return len(self.ops)

    @property
    def dtype_bytes(self) -> int:
        return int(self.meta.get("dtype_bytes", 2))

    def block_ops(self, block: int) -> list:
        return [op for op in self.ops if op.block_id == block]

    def total_param_bytes(self) -> int:
        return sum(op.param_bytes for op in self.ops)


def validate_trace(trace: ModelTrace) -> None:
    if not trace.ops:
        raise InvariantViolation("trace has no operators")
    if trace.m_fwd < 0:
        raise InvariantViolation("m_fwd is negative")
    if trace.n_blocks < 0:
        raise InvariantViolation("n_blocks is negative")
    last_block = -1
    for pos, op in enumerate(trace.ops):
        if op.index != pos:
            raise InvariantViolation(f"index {op.index} at position {pos}; indices must be contiguous", pos)
        op.check()
        if op.block_id is not None:
            if not 0 <= op.block_id < trace.n_blocks:
                raise InvariantViolation(f"block_id {op.block_id} outside [0, {trace.n_blocks})", pos)
            if op.block_id < last_block:
                raise InvariantViolation("block_id decreases along execution order", pos)
            last_block = op.block_id


def block_activation_bytes(trace: ModelTrace, block: int) -> int:
    """Bytes of activations retained by all operators of ``block``."""
    if not 0 <= block < trace.n_blocks:
        raise BlockOutOfRange(f"block {block} not in [0, {trace.n_blocks})")
    return sum(op.act_bytes for op in trace.ops if op.block_id == block)


# -- serialization -----------------------------------------------------------

_TOP_KEYS = {"meta", "m_fwd", "n_blocks", "ops"}
_OP_KEYS = {f.name for f in fields(OperatorRecord)}


def _parse_op(raw: Any, pos: int) -> OperatorRecord:
    if not isinstance(raw, dict):
        raise MalformedTrace(f"ops[{pos}] is not an object")
    unknown = set(raw) - _OP_KEYS
    if unknown:
        raise MalformedTrace(f"ops[{pos}] has unknown keys {sorted(unknown)}")
    missing = _OP_KEYS - set(raw)
    if missing:
        raise MalformedTrace(f"ops[{pos}] missing keys {sorted(missing)}")
    kw = {}
    for key in _INT_FIELDS + ("index",):
        v = raw[key]
        if isinstance(v, bool) or not isinstance(v, int):
            raise MalformedTrace(f"ops[{pos}].{key} must be an integer")
        kw[key] = v
    for key in _FLOAT_FIELDS:
        v = raw[key]
        if isinstance(v, bool) or not isinstance(v, (int, float)):
            raise MalformedTrace(f"ops[{pos}].{key} must be a number")
        kw[key] = float(v)
    bid = raw["block_id"]
    if bid is not None and (isinstance(bid, bool) or not isinstance(bid, int)):
        raise MalformedTrace(f"ops[{pos}].block_id must be an integer or null")
    if not isinstance(raw["name"], str):
        raise MalformedTrace(f"ops[{pos}].name must be a string")
    return OperatorRecord(name=raw["name"], block_id=bid, **kw)


def trace_from_dict(doc: Any) -> ModelTrace:
    if not isinstance(doc, dict):
        raise MalformedTrace("top level must be an object")
    unknown = set(doc) - _TOP_KEYS
    if unknown:
        raise MalformedTrace(f"unknown top-level keys {sorted(unknown)}")
    missing = _TOP_KEYS - set(doc)
    if missing:
        raise MalformedTrace(f"missing top-level keys {sorted(missing)}")
    if not isinstance(doc["ops"], list):
        raise MalformedTrace("ops must be an array")
    if not isinstance(doc["meta"], dict):
        raise MalformedTrace("meta must be an object")
    for key in ("m_fwd", "n_blocks"):
        if isinstance(doc[key], bool) or not isinstance(doc[key], int):
            raise MalformedTrace(f"{key} must be an integer")
    ops = [_parse_op(raw, pos) for pos, raw in enumerate(doc["ops"])]
    return ModelTrace(ops=ops, m_fwd=doc["m_fwd"], n_blocks=doc["n_blocks"], meta=dict(doc["meta"]))


def load_trace(source: Union[IO, str, bytes]) -> ModelTrace:
    """Parse and validate a JSON trace from a stream, text or bytes."""
    if hasattr(source, "read"):
        source = source.read()
    if isinstance(source, bytes):
        source = source.decode("utf-8")
    try:
        doc = json.loads(source)
    except json.JSONDecodeError as exc:
        raise MalformedTrace(f"invalid JSON: {exc}") from exc
    return trace_from_dict(doc)


def trace_to_dict(trace: ModelTrace) -> dict:
    return {
        "meta": dict(trace.meta),
        "m_fwd": trace.m_fwd,
        "n_blocks": trace.n_blocks,
        "ops": [asdict(op) for op in trace.ops],
    }


def save_trace(trace: ModelTrace, sink: Optional[IO] = None) -> str:
    text = json.dumps(trace_to_dict(trace), indent=1, sort_keys=True)
    if sink is not None:
        sink.write(text)
    return text


# -- synthesis ---------------------------------------------------------------

@dataclass(frozen=True)
class ModelSpec:
    hidden_size: int
    n_blocks: int
    n_heads: int
    vocab_size: int = 50257
    seq_len: int = 1024
    batch_size: int = 1
    dtype_bytes: int = 2
    # Optional architecture knobs; the defaults give the GPT-2 block layout.
    ffn_size: Optional[int] = None
    n_kv_heads: Optional[int] = None
    gated_mlp: bool = False
    tied_embeddings: bool = True

    def __post_init__(self):
        for name in ("hidden_size", "n_blocks", "n_heads", "vocab_size", "seq_len", "batch_size", "dtype_bytes"):
            if getattr(self, name) <= 0:
                raise ValueError(f"{name} must be positive")
        if self.hidden_size % self.n_heads:
            raise ValueError("hidden_size must be divisible by n_heads")
        if self.n_kv_heads is not None and (self.n_kv_heads <= 0 or self.n_heads % self.n_kv_heads):
            raise ValueError("n_kv_heads must divide n_heads")

    @property
    def ffn(self) -> int:
        return self.ffn_size if self.ffn_size is not None else 4 * self.hidden_size

    @property
    def kv_dim(self) -> int:
        kv = self.n_kv_heads if self.n_kv_heads is not None else self.n_heads
        return self.hidden_size * kv // self.n_heads

    def block_param_count(self) -> int:
        return sum(p for _, p, *_ in _block_ops(self))

    def param_count(self) -> int:
        h, v = self.hidden_size, self.vocab_size
        emb = v * h + (0 if self.gated_mlp else self.seq_len * h)
        head = 2 * h + (0 if self.tied_embeddings else v * h)
        return emb + self.n_blocks * self.block_param_count() + head


@dataclass(frozen=True)
class CalibrationConstants:
    flops_per_s: float = 30e12          # effective dense throughput of the target GPU
    act_coeff: float = 1.0              # scales every retained-activation size
    temp_frac: float = 0.25             # transient spike as a fraction of op output bytes
    residual_bytes: int = 256 * 2**20   # non-activation memory alive at the end of forward
    bwd_ratio: float = 2.0


def _block_ops(s: ModelSpec):
    """(name, params, flops/token, output width, retained act width) per block op.

    Widths are in units of hidden-size elements per token; flops are per token.
    """
    h, f, kv = s.hidden_size, s.ffn, s.kv_dim
    bias = 0 if s.gated_mlp else 1
    seq = s.seq_len
    if s.gated_mlp:
        up_params, up_out, down_act = 2 * h * f, 2 * f / h, 3 * f / h
    else:
        up_params, up_out, down_act = h * f + bias * f, f / h, 2 * f / h + 0.5
    qkv_params = h * (h + 2 * kv) + bias * (h + 2 * kv)
    return [
        ("ln1", 2 * h, 8 * h, 1.0, 1.0),
        ("qkv_proj", qkv_params, 2 * h * (h + 2 * kv), (h + 2 * kv) / h, 1.0),
        ("attn_core", 0, 4 * seq * h, 1.0, 3.0),
        ("out_proj", h * h + bias * h, 2 * h * h, 1.0, 1.5),
        ("ln2", 2 * h, 8 * h, 1.0, 1.0),
        ("mlp_up", up_params, 2 * h * f * (2 if s.gated_mlp else 1), up_out, 1.0),
        ("mlp_down", f * h + bias * h, 2 * f * h, 1.0, down_act),
    ]


def synthesize_trace(spec: ModelSpec, calib: CalibrationConstants = CalibrationConstants(), name: str = "") -> ModelTrace:
    """Build a deterministic GPT-style trace from architecture numbers.

    Compute time is analytic FLOPs over ``calib.flops_per_s``; backward is
    ``calib.bwd_ratio`` times forward.  Retained activations scale with
    batch * seq * hidden.  Measured deltas are replaced by a transient spike
    of ``temp_frac`` of each op's output.
    """
    h, v, d = spec.hidden_size, spec.vocab_size, spec.dtype_bytes
    tokens = spec.batch_size * spec.seq_len
    tok_bytes = tokens * h * d  # one hidden-size activation tensor
    ops = []

    def add(op_name, block, params, flops, out_width, act_width, prior_spike=0):
        t_fwd = flops / calib.flops_per_s
        ops.append(OperatorRecord(
            index=len(ops),
            name=op_name,
            block_id=block,
            t_fwd=t_fwd,
            t_bwd=calib.bwd_ratio * t_fwd,
            param_bytes=int(params) * d,
            act_bytes=int(round(act_width * calib.act_coeff * tok_bytes)),
            d_cur_prior=0,
            d_peak_prior=int(round(prior_spike)),
            d_cur_op=0,
            d_peak_op=int(round(calib.temp_frac * out_width * tok_bytes)),
        ))

    emb_params = v * h + (0 if spec.gated_mlp else spec.seq_len * h)
    add("embedding", None, emb_params, tokens * h, 1.0, 1.0)
    for b in range(spec.n_blocks):
        for op_name, params, flops, out_w, act_w in _block_ops(spec):
            # softmax/dropout between hooked modules surface as inter-op spikes
            prior = calib.temp_frac * tok_bytes if op_name == "attn_core" else 0
            add(f"block{b}.{op_name}", b, params, tokens * flops, out_w, act_w, prior)
    head_params = 2 * h + (0 if spec.tied_embeddings else v * h)
    add("lm_head", None, head_params, tokens * 2 * h * v, v / h, 1.0 + v / h)

    meta = {
        "model": name,
        "batch_size": spec.batch_size,
        "seq_len": spec.seq_len,
        "hidden_size": h,
        "dtype_bytes": d,
        "flops_per_s": calib.flops_per_s,
    }
    return ModelTrace(ops=ops, m_fwd=int(calib.residual_bytes), n_blocks=spec.n_blocks, meta=meta)

