"""Hardware profile and the elementary transfer/collective time primitives."""

from __future__ import annotations

import json
from dataclasses import asdict, dataclass, fields, replace
from typing import IO, Union

from .errors import InvariantViolation, MalformedTrace, ZeroBandwidth


@dataclass(frozen=True)
class HardwareProfile:
    h2d_bw: float
    d2h_bw: float
    coll_alpha: float
    coll_bw: float
    world_size: int
    gpu_mem: float
    cpu_mem: float
    cpu_optim_rate: float
    gpu_optim_rate: float

    def __post_init__(self):
        for f in fields(self):
            v = getattr(self, f.name)
            if f.name == "coll_alpha":
                if v < 0:
                    raise InvariantViolation("coll_alpha must be non-negative")
            elif f.name == "world_size":
                if int(v) != v or v < 1:
                    raise InvariantViolation("world_size must be an integer >= 1")
            elif not v > 0:
                raise InvariantViolation(f"{f.name} must be strictly positive")

    def with_overrides(self, **kw) -> "HardwareProfile":
        return replace(self, **{k: v for k, v in kw.items() if v is not None})


def transfer_time(nbytes: float, bw: float) -> float:
    if not bw > 0:
        raise ZeroBandwidth(f"bandwidth must be positive, got {bw}")
    return nbytes / bw


def gather_time(chunk_bytes: float, hw: HardwareProfile) -> float:
    """Ring all-gather of a chunk sharded over ``hw.world_size`` ranks."""
    w = hw.world_size
    if w == 1:
        return 0.0
    return hw.coll_alpha + chunk_bytes * (w - 1) / (w * hw.coll_bw)


def reduce_time(chunk_bytes: float, hw: HardwareProfile) -> float:
    # gradient reduce-scatter uses the same ring cost as the gather
    return gather_time(chunk_bytes, hw)


def contended_bandwidth(base_bw: float, n_streams: int) -> float:
    """Equal share of ``base_bw`` among ``n_streams`` concurrent transfers."""
    if n_streams < 1:
        raise ValueError("n_streams must be >= 1")
    return base_bw / n_streams


def load_profile(source: Union[IO, str, bytes]) -> HardwareProfile:
    if hasattr(source, "read"):
        source = source.read()
    try:
        doc = json.loads(source)
    except json.JSONDecodeError as exc:
        raise MalformedTrace(f"invalid profile JSON: {exc}") from exc
    names = {f.name for f in fields(HardwareProfile)}
    if not isinstance(doc, dict) or set(doc) != names:
        raise MalformedTrace(f"profile must have exactly the keys {sorted(names)}")
    return HardwareProfile(**doc)


def profile_to_dict(hw: HardwareProfile) -> dict:
    return asdict(hw)
