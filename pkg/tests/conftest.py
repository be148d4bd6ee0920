import random
from dataclasses import replace

import pytest

from memplan.hardware import HardwareProfile
from memplan.layout import chunk_size_search
from memplan.presets import get_hardware, get_model
from memplan.trace import ModelTrace, OperatorRecord, synthesize_trace

MiB = 2**20


def make_op(i, block=None, t_fwd=1.0, t_bwd=2.0, params=0, act=0, dcp=0, dpp=0, dco=0, dpo=0, name=None):
    return OperatorRecord(i, name or f"op{i}", block, float(t_fwd), float(t_bwd), int(params), int(act),
                          int(dcp), int(dpp), int(dco), int(dpo))


def random_trace(rng: random.Random, n_ops=None, n_blocks=None, max_act=1000, with_deltas=True,
                 params_range=(0, 100), m_fwd=None) -> ModelTrace:
    """Toy trace: an optional leading and trailing non-block op around contiguous blocks."""
    n_ops = n_ops or rng.randint(5, 20)
    n_blocks = n_blocks if n_blocks is not None else rng.randint(1, max(1, min(8, n_ops - 2)))
    n_inner = n_ops - 2
    n_blocks = max(1, min(n_blocks, n_inner))
    cuts = sorted(rng.sample(range(1, n_inner), n_blocks - 1)) if n_blocks > 1 else []
    bounds = [0] + cuts + [n_inner]
    owners = [None]
    for b in range(n_blocks):
        owners += [b] * (bounds[b + 1] - bounds[b])
    owners.append(None)
    ops = []
    for i, b in enumerate(owners):
        dco = rng.randint(-50, 50) if with_deltas else 0
        dcp = rng.randint(-50, 50) if with_deltas else 0
        ops.append(make_op(
            i, b,
            t_fwd=rng.uniform(0.1, 2.0), t_bwd=rng.uniform(0.2, 4.0),
            params=rng.randint(*params_range), act=rng.randint(0, max_act),
            dcp=dcp, dpp=max(0, dcp) + (rng.randint(0, 200) if with_deltas else 0),
            dco=dco, dpo=max(0, dco) + (rng.randint(0, 300) if with_deltas else 0),
        ))
    m_fwd = rng.randint(1000, 5000) if m_fwd is None else m_fwd
    return ModelTrace(ops, m_fwd, n_blocks)


def toy_hw(**kw) -> HardwareProfile:
    base = dict(h2d_bw=100.0, d2h_bw=100.0, coll_alpha=0.0, coll_bw=100.0, world_size=1,
                gpu_mem=1e18, cpu_mem=1e18, cpu_optim_rate=1e3, gpu_optim_rate=1e4)
    base.update(kw)
    return HardwareProfile(**base)


@pytest.fixture(scope="session")
def gpt2_10b_16():
    trace = synthesize_trace(replace(get_model("gpt2-10b"), batch_size=16), name="gpt2-10b")
    return trace, chunk_size_search(trace)[1]


@pytest.fixture(scope="session")
def gpt2_1b_8():
    trace = synthesize_trace(replace(get_model("gpt2-1b"), batch_size=8), name="gpt2-1b")
    return trace, chunk_size_search(trace)[1]


@pytest.fixture(scope="session")
def rtx():
    return get_hardware("rtx3090x4")


@pytest.fixture(scope="session")
def a100():
    return get_hardware("a100x4")
