"""Named model and hardware presets.

Model presets follow the published architecture grid (hidden size, blocks,
heads).  Hardware presets describe two 4-GPU testbeds.  Optimizer
throughputs and the collective latency are placeholders that should be
calibrated against the real machine; ``CALIBRATION_PLACEHOLDERS`` lists them.
"""

from __future__ import annotations

from dataclasses import replace

from .errors import UnknownPreset
from .hardware import HardwareProfile
from .trace import ModelSpec

MODELS = {
    "gpt2-1b": ModelSpec(hidden_size=1536, n_blocks=32, n_heads=16),
    "mistral-7b": ModelSpec(hidden_size=4096, n_blocks=32, n_heads=32, vocab_size=32000, ffn_size=14336,
                            n_kv_heads=8, gated_mlp=True, tied_embeddings=False),
    "gpt2-10b": ModelSpec(hidden_size=4096, n_blocks=48, n_heads=32),
    "opt-13b": ModelSpec(hidden_size=5120, n_blocks=40, n_heads=40, vocab_size=50272),
    "llama-13b": ModelSpec(hidden_size=5120, n_blocks=40, n_heads=40, vocab_size=32000, ffn_size=13824,
                           gated_mlp=True, tied_embeddings=False),
    "gpt2-15b": ModelSpec(hidden_size=8192, n_blocks=18, n_heads=64),
    "gpt2-20b": ModelSpec(hidden_size=8192, n_blocks=24, n_heads=64),
    "gpt2-30b": ModelSpec(hidden_size=8192, n_blocks=36, n_heads=64),
    "gpt2-40b": ModelSpec(hidden_size=8192, n_blocks=50, n_heads=64),
    "opt-30b": ModelSpec(hidden_size=7168, n_blocks=48, n_heads=56, vocab_size=50272),
    "llama-34b": ModelSpec(hidden_size=8192, n_blocks=48, n_heads=64, vocab_size=32000, ffn_size=22016,
                           n_kv_heads=8, gated_mlp=True, tied_embeddings=False),
}

# nominal parameter counts the presets are meant to reproduce
NOMINAL_PARAMS = {
    "gpt2-1b": 1e9,
    "mistral-7b": 7e9,
    "gpt2-10b": 10e9,
    "opt-13b": 13e9,
    "llama-13b": 13e9,
    "gpt2-15b": 15e9,
    "gpt2-20b": 20e9,
    "gpt2-30b": 30e9,
    "gpt2-40b": 40e9,
    "opt-30b": 30e9,
    "llama-34b": 34e9,
}

_RTX3090X4 = HardwareProfile(
    h2d_bw=15.8e9,
    d2h_bw=15.8e9,
    coll_alpha=20e-6,
    coll_bw=7.9e9,  # no NVLink: ring traffic crosses the PCIe 3 root complex
    world_size=4,
    gpu_mem=24e9,
    cpu_mem=384e9,
    cpu_optim_rate=1e9,
    gpu_optim_rate=1e10,
)

_A100X4 = HardwareProfile(
    h2d_bw=31.5e9,
    d2h_bw=31.5e9,
    coll_alpha=20e-6,
    coll_bw=300e9,
    world_size=4,
    gpu_mem=80e9,
    cpu_mem=1e12,
    cpu_optim_rate=1e9,
    gpu_optim_rate=1e10,
)

HARDWARE = {
    "rtx3090x4": _RTX3090X4,
    "rtx3090x1": replace(_RTX3090X4, world_size=1),
    "a100x4": _A100X4,
    "a100x1": replace(_A100X4, world_size=1),
}

CALIBRATION_PLACEHOLDERS = ("coll_alpha", "cpu_optim_rate", "gpu_optim_rate", "coll_bw (rtx3090 only)")


def get_model(name: str) -> ModelSpec:
    try:
        return MODELS[name]
    except KeyError:
        raise UnknownPreset(f"unknown model preset {name!r}; known: {', '.join(sorted(MODELS))}") from None


def get_hardware(name: str) -> HardwareProfile:
    try:
        return HARDWARE[name]
    except KeyError:
        raise UnknownPreset(f"unknown hardware preset {name!r}; known: {', '.join(sorted(HARDWARE))}") from None
