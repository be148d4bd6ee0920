"""Memory-management planner for chunked, offloaded LLM training.

Cost models, a configuration search and a discrete-event simulator for
ZeRO-style chunk offloading combined with activation swapping and
checkpointing.
"""

__version__ = "0.1.0"

from .cost import CostEstimate, CostModel, estimate_bwd, estimate_fwd, estimate_iteration, estimate_optim, estimate_peak_memory
from .errors import *  # noqa: F401,F403
from .hardware import HardwareProfile, contended_bandwidth, gather_time, load_profile, reduce_time, transfer_time
from .layout import (BlockSchedule, Chunk, ChunkLayout, PlanConfig, Strategy, assign_persistent,
                     build_block_schedule, chunk_size_search, compute_interval, make_config, pack_chunks,
                     schedule_for)
from .presets import get_hardware, get_model
from .search import SearchOutcome, brute_force_optimal, enumerate_candidates, find_optimal
from .sim import SimulationResult, ValidationReport, simulate, validate
from .trace import (CalibrationConstants, ModelSpec, ModelTrace, OperatorRecord, load_trace, save_trace,
                    synthesize_trace)
