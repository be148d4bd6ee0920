import os
import subprocess
import sys

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from memplan import _kernels_py, kernels

try:
    from memplan import _kernels as _kernels_c
except ImportError:  # pragma: no cover - build without Cython
    _kernels_c = None

needs_ext = pytest.mark.skipif(_kernels_c is None, reason="compiled extension not built")


def test_forward_hand_example():
    # two chunks, nothing persistent: max(0, 8) + max(10, 12) + max(10, 0)
    assert _kernels_py.fwd_time([10.0, 10.0], [8.0, 12.0], 0) == 30.0
    # first chunk persistent: its prefetch term vanishes
    assert _kernels_py.fwd_time([10.0, 10.0], [8.0, 12.0], 1) == 0.0 + 12.0 + 10.0
    assert _kernels_py.fwd_time([10.0, 10.0], [8.0, 12.0], 2) == 20.0


def test_backward_hand_example():
    comp, rec = [20.0, 20.0], [0.0, 0.0]
    red, off = [1.0, 1.0], [2.0, 2.0]
    # one buffer: chunk 1 must be re-fetched while chunk 2 computes
    assert _kernels_py.bwd_time(comp, rec, [25.0, 12.0], red, off, 0, 1) == 25.0 + 20.0 + 3.0
    # two buffers: both chunks stay resident from the forward pass
    assert _kernels_py.bwd_time(comp, rec, [25.0, 12.0], red, off, 0, 2) == 20.0 + 20.0 + 3.0
    # persistent chunks only reduce
    assert _kernels_py.bwd_time(comp, rec, [25.0, 12.0], red, off, 2, 0) == 20.0 + 20.0 + 1.0
    # recompute adds to its chunk's compute
    assert _kernels_py.bwd_time(comp, [5.0, 0.0], [0.0, 0.0], red, off, 2, 0) == 20.0 + 25.0 + 1.0


def test_replay_hand_example():
    # ops: act 10, 20, 30; cur starts with m_fwd=100 plus all acts
    peak, cur = _kernels_py.replay_peak([0, 0, 0], [0, 0, 0], [0, 0, 0], [0, 0, 5], [10, 20, 30],
                                        [0, 0, 0], [0, 0, 0], 160)
    assert (peak, cur) == (165, 100)
    # checkpoint bump on the last op
    peak, _ = _kernels_py.replay_peak([0, 0, 0], [0, 0, 0], [0, 0, 0], [0, 0, 0], [10, 20, 30],
                                      [1, 1, 1], [0, 0, 50], 110)
    assert peak == 160


def test_sweep_matches_scalar_calls():
    rng = np.random.default_rng(0)
    n = 7
    arrs = [rng.uniform(0, 5, n) for _ in range(7)]
    ps = np.array([0, 0, 1, 3, 3, 7])
    bs = np.array([3, 5, 3, 1, 4, 0])
    tf, tb = _kernels_py.sweep_times(*arrs, ps, bs)
    for t, (p, b) in enumerate(zip(ps, bs)):
        assert tf[t] == _kernels_py.fwd_time(arrs[0], arrs[1], p)
        assert tb[t] == _kernels_py.bwd_time(arrs[2], arrs[3], arrs[4], arrs[5], arrs[6], p, b)


floats = st.floats(0, 1e3, allow_nan=False, allow_infinity=False)


@needs_ext
@settings(max_examples=150, deadline=None)
@given(st.integers(1, 12), st.data())
def test_backends_bit_identical(n, data):
    vec = lambda: data.draw(st.lists(floats, min_size=n, max_size=n))
    cf, pf, cb, rc, pb, rd, of = (vec() for _ in range(7))
    np_ = data.draw(st.integers(0, n))
    nb = data.draw(st.integers(0, n - np_))
    assert _kernels_c.fwd_time(cf, pf, np_) == _kernels_py.fwd_time(cf, pf, np_)
    assert _kernels_c.bwd_time(cb, rc, pb, rd, of, np_, nb) == _kernels_py.bwd_time(cb, rc, pb, rd, of, np_, nb)
    ps, bs = [np_, np_, 0], [nb, 0, n]
    a = _kernels_py.sweep_times(cf, pf, cb, rc, pb, rd, of, ps, bs)
    b = _kernels_c.sweep_times(cf, pf, cb, rc, pb, rd, of, ps, bs)
    assert list(a[0]) == list(b[0]) and list(a[1]) == list(b[1])


@needs_ext
@settings(max_examples=150, deadline=None)
@given(st.integers(1, 15), st.data())
def test_replay_backends_identical(n, data):
    ints = lambda lo, hi: data.draw(st.lists(st.integers(lo, hi), min_size=n, max_size=n))
    args = (ints(-50, 50), ints(0, 100), ints(-50, 50), ints(0, 100), ints(0, 1000), ints(0, 1), ints(0, 500),
            data.draw(st.integers(0, 10**12)))
    assert _kernels_c.replay_peak(*args) == _kernels_py.replay_peak(*args)


def test_backend_selection():
    assert kernels.BACKEND in ("cython", "python")
    if _kernels_c is not None and os.environ.get("MEMPLAN_PURE_PYTHON") != "1":
        assert kernels.BACKEND == "cython"
    env = dict(os.environ, MEMPLAN_PURE_PYTHON="1")
    out = subprocess.run([sys.executable, "-c", "from memplan import kernels; print(kernels.BACKEND)"],
                         env=env, capture_output=True, text=True, check=True)
    assert out.stdout.strip() == "python"
