import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from tnsim import _kernels_py, kernels

try:
    from tnsim import _kernels as compiled
except ImportError:
    compiled = None

needs_compiled = pytest.mark.skipif(compiled is None, reason="compiled kernels not built")


def random_graph(seed, n, m_extra):
    rng = np.random.default_rng(seed)
    labels = [[] for _ in range(n)]
    ext = []
    for i in range(1, n):
        j = int(rng.integers(i))
        labels[i].append(len(ext))
        labels[j].append(len(ext))
        ext.append(float(rng.integers(2, 5)))
    for _ in range(m_extra if n > 1 else 0):
        i, j = rng.choice(n, 2, replace=False)
        labels[i].append(len(ext))
        labels[j].append(len(ext))
        ext.append(float(rng.integers(2, 5)))
    labels[0].append(len(ext))
    ext.append(2.0)
    return labels, ext


class TestSplitMix:
    def test_reference_stream(self):
        # first outputs of splitmix64 seeded with 0
        r = _kernels_py.SplitMix64(0)
        r.uniform()
        assert r.state == 0x9E3779B97F4A7C15

    def test_open_interval(self):
        r = _kernels_py.SplitMix64(123)
        u = [r.uniform() for _ in range(1000)]
        assert 0.0 < min(u) and max(u) < 1.0


class TestPurePython:
    def test_chain(self):
        # A(2,4) B(4,8) C(8,2): B.C first
        path = _kernels_py.greedy_path([[0, 1], [1, 2], [2, 3]], [2.0, 4.0, 8.0, 2.0])
        assert path[0] == (1, 2)
        assert _kernels_py.tree_cost([[0, 1], [1, 2], [2, 3]], [2.0, 4.0, 8.0, 2.0], path)[0] == 80

    def test_disconnected(self):
        path = _kernels_py.greedy_path([[0], [0], [1], [1]], [2.0, 3.0])
        assert len(path) == 3

    def test_selected_module(self):
        assert kernels.IMPLEMENTATION in ("cython", "python")


@needs_compiled
class TestParity:
    @given(seed=st.integers(0, 2**31), n=st.integers(1, 14), extra=st.integers(0, 10),
           temperature=st.sampled_from([0.0, 0.5, 1.0]))
    def test_identical_paths(self, seed, n, extra, temperature):
        labels, ext = random_graph(seed, n, extra)
        p1 = _kernels_py.greedy_path(labels, ext, temperature, seed)
        p2 = compiled.greedy_path(labels, ext, temperature, seed)
        assert [tuple(x) for x in p1] == [tuple(x) for x in p2]
        assert _kernels_py.tree_cost(labels, ext, p1) == compiled.tree_cost(labels, ext, p2)

    def test_many_labels(self):
        # more than 64 labels exercises multi-word bitsets
        labels, ext = random_graph(3, 60, 40)
        assert len(ext) > 64
        assert _kernels_py.greedy_path(labels, ext, 1.0, 9) == [
            tuple(x) for x in compiled.greedy_path(labels, ext, 1.0, 9)
        ]


class TestSelection:
    @pytest.mark.parametrize("env,expected", [("1", "python"), ("", None)])
    def test_env_override(self, env, expected):
        import os
        import subprocess
        import sys

        out = subprocess.run(
            [sys.executable, "-c", "from tnsim import kernels, plan; print(kernels.IMPLEMENTATION)"],
            env={**os.environ, "TNSIM_PURE_PYTHON": env},
            capture_output=True,
            text=True,
            check=True,
        ).stdout.strip()
        assert out == (expected or ("cython" if compiled is not None else "python"))
