"""
Tests for workers module
"""

import threading

import pytest

from src.workers import parallel_map


class TestParallelMap:
    """Order-preserving fan-out."""

    def test_inline_without_threads(self):
        names = parallel_map(lambda _: threading.current_thread().name, range(3))
        assert names == [threading.current_thread().name] * 3

    @pytest.mark.parametrize("threads", [None, 1, 2, 8])
    def test_order_preserved(self, threads):
        assert parallel_map(lambda x: x * x, range(20), threads) == [x * x for x in range(20)]

    def test_pool_thread_names(self):
        names = parallel_map(lambda _: threading.current_thread().name, range(4), threads=2, name="sampler")
        assert all(name.startswith("sampler") for name in names)

    def test_errors_propagate(self):
        def fail(x):
            if x == 3:
                raise ValueError("boom")
            return x

        with pytest.raises(ValueError):
            parallel_map(fail, range(5), threads=2)

    def test_empty(self):
        assert parallel_map(str, [], threads=4) == []
