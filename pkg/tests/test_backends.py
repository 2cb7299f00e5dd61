import numpy as np
import pytest
from oracles import naive_path_length

from lshstream import build_forest
from lshstream.backend import available_backends, default_backend, kernel_for

BACKENDS = available_backends()


def test_compiled_backend_present():
    # sanity for this environment: the extension should have built
    assert "python" in BACKENDS
    assert "cython" in BACKENDS


@pytest.mark.parametrize("backend", BACKENDS)
def test_kernel_matches_naive_walk_exactly(backend):
    rng = np.random.default_rng(100)
    for seed in range(5):
        window = rng.normal(0, 1.5, (int(rng.integers(40, 200)), 3))
        forest = build_forest(window, 4, seed)
        kernel = kernel_for(forest.flat, backend)
        for x in rng.normal(0, 2.5, (10, 3)):
            got = kernel.path_lengths(x, 1.0, 2)
            for ti, tree in enumerate(forest.trees):
                assert got[ti] == naive_path_length(x, tree)


def test_backends_agree_bit_for_bit():
    if len(BACKENDS) < 2:
        pytest.skip("only one backend available")
    rng = np.random.default_rng(7)
    window = rng.normal(0, 1, (150, 5))
    forest = build_forest(window, 12, 3)
    queries = rng.normal(0, 2, (100, 5))
    for g, v in ((1.0, 2), (2.0, 2), (1.0, 3)):
        a = kernel_for(forest.flat, "cython").path_lengths_batch(queries, g, v)
        b = kernel_for(forest.flat, "python").path_lengths_batch(queries, g, v)
        assert np.array_equal(a, b)


@pytest.mark.parametrize("backend", BACKENDS)
def test_batch_matches_single(backend):
    rng = np.random.default_rng(21)
    forest = build_forest(rng.normal(0, 1, (90, 4)), 6, 2)
    queries = rng.normal(0, 1, (25, 4))
    kernel = kernel_for(forest.flat, backend)
    batch = kernel.path_lengths_batch(queries, 1.0, 2)
    for i, x in enumerate(queries):
        assert np.array_equal(batch[i], kernel.path_lengths(x, 1.0, 2))


@pytest.mark.parametrize("backend", BACKENDS)
def test_kernel_validates_shapes(backend):
    forest = build_forest(np.random.default_rng(0).normal(0, 1, (50, 3)), 2, 1)
    kernel = kernel_for(forest.flat, backend)
    with pytest.raises(ValueError):
        kernel.path_lengths(np.zeros(4), 1.0, 2)
    with pytest.raises(ValueError):
        kernel.path_lengths_batch(np.zeros((5, 2)), 1.0, 2)


def test_unknown_backend_rejected():
    forest = build_forest(np.ones((4, 2)), 1, 1)
    with pytest.raises(ValueError):
        kernel_for(forest.flat, "fortran")


def test_env_override(monkeypatch):
    monkeypatch.setenv("LSHSTREAM_BACKEND", "python")
    assert default_backend() == "python"
    monkeypatch.setenv("LSHSTREAM_BACKEND", "nope")
    with pytest.raises(ValueError):
        default_backend()


def test_kernels_cached_per_flat():
    forest = build_forest(np.random.default_rng(1).normal(0, 1, (30, 2)), 2, 1)
    assert kernel_for(forest.flat) is kernel_for(forest.flat)
