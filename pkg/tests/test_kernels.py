import numpy as np
import pytest

from pct import kernels


def naive_map(n, src_strides, src_radices, dst_strides):
    out = []
    for i in range(n):
        acc = 0
        for s, r, d in zip(src_strides, src_radices, dst_strides):
            acc += ((i // s) % r) * d
        out.append(acc)
    return np.asarray(out, dtype=np.int64)


BACKENDS = ["numpy"] + (["numba"] if kernels.HAS_NUMBA else [])


@pytest.fixture(params=BACKENDS)
def backend(request):
    before = kernels.backend()
    kernels.set_backend(request.param)
    yield request.param
    kernels.set_backend(before)


def test_mixed_radix_map_matches_naive(backend):
    rng = np.random.default_rng(7)
    for _ in range(25):
        radices = rng.integers(2, 4, size=rng.integers(1, 5))
        n = int(np.prod(radices))
        strides = np.cumprod(np.concatenate(([1], radices[:-1])))
        k = rng.integers(1, len(radices) + 1)
        pick = sorted(rng.choice(len(radices), size=k, replace=False))
        sub_radices = radices[pick]
        sub_strides = np.cumprod(np.concatenate(([1], sub_radices[:-1])))
        got = kernels.mixed_radix_map(n, strides[pick], radices[pick], sub_strides)
        want = naive_map(n, strides[pick], radices[pick], sub_strides)
        assert np.array_equal(got, want)


def test_mixed_radix_map_empty_slots(backend):
    out = kernels.mixed_radix_map(6, [], [], [])
    assert np.array_equal(out, np.zeros(6, dtype=np.int64))


def test_group_any_matches_naive(backend):
    rng = np.random.default_rng(11)
    for _ in range(25):
        n_groups = int(rng.integers(1, 9))
        n = int(rng.integers(0, 40))
        groups = rng.integers(0, n_groups, size=n)
        mask = rng.random(n) < 0.4
        got = kernels.group_any(groups, mask, n_groups)
        want = np.zeros(n_groups, dtype=bool)
        for g, m in zip(groups, mask):
            if m:
                want[g] = True
        assert np.array_equal(got, want)


def test_backends_agree():
    if not kernels.HAS_NUMBA:
        pytest.skip("numba unavailable")
    rng = np.random.default_rng(3)
    radices = np.array([2, 3, 2, 2], dtype=np.int64)
    n = int(np.prod(radices))
    strides = np.cumprod(np.concatenate(([1], radices[:-1])))
    before = kernels.backend()
    try:
        kernels.set_backend("numpy")
        a = kernels.mixed_radix_map(n, strides, radices, strides)
        kernels.set_backend("numba")
        b = kernels.mixed_radix_map(n, strides, radices, strides)
    finally:
        kernels.set_backend(before)
    assert np.array_equal(a, b)


def test_set_backend_rejects_unknown():
    with pytest.raises(ValueError):
        kernels.set_backend("fortran")
