"""Compiled and pure-Python kernels must agree exactly."""

import numpy as np
import pytest

from hypogeo import _kernels, _pykernels

try:
    from hypogeo import _ckernels
except ImportError:  # pragma: no cover - build without a compiler
    _ckernels = None

BACKENDS = [pytest.param(_pykernels, id="python")]
if _ckernels is not None:
    BACKENDS.append(pytest.param(_ckernels, id="cython"))


def _dense_product(ka, ca, kb, cb):
    out = {}
    for a, x in zip(ka, ca):
        for b, y in zip(kb, cb):
            out[a + b] = out.get(a + b, 0) + x * y
    return {k: v for k, v in out.items() if v}


@pytest.mark.parametrize("impl", BACKENDS)
def test_poly_mul_matches_reference(impl, rng):
    for _ in range(30):
        na, nb = rng.integers(1, 30, 2)
        ka = np.unique(rng.integers(0, 200, na)).astype(np.int64)
        kb = np.unique(rng.integers(0, 200, nb)).astype(np.int64)
        ca = [int(v) for v in rng.integers(-1000, 1000, ka.size)]
        cb = [int(v) for v in rng.integers(-1000, 1000, kb.size)]
        keys, coefs = impl.poly_mul_packed(ka, ca if impl is _pykernels else np.array(ca, np.int64),
                                           kb, cb if impl is _pykernels else np.array(cb, np.int64))
        got = {int(k): int(c) for k, c in zip(keys, coefs)}
        assert got == _dense_product(ka.tolist(), ca, kb.tolist(), cb)


def test_python_kernel_handles_bigints():
    keys, coefs = _pykernels.poly_mul_packed(np.array([0, 1], np.int64), [10 ** 30, -1],
                                             np.array([0, 2], np.int64), [10 ** 30, 3])
    assert dict(zip(keys.tolist(), coefs)) == {0: 10 ** 60, 1: -10 ** 30, 2: 3 * 10 ** 30, 3: -3}


@pytest.mark.skipif(_ckernels is None, reason="compiled kernels not built")
def test_compiled_kernel_traps_overflow():
    big = np.array([2 ** 62], np.int64)
    with pytest.raises(OverflowError):
        _ckernels.poly_mul_packed(np.array([0], np.int64), big, np.array([0], np.int64), big)


def test_dispatch_falls_back_on_overflow():
    keys, coefs = _kernels.poly_mul(np.array([0], np.int64), [2 ** 62],
                                    np.array([0], np.int64), [2 ** 62])
    assert coefs == [2 ** 124]


@pytest.mark.parametrize("impl", BACKENDS)
def test_marching_squares_backends_agree(impl, rng):
    F = rng.standard_normal((23, 19))
    segs, cells = impl.marching_squares(F, 0.1)
    ref_s, ref_c = _pykernels.marching_squares(F, 0.1)
    order = np.lexsort(np.asarray(cells).T[::-1])
    ref_order = np.lexsort(np.asarray(ref_c).T[::-1])
    np.testing.assert_array_equal(np.asarray(cells)[order], np.asarray(ref_c)[ref_order])
    np.testing.assert_allclose(np.asarray(segs)[order], np.asarray(ref_s)[ref_order], atol=1e-14)


@pytest.mark.parametrize("impl", BACKENDS)
def test_marching_squares_vertical_line(impl):
    x = np.linspace(-1, 1, 9)
    F = np.repeat(x[:, None], 7, axis=1)
    segs, _ = impl.marching_squares(np.ascontiguousarray(F), 0.1)
    segs = np.asarray(segs)
    # level x = 0.1 sits at fractional index 4.4 along axis 0
    np.testing.assert_allclose(segs[:, [0, 2]], 4.4, atol=1e-12)
    assert len(segs) == 6


@pytest.mark.parametrize("impl", BACKENDS)
def test_marching_squares_empty(impl):
    segs, cells = impl.marching_squares(np.zeros((5, 5)), 1.0)
    assert len(segs) == 0 and len(cells) == 0
