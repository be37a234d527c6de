import numpy as np
import pytest

from wct2.errors import ContractViolation
from wct2.tensor import FeatureMap
from wct2.wavelet import (
    WaveletSubbands,
    average_pool,
    average_unpool,
    haar_kernels,
    haar_pool,
    haar_unpool,
    max_pool_with_mask,
    max_unpool,
    split_kernels,
    split_pool,
    split_unpool,
)

from oracles import naive_pool, naive_unpool


def fm(data) -> FeatureMap:
    return FeatureMap(np.asarray(data, dtype=np.float32))


def random_even(rng, max_channels=8, max_side=32) -> FeatureMap:
    c = int(rng.integers(1, max_channels + 1))
    h = 2 * int(rng.integers(1, max_side // 2 + 1))
    w = 2 * int(rng.integers(1, max_side // 2 + 1))
    return fm(rng.standard_normal((c, h, w)))


class TestHaarKernels:
    def test_orthonormal(self):
        flat = haar_kernels().reshape(4, 4)
        np.testing.assert_allclose(flat @ flat.T, np.eye(4), atol=1e-7)

    def test_entries_are_half_magnitude(self):
        np.testing.assert_allclose(np.abs(haar_kernels()), 0.5, atol=1e-12)


class TestHaarPool:
    def test_constant_input(self):
        c = 3.5
        sb = haar_pool(fm(np.full((2, 4, 4), c)))
        np.testing.assert_allclose(sb.ll.data, 2 * c, atol=1e-6)
        for band in (sb.lh, sb.hl, sb.hh):
            np.testing.assert_allclose(band.data, 0.0, atol=1e-6)

    def test_single_window(self):
        a, b, c, d = 1.0, 2.0, 3.0, 4.0
        sb = haar_pool(fm(np.array([[[a, b], [c, d]]])))
        assert sb.ll.data[0, 0, 0] == pytest.approx((a + b + c + d) / 2)

    def test_matches_naive_correlation_oracle(self):
        rng = np.random.default_rng(31)
        x = rng.standard_normal((3, 8, 8)).astype(np.float32)
        sb = haar_pool(fm(x))
        expected = naive_pool(x, haar_kernels().astype(np.float32))
        for band, ref in zip(sb.as_tuple(), expected):
            np.testing.assert_allclose(band.data, ref, atol=1e-6)

    def test_odd_dims_rejected(self):
        with pytest.raises(ContractViolation):
            haar_pool(fm(np.zeros((1, 3, 4))))

    def test_linearity(self):
        rng = np.random.default_rng(32)
        x = rng.standard_normal((2, 8, 8)).astype(np.float32)
        y = rng.standard_normal((2, 8, 8)).astype(np.float32)
        a, b = 1.25, -0.5
        combined = haar_pool(fm(a * x + b * y))
        sx, sy = haar_pool(fm(x)), haar_pool(fm(y))
        for band_c, band_x, band_y in zip(combined.as_tuple(), sx.as_tuple(), sy.as_tuple()):
            np.testing.assert_allclose(band_c.data, a * band_x.data + b * band_y.data, atol=1e-5)


class TestHaarUnpool:
    def test_perfect_reconstruction(self):
        rng = np.random.default_rng(33)
        for _ in range(25):
            x = random_even(rng)
            back = haar_unpool(haar_pool(x))
            assert np.abs(back.data - x.data).max() < 1e-5

    def test_constant_ll_inverts(self):
        c = 2.0
        h = w = 2
        sb = WaveletSubbands(
            ll=fm(np.full((1, h, w), 2 * c)),
            lh=fm(np.zeros((1, h, w))),
            hl=fm(np.zeros((1, h, w))),
            hh=fm(np.zeros((1, h, w))),
        )
        np.testing.assert_allclose(haar_unpool(sb).data, c, atol=1e-6)

    def test_matches_naive_transposed_oracle(self):
        rng = np.random.default_rng(34)
        bands = [rng.standard_normal((2, 3, 4)).astype(np.float32) for _ in range(4)]
        sb = WaveletSubbands(*(fm(b) for b in bands))
        expected = naive_unpool(bands, haar_kernels().astype(np.float32))
        np.testing.assert_allclose(haar_unpool(sb).data, expected, atol=1e-6)

    def test_mismatched_shapes_rejected(self):
        with pytest.raises(ContractViolation):
            WaveletSubbands(
                ll=fm(np.zeros((1, 2, 2))),
                lh=fm(np.zeros((1, 2, 3))),
                hl=fm(np.zeros((1, 2, 2))),
                hh=fm(np.zeros((1, 2, 2))),
            )


class TestEnergyConservation:
    def test_parseval_on_random_inputs(self):
        rng = np.random.default_rng(35)
        for _ in range(25):
            x = random_even(rng)
            sb = haar_pool(x)
            energy_in = np.sum(x.data.astype(np.float64) ** 2)
            energy_out = sum(np.sum(b.data.astype(np.float64) ** 2) for b in sb.as_tuple())
            assert abs(energy_in - energy_out) / energy_in < 1e-6


class TestAveragePool:
    def test_constant(self):
        np.testing.assert_allclose(average_pool(fm(np.full((1, 4, 4), 2.5))).data, 2.5)

    def test_window_mean(self):
        out = average_pool(fm(np.array([[[1.0, 3.0], [5.0, 7.0]]])))
        assert out.data[0, 0, 0] == pytest.approx(4.0)

    def test_equals_half_ll(self):
        rng = np.random.default_rng(36)
        x = random_even(rng)
        np.testing.assert_allclose(average_pool(x).data, haar_pool(x).ll.data / 2, atol=1e-6)

    def test_unpool_preserves_constants(self):
        c = 1.75
        out = average_unpool(average_pool(fm(np.full((2, 4, 6), c))))
        np.testing.assert_allclose(out.data, c)


class TestSplitPool:
    def test_window_components(self):
        sb = split_pool(fm(np.array([[[1.0, 2.0], [3.0, 4.0]]])))
        assert [b.data[0, 0, 0] for b in sb.as_tuple()] == [1.0, 2.0, 3.0, 4.0]

    def test_round_trip_exact(self):
        rng = np.random.default_rng(37)
        x = random_even(rng)
        np.testing.assert_array_equal(split_unpool(split_pool(x)).data, x.data)

    def test_matches_slicing_oracle(self):
        rng = np.random.default_rng(38)
        x = rng.standard_normal((2, 6, 8)).astype(np.float32)
        sb = split_pool(fm(x))
        np.testing.assert_array_equal(sb.ll.data, x[:, 0::2, 0::2])
        np.testing.assert_array_equal(sb.lh.data, x[:, 0::2, 1::2])
        np.testing.assert_array_equal(sb.hl.data, x[:, 1::2, 0::2])
        np.testing.assert_array_equal(sb.hh.data, x[:, 1::2, 1::2])

    def test_kernels_are_one_hot(self):
        assert split_kernels().sum() == 4.0
        assert (split_kernels() >= 0).all()


class TestMaxPool:
    def test_window_max_and_index(self):
        pooled, mask = max_pool_with_mask(fm(np.array([[[1.0, 3.0], [5.0, 7.0]]])))
        assert pooled.data[0, 0, 0] == 7.0
        assert mask[0, 0, 0] == 3

    def test_tie_breaks_to_first_index(self):
        pooled, mask = max_pool_with_mask(fm(np.full((1, 2, 2), 4.0)))
        assert pooled.data[0, 0, 0] == 4.0
        assert mask[0, 0, 0] == 0

    def test_unpool_then_repool_reproduces_pooled(self):
        rng = np.random.default_rng(39)
        x = fm(rng.uniform(0.0, 1.0, (3, 8, 8)))
        pooled, mask = max_pool_with_mask(x)
        repooled, remask = max_pool_with_mask(max_unpool(pooled, mask))
        np.testing.assert_array_equal(repooled.data, pooled.data)
        np.testing.assert_array_equal(remask, mask)

    def test_full_round_trip_is_lossy(self):
        rng = np.random.default_rng(40)
        x = fm(rng.uniform(0.0, 1.0, (2, 8, 8)))
        pooled, mask = max_pool_with_mask(x)
        back = max_unpool(pooled, mask)
        assert np.abs(back.data - x.data).max() > 0.0
