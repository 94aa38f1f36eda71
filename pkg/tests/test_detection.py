import math

import numpy as np
import pytest

from frislab.detection import (
    DetectorInput,
    ZeroGainError,
    count_bit_errors,
    detect_exhaustive_ls,
    detect_scalar_ls,
    detect_wl_ls,
    detect_zf_known_phase,
)
from frislab.modulation import make_constellation
from tests.conftest import complex_normal


def q_function(x: float) -> float:
    return 0.5 * math.erfc(x / math.sqrt(2.0))


class TestScalarLs:
    def test_exact_model_recovers_symbols(self, rng):
        # zero-leakage situation: real gain and a real constellation
        constellation = make_constellation("bpsk")
        gain = np.abs(rng.standard_normal(6)) + 0.1
        for idx in range(constellation.size):
            s = constellation.points[idx]
            inp = DetectorInput(
                y=np.real(gain * s),
                reference=np.zeros(6),
                gain=gain.astype(complex),
                constellation=constellation,
            )
            assert detect_scalar_ls(inp) == idx

    def test_arithmetic_example(self):
        constellation = make_constellation("bpsk")
        inp = DetectorInput(
            y=np.array([1.0, 2.0]),
            reference=np.zeros(2),
            gain=np.array([1.0 + 0j, 2.0 + 0j]),
            constellation=constellation,
        )
        # statistic (1*1 + 2*2) / 5 = 1
        assert detect_scalar_ls(inp) == 0

    def test_matches_bruteforce_statistic_minimizer(self, rng):
        constellation = make_constellation("qam4")
        gain = complex_normal(rng, 5)
        g_real = gain.real
        residuals = rng.standard_normal((10_000, 5))
        inp = DetectorInput(
            y=residuals, reference=np.zeros(5), gain=gain, constellation=constellation
        )
        detected = detect_scalar_ls(inp)
        stats = residuals @ g_real / (g_real @ g_real)
        brute = np.argmin(np.abs(stats[:, None] - constellation.points[None, :]) ** 2, axis=1)
        np.testing.assert_array_equal(detected, brute)

    def test_scale_invariance(self, rng):
        constellation = make_constellation("qam4")
        gain = complex_normal(rng, 4)
        residual = rng.standard_normal(4)
        a = detect_scalar_ls(
            DetectorInput(y=residual, reference=np.zeros(4), gain=gain, constellation=constellation)
        )
        b = detect_scalar_ls(
            DetectorInput(
                y=7.5 * residual, reference=np.zeros(4), gain=7.5 * gain, constellation=constellation
            )
        )
        assert a == b

    def test_zero_gain_raises(self):
        constellation = make_constellation("bpsk")
        inp = DetectorInput(
            y=np.ones(2), reference=np.zeros(2), gain=np.array([1j, 2j]), constellation=constellation
        )
        with pytest.raises(ZeroGainError):
            detect_scalar_ls(inp)


class TestExhaustiveLs:
    def test_noise_free_recovery(self, rng):
        constellation = make_constellation("qam4")
        h_eq = complex_normal(rng, 5, 2)
        w = complex_normal(rng, 2)
        r = 50.0 * np.exp(2j * np.pi * rng.random(5))
        for idx in range(4):
            y = np.abs(h_eq @ w * constellation.points[idx] + r)
            assert detect_exhaustive_ls(y, h_eq, w, r, constellation) == idx

    def test_single_point_constellation(self, rng):
        from frislab.modulation import SymbolModel

        single = SymbolModel(
            name="one", points=np.array([1.0 + 0j]), bits=np.array([[0]], dtype=np.uint8)
        )
        y = rng.random(3)
        assert detect_exhaustive_ls(y, complex_normal(rng, 3, 1), np.ones(1), np.ones(3), single) == 0

    def test_batch_objective_is_minimized(self, rng):
        constellation = make_constellation("qam16")
        h_eq = complex_normal(rng, 4, 2)
        w = complex_normal(rng, 2)
        r = complex_normal(rng, 4) * 10
        y = np.abs(
            h_eq @ w * constellation.points[7] + r + 0.05 * complex_normal(rng, 4)
        )
        idx = detect_exhaustive_ls(y, h_eq, w, r, constellation)
        objectives = [
            np.sum((y - np.abs(h_eq @ w * s + r)) ** 2) for s in constellation.points
        ]
        assert idx == int(np.argmin(objectives))


class TestZfKnownPhase:
    def test_noise_free_exact(self, rng):
        constellation = make_constellation("qam16")
        h_eq = complex_normal(rng, 6, 3)
        w = complex_normal(rng, 3)
        h = h_eq @ w
        for idx in (0, 5, 11, 15):
            y = h * constellation.points[idx]
            assert detect_zf_known_phase(y, h_eq, w, constellation) == idx

    def test_scalar_channel_passthrough(self):
        constellation = make_constellation("qam4")
        h_eq = np.array([[1.0 + 0j]])
        w = np.array([1.0 + 0j])
        for idx in range(4):
            y = np.array([constellation.points[idx]])
            assert detect_zf_known_phase(y, h_eq, w, constellation) == idx

    def test_awgn_ber_matches_q_function(self, rng):
        # post-combining SNR of 7 dB; Gray 4-QAM bit errors follow Q(sqrt(snr))
        constellation = make_constellation("qam4")
        snr = 10.0 ** 0.7
        n_r, n_sym = 4, 200_000
        h_eq = complex_normal(rng, n_r, 2)
        w = complex_normal(rng, 2)
        h = h_eq @ w
        sigma2 = float(np.vdot(h, h).real) / snr
        idx = constellation.draw_indices(n_sym, rng)
        y = constellation.points[idx][:, None] * h[None, :] + np.sqrt(sigma2 / 2) * complex_normal(
            rng, n_sym, n_r
        )
        detected = detect_zf_known_phase(y, h_eq, w, constellation)
        errors = count_bit_errors(idx, detected, constellation)
        total = n_sym * constellation.bits_per_symbol
        expected = q_function(math.sqrt(snr))
        sigma_mc = math.sqrt(expected * (1 - expected) / total)
        assert abs(errors / total - expected) <= 3.0 * sigma_mc

    def test_zero_channel_raises(self):
        constellation = make_constellation("bpsk")
        with pytest.raises(ZeroGainError):
            detect_zf_known_phase(np.ones(2), np.zeros((2, 2)), np.ones(2), constellation)


class TestWidelyLinear:
    def test_recovers_complex_symbols_with_complex_gain(self, rng):
        # the quadrature info lost by the scalar detector is recovered when
        # the gain has independent real and imaginary parts
        constellation = make_constellation("qam4")
        gain = complex_normal(rng, 8)
        for idx in range(4):
            s = constellation.points[idx]
            residual = np.real(gain * s)
            inp = DetectorInput(
                y=residual, reference=np.zeros(8), gain=gain, constellation=constellation
            )
            assert detect_wl_ls(inp) == idx

    def test_batch_shape(self, rng):
        constellation = make_constellation("qam4")
        gain = complex_normal(rng, 6)
        residuals = rng.standard_normal((17, 6))
        inp = DetectorInput(
            y=residuals, reference=np.zeros(6), gain=gain, constellation=constellation
        )
        assert detect_wl_ls(inp).shape == (17,)


def test_count_bit_errors_gray_counts(rng):
    constellation = make_constellation("qam4")
    true_idx = np.array([0, 0, 1, 3])
    det_idx = np.array([0, 3, 0, 0])
    # labels: 00, 01, 10, 11
    assert count_bit_errors(true_idx, det_idx, constellation) == 0 + 2 + 1 + 2
