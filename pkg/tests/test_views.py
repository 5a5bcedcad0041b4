"""FFT/STFT against brute-force oracles, render determinism, PNG codec."""

import numpy as np
import pytest

from emforge.signal import IqSignal
from emforge.synth import (
    Cw,
    ModulationKind,
    RadarPulseSpec,
    apply_awgn,
    gen_noise,
    gen_radar_pulse_train,
    modulate,
)
from emforge.views import (
    RenderParams,
    StftParams,
    VIEW_ORDER,
    ViewKind,
    decode_png,
    encode_png,
    fft_magnitude,
    normalized_db,
    render_view,
    stft,
)


def _naive_dft_magnitude(samples):
    """O(N^2) DFT oracle, DC-centered like fft_magnitude."""
    n = samples.size
    k = np.arange(n)
    w = np.exp(-2j * np.pi * np.outer(k, k) / n)
    return np.fft.fftshift(np.abs(w @ samples))


class TestFft:
    def test_dc_impulse(self):
        sig = IqSignal(np.ones(8, dtype=complex), 1e6)
        mag = fft_magnitude(sig)
        assert abs(mag[4] - 8.0) < 1e-9
        others = np.delete(mag, 4)
        assert np.all(others < 1e-9)

    def test_matches_naive_dft(self):
        rng = np.random.default_rng(0)
        x = rng.standard_normal(1024) + 1j * rng.standard_normal(1024)
        sig = IqSignal(x, 1e6)
        mag = fft_magnitude(sig)
        oracle = _naive_dft_magnitude(x)
        assert np.max(np.abs(mag - oracle)) / np.max(oracle) < 1e-9

    def test_parseval(self):
        rng = np.random.default_rng(1)
        x = rng.standard_normal(512) + 1j * rng.standard_normal(512)
        mag = fft_magnitude(IqSignal(x, 1e6))
        lhs = np.sum(mag**2)
        rhs = 512 * np.sum(np.abs(x) ** 2)
        assert abs(lhs - rhs) / rhs < 1e-6

    def test_linearity_in_scale(self):
        rng = np.random.default_rng(2)
        x = rng.standard_normal(256) + 1j * rng.standard_normal(256)
        a = 3.7
        m1 = fft_magnitude(IqSignal(a * x, 1e6))
        m2 = abs(a) * fft_magnitude(IqSignal(x, 1e6))
        assert np.max(np.abs(m1 - m2)) / np.max(m2) < 1e-9

    def test_circular_shift_invariance(self):
        rng = np.random.default_rng(3)
        x = rng.standard_normal(256) + 1j * rng.standard_normal(256)
        m1 = fft_magnitude(IqSignal(x, 1e6))
        m2 = fft_magnitude(IqSignal(np.roll(x, 37), 1e6))
        assert np.max(np.abs(m1 - m2)) / np.max(m1) < 1e-9

    def test_too_short_errors(self):
        with pytest.raises(ValueError):
            fft_magnitude(IqSignal(np.ones(1, dtype=complex), 1e6))


class TestStft:
    def test_frame_count_formula_sweep(self):
        rng = np.random.default_rng(4)
        for _ in range(25):
            wl = int(2 ** rng.integers(4, 9))
            hop = int(rng.integers(1, wl + 1))
            n = int(rng.integers(wl, 4 * wl))
            sig = IqSignal(rng.standard_normal(n) + 0j, 1e6)
            mat = stft(sig, StftParams(wl, hop))
            assert mat.shape == (wl, 1 + (n - wl) // hop)

    def test_pure_tone_argmax(self):
        wl, hop, n = 256, 64, 1024
        k = 19  # integer-periodic in the window
        t = np.arange(n)
        sig = IqSignal(np.exp(2j * np.pi * k * t / wl), 1e6)
        mat = stft(sig, StftParams(wl, hop))
        assert np.all(np.argmax(mat, axis=0) == wl // 2 + k)

    def test_all_zero_signal(self):
        sig = IqSignal(np.zeros(512, dtype=complex), 1e6)
        assert np.all(stft(sig, StftParams(128, 32)) == 0.0)

    def test_pulse_train_frame_energy_matches_envelope(self):
        # Parseval per frame: column energy equals window_len times the
        # windowed-envelope energy, computed here from index arithmetic.
        fs = 10e6
        spec = RadarPulseSpec(4.0, 20.0, 3, 8.0, Cw())
        sig = gen_radar_pulse_train(spec, 102.4, fs)
        wl, hop = 128, 32
        mat = stft(sig, StftParams(wl, hop))
        window = 0.5 - 0.5 * np.cos(2 * np.pi * np.arange(wl) / wl)
        env = np.abs(sig.samples)
        for frame in range(mat.shape[1]):
            col_energy = np.sum(mat[:, frame] ** 2)
            expected = wl * np.sum((window * env[frame * hop : frame * hop + wl]) ** 2)
            assert abs(col_energy - expected) <= 1e-6 * max(expected, 1.0)

    def test_short_signal_errors(self):
        with pytest.raises(ValueError, match="shorter"):
            stft(IqSignal(np.ones(100, dtype=complex), 1e6), StftParams(256, 64))

    def test_param_validation(self):
        with pytest.raises(ValueError):
            StftParams(100, 10)  # not a power of two
        with pytest.raises(ValueError):
            StftParams(256, 0)


def _components(mask):
    """4-connected component count oracle (BFS over nonbackground pixels)."""
    h, w = mask.shape
    seen = np.zeros_like(mask, dtype=bool)
    count = 0
    for sy in range(h):
        for sx in range(w):
            if mask[sy, sx] and not seen[sy, sx]:
                count += 1
                stack = [(sy, sx)]
                seen[sy, sx] = True
                while stack:
                    y, x = stack.pop()
                    for ny, nx in ((y - 1, x), (y + 1, x), (y, x - 1), (y, x + 1)):
                        if 0 <= ny < h and 0 <= nx < w and mask[ny, nx] and not seen[ny, nx]:
                            seen[ny, nx] = True
                            stack.append((ny, nx))
    return count


class TestRender:
    def test_determinism_byte_identical(self):
        sig = apply_awgn(modulate(ModulationKind.QAM16, _rand_bits(1024), 8, 1e6), 10.0, 6)
        for kind in VIEW_ORDER:
            a = encode_png(render_view(sig, kind))
            b = encode_png(render_view(sig, kind))
            assert a == b

    def test_all_views_are_384(self):
        sig = gen_noise(1024, 1e6, 0)
        for kind in VIEW_ORDER:
            img = render_view(sig, kind)
            assert (img.width, img.height) == (384, 384)
            assert img.pixels.shape == (384, 384, 3)

    def test_noiseless_bpsk_two_clusters(self):
        sig = modulate(ModulationKind.BPSK, _rand_bits(256), 1, 1e6)
        img = render_view(sig, ViewKind.CONSTELLATION, RenderParams(constellation_stride=1))
        nonbackground = np.any(img.pixels != 255, axis=2)
        assert _components(nonbackground) == 2

    def test_unsupported_kind_errors(self):
        with pytest.raises(ValueError):
            render_view(gen_noise(256, 1e6, 0), "histogram")

    def test_spectrogram_noise_floor_monotone(self):
        # Per-image normalization puts the -20 dB floor closer to the peak
        # than the +18 dB floor, for every seed.
        clean = gen_radar_pulse_train(RadarPulseSpec(10.0, 40.0, 4, 5.0, Cw()), 204.8, 20e6)
        for seed in range(20):
            low = normalized_db(stft(apply_awgn(clean, -20.0, seed)))
            high = normalized_db(stft(apply_awgn(clean, 18.0, seed)))
            assert np.median(low) > np.median(high)


def _rand_bits(n):
    return np.random.default_rng(42).integers(0, 2, n)


class TestPng:
    def test_roundtrip_and_stability(self):
        sig = gen_noise(1024, 1e6, 3)
        img = render_view(sig, ViewKind.IQ_WAVEFORM)
        data1 = encode_png(img)
        data2 = encode_png(img)
        assert data1 == data2
        back = decode_png(data1)
        assert np.array_equal(back.pixels, img.pixels)

    def test_all_black_image(self):
        from emforge.views import RasterImage

        img = RasterImage(384, 384, np.zeros((384, 384, 3), dtype=np.uint8))
        back = decode_png(encode_png(img))
        assert (back.width, back.height) == (384, 384)
        assert np.all(back.pixels == 0)

    def test_pillow_cross_decode(self):
        # Independent decoder oracle.
        import io

        PIL_Image = pytest.importorskip("PIL.Image")
        sig = gen_noise(2048, 1e6, 9)
        img = render_view(sig, ViewKind.STFT_SPECTROGRAM)
        with PIL_Image.open(io.BytesIO(encode_png(img))) as loaded:
            pixels = np.asarray(loaded.convert("RGB"))
        assert np.array_equal(pixels, img.pixels)
