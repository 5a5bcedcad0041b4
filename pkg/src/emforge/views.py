"""The four canonical signal views and their deterministic rasters.

Every render is a pure function of (signal, parameters): fixed axis
rules, fixed colors, no text, no randomness. Constellation axes span
+/-1.5 * max|x|, spectrum/spectrogram cover the full band DC-centered,
the waveform view spans the full time axis.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum

import numpy as np

from . import png
from .raster import (
    blank_canvas,
    bucket_minmax,
    draw_dot,
    draw_polyline,
    nn_resize,
    spectrogram_colormap,
)
from .signal import IqSignal

DEFAULT_IMAGE_SIZE = 384
SPECTRUM_FLOOR_DB = -80.0
CONSTELLATION_COLOR = (16, 16, 160)
SPECTRUM_COLOR = (144, 16, 16)
WAVEFORM_I_COLOR = (16, 16, 192)
WAVEFORM_Q_COLOR = (192, 16, 16)
ENVELOPE_COLOR = (0, 0, 0)


class ViewKind(str, Enum):
    CONSTELLATION = "constellation"
    FFT_SPECTRUM = "fft_spectrum"
    STFT_SPECTROGRAM = "stft_spectrogram"
    IQ_WAVEFORM = "iq_waveform"


VIEW_ORDER = (
    ViewKind.CONSTELLATION,
    ViewKind.FFT_SPECTRUM,
    ViewKind.STFT_SPECTROGRAM,
    ViewKind.IQ_WAVEFORM,
)


@dataclass(frozen=True)
class StftParams:
    window_len: int = 256
    hop: int = 64

    def __post_init__(self):
        if self.window_len < 2 or self.window_len & (self.window_len - 1):
            raise ValueError("window_len must be a power of two >= 2")
        if not 1 <= self.hop <= self.window_len:
            raise ValueError("hop must satisfy 1 <= hop <= window_len")


@dataclass
class RasterImage:
    """Fixed-size 8-bit RGB raster; pixels is an (H, W, 3) uint8 array."""

    width: int
    height: int
    pixels: np.ndarray

    def __post_init__(self):
        if self.pixels.shape != (self.height, self.width, 3):
            raise ValueError("pixel buffer shape does not match width/height")
        if self.pixels.dtype != np.uint8:
            raise ValueError("pixels must be uint8")

    def tobytes(self) -> bytes:
        return self.pixels.tobytes()


@dataclass(frozen=True)
class RenderParams:
    size: int = DEFAULT_IMAGE_SIZE
    stft: StftParams = field(default_factory=StftParams)
    constellation_stride: int | None = None

    def __post_init__(self):
        if self.size < 16:
            raise ValueError("image size must be >= 16")


def fft_magnitude(signal: IqSignal) -> np.ndarray:
    """Per-bin magnitude |FFT(x)|, DC-centered (bin N//2 is DC)."""
    if len(signal) < 2:
        raise ValueError("fft_magnitude requires at least 2 samples")
    return np.abs(np.fft.fftshift(np.fft.fft(signal.samples)))


def _hann(n: int) -> np.ndarray:
    # Periodic Hann window.
    return 0.5 - 0.5 * np.cos(2 * np.pi * np.arange(n) / n)


def stft(signal: IqSignal, params: StftParams = StftParams()) -> np.ndarray:
    """Time-frequency magnitude matrix, shape (window_len, n_frames).

    Frame k windows samples [k*hop, k*hop + window_len); rows are
    DC-centered frequency bins; n_frames = 1 + (N - window_len) // hop.
    """
    n = len(signal)
    if n < params.window_len:
        raise ValueError(
            f"signal of {n} samples is shorter than one {params.window_len}-sample window"
        )
    window = _hann(params.window_len)
    n_frames = 1 + (n - params.window_len) // params.hop
    out = np.empty((params.window_len, n_frames))
    for k in range(n_frames):
        frame = signal.samples[k * params.hop : k * params.hop + params.window_len]
        out[:, k] = np.abs(np.fft.fftshift(np.fft.fft(frame * window)))
    return out


def normalized_db(matrix: np.ndarray, floor_db: float = SPECTRUM_FLOOR_DB) -> np.ndarray:
    """Map magnitudes to [0, 1]: dB relative to the matrix peak, floored."""
    peak = matrix.max()
    if peak <= 0:
        return np.zeros_like(matrix)
    db = 20.0 * np.log10(np.maximum(matrix, peak * 10.0 ** (floor_db / 20.0)) / peak)
    return (db - floor_db) / (-floor_db)


def _to_px(value: np.ndarray, lo: float, hi: float, size: int) -> np.ndarray:
    scaled = (value - lo) / (hi - lo) if hi > lo else np.zeros_like(value)
    return np.clip(np.round(scaled * (size - 1)), 0, size - 1).astype(int)


def _render_constellation(signal: IqSignal, p: RenderParams) -> np.ndarray:
    img = blank_canvas(p.size, p.size)
    stride = p.constellation_stride or 4
    pts = signal.samples[::stride]
    lim = 1.5 * np.max(np.abs(signal.samples))
    if lim == 0:
        lim = 1.0
    xs = _to_px(pts.real, -lim, lim, p.size)
    ys = (p.size - 1) - _to_px(pts.imag, -lim, lim, p.size)
    for x, y in zip(xs, ys):
        draw_dot(img, x, y, CONSTELLATION_COLOR, radius=2)
    return img


def _render_spectrum(signal: IqSignal, p: RenderParams) -> np.ndarray:
    img = blank_canvas(p.size, p.size)
    level = normalized_db(fft_magnitude(signal))
    _, peak = bucket_minmax(level, p.size)  # peak-preserving column reduction
    ys = (p.size - 1) - _to_px(peak, 0.0, 1.0, p.size)
    draw_polyline(img, list(range(p.size)), list(ys), SPECTRUM_COLOR)
    return img


def _render_spectrogram(signal: IqSignal, p: RenderParams) -> np.ndarray:
    level = normalized_db(stft(signal, p.stft))
    # Row 0 = highest frequency at the top of the image.
    resized = nn_resize(level[::-1], p.size, p.size)
    index = np.clip(np.round(resized * 255), 0, 255).astype(int)
    return spectrogram_colormap()[index]


def _render_waveform(signal: IqSignal, p: RenderParams) -> np.ndarray:
    img = blank_canvas(p.size, p.size)
    env = np.abs(signal.samples)
    lim = 1.05 * env.max()
    if lim == 0:
        lim = 1.0
    xs = list(range(p.size))
    for values, color in (
        (signal.samples.real, WAVEFORM_I_COLOR),
        (signal.samples.imag, WAVEFORM_Q_COLOR),
        (env, ENVELOPE_COLOR),
    ):
        lo, hi = bucket_minmax(values, p.size)
        y_lo = (p.size - 1) - _to_px(lo, -lim, lim, p.size)
        y_hi = (p.size - 1) - _to_px(hi, -lim, lim, p.size)
        for x in xs:
            img[y_hi[x] : y_lo[x] + 1, x] = color
        draw_polyline(img, xs, [(a + b) // 2 for a, b in zip(y_lo, y_hi)], color)
    return img


def render_view(signal: IqSignal, kind: ViewKind, params: RenderParams | None = None) -> RasterImage:
    """Render one view as a deterministic fixed-size RGB raster."""
    p = params or RenderParams()
    kind = ViewKind(kind)
    if kind is ViewKind.CONSTELLATION:
        pixels = _render_constellation(signal, p)
    elif kind is ViewKind.FFT_SPECTRUM:
        pixels = _render_spectrum(signal, p)
    elif kind is ViewKind.STFT_SPECTROGRAM:
        pixels = _render_spectrogram(signal, p)
    elif kind is ViewKind.IQ_WAVEFORM:
        pixels = _render_waveform(signal, p)
    else:
        raise ValueError(f"unsupported view kind: {kind!r}")
    return RasterImage(p.size, p.size, pixels)


def encode_png(img: RasterImage) -> bytes:
    """PNG bytes with fixed encoder settings (stable across runs)."""
    return png.encode_png(img.pixels)


def decode_png(data: bytes) -> RasterImage:
    pixels = png.decode_png(data)
    return RasterImage(pixels.shape[1], pixels.shape[0], pixels)
