"""Continuous wavelet transform with generalized Morse wavelets.

The filter bank is analytic (zero on negative frequencies) and applied in the
frequency domain, so the transform is circular: shifting the input shifts
every scalogram row by the same amount.  Scales are log-spaced,
``voices`` per octave, with the finest scale peaking at Nyquist.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache
from typing import Iterable

import numpy as np

from .errors import InvalidInputError
from .features import StatKind, canonical_kinds, stat


@dataclass(frozen=True)
class MorseParams:
    gamma: float = 3.0
    beta: float = 20.0

    def __post_init__(self):
        if not (self.gamma > 0 and self.beta > 0):
            raise InvalidInputError(f"Morse gamma and beta must be positive: {self}")

    @property
    def peak_frequency(self) -> float:
        """Angular frequency maximising w**beta * exp(-w**gamma)."""
        return (self.beta / self.gamma) ** (1.0 / self.gamma)


@dataclass(frozen=True)
class ScaleGrid:
    octaves: int
    voices_per_octave: int
    s_min: float

    @property
    def scales(self) -> np.ndarray:
        j = np.arange(self.octaves * self.voices_per_octave)
        return self.s_min * 2.0 ** (j / self.voices_per_octave)

    def __len__(self) -> int:
        return self.octaves * self.voices_per_octave


def build_scale_grid(octaves: int = 7, voices: int = 10, params: MorseParams = MorseParams()) -> ScaleGrid:
    if octaves < 1 or voices < 1:
        raise InvalidInputError(f"need octaves >= 1 and voices >= 1, got {octaves}, {voices}")
    return ScaleGrid(int(octaves), int(voices), params.peak_frequency / np.pi)


def morse_filter(params: MorseParams, scale: float, n: int) -> np.ndarray:
    """Frequency response on the length-``n`` DFT grid, peak value normalised to 2.

    Only bins ``0..n//2`` (non-negative frequencies) are populated.
    """
    if scale <= 0 or n < 2:
        raise InvalidInputError(f"need scale > 0 and n >= 2, got {scale}, {n}")
    psi = np.zeros(n)
    k = np.arange(1, n // 2 + 1)
    u = scale * 2.0 * np.pi * k / n
    log_psi = params.beta * np.log(u) - u**params.gamma
    psi[1 : n // 2 + 1] = 2.0 * np.exp(log_psi - log_psi.max())
    return psi


@lru_cache(maxsize=16)
def filter_bank(grid: ScaleGrid, params: MorseParams, n: int) -> np.ndarray:
    bank = np.stack([morse_filter(params, s, n) for s in grid.scales])
    bank.setflags(write=False)
    return bank


@dataclass(frozen=True)
class Scalogram:
    magnitudes: np.ndarray  # (n_scales, n_time)
    grid: ScaleGrid

    @property
    def shape(self) -> tuple[int, int]:
        return self.magnitudes.shape

    def to_text(self) -> str:
        rows = "\n".join(" ".join(f"{v:.9e}" for v in row) for row in self.magnitudes)
        return f"{self.shape[0]} {self.shape[1]}\n{rows}\n"


def cwt_magnitudes(signals, grid: ScaleGrid, params: MorseParams) -> np.ndarray:
    """Batched transform of real signals ``(..., T)`` to magnitudes ``(..., n_scales, T)``."""
    x = np.asarray(signals, dtype=np.float64)
    if x.ndim == 0 or x.shape[-1] < 2:
        raise InvalidInputError("signal must have at least 2 samples")
    bank = filter_bank(grid, params, x.shape[-1])
    spectrum = np.fft.fft(x, axis=-1)[..., None, :]
    return np.abs(np.fft.ifft(spectrum * bank, axis=-1))


def cwt(signal, grid: ScaleGrid, params: MorseParams = MorseParams()) -> Scalogram:
    x = np.asarray(signal, dtype=np.float64)
    if x.ndim != 1:
        raise InvalidInputError("cwt expects a 1-D real signal")
    return Scalogram(cwt_magnitudes(x, grid, params), grid)


def reduce_time_axis(scalogram, kind: StatKind) -> np.ndarray:
    """Collapse each scale row to one statistic; accepts a Scalogram or a raw array."""
    mags = scalogram.magnitudes if isinstance(scalogram, Scalogram) else np.asarray(scalogram)
    return np.asarray(stat(mags, kind, axis=-1))


def wavelet_features_batch(frames, grid: ScaleGrid, params: MorseParams, kinds: Iterable,
                           chunk: int = 32) -> np.ndarray:
    """Feature rows for a ``(B, T)`` stack of complex windows.

    Per statistic, the real-part row reductions precede the imaginary-part ones.
    """
    kinds = canonical_kinds(kinds)
    frames = np.atleast_2d(np.asarray(frames, dtype=np.complex128))
    out = np.empty((frames.shape[0], 2 * len(grid) * len(kinds)))
    for start in range(0, frames.shape[0], chunk):
        block = frames[start:start + chunk]
        parts = np.stack([block.real, block.imag], axis=1)  # (b, 2, T)
        mags = cwt_magnitudes(parts, grid, params)  # (b, 2, S, T)
        reduced = [reduce_time_axis(mags, k).reshape(block.shape[0], -1) for k in kinds]
        out[start:start + block.shape[0]] = np.concatenate(reduced, axis=1)
    return out


def wavelet_feature_vector(frame, grid: ScaleGrid, params: MorseParams, kinds: Iterable,
                           expected_length: int | None = None) -> np.ndarray:
    x = np.asarray(frame)
    if x.ndim != 1:
        raise InvalidInputError("expected a single 1-D frame")
    if expected_length is not None and x.size != expected_length:
        raise InvalidInputError(f"frame has {x.size} samples, expected {expected_length}")
    return wavelet_features_batch(x[None, :], grid, params, kinds)[0]
