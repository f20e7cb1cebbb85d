"""Channel impairments: AWGN at a target Es/N0, tapped-delay multipath,
optional phase/CFO rotation and the unsynchronised receive window.

Every random operation takes an explicit integer seed.  Per-symbol seeds are
derived with :func:`symbol_seed` (``base XOR index``) so symbols can be
impaired independently and in any order.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import DegenerateInputError, InvalidInputError

_U64 = (1 << 64) - 1


def symbol_seed(base_seed: int, index: int) -> int:
    return (int(base_seed) ^ int(index)) & _U64


def _frame(frame) -> np.ndarray:
    x = np.asarray(frame, dtype=np.complex128)
    if x.ndim != 1 or x.size == 0:
        raise InvalidInputError("frame must be a non-empty 1-D sample vector")
    return x


@dataclass(frozen=True)
class ChannelProfile:
    """Power-delay profile.  Tap powers are renormalised to unit total power."""

    tap_delays: tuple[int, ...] = (0, 2, 5)
    tap_powers_db: tuple[float, ...] = (0.0, -3.0, -6.0)
    regenerate_per_symbol: bool = True
    seed: int = 0
    random_phase: bool = False
    cfo_ppm: float = 0.0
    tap_powers: np.ndarray = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        delays = tuple(int(d) for d in self.tap_delays)
        powers_db = tuple(float(p) for p in self.tap_powers_db)
        if not delays or len(delays) != len(powers_db):
            raise InvalidInputError("tap_delays and tap_powers_db must be non-empty and equal length")
        if delays[0] != 0 or any(b <= a for a, b in zip(delays, delays[1:])):
            raise InvalidInputError(f"tap delays must start at 0 and increase strictly: {delays}")
        lin = 10.0 ** (np.array(powers_db) / 10.0)
        object.__setattr__(self, "tap_delays", delays)
        object.__setattr__(self, "tap_powers_db", powers_db)
        object.__setattr__(self, "tap_powers", lin / lin.sum())

    @property
    def max_delay(self) -> int:
        return self.tap_delays[-1]

    def draw_taps(self, seed: int) -> np.ndarray:
        """Rayleigh tap gains as a dense impulse response of length max_delay+1."""
        rng = np.random.default_rng(seed)
        g = rng.standard_normal(len(self.tap_delays)) + 1j * rng.standard_normal(len(self.tap_delays))
        h = np.zeros(self.max_delay + 1, dtype=np.complex128)
        h[list(self.tap_delays)] = g * np.sqrt(self.tap_powers / 2.0)
        return h

    def symbol_taps(self, index: int) -> np.ndarray:
        if self.regenerate_per_symbol:
            return self.draw_taps(symbol_seed(self.seed, index))
        return self.draw_taps(self.seed)


DEFAULT_PROFILE = ChannelProfile()


def apply_awgn(frame, esn0_db: float, rng_seed: int) -> np.ndarray:
    """Add circular complex Gaussian noise at ``esn0_db`` relative to the frame's mean power.

    ``+inf`` returns the frame unchanged; ``-inf`` returns noise alone (at the
    frame's power) so sweeps can probe the chance level.
    """
    x = _frame(frame)
    if esn0_db == np.inf:
        return x.copy()
    p_sig = np.mean(np.abs(x) ** 2)
    rng = np.random.default_rng(rng_seed)
    w = (rng.standard_normal(x.size) + 1j * rng.standard_normal(x.size)) / np.sqrt(2.0)
    if esn0_db == -np.inf:
        return w * np.sqrt(p_sig)
    sigma2 = p_sig / 10.0 ** (esn0_db / 10.0)
    return x + w * np.sqrt(sigma2)


def apply_multipath(frame, profile: ChannelProfile, taps: np.ndarray | None = None) -> np.ndarray:
    """Convolve with a drawn tap vector and keep the first ``len(frame)`` samples."""
    x = _frame(frame)
    if profile.max_delay >= x.size:
        raise InvalidInputError(
            f"max tap delay {profile.max_delay} must be shorter than the frame ({x.size})"
        )
    h = profile.draw_taps(profile.seed) if taps is None else taps
    return np.convolve(x, h)[: x.size]


def apply_hardware(frame, profile: ChannelProfile, rng_seed: int,
                   sample_rate_hz: float = 200e3, carrier_hz: float = 900e6) -> np.ndarray:
    """Optional uniform phase rotation and carrier offset (``cfo_ppm`` of the carrier)."""
    x = _frame(frame)
    if not profile.random_phase and profile.cfo_ppm == 0.0:
        return x.copy()
    rng = np.random.default_rng(rng_seed)
    phase = rng.uniform(0.0, 2 * np.pi) if profile.random_phase else 0.0
    f_off = profile.cfo_ppm * 1e-6 * carrier_hz / sample_rate_hz
    return x * np.exp(1j * (phase + 2 * np.pi * f_off * np.arange(x.size)))


def random_truncate(frame, window: int, rng_seed: int) -> np.ndarray:
    """Contiguous ``window``-sample slice at an offset uniform on [0, len - window]."""
    x = _frame(frame)
    if window > x.size or window < 1:
        raise InvalidInputError(f"window {window} does not fit a frame of {x.size} samples")
    start = truncation_offset(x.size, window, rng_seed)
    return x[start:start + window].copy()


def truncation_offset(frame_len: int, window: int, rng_seed: int) -> int:
    return int(np.random.default_rng(rng_seed).integers(0, frame_len - window + 1))


def normalize_power(frame) -> np.ndarray:
    """Scale to unit mean power (a stand-in for receiver AGC)."""
    x = _frame(frame)
    p = np.mean(np.abs(x) ** 2)
    if not p > 0.0:
        raise DegenerateInputError("cannot normalise an all-zero frame")
    return x / np.sqrt(p)
