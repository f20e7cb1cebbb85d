"""OFDM/SEFDM symbol synthesis and the instantaneous-power / ICI split.

A symbol with ``N`` QPSK sub-carriers, compression factor ``alpha`` and
oversampling ``rho`` has ``rho * N`` samples

    X_k = 1/sqrt(N) * sum_n s_n * exp(j*2*pi*n*k*alpha / (rho*N))

``alpha = 1`` is plain OFDM; ``alpha < 1`` packs the sub-carriers closer than
the orthogonality limit (``alpha = delta_f * T``).  Frames are plain 1-D
complex ``numpy`` arrays throughout the package.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace

import numpy as np

from .errors import InvalidInputError

STANDARD_ALPHAS = (1.0, 0.95, 0.9, 0.85, 0.8, 0.75, 0.7)
SAMPLE_RATE_HZ = 200e3

_QPSK_TABLE = np.array([1 + 1j, 1 - 1j, -1 + 1j, -1 - 1j]) / np.sqrt(2)


def ifft_length(n_samples: int, alpha: float) -> int:
    """Transform length ``Q = round(n_samples / alpha)``, halves rounded up."""
    return int(np.floor(n_samples / alpha + 0.5))


@dataclass(frozen=True)
class SefdmConfig:
    """Multicarrier symbol parameters (defaults: N=256, rho=8, QPSK).

    ``effective_alpha`` is the compression factor actually realised by the
    IFFT path, ``rho*N / round(rho*N/alpha)``.  It differs from ``alpha`` by
    at most 0.1% for the standard alpha values.
    """

    n_subcarriers: int = 256
    alpha: float = 1.0
    oversampling: int = 8
    modulation: str = "QPSK"
    effective_alpha: float = field(init=False)

    def __post_init__(self):
        if self.n_subcarriers < 1:
            raise InvalidInputError(f"n_subcarriers must be >= 1, got {self.n_subcarriers}")
        if self.oversampling < 1:
            raise InvalidInputError(f"oversampling must be >= 1, got {self.oversampling}")
        if not 0.0 < self.alpha <= 1.0:
            raise InvalidInputError(f"alpha must lie in (0, 1], got {self.alpha}")
        if self.modulation != "QPSK":
            raise InvalidInputError(f"unsupported modulation {self.modulation!r}")
        q = ifft_length(self.symbol_length, self.alpha)
        object.__setattr__(self, "effective_alpha", self.symbol_length / q)

    @property
    def symbol_length(self) -> int:
        return self.n_subcarriers * self.oversampling

    @property
    def ifft_length(self) -> int:
        return ifft_length(self.symbol_length, self.alpha)

    def effective(self) -> SefdmConfig:
        """Same config with ``alpha`` replaced by the realised ``effective_alpha``."""
        return replace(self, alpha=self.effective_alpha)


def map_qpsk(bits) -> np.ndarray:
    """Gray-map bit pairs ``(b1, b0)`` to unit-energy QPSK points.

    00 -> (+1+j)/sqrt2, 01 -> (+1-j)/sqrt2, 10 -> (-1+j)/sqrt2, 11 -> (-1-j)/sqrt2.
    """
    bits = np.asarray(bits, dtype=np.int64).ravel()
    if bits.size % 2:
        raise InvalidInputError(f"QPSK mapping needs an even bit count, got {bits.size}")
    if np.any((bits != 0) & (bits != 1)):
        raise InvalidInputError("bits must be 0 or 1")
    pairs = bits.reshape(-1, 2)
    return _QPSK_TABLE[2 * pairs[:, 0] + pairs[:, 1]]


def random_qpsk(n: int, rng: np.random.Generator) -> np.ndarray:
    return map_qpsk(rng.integers(0, 2, size=2 * n))


def _check_symbols(cfg: SefdmConfig, s) -> np.ndarray:
    s = np.asarray(s, dtype=np.complex128)
    if s.shape[-1] != cfg.n_subcarriers:
        raise InvalidInputError(
            f"expected {cfg.n_subcarriers} sub-carrier symbols, got {s.shape[-1]}"
        )
    return s


def generate_symbol_direct(cfg: SefdmConfig, s) -> np.ndarray:
    """Evaluate the SEFDM sum sample by sample (O(N * rho*N)); the reference path."""
    s = _check_symbols(cfg, s)
    n = np.arange(cfg.n_subcarriers)
    k = np.arange(cfg.symbol_length)
    # phase reduced mod 1 before scaling by 2*pi keeps large n*k products accurate
    cycles = np.mod(np.outer(k, n) * cfg.alpha / cfg.symbol_length, 1.0)
    return np.exp(2j * np.pi * cycles) @ s / np.sqrt(cfg.n_subcarriers)


def generate_symbol_ifft(cfg: SefdmConfig, s) -> np.ndarray:
    """Fast synthesis: zero-padded length-Q inverse FFT, truncated to rho*N samples.

    Equals :func:`generate_symbol_direct` evaluated at ``cfg.effective_alpha``.
    ``s`` may be 2-D (one symbol per row).
    """
    s = _check_symbols(cfg, s)
    q = cfg.ifft_length
    if q < cfg.symbol_length:
        raise InvalidInputError(f"alpha={cfg.alpha} gives Q={q} < {cfg.symbol_length}")
    spectrum = np.zeros(s.shape[:-1] + (q,), dtype=np.complex128)
    spectrum[..., : cfg.n_subcarriers] = s
    x = np.fft.ifft(spectrum, axis=-1)[..., : cfg.symbol_length]
    return x * (q / np.sqrt(cfg.n_subcarriers))


def instantaneous_power(frame) -> np.ndarray:
    return np.abs(np.asarray(frame)) ** 2


def ici_component(cfg: SefdmConfig, s, k: int) -> complex:
    """Cross-carrier part of ``|X_k|^2``: (1/N) sum_{n != m} s_n s_m* e^{j2pi(n-m)k alpha/(rho N)}.

    Real up to rounding; ``|X_k|^2 = mean(|s|^2) + ici_component(k)``.
    """
    s = _check_symbols(cfg, s)
    if not 0 <= k < cfg.symbol_length:
        raise InvalidInputError(f"sample index {k} outside [0, {cfg.symbol_length})")
    n = np.arange(cfg.n_subcarriers)
    v = s * np.exp(2j * np.pi * np.mod(n * k * cfg.alpha / cfg.symbol_length, 1.0))
    cross = np.outer(v, v.conj())
    np.fill_diagonal(cross, 0.0)
    return complex(cross.sum() / cfg.n_subcarriers)


def ici_profile(cfg: SefdmConfig, s) -> np.ndarray:
    """``ici_component`` at every sample, via |sum v|^2 - sum |v|^2 per sample."""
    s = _check_symbols(cfg, s)
    n = np.arange(cfg.n_subcarriers)
    k = np.arange(cfg.symbol_length)[:, None]
    v = s * np.exp(2j * np.pi * np.mod(n * k * cfg.alpha / cfg.symbol_length, 1.0))
    total = v.sum(axis=1)
    return (np.abs(total) ** 2 - np.sum(np.abs(v) ** 2, axis=1)) / cfg.n_subcarriers
