"""One-dimensional statistical features of sample vectors.

Statistics are applied to sample magnitudes.  Composite features are the
plain concatenation of the requested statistics in :class:`StatKind` order.
"""

from __future__ import annotations

import enum
from typing import Iterable

import numpy as np

from .errors import DegenerateInputError, InvalidInputError


class StatKind(enum.IntEnum):
    MEAN = 0
    VARIANCE = 1
    SKEWNESS = 2
    MAXMIN_RATIO = 3
    IQR = 4

    @classmethod
    def parse(cls, name: str | StatKind) -> StatKind:
        if isinstance(name, StatKind):
            return name
        key = name.strip().upper().replace("-", "_")
        aliases = {"VAR": "VARIANCE", "SKEW": "SKEWNESS", "MAXMIN": "MAXMIN_RATIO", "MAXMINRATIO": "MAXMIN_RATIO"}
        try:
            return cls[aliases.get(key, key)]
        except KeyError:
            raise InvalidInputError(f"unknown statistic {name!r}") from None


ALL_STATS = tuple(StatKind)


def canonical_kinds(kinds: Iterable) -> tuple[StatKind, ...]:
    out = tuple(sorted({StatKind.parse(k) for k in kinds}))
    if not out:
        raise InvalidInputError("at least one statistic is required")
    return out


def percentiles(values, qs, axis: int = -1) -> list[np.ndarray]:
    """Linear-interpolation percentiles at rank ``q * (n - 1)`` of the sorted values.

    One sort serves every requested ``q``.
    """
    s = np.sort(np.asarray(values, dtype=np.float64), axis=axis)
    n = s.shape[axis]
    out = []
    for q in qs:
        r = q * (n - 1)
        lo = int(np.floor(r))
        hi = min(lo + 1, n - 1)
        a = np.take(s, lo, axis=axis)
        b = np.take(s, hi, axis=axis)
        out.append(a + (b - a) * (r - lo))
    return out


def percentile(values, q: float, axis: int = -1) -> np.ndarray:
    return percentiles(values, (q,), axis)[0]


def stat(values, kind: StatKind, axis: int = -1):
    """Evaluate one statistic along ``axis`` (population moments, g1 skewness)."""
    kind = StatKind.parse(kind)
    v = np.asarray(values, dtype=np.float64)
    n = v.shape[axis] if v.ndim else 1
    need = 2 if kind in (StatKind.VARIANCE, StatKind.SKEWNESS, StatKind.IQR) else 1
    if n < need:
        raise InvalidInputError(f"{kind.name} needs at least {need} values, got {n}")

    if kind is StatKind.MEAN:
        return np.mean(v, axis=axis)
    if kind is StatKind.VARIANCE:
        return np.var(v, axis=axis)
    if kind is StatKind.SKEWNESS:
        d = v - np.mean(v, axis=axis, keepdims=True)
        m2 = np.mean(d**2, axis=axis)
        m3 = np.mean(d**3, axis=axis)
        flat = m2 <= 1e-30
        with np.errstate(divide="ignore", invalid="ignore"):
            g1 = m3 / np.where(flat, 1.0, m2) ** 1.5
        return np.where(flat, 0.0, g1)
    if kind is StatKind.MAXMIN_RATIO:
        lo = np.min(v, axis=axis)
        if np.any(lo == 0):
            raise DegenerateInputError("MaxMin ratio undefined: minimum value is zero")
        return np.max(v, axis=axis) / lo
    p25, p75 = percentiles(v, (0.25, 0.75), axis=axis)
    return p75 - p25


def stat_vector(values, kinds: Iterable) -> np.ndarray:
    return np.array([stat(values, k) for k in canonical_kinds(kinds)], dtype=np.float64)


def time_domain_features(frame, kinds: Iterable = ALL_STATS) -> np.ndarray:
    x = np.asarray(frame)
    if x.size == 0:
        raise InvalidInputError("empty frame")
    return stat_vector(np.abs(x), kinds)


def frequency_domain_features(frame, kinds: Iterable = ALL_STATS) -> np.ndarray:
    x = np.asarray(frame)
    if x.size == 0:
        raise InvalidInputError("empty frame")
    return stat_vector(np.abs(np.fft.fft(x, norm="ortho")), kinds)
