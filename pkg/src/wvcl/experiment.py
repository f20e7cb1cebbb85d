"""Dataset construction, training protocols, Es/N0 sweeps and report files.

Pipeline per symbol: random QPSK -> SEFDM synthesis (2048 samples) ->
optional multipath/hardware impairments -> AWGN -> power normalisation ->
random 1024-sample window -> feature extraction.

Randomness is driven by ``TrainingProtocol.seed``.  For every dataset a
``SeedSequence`` keyed on (seed, role, Es/N0) yields one base seed per random
stage; symbol ``r`` then uses ``base XOR r`` (see :func:`channel.symbol_seed`).
"""

from __future__ import annotations

import csv
import enum
import json
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field, replace
from pathlib import Path
from typing import Sequence

import numpy as np

from . import channel
from .errors import InvalidInputError, WvclError
from .features import ALL_STATS, StatKind, canonical_kinds, stat
from .svm import EcocModel, KernelSpec, evaluate, train_ecoc
from .waveform import STANDARD_ALPHAS, SefdmConfig, generate_symbol_ifft, random_qpsk
from .wavelet import MorseParams, build_scale_grid, wavelet_features_batch


@dataclass(frozen=True)
class SignalPattern:
    name: str
    alphas: tuple[float, ...]

    @property
    def n_classes(self) -> int:
        return len(self.alphas)


TYPE_I = SignalPattern("TypeI", (1.0, 0.9, 0.8, 0.7))
TYPE_II = SignalPattern("TypeII", STANDARD_ALPHAS)
PATTERNS = {p.name: p for p in (TYPE_I, TYPE_II)}


def get_pattern(name: str) -> SignalPattern:
    key = name.replace("-", "").replace("_", "").lower()
    for p in PATTERNS.values():
        if p.name.lower() == key:
            return p
    raise InvalidInputError(f"unknown signal pattern {name!r}")


class FeatureMode(str, enum.Enum):
    TSTAT = "TStat"
    FSTAT = "FStat"
    WAVELET_VAR = "WaveletVar"
    WAVELET_IQR = "WaveletIqr"
    WAVELET_VAR_IQR = "WaveletVarIqr"

    @property
    def is_wavelet(self) -> bool:
        return self.value.startswith("Wavelet")

    def kinds(self, stat_kinds: Sequence = ALL_STATS) -> tuple[StatKind, ...]:
        if self is FeatureMode.WAVELET_VAR:
            return (StatKind.VARIANCE,)
        if self is FeatureMode.WAVELET_IQR:
            return (StatKind.IQR,)
        if self is FeatureMode.WAVELET_VAR_IQR:
            return (StatKind.VARIANCE, StatKind.IQR)
        return canonical_kinds(stat_kinds)


@dataclass(frozen=True)
class FeatureSettings:
    mode: FeatureMode = FeatureMode.WAVELET_VAR_IQR
    morse: MorseParams = MorseParams()
    octaves: int = 7
    voices: int = 10
    stat_kinds: tuple[StatKind, ...] = ALL_STATS

    def feature_length(self) -> int:
        n = len(self.mode.kinds(self.stat_kinds))
        return 2 * self.octaves * self.voices * n if self.mode.is_wavelet else n


@dataclass(frozen=True)
class ClassifierSettings:
    C: float = 1.0
    kernel: KernelSpec = KernelSpec()
    tol: float = 1e-3
    decoding: str = "loss"
    max_iter: int = 200_000


@dataclass(frozen=True)
class TrainingProtocol:
    esn0_mix_db: tuple[float, ...] = (20.0,)
    per_class_train: int = 500
    per_class_test: int = 200
    features: FeatureSettings = FeatureSettings()
    seed: int = 2021
    multipath: channel.ChannelProfile | None = None
    n_subcarriers: int = 256
    oversampling: int = 8
    window: int = 1024

    def __post_init__(self):
        if not self.esn0_mix_db:
            raise InvalidInputError("Es/N0 training mix must not be empty")
        if self.per_class_train < 1 or self.per_class_test < 1:
            raise InvalidInputError("per-class symbol counts must be >= 1")

    def with_mode(self, mode: FeatureMode | str) -> TrainingProtocol:
        return replace(self, features=replace(self.features, mode=FeatureMode(mode)))


@dataclass
class Dataset:
    features: np.ndarray
    labels: np.ndarray  # class index into pattern.alphas
    esn0_db: np.ndarray


@dataclass
class SweepResult:
    esn0_db: np.ndarray
    accuracy: np.ndarray
    confusions: list[np.ndarray]
    n_test: np.ndarray
    alphas: tuple[float, ...]
    provenance: dict = field(default_factory=dict)


_ROLES = {"train": 1, "test": 2, "capture": 3}
PIPELINE_VERSION = 1


def worker_count() -> int:
    try:
        return max(1, int(os.environ.get("WVCL_THREADS", "1")))
    except ValueError:
        return 1


def _esn0_key(esn0_db: float) -> int:
    return int(np.float64(esn0_db).view(np.uint64))


def stage_seeds(seed: int, role: str, esn0_mix: Sequence[float]) -> dict[str, int]:
    ss = np.random.SeedSequence([seed, _ROLES[role], *(_esn0_key(e) for e in esn0_mix)])
    names = ("bits", "esn0", "channel", "noise", "truncate", "hardware")
    return dict(zip(names, (int(v) for v in ss.generate_state(len(names), dtype=np.uint64))))


def simulate_windows(pattern: SignalPattern, protocol: TrainingProtocol, role: str,
                     esn0_mix: Sequence[float] | None = None):
    """Received, power-normalised windows for every class.

    Returns ``(windows (n, window), labels, esn0_db)`` with rows grouped by
    class in pattern order.  ``esn0_mix`` overrides the protocol's training mix
    (sweeps pass a single value).
    """
    if role not in ("train", "test"):
        raise InvalidInputError(f"role must be 'train' or 'test', got {role!r}")
    mix = tuple(protocol.esn0_mix_db if esn0_mix is None else esn0_mix)
    if not mix:
        raise InvalidInputError("empty Es/N0 mix")
    per_class = protocol.per_class_train if role == "train" else protocol.per_class_test
    seeds = stage_seeds(protocol.seed, role, mix)
    profile = protocol.multipath

    windows, labels, esn0s = [], [], []
    for c, alpha in enumerate(pattern.alphas):
        cfg = SefdmConfig(protocol.n_subcarriers, alpha, protocol.oversampling)
        if protocol.window > cfg.symbol_length:
            raise InvalidInputError(f"window {protocol.window} exceeds symbol length {cfg.symbol_length}")
        rows = c * per_class + np.arange(per_class)
        s = np.stack([random_qpsk(cfg.n_subcarriers, np.random.default_rng(channel.symbol_seed(seeds["bits"], r)))
                      for r in rows])
        symbols = generate_symbol_ifft(cfg, s)
        for r, x in zip(rows, symbols):
            choice = np.random.default_rng(channel.symbol_seed(seeds["esn0"], r)).integers(len(mix))
            esn0 = float(mix[choice])
            if profile is not None:
                taps = profile.draw_taps(channel.symbol_seed(seeds["channel"] ^ profile.seed, r)) \
                    if profile.regenerate_per_symbol else profile.draw_taps(profile.seed)
                x = channel.apply_multipath(x, profile, taps)
                x = channel.apply_hardware(x, profile, channel.symbol_seed(seeds["hardware"], r))
            x = channel.apply_awgn(x, esn0, channel.symbol_seed(seeds["noise"], r))
            x = channel.normalize_power(x)
            windows.append(channel.random_truncate(x, protocol.window, channel.symbol_seed(seeds["truncate"], r)))
            labels.append(c)
            esn0s.append(esn0)
    return np.array(windows), np.array(labels), np.array(esn0s)


def featurize(windows, settings: FeatureSettings) -> np.ndarray:
    """Feature rows for a stack of complex windows according to ``settings.mode``."""
    windows = np.atleast_2d(np.asarray(windows, dtype=np.complex128))
    kinds = settings.mode.kinds(settings.stat_kinds)
    if settings.mode is FeatureMode.TSTAT:
        mags = np.abs(windows)
        return np.column_stack([stat(mags, k, axis=-1) for k in kinds])
    if settings.mode is FeatureMode.FSTAT:
        mags = np.abs(np.fft.fft(windows, axis=-1, norm="ortho"))
        return np.column_stack([stat(mags, k, axis=-1) for k in kinds])

    grid = build_scale_grid(settings.octaves, settings.voices, settings.morse)
    threads = worker_count()
    if threads == 1 or windows.shape[0] < 64:
        return wavelet_features_batch(windows, grid, settings.morse, kinds)
    chunks = np.array_split(windows, threads * 4)
    with ThreadPoolExecutor(threads) as pool:
        parts = pool.map(lambda w: wavelet_features_batch(w, grid, settings.morse, kinds), chunks)
        return np.concatenate(list(parts))


def build_dataset(pattern: SignalPattern, protocol: TrainingProtocol, role: str,
                  esn0_mix: Sequence[float] | None = None) -> Dataset:
    windows, labels, esn0s = simulate_windows(pattern, protocol, role, esn0_mix)
    return Dataset(featurize(windows, protocol.features), labels, esn0s)


def protocol_metadata(pattern: SignalPattern, protocol: TrainingProtocol,
                      classifier: ClassifierSettings) -> dict:
    meta = {
        "pipeline_version": PIPELINE_VERSION,
        "pattern": pattern.name,
        "alphas": list(pattern.alphas),
        "effective_alphas": [SefdmConfig(protocol.n_subcarriers, a, protocol.oversampling).effective_alpha
                             for a in pattern.alphas],
        "esn0_mix_db": list(protocol.esn0_mix_db),
        "per_class_train": protocol.per_class_train,
        "per_class_test": protocol.per_class_test,
        "seed": protocol.seed,
        "n_subcarriers": protocol.n_subcarriers,
        "oversampling": protocol.oversampling,
        "window": protocol.window,
        "feature_mode": protocol.features.mode.value,
        "stat_kinds": [k.name for k in protocol.features.stat_kinds],
        "morse_gamma": protocol.features.morse.gamma,
        "morse_beta": protocol.features.morse.beta,
        "octaves": protocol.features.octaves,
        "voices": protocol.features.voices,
        "feature_length": protocol.features.feature_length(),
        "C": classifier.C,
        "kernel": asdict(classifier.kernel),
        "tol": classifier.tol,
        "decoding": classifier.decoding,
        "multipath": None,
    }
    if protocol.multipath is not None:
        p = protocol.multipath
        meta["multipath"] = {
            "tap_delays": list(p.tap_delays), "tap_powers_db": list(p.tap_powers_db),
            "regenerate_per_symbol": p.regenerate_per_symbol, "seed": p.seed,
            "random_phase": p.random_phase, "cfo_ppm": p.cfo_ppm,
        }
    return meta


def train_on(dataset: Dataset, pattern: SignalPattern, classifier: ClassifierSettings) -> EcocModel:
    return train_ecoc(dataset.features, dataset.labels, classifier.C, classifier.kernel, classifier.tol,
                      classifier.decoding, classes=np.arange(pattern.n_classes),
                      max_iter=classifier.max_iter)


def run_protocol(pattern: SignalPattern, protocol: TrainingProtocol,
                 classifier: ClassifierSettings = ClassifierSettings()) -> EcocModel:
    data = build_dataset(pattern, protocol, "train")
    if data.features.shape[1] != protocol.features.feature_length():
        raise WvclError("feature length disagrees with the configured feature mode")
    model = train_on(data, pattern, classifier)
    model.metadata = protocol_metadata(pattern, protocol, classifier)
    return model


def check_compatible(model: EcocModel, protocol: TrainingProtocol) -> None:
    from .errors import IncompatibleModelError

    mode = model.metadata.get("feature_mode")
    if mode is not None and mode != protocol.features.mode.value:
        raise IncompatibleModelError(f"model was trained on {mode}, pipeline uses {protocol.features.mode.value}")
    if model.n_features != protocol.features.feature_length():
        raise IncompatibleModelError(
            f"model expects {model.n_features} features, pipeline produces {protocol.features.feature_length()}")


def sweep(model: EcocModel, pattern: SignalPattern, protocol: TrainingProtocol,
          test_esn0_db: Sequence[float], per_class_test: int | None = None) -> SweepResult:
    """Accuracy and confusion on a fresh single-Es/N0 test set per sweep point."""
    check_compatible(model, protocol)
    if per_class_test is not None:
        protocol = replace(protocol, per_class_test=per_class_test)
    accs, cms, counts = [], [], []
    for e in test_esn0_db:
        data = build_dataset(pattern, protocol, "test", esn0_mix=(float(e),))
        acc, cm = evaluate(model, data.features, data.labels)
        accs.append(acc)
        cms.append(cm)
        counts.append(int(cm.sum()))
    return SweepResult(np.asarray(test_esn0_db, dtype=float), np.array(accs), cms, np.array(counts),
                       pattern.alphas, dict(model.metadata))


def _esn0_label(e: float) -> str:
    return f"{int(e)}" if float(e).is_integer() else f"{e:g}"


def emit_reports(result: SweepResult, out_dir) -> list[Path]:
    out = Path(out_dir)
    try:
        out.mkdir(parents=True, exist_ok=True)
        written = []
        path = out / "accuracy_sweep.csv"
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(["test_esn0_db", "accuracy", "n_test"])
            for e, a, n in zip(result.esn0_db, result.accuracy, result.n_test):
                w.writerow([_esn0_label(e), f"{a:.6f}", int(n)])
        written.append(path)
        for e, cm in zip(result.esn0_db, result.confusions):
            path = out / f"confusion_{_esn0_label(e)}.csv"
            with open(path, "w", newline="") as fh:
                w = csv.writer(fh, lineterminator="\n")
                w.writerow([f"{a:g}" for a in result.alphas])
                w.writerows(cm.tolist())
            written.append(path)
        path = out / "protocol.meta"
        meta = dict(result.provenance, test_esn0_db=[float(e) for e in result.esn0_db])
        path.write_text(json.dumps(meta, indent=2, sort_keys=True) + "\n")
        written.append(path)
    except OSError as exc:
        raise OSError(f"cannot write reports under {out}: {exc}") from exc
    return written
