"""TOML experiment configuration with strict key checking.

Every section and key is optional; omitted keys take the defaults listed in
``DEFAULTS``.  Unknown sections or keys raise :class:`ConfigError`.
"""

from __future__ import annotations

import copy
from dataclasses import dataclass
from pathlib import Path

import tomli

from .channel import ChannelProfile
from .errors import ConfigError, WvclError
from .experiment import (ClassifierSettings, FeatureMode, FeatureSettings, SignalPattern,
                         TrainingProtocol, get_pattern)
from .features import StatKind
from .svm import KernelSpec
from .wavelet import MorseParams

DEFAULTS = {
    "signal": {
        "n_subcarriers": 256,
        "oversampling": 8,
        "sample_rate_hz": 200e3,
        "modulation": "QPSK",
    },
    "channel": {
        "multipath": False,
        "tap_delays": [0, 2, 5],
        "tap_powers_db": [0.0, -3.0, -6.0],
        "regenerate_per_symbol": True,
        "seed": 0,
        "random_phase": False,
        "cfo_ppm": 0.0,
    },
    "features": {
        "mode": "WaveletVarIqr",
        "morse_gamma": 3.0,
        "morse_beta": 20.0,
        "octaves": 7,
        "voices": 10,
        "stat_kinds": ["Mean", "Variance", "Skewness", "MaxMinRatio", "Iqr"],
        "window": 1024,
    },
    "classifier": {
        "C": 1.0,
        "degree": 2,
        "gamma": "auto",  # 1 / feature length
        "coef0": 1.0,
        "tol": 1e-3,
        "decoding": "loss",
        "max_iter": 200_000,
    },
    "protocol": {
        "pattern": "TypeII",
        "alphas": [],  # empty: the pattern's standard class list
        "esn0_mix_db": [20.0],
        "per_class_train": 500,
        "per_class_test": 200,
        "seed": 2021,
        "test_esn0_db": [-20.0, -10.0, 0.0, 10.0, 20.0, 30.0, 40.0, 50.0],
    },
    "output": {
        "directory": "out",
        "model": "model.wvcl",
    },
}


def _merge(doc: dict) -> dict:
    merged = copy.deepcopy(DEFAULTS)
    for section, values in doc.items():
        if section not in DEFAULTS:
            raise ConfigError(f"unknown config section [{section}]")
        if not isinstance(values, dict):
            raise ConfigError(f"[{section}] must be a table")
        for key, value in values.items():
            if key not in DEFAULTS[section]:
                raise ConfigError(f"unknown key {section}.{key}")
            merged[section][key] = value
    return merged


@dataclass(frozen=True)
class ExperimentConfig:
    pattern: SignalPattern
    protocol: TrainingProtocol
    classifier: ClassifierSettings
    profile: ChannelProfile
    sample_rate_hz: float
    test_esn0_db: tuple[float, ...]
    output_dir: Path
    model_name: str

    @property
    def model_path(self) -> Path:
        return self.output_dir / self.model_name

    @classmethod
    def from_dict(cls, doc: dict, base_dir: Path | None = None) -> ExperimentConfig:
        c = _merge(doc)
        try:
            sig, ch, ft, cl, pr, out = (c[k] for k in ("signal", "channel", "features", "classifier",
                                                         "protocol", "output"))
            if sig["modulation"] != "QPSK":
                raise ConfigError(f"unsupported modulation {sig['modulation']!r}")
            pattern = get_pattern(pr["pattern"])
            if pr["alphas"]:
                pattern = SignalPattern(pattern.name, tuple(float(a) for a in pr["alphas"]))
            profile = ChannelProfile(tuple(ch["tap_delays"]), tuple(ch["tap_powers_db"]),
                                     bool(ch["regenerate_per_symbol"]), int(ch["seed"]),
                                     bool(ch["random_phase"]), float(ch["cfo_ppm"]))
            features = FeatureSettings(
                FeatureMode(ft["mode"]), MorseParams(float(ft["morse_gamma"]), float(ft["morse_beta"])),
                int(ft["octaves"]), int(ft["voices"]),
                tuple(sorted(StatKind.parse(k) for k in ft["stat_kinds"])))
            gamma = None if cl["gamma"] == "auto" else float(cl["gamma"])
            classifier = ClassifierSettings(float(cl["C"]), KernelSpec("polynomial", int(cl["degree"]), gamma,
                                                                       float(cl["coef0"])),
                                            float(cl["tol"]), str(cl["decoding"]), int(cl["max_iter"]))
            protocol = TrainingProtocol(
                tuple(float(e) for e in pr["esn0_mix_db"]), int(pr["per_class_train"]),
                int(pr["per_class_test"]), features, int(pr["seed"]),
                profile if ch["multipath"] else None, int(sig["n_subcarriers"]), int(sig["oversampling"]),
                int(ft["window"]))
        except WvclError as exc:
            raise ConfigError(str(exc)) from None
        except (TypeError, ValueError, KeyError) as exc:
            raise ConfigError(f"invalid config value: {exc}") from None
        out_dir = Path(out["directory"])
        if base_dir is not None and not out_dir.is_absolute():
            out_dir = base_dir / out_dir
        return cls(pattern, protocol, classifier, profile, float(sig["sample_rate_hz"]),
                   tuple(float(e) for e in pr["test_esn0_db"]), out_dir, str(out["model"]))


def load_config(path) -> ExperimentConfig:
    path = Path(path)
    try:
        doc = tomli.loads(path.read_text())
    except tomli.TOMLDecodeError as exc:
        raise ConfigError(f"{path}: {exc}") from None
    return ExperimentConfig.from_dict(doc, base_dir=path.parent)
