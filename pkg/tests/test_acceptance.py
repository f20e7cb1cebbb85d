"""End-to-end acceptance checks at desk scale (500 train / 200 test per class).

Each test records one PASS/FAIL line, printed in the terminal summary.  Slow:
several minutes in total on one core.  Windows and wavelet features are cached
per data set for the session; the WaveletVar and WaveletIqr feature sets are the
two column blocks of WaveletVarIqr.
"""

from dataclasses import replace

import numpy as np
import pytest

from wvcl.channel import DEFAULT_PROFILE
from wvcl.experiment import (TYPE_I, TYPE_II, ClassifierSettings, FeatureMode, FeatureSettings,
                             SweepResult, TrainingProtocol, emit_reports, featurize, protocol_metadata,
                             simulate_windows, train_on, Dataset)
from wvcl.svm import KernelSpec, evaluate, train_binary_svm
from wvcl.waveform import (STANDARD_ALPHAS, SefdmConfig, generate_symbol_direct, generate_symbol_ifft,
                           ici_profile, instantaneous_power, random_qpsk)
from wvcl.wavelet import MorseParams, build_scale_grid, cwt

pytestmark = pytest.mark.acceptance

FULL_MIX = (-20.0, -10.0, 0.0, 10.0, 20.0, 30.0, 40.0, 50.0)
OTA_MIX = (20.0, 25.0, 30.0)
CLASSIFIER = ClassifierSettings()
WAVELET_MODES = (FeatureMode.WAVELET_VAR, FeatureMode.WAVELET_IQR, FeatureMode.WAVELET_VAR_IQR)


def _protocol(mix, multipath):
    return TrainingProtocol(esn0_mix_db=tuple(mix), multipath=DEFAULT_PROFILE if multipath else None)


def _all_features(windows, base: FeatureSettings) -> dict:
    vi = featurize(windows, replace(base, mode=FeatureMode.WAVELET_VAR_IQR))
    half = vi.shape[1] // 2
    out = {FeatureMode.WAVELET_VAR_IQR: vi, FeatureMode.WAVELET_VAR: vi[:, :half],
           FeatureMode.WAVELET_IQR: vi[:, half:]}
    for mode in (FeatureMode.TSTAT, FeatureMode.FSTAT):
        out[mode] = featurize(windows, replace(base, mode=mode))
    return out


class Lab:
    """Session cache of data sets and trained models; ``fresh=True`` bypasses it."""

    def __init__(self):
        self.data, self.models = {}, {}

    def dataset(self, pattern, mix, multipath, role, esn0=None, fresh=False):
        key = (pattern.name, tuple(mix), multipath, role, None if esn0 is None else tuple(esn0))
        if fresh or key not in self.data:
            proto = _protocol(mix, multipath)
            windows, labels, esn0s = simulate_windows(pattern, proto, role, esn0)
            entry = (_all_features(windows, proto.features), labels, esn0s)
            if fresh:
                return entry
            self.data[key] = entry
        return self.data[key]

    def model(self, pattern, mix, mode, multipath=False, fresh=False):
        key = (pattern.name, tuple(mix), multipath, mode)
        if fresh or key not in self.models:
            feats, labels, esn0s = self.dataset(pattern, mix, multipath, "train", fresh=fresh)
            model = train_on(Dataset(feats[mode], labels, esn0s), pattern, CLASSIFIER)
            model.metadata = protocol_metadata(pattern, _protocol(mix, multipath).with_mode(mode), CLASSIFIER)
            if fresh:
                return model
            self.models[key] = model
        return self.models[key]

    def score(self, pattern, mix, mode, test_esn0, multipath=False, fresh=False):
        """(accuracy, confusion) of the model for ``mix`` on a fresh test set at ``test_esn0``."""
        model = self.model(pattern, mix, mode, multipath, fresh)
        feats, labels, _ = self.dataset(pattern, mix, multipath, "test", test_esn0, fresh)
        return evaluate(model, feats[mode], labels)


@pytest.fixture(scope="session")
def lab():
    return Lab()


def _verdict(ok: bool) -> str:
    return "PASS" if ok else "FAIL"


def test_criterion_01_ifft_matches_direct_synthesis(acceptance_report):
    rng = np.random.default_rng(101)
    worst = 0.0
    for alpha in STANDARD_ALPHAS:
        cfg = SefdmConfig(alpha=alpha)
        s = np.stack([random_qpsk(cfg.n_subcarriers, rng) for _ in range(100)])
        fast = generate_symbol_ifft(cfg, s)
        for row, x in zip(s, fast):
            ref = generate_symbol_direct(cfg.effective(), row)
            worst = max(worst, np.sqrt(np.mean(np.abs(x - ref) ** 2) / np.mean(np.abs(ref) ** 2)))
    ok = worst <= 1e-9
    acceptance_report(f"criterion 1 {_verdict(ok)}: max relative RMS {worst:.2e} (limit 1e-9)")
    assert ok


def test_criterion_02_power_decomposition(acceptance_report):
    rng = np.random.default_rng(102)
    worst_identity = worst_sum = 0.0
    for alpha in (1.0, 0.8):
        cfg = SefdmConfig(alpha=alpha)
        for _ in range(50):
            s = random_qpsk(cfg.n_subcarriers, rng)
            ici = ici_profile(cfg, s)
            power = instantaneous_power(generate_symbol_direct(cfg, s))
            worst_identity = max(worst_identity, np.max(np.abs(power - 1.0 - ici.real)))
            if alpha == 1.0:
                worst_sum = max(worst_sum, abs(ici.sum()))
    ok = worst_identity <= 1e-10 and worst_sum <= 1e-10
    acceptance_report(f"criterion 2 {_verdict(ok)}: identity error {worst_identity:.2e}, "
                      f"|sum ICI| at alpha=1 {worst_sum:.2e} (limits 1e-10)")
    assert ok


def test_criterion_03_statistical_features_fall_short(lab, acceptance_report):
    mix = (20.0,)
    acc = {m: lab.score(TYPE_I, mix, m, mix)[0]
           for m in (FeatureMode.TSTAT, FeatureMode.FSTAT, FeatureMode.WAVELET_IQR)}
    ref = acc[FeatureMode.WAVELET_IQR]
    gaps = {m: ref - acc[m] for m in (FeatureMode.TSTAT, FeatureMode.FSTAT)}
    ok = all(g >= 0.25 for g in gaps.values())
    acceptance_report(
        f"criterion 3 {_verdict(ok)}: TypeI@20dB TStat {acc[FeatureMode.TSTAT]:.3f}, "
        f"FStat {acc[FeatureMode.FSTAT]:.3f}, WaveletIqr {ref:.3f}; gaps "
        f"{gaps[FeatureMode.TSTAT]:.3f}/{gaps[FeatureMode.FSTAT]:.3f} (need >= 0.25 each)")
    assert ok


def _criterion4_results(lab, fresh=False):
    out = {}
    for pattern in (TYPE_I, TYPE_II):
        for mode in (FeatureMode.WAVELET_VAR, FeatureMode.WAVELET_IQR):
            out[pattern.name, mode] = lab.score(pattern, (20.0,), mode, (20.0,), fresh=fresh)
    return out


def _write_criterion4_reports(lab, results, root, fresh=False):
    files = {}
    for (name, mode), (acc, cm) in sorted(results.items(), key=lambda kv: (kv[0][0], kv[0][1].value)):
        pattern = TYPE_I if name == "TypeI" else TYPE_II
        meta = lab.model(pattern, (20.0,), mode, fresh=False).metadata
        res = SweepResult(np.array([20.0]), np.array([acc]), [cm], np.array([cm.sum()]), pattern.alphas, meta)
        for path in emit_reports(res, root / f"{name}_{mode.value}"):
            files[path.relative_to(root)] = path.read_bytes()
    return files


def test_criterion_04_wavelet_success(lab, acceptance_report, tmp_path_factory):
    results = _criterion4_results(lab)
    floors = {"TypeI": 0.95, "TypeII": 0.80}
    ok = all(acc >= floors[name] for (name, _), (acc, _) in results.items())
    detail = ", ".join(f"{name} {mode.value} {acc:.3f}" for (name, mode), (acc, _) in results.items())
    acceptance_report(f"criterion 4 {_verdict(ok)}: {detail} (need TypeI >= 0.95, TypeII >= 0.80)")
    lab.reports = _write_criterion4_reports(lab, results, tmp_path_factory.mktemp("crit4_first"))
    assert ok


def test_criterion_05_low_esn0_sensitivity(lab, acceptance_report):
    acc, _ = lab.score(TYPE_I, (0.0, 10.0, 20.0), FeatureMode.WAVELET_VAR, (0.0,))
    ok = acc >= 0.65
    acceptance_report(f"criterion 5 {_verdict(ok)}: TypeI WaveletVar trained on {{0,10,20}} dB, "
                      f"{acc:.3f} at 0 dB (need >= 0.65)")
    assert ok


def test_criterion_06_composite_robustness(lab, acceptance_report):
    ok, parts = True, []
    for pattern in (TYPE_I, TYPE_II):
        acc = {(m, e): lab.score(pattern, FULL_MIX, m, (e,))[0] for m in WAVELET_MODES for e in (0.0, 40.0)}
        vi0, var0 = acc[FeatureMode.WAVELET_VAR_IQR, 0.0], acc[FeatureMode.WAVELET_VAR, 0.0]
        vi40, iqr40 = acc[FeatureMode.WAVELET_VAR_IQR, 40.0], acc[FeatureMode.WAVELET_IQR, 40.0]
        # "within" read as: the composite loses no more than the margin
        ok &= vi0 >= var0 - 0.05 and vi40 >= iqr40 - 0.03
        parts.append(f"{pattern.name} 0dB VarIqr {vi0:.3f} vs Var {var0:.3f} ({vi0 - var0:+.3f}), "
                     f"40dB VarIqr {vi40:.3f} vs Iqr {iqr40:.3f} ({vi40 - iqr40:+.3f})")
    acceptance_report(f"criterion 6 {_verdict(ok)}: " + "; ".join(parts)
                      + " (need composite >= Var - 0.05 at 0 dB and >= Iqr - 0.03 at 40 dB)")
    assert ok


def test_criterion_07_multipath_surrogate(lab, acceptance_report):
    floors = {"TypeI": 0.97, "TypeII": 0.85}
    diag = {}
    for pattern in (TYPE_I, TYPE_II):
        _, cm = lab.score(pattern, OTA_MIX, FeatureMode.WAVELET_VAR_IQR, OTA_MIX, multipath=True)
        diag[pattern.name] = float(np.mean(np.diag(cm) / cm.sum(axis=1)))
    ok = all(diag[n] >= floors[n] for n in floors)
    acceptance_report(f"criterion 7 {_verdict(ok)}: mean confusion diagonal TypeI {diag['TypeI']:.3f}, "
                      f"TypeII {diag['TypeII']:.3f} (need >= 0.97 / >= 0.85)")
    assert ok


def test_criterion_08_cwt_localisation(acceptance_report):
    params = MorseParams()
    grid = build_scale_grid(7, 10, params)
    peaks = params.peak_frequency / grid.scales
    rng = np.random.default_rng(108)
    worst = 0.0
    for w0 in np.pi / 2 ** rng.uniform(1.0, 5.0, size=10):
        s = cwt(np.cos(w0 * np.arange(1024) + rng.uniform(0, 2 * np.pi)), grid, params)
        row = int(np.argmax(s.magnitudes.mean(axis=1)))
        worst = max(worst, abs(np.log2(peaks[row] / w0)))
    impulse_ok = True
    for t0 in (0, 257, 700, 1023):
        x = np.zeros(1024)
        x[t0] = 1.0
        impulse_ok &= bool(np.all(np.argmax(cwt(x, grid, params).magnitudes, axis=1) == t0))
    ok = worst <= 0.1 + 1e-12 and impulse_ok
    acceptance_report(f"criterion 8 {_verdict(ok)}: worst tone offset {worst * 10:.2f} voices (limit 1), "
                      f"impulse localised exactly: {impulse_ok}")
    assert ok


def test_criterion_09_svm_correctness(lab, acceptance_report):
    rng = np.random.default_rng(109)
    corners = np.array([[1, 1], [-1, -1], [1, -1], [-1, 1]], dtype=float)
    X = np.concatenate([corners, np.repeat(corners, 25, axis=0) + 0.2 * rng.standard_normal((100, 2))])
    y = np.where(X[:, 0] * X[:, 1] > 0, 1, -1)
    svm, _ = train_binary_svm(X, y, C=10.0, spec=KernelSpec())
    xor_acc = float(np.mean(svm.predict(X) == y))

    # every model the classification criteria use (cached when they ran first)
    needed = [(TYPE_I, (20.0,), m, False) for m in (FeatureMode.TSTAT, FeatureMode.FSTAT)]
    needed += [(p, (20.0,), m, False) for p in (TYPE_I, TYPE_II)
               for m in (FeatureMode.WAVELET_VAR, FeatureMode.WAVELET_IQR)]
    needed += [(TYPE_I, (0.0, 10.0, 20.0), FeatureMode.WAVELET_VAR, False)]
    needed += [(p, FULL_MIX, m, False) for p in (TYPE_I, TYPE_II) for m in WAVELET_MODES]
    needed += [(p, OTA_MIX, FeatureMode.WAVELET_VAR_IQR, True) for p in (TYPE_I, TYPE_II)]
    worst, counts_ok = 0.0, True
    for pattern, mix, mode, mp in needed:
        model = lab.model(pattern, mix, mode, mp)
        worst = max(worst, max(model.kkt_residuals))
        counts_ok &= len(model.learners) == {"TypeI": 6, "TypeII": 21}[pattern.name]
    ok = xor_acc == 1.0 and worst <= 1e-3 and counts_ok
    acceptance_report(f"criterion 9 {_verdict(ok)}: XOR accuracy {xor_acc:.3f}, max KKT residual {worst:.2e} "
                      f"over {len(needed)} models, learner counts 6/21: {counts_ok}")
    assert ok


def test_criterion_10_determinism(lab, acceptance_report, tmp_path_factory):
    if not hasattr(lab, "reports"):
        lab.reports = _write_criterion4_reports(lab, _criterion4_results(lab),
                                                tmp_path_factory.mktemp("crit4_first"))
    again = _write_criterion4_reports(lab, _criterion4_results(lab, fresh=True),
                                      tmp_path_factory.mktemp("crit4_again"))
    same = again == lab.reports
    ok = same and len(again) > 0
    acceptance_report(f"criterion 10 {_verdict(ok)}: {len(again)} report files regenerated from scratch, "
                      f"byte-identical: {same}")
    assert ok
