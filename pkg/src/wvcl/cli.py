"""Command-line entry point: ``wvcl {generate,train,sweep,classify,scalogram}``.

Failures print one line ``error: <category>: <message>`` on stderr and exit
with the category's status code.
"""

from __future__ import annotations

import argparse
import csv
import json
import logging
import sys
from pathlib import Path

import numpy as np

from . import channel
from .config import load_config
from .errors import (ConfigError, CorruptFileError, DegenerateInputError, IncompatibleModelError,
                     InvalidInputError, WvclError)
from .experiment import (PIPELINE_VERSION, FeatureMode, FeatureSettings, emit_reports, featurize,
                         run_protocol, stage_seeds, sweep)
from .features import StatKind
from .io import load_model, read_capture, save_model, write_capture
from .waveform import SefdmConfig, generate_symbol_ifft, random_qpsk
from .wavelet import MorseParams, build_scale_grid, cwt

EXIT_CODES = {
    WvclError: 1,
    InvalidInputError: 3,
    DegenerateInputError: 4,
    IncompatibleModelError: 5,
    CorruptFileError: 6,
    ConfigError: 7,
}
IO_EXIT = 8


def _esn0_list(text: str) -> list[float]:
    return [float(v) for v in text.replace(",", " ").split()]


def _alpha_tag(alpha: float) -> str:
    return f"{alpha:.4f}"


def cmd_generate(args) -> int:
    cfg = load_config(args.config)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    esn0 = float(args.esn0)
    profile = cfg.protocol.multipath
    seeds = stage_seeds(cfg.protocol.seed, "capture", (esn0,))
    alphas = [float(a) for a in args.alpha] if args.alpha else cfg.pattern.alphas
    for c, alpha in enumerate(alphas):
        sc = SefdmConfig(cfg.protocol.n_subcarriers, alpha, cfg.protocol.oversampling)
        frames = []
        for i in range(args.symbols):
            r = c * args.symbols + i
            s = random_qpsk(sc.n_subcarriers, np.random.default_rng(channel.symbol_seed(seeds["bits"], r)))
            x = generate_symbol_ifft(sc, s)
            if profile is not None:
                taps = profile.draw_taps(channel.symbol_seed(seeds["channel"] ^ profile.seed, r))
                x = channel.apply_multipath(x, profile, taps)
                x = channel.apply_hardware(x, profile, channel.symbol_seed(seeds["hardware"], r),
                                           cfg.sample_rate_hz)
            frames.append(channel.apply_awgn(x, esn0, channel.symbol_seed(seeds["noise"], r)))
        stem = f"alpha_{_alpha_tag(alpha)}"
        iq_path, meta_path = out / f"{stem}.iq", out / f"{stem}.json"
        write_capture(iq_path, np.concatenate(frames), cfg.sample_rate_hz)
        meta = {"alpha": alpha, "effective_alpha": sc.effective_alpha, "ifft_length": sc.ifft_length,
                "symbol_length": sc.symbol_length, "symbols": args.symbols, "esn0_db": esn0,
                "seed": cfg.protocol.seed, "multipath": profile is not None}
        meta_path.write_text(json.dumps(meta, indent=2, sort_keys=True) + "\n")
        print(f"wrote {iq_path} ({args.symbols * sc.symbol_length} samples)")
    return 0


def cmd_train(args) -> int:
    cfg = load_config(args.config)
    model = run_protocol(cfg.pattern, cfg.protocol, cfg.classifier)
    path = Path(args.out) if args.out else cfg.model_path
    path.parent.mkdir(parents=True, exist_ok=True)
    save_model(model, path)
    print(f"classes={model.classes.size} learners={len(model.learners)} "
          f"feature_length={model.n_features} max_kkt_residual={max(model.kkt_residuals):.2e} model={path}")
    return 0


def _check_pipeline(model) -> None:
    version = model.metadata.get("pipeline_version")
    if version != PIPELINE_VERSION:
        raise IncompatibleModelError(f"model pipeline version {version}, expected {PIPELINE_VERSION}")


def cmd_sweep(args) -> int:
    cfg = load_config(args.config)
    model = load_model(args.model)
    _check_pipeline(model)
    esn0 = _esn0_list(args.esn0) if args.esn0 else list(cfg.test_esn0_db)
    result = sweep(model, cfg.pattern, cfg.protocol, esn0, args.per_class)
    out = Path(args.out) if args.out else cfg.output_dir
    for path in emit_reports(result, out):
        print(f"wrote {path}")
    return 0


def _model_features(model) -> tuple[FeatureSettings, int]:
    m = model.metadata
    try:
        settings = FeatureSettings(FeatureMode(m["feature_mode"]), MorseParams(m["morse_gamma"], m["morse_beta"]),
                                   int(m["octaves"]), int(m["voices"]),
                                   tuple(StatKind[k] for k in m["stat_kinds"]))
        window = int(m["window"])
    except (KeyError, ValueError) as exc:
        raise IncompatibleModelError(f"model lacks usable feature metadata: {exc}") from None
    if settings.feature_length() != model.n_features:
        raise IncompatibleModelError(
            f"{settings.mode.value} yields {settings.feature_length()} features, model expects {model.n_features}")
    return settings, window


def cmd_classify(args) -> int:
    model = load_model(args.model)
    _check_pipeline(model)
    settings, trained_window = _model_features(model)
    window = args.window or trained_window
    if window != trained_window and settings.mode.is_wavelet:
        raise IncompatibleModelError(f"model was trained on {trained_window}-sample windows, not {window}")
    samples, _ = read_capture(args.capture)
    if samples.size < window:
        raise InvalidInputError(f"capture has {samples.size} samples, shorter than window {window}")
    n = samples.size // window
    frames = np.stack([channel.normalize_power(samples[i * window:(i + 1) * window]) for i in range(n)])
    labels, losses = model.predict(featurize(frames, settings))
    alphas = model.metadata.get("alphas")
    names = [f"{a:g}" for a in alphas] if alphas else [str(c) for c in model.classes]

    fh = open(args.out, "w", newline="") if args.out else sys.stdout
    try:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["window_index", "predicted_alpha"] + [f"loss_{a}" for a in names])
        for i, (lab, row) in enumerate(zip(labels, losses)):
            w.writerow([i, names[int(np.flatnonzero(model.classes == lab)[0])]] + [f"{v:.6f}" for v in row])
    finally:
        if fh is not sys.stdout:
            fh.close()
    return 0


def cmd_scalogram(args) -> int:
    if args.config:
        ft = load_config(args.config).protocol.features
        params, octaves, voices = ft.morse, ft.octaves, ft.voices
    else:
        params, octaves, voices = MorseParams(args.gamma, args.beta), args.octaves, args.voices
    samples, _ = read_capture(args.capture)
    start = args.index * args.window
    if args.index < 0 or start + args.window > samples.size:
        raise InvalidInputError(f"window {args.index} lies outside a {samples.size}-sample capture")
    frame = samples[start:start + args.window].astype(np.complex128)
    part = frame.real if args.part == "real" else frame.imag
    text = cwt(part, build_scale_grid(octaves, voices, params), params).to_text()
    if args.out:
        Path(args.out).write_text(text)
    else:
        sys.stdout.write(text)
    return 0


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="wvcl", description="SEFDM/OFDM waveform classification")
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True)

    g = sub.add_parser("generate", help="synthesise IQ capture files, one per class")
    g.add_argument("--config", required=True)
    g.add_argument("--out", required=True, help="output directory")
    g.add_argument("--symbols", type=int, default=10)
    g.add_argument("--esn0", default="inf", help="Es/N0 in dB ('inf' for noiseless)")
    g.add_argument("--alpha", type=float, nargs="*", help="override the pattern's alpha list")
    g.set_defaults(func=cmd_generate)

    t = sub.add_parser("train", help="train an ECOC-SVM model")
    t.add_argument("--config", required=True)
    t.add_argument("--out", help="model path (default: output.directory/output.model)")
    t.set_defaults(func=cmd_train)

    s = sub.add_parser("sweep", help="accuracy versus test Es/N0")
    s.add_argument("--model", required=True)
    s.add_argument("--config", required=True)
    s.add_argument("--esn0", help="comma/space separated test Es/N0 values in dB")
    s.add_argument("--per-class", type=int, dest="per_class")
    s.add_argument("--out", help="report directory (default: output.directory)")
    s.set_defaults(func=cmd_sweep)

    c = sub.add_parser("classify", help="classify non-overlapping windows of a capture")
    c.add_argument("--model", required=True)
    c.add_argument("--capture", required=True)
    c.add_argument("--window", type=int, default=None)
    c.add_argument("--out", help="CSV path (default: stdout)")
    c.set_defaults(func=cmd_classify)

    w = sub.add_parser("scalogram", help="dump one window's scalogram as a text matrix")
    w.add_argument("--capture", required=True)
    w.add_argument("--index", type=int, default=0)
    w.add_argument("--window", type=int, default=1024)
    w.add_argument("--part", choices=("real", "imag"), default="real")
    w.add_argument("--config")
    w.add_argument("--gamma", type=float, default=3.0)
    w.add_argument("--beta", type=float, default=20.0)
    w.add_argument("--octaves", type=int, default=7)
    w.add_argument("--voices", type=int, default=10)
    w.add_argument("--out")
    w.set_defaults(func=cmd_scalogram)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING)
    try:
        return args.func(args)
    except WvclError as exc:
        msg = str(exc).replace("\n", " ")
        print(f"error: {exc.category}: {msg}", file=sys.stderr)
        return EXIT_CODES.get(type(exc), 1)
    except OSError as exc:
        print(f"error: io-error: {exc}", file=sys.stderr)
        return IO_EXIT


if __name__ == "__main__":
    sys.exit(main())
