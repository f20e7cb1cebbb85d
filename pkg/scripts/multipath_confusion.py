"""Confusion matrices through the default multipath profile with 20-30 dB AWGN.

A simulated stand-in for over-the-air captures.  Writes one report directory per
pattern (accuracy_sweep.csv, confusion_<e>.csv, protocol.meta).

    python3 scripts/multipath_confusion.py --out out/multipath
"""

import numpy as np

from _common import base_parser
from wvcl.channel import DEFAULT_PROFILE
from wvcl.experiment import (FeatureMode, SweepResult, TrainingProtocol, build_dataset, emit_reports,
                             get_pattern, run_protocol)
from wvcl.svm import evaluate


def main():
    p = base_parser(__doc__)
    p.add_argument("--mix", type=float, nargs="+", default=[20.0, 25.0, 30.0])
    p.add_argument("--mode", default=FeatureMode.WAVELET_VAR_IQR.value)
    args = p.parse_args()
    protocol = TrainingProtocol(esn0_mix_db=tuple(args.mix), per_class_train=args.train,
                                per_class_test=args.test, seed=args.seed,
                                multipath=DEFAULT_PROFILE).with_mode(args.mode)
    for name in args.patterns:
        pattern = get_pattern(name)
        model = run_protocol(pattern, protocol)
        data = build_dataset(pattern, protocol, "test", esn0_mix=tuple(args.mix))
        acc, cm = evaluate(model, data.features, data.labels)
        recall = np.diag(cm) / cm.sum(axis=1)
        print(f"{name}: accuracy {acc:.3f}, per-class recall " + " ".join(f"{r:.2f}" for r in recall))
        print(cm)
        # the mixed test set is reported under its mean Es/N0
        res = SweepResult(np.array([float(np.mean(args.mix))]), np.array([acc]), [cm],
                          np.array([cm.sum()]), pattern.alphas, dict(model.metadata))
        for path in emit_reports(res, args.out / name):
            print(f"wrote {path}")


if __name__ == "__main__":
    main()
