"""Accuracy of every feature mode at one train/test Es/N0 (default 20 dB).

    python3 scripts/feature_comparison.py --esn0 20 --out out/features
"""

from _common import accuracy_grid, base_parser, write_table
from wvcl.experiment import FeatureMode, TrainingProtocol


def main():
    p = base_parser(__doc__)
    p.add_argument("--esn0", type=float, default=20.0)
    args = p.parse_args()
    protocol = TrainingProtocol(esn0_mix_db=(args.esn0,), per_class_train=args.train,
                                per_class_test=args.test, seed=args.seed)
    modes = [m.value for m in FeatureMode]
    rows = []
    for name in args.patterns:
        acc = accuracy_grid(name, modes, protocol, [args.esn0])
        rows += [[name, m, f"{acc[m][0]:.6f}"] for m in modes]
    write_table(args.out / "feature_comparison.csv", ["pattern", "mode", "accuracy"], rows)


if __name__ == "__main__":
    main()
