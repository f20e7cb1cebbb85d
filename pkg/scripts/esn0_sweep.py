"""Accuracy versus test Es/N0 for wavelet feature modes trained on a mixed Es/N0 set.

    python3 scripts/esn0_sweep.py --mix -20 -10 0 10 20 30 40 50 --out out/sweep
"""

from _common import accuracy_grid, base_parser, write_table
from wvcl.experiment import TrainingProtocol

POINTS = [-20.0, -10.0, 0.0, 10.0, 20.0, 30.0, 40.0, 50.0]


def main():
    p = base_parser(__doc__)
    p.add_argument("--mix", type=float, nargs="+", default=POINTS)
    p.add_argument("--points", type=float, nargs="+", default=POINTS)
    p.add_argument("--modes", nargs="+", default=["WaveletVar", "WaveletIqr", "WaveletVarIqr"])
    args = p.parse_args()
    protocol = TrainingProtocol(esn0_mix_db=tuple(args.mix), per_class_train=args.train,
                                per_class_test=args.test, seed=args.seed)
    rows = []
    for name in args.patterns:
        acc = accuracy_grid(name, args.modes, protocol, list(args.points))
        rows += [[name, m, f"{e:g}", f"{a:.6f}"] for m in args.modes for e, a in zip(args.points, acc[m])]
    write_table(args.out / "esn0_sweep.csv", ["pattern", "mode", "test_esn0_db", "accuracy"], rows)


if __name__ == "__main__":
    main()
