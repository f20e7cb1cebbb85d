"""Shared helpers for the experiment scripts."""

import argparse
import csv
import time
from pathlib import Path

from wvcl.experiment import FeatureMode, TrainingProtocol, get_pattern, run_protocol, sweep


def base_parser(description: str) -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(description=description)
    p.add_argument("--patterns", nargs="+", default=["TypeI", "TypeII"])
    p.add_argument("--train", type=int, default=500, help="windows per class for training")
    p.add_argument("--test", type=int, default=200, help="windows per class per test point")
    p.add_argument("--seed", type=int, default=2021)
    p.add_argument("--out", type=Path, default=Path("out"))
    return p


def accuracy_grid(pattern_name, modes, protocol: TrainingProtocol, test_points):
    """{mode: [accuracy per test point]} for one pattern."""
    pattern = get_pattern(pattern_name)
    rows = {}
    for mode in modes:
        t0 = time.time()
        proto = protocol.with_mode(FeatureMode(mode))
        model = run_protocol(pattern, proto)
        rows[mode] = []
        for point in test_points:
            res = sweep(model, pattern, proto, [point] if isinstance(point, float) else point)
            rows[mode].append(float(res.accuracy.mean()))
        print(f"{pattern_name:7s} {mode:14s} " + " ".join(f"{a:.3f}" for a in rows[mode])
              + f"  ({time.time() - t0:.0f}s)", flush=True)
    return rows


def write_table(path: Path, header, rows) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        w.writerows(rows)
    print(f"wrote {path}")


__all__ = ["base_parser", "accuracy_grid", "write_table"]
