"""Train-test MAE of each fixed XGB preset on the synthetic archive.

One pipeline run per preset with only the boosted model enabled; feature
selection and splits are seeded identically, so the presets see the same data.
"""
import argparse
import csv
from pathlib import Path

from ghiforecast import pipeline
from ghiforecast.config import RunConfig
from ghiforecast.models import four_xgb_presets
from ghiforecast.synthetic import build_archive


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--data", default="data/synthetic")
    ap.add_argument("--out", default="runs/presets")
    args = ap.parse_args()

    data = Path(args.data)
    if not any(data.rglob("*.dat")):
        build_archive(data)
    table = {}
    for preset in four_xgb_presets():
        cfg = RunConfig(data_root=str(data), output_dir=str(Path(args.out) / preset.name), models=("xgb",), xgb_preset=preset.name)
        manifest = pipeline.run(cfg)
        rows = list(csv.reader(manifest.path("metrics.csv").open()))
        mae = next(r for r in rows if r[:2] == ["train-test", "MAE"])
        for col, v in zip(rows[0][2:], mae[2:]):
            station = col.split(":")[0]
            table.setdefault(station, {})[preset.name] = v

    names = [p.name for p in four_xgb_presets()]
    print(f"{'station':>11} " + " ".join(f"{n:>16}" for n in names))
    for station, cells in table.items():
        print(f"{station:>11} " + " ".join(f"{cells.get(n, 'NA'):>16}" for n in names))


if __name__ == "__main__":
    main()
