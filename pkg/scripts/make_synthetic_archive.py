"""Write the deterministic three-station synthetic archive.

    python scripts/make_synthetic_archive.py data/synthetic --seed 2021
"""
import argparse

from ghiforecast.synthetic import build_archive


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("out")
    ap.add_argument("--seed", type=int, default=2021)
    ap.add_argument("--sentinel-rate", type=float, default=0.002)
    args = ap.parse_args()
    root = build_archive(args.out, seed=args.seed, sentinel_rate=args.sentinel_rate)
    n = sum(1 for _ in root.rglob("*.dat"))
    print(f"wrote {n} daily files under {root}")


if __name__ == "__main__":
    main()
