#!/usr/bin/env python3
"""Plot normalized phase uncertainty from `mzsense sweep` CSV output.

    mzsense sweep --preset fig2-solid > solid.csv
    python3 scripts/plot_sweep.py solid.csv -o solid.png
"""
import argparse
import math

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt
import pandas as pd


def main():
    ap = argparse.ArgumentParser(description=__doc__, formatter_class=argparse.RawDescriptionHelpFormatter)
    ap.add_argument("csv", nargs="+", help="sweep CSV files")
    ap.add_argument("-o", "--output", default="sweep.png")
    ap.add_argument("--ymax", type=float, default=2.0, help="upper limit of the normalized axis")
    args = ap.parse_args()

    fig, ax = plt.subplots(figsize=(7, 4))
    styles = ["-", "--", ":", "-."]
    for i, path in enumerate(args.csv):
        df = pd.read_csv(path, na_values=["inf"])
        for strategy, rows in df.groupby("strategy", sort=False):
            ax.plot(rows["phi"], rows["dphi_normalized"], styles[i % len(styles)], label=f"{path}: {strategy}")
    ax.set_xlim(0, 2 * math.pi)
    ax.set_ylim(0, args.ymax)
    ax.set_xlabel("phase phi [rad]")
    ax.set_ylabel("dphi / dphi_SNL")
    ax.legend(fontsize="small")
    fig.tight_layout()
    fig.savefig(args.output, dpi=150)


if __name__ == "__main__":
    main()
