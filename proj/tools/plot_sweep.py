#!/usr/bin/env python3
"""Plot a sweep series file (param value metric score) as one line per metric."""
import argparse

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt
import pandas as pd


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("series", help="<out>.series.tsv written by spseg sweep")
    ap.add_argument("-o", "--output", default="sweep.png")
    args = ap.parse_args()

    df = pd.read_csv(args.series, sep="\t")
    param = df["param"].iloc[0]
    fig, ax = plt.subplots(figsize=(5, 3.5))
    for metric, rows in df.groupby("metric", sort=False):
        rows = rows.sort_values("value")
        ax.plot(rows["value"], rows["score"], marker="o", label=metric)
    ax.set_xlabel(param)
    ax.set_ylabel("score")
    ax.legend()
    fig.tight_layout()
    fig.savefig(args.output, dpi=150)


if __name__ == "__main__":
    main()
