"""Emit the theoretical rate-exponent curves over a gamma grid.

Produces one CSV per family plus two SVG panels per family: the excess-risk
exponent in n (multiple descent: minima 1/2 at even gamma, isolated maxima at
odd gamma) and in d (periodic plateaus on the odd-to-even intervals).
"""

import argparse
from fractions import Fraction
from pathlib import Path

from sphereflow import svg
from sphereflow.entropy_rates import FAMILIES, rate_table
from sphereflow.harness import emit


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--gamma-min", type=float, default=0.1)
    parser.add_argument("--gamma-max", type=float, default=8.0)
    parser.add_argument("--step", type=float, default=0.01)
    parser.add_argument("--out-dir", default="results")
    args = parser.parse_args()

    out = Path(args.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    # exact rational grid so regime boundaries are classified unambiguously
    scale = 10_000
    lo, hi = int(round(args.gamma_min * scale)), int(round(args.gamma_max * scale))
    step = int(round(args.step * scale))
    gammas = [Fraction(i, scale) for i in range(lo, hi + 1, step)]

    for family in FAMILIES:
        errors = []
        points = rate_table(gammas, [family], errors=errors)
        emit(points, "csv", out / f"rates_{family}.csv")
        xs = [pt.gamma for pt in points]
        n_panel = svg.line_chart(
            {"exponent in n": (xs, [pt.n_exponent for pt in points])},
            x_label="gamma", y_label="excess-risk exponent (n scale)",
            title=f"{family}: multiple descent",
        )
        d_panel = svg.line_chart(
            {"exponent in d": (xs, [pt.d_exponent for pt in points])},
            x_label="gamma", y_label="excess-risk exponent (d scale)",
            title=f"{family}: periodic plateaus",
        )
        (out / f"rates_{family}_n_scale.svg").write_text(n_panel)
        (out / f"rates_{family}_d_scale.svg").write_text(d_panel)
        skipped = f", {len(errors)} skipped" if errors else ""
        print(f"{family}: {len(points)} points{skipped} -> {out}/rates_{family}*.{{csv,svg}}")


if __name__ == "__main__":
    main()
