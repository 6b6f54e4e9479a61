"""Sweep Mendelson complexities and covering radii against the sample size.

Prints the fitted scaling of eps_n^2 and eps_bar_n^2 with n (both should be
close to n^{-1/2} for inner-product kernels at fixed dimension) and compares
the population fixed point with empirical ones drawn from sampled Gram
matrices.
"""

import argparse

import numpy as np

from sphereflow.complexity import empirical_mendelson, solve_mendelson
from sphereflow.entropy_rates import covering_radius
from sphereflow.harness import kernel_by_name
from sphereflow.kernels import gram
from sphereflow.regression import eigendecompose
from sphereflow.spectrum import build_spectrum
from sphereflow.sphere_data import sample_sphere


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--kernel", choices=["ntk2", "rbf"], default="ntk2")
    parser.add_argument("--d", type=int, default=30)
    parser.add_argument("--sigma", type=float, default=1.0)
    parser.add_argument("--seed", type=int, default=0)
    parser.add_argument("--empirical-n", type=int, default=300)
    parser.add_argument("--empirical-seeds", type=int, default=5)
    args = parser.parse_args()

    profile = kernel_by_name(args.kernel)
    spectrum = build_spectrum(profile, args.d)
    ns = np.unique(np.round(np.logspace(2, 4, 9)).astype(int))

    print(f"kernel={args.kernel} d={args.d} sigma={args.sigma}")
    print(f"{'n':>6} {'eps_n^2':>12} {'T=1/eps^2':>12} {'eps_bar^2':>12}")
    eps_sq, bar_sq = [], []
    for n in ns:
        sol = solve_mendelson(spectrum, int(n), args.sigma)
        fx = covering_radius(spectrum, int(n), args.sigma)
        eps_sq.append(sol.epsilon_sq)
        bar_sq.append(fx.eps_bar**2)
        print(f"{n:>6} {sol.epsilon_sq:>12.5e} {sol.stopping_time:>12.4e} {fx.eps_bar**2:>12.5e}")

    fit = lambda ys: np.polyfit(np.log(ns), np.log(ys), 1)[0]
    print(f"\nlog-log slope of eps_n^2:     {fit(eps_sq):+.3f}  (inner-product theory: -1/2)")
    print(f"log-log slope of eps_bar_n^2: {fit(bar_sq):+.3f}")

    n = args.empirical_n
    pop = solve_mendelson(spectrum, n, args.sigma)
    print(f"\npopulation eps_n at n={n}: {pop.epsilon:.5f}")
    for s in range(args.empirical_seeds):
        sample = sample_sphere(args.d, n, seed=args.seed + s)
        emp = empirical_mendelson(eigendecompose(gram(profile, sample, normalized=True)), args.sigma)
        print(f"  seed {args.seed + s}: empirical eps_n = {emp.epsilon:.5f} "
              f"(ratio {emp.epsilon / pop.epsilon:.3f}, T = {emp.stopping_time:.1f})")


if __name__ == "__main__":
    main()
