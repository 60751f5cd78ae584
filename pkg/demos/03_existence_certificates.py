"""Existence certificates: smallness condition, eps scan, alpha threshold.

The right-hand side f(t) = t / (1 + t^2) is bounded, so the normalized
potential maximum chi(eps) = max_F / eps^(p-1) decays and the smallness
condition chi(eps) < kappa^p / p admits large eps.  A passing certificate
pins a solution with sup norm below eps inside the energy ball of radius
sigma = kappa^p eps^p.  Separately, the declared growth gamma = 1/2 of the
potential at 0 turns the first eigenvalue into an explicit alpha threshold
above which a positive solution is guaranteed.
"""

import numpy as np

from dplap.core import ProblemSpec, sup_norm
from dplap.existence import (alpha_threshold, chi, check_thm_esistenza,
                             find_admissible_eps, h)
from dplap.nonlinearities import bounded_rational, linear
from dplap.solver import minimize_on_sublevel
from dplap.spectrum import lambda1_closed_form_p2


def main():
    prob = ProblemSpec(T=5, p=2.0, nonlinearity=bounded_rational())

    print("normalized potential maxima for f(t) = t/(1+t^2), T = 5, p = 2")
    print(f"{'eps':>10} {'chi(eps)':>12} {'h(eps)':>12} {'bound c':>12}")
    for eps in (0.1, 1.0, 10.0, 100.0, 1000.0):
        cert = check_thm_esistenza(prob, eps)
        print(f"{eps:10g} {chi(eps, prob):12.6f} {h(eps, prob):12.6f} "
              f"{cert.bound:12.6f}  verdict={cert.verdict}")

    print()
    cert = find_admissible_eps(prob)
    print(f"eps scan: best margin at eps = {cert.eps:g} "
          f"(chi = {cert.chi_eps:.3e} < bound = {cert.bound:.6f})")
    out = minimize_on_sublevel(prob, 1.0, cert.sigma, certificate=cert)
    print(f"sublevel minimizer: energy {out.energy:.12f}, "
          f"sup norm {sup_norm(out.u):.6f} < eps, "
          f"converged={out.converged}, boundary_hit={out.boundary_hit}")

    print()
    print("a linear right-hand side never satisfies the smallness condition:")
    lin = ProblemSpec(T=5, p=2.0, nonlinearity=linear(1.0))
    print("  find_admissible_eps ->", find_admissible_eps(lin))

    print()
    thr = alpha_threshold(prob, 0.5)
    print(f"alpha threshold with declared gamma = 1/2: {thr:.15f}")
    print("equals lambda_1 / (p * gamma) = "
          f"{lambda1_closed_form_p2(5) / (2.0 * 0.5):.15f}")
    print("alpha above the threshold guarantees a positive solution;")
    print("below it nothing is claimed (the bound is sufficient only).")


if __name__ == "__main__":
    main()
