"""Grid functions, the p-Laplacian stencil, and the embedding constant.

Walks the basic objects: a grid function with zero boundary values, its
forward differences, the discrete p-Laplacian, and the sharp constant
kappa(p, T) that bounds the sup norm by the difference p-norm.  The
inequality is tight exactly on tent profiles, which the last block shows
numerically.
"""

import numpy as np

from dplap.core import (GridFunction, c_const, forward_difference, kappa,
                        p_laplacian, p_norm, sup_norm, theta)


def main():
    T = 5
    u = GridFunction.from_interior([1.0, 2.0, 3.0, 2.0, 1.0])
    print("node values u(0..T+1):", u.values)
    print("forward differences  :", forward_difference(u))

    for p in (1.5, 2.0, 3.0):
        print(f"p = {p}: p-Laplacian -D(phi_p(Du)) =", p_laplacian(u, p))

    print()
    print("sharp embedding constant kappa and smallness constant c = kappa^p/p")
    print(f"{'p':>5} {'T':>4} {'kappa':>12} {'c':>12}")
    for p in (1.5, 2.0, 3.0):
        for T in (4, 5, 10):
            print(f"{p:5.1f} {T:4d} {kappa(p, T):12.6f} {c_const(p, T):12.6f}")

    print()
    p, T = 2.0, 5
    print(f"embedding sup(u) * kappa <= ||u||_p at p = {p}, T = {T}")
    rng = np.random.Generator(np.random.Philox(0))
    worst = 0.0
    for _ in range(5):
        v = GridFunction.from_interior(rng.standard_normal(T))
        lhs = sup_norm(v) * kappa(p, T)
        rhs = p_norm(v, p)
        worst = max(worst, lhs / rhs)
        print(f"  random profile: sup*kappa = {lhs:.6f} <= p_norm = {rhs:.6f}")
    # the tent peaked at node j has p_norm^p = theta(p, T, j); the smallest
    # theta over j is kappa^p, so the peak node attains equality
    j = (T + 1) // 2
    tent = np.minimum(np.arange(1, T + 1), np.arange(T, 0, -1)).astype(float)
    tent = GridFunction.from_interior(tent / tent[j - 1])
    lhs = sup_norm(tent) * kappa(p, T)
    rhs = p_norm(tent, p)
    print(f"  tent at midpoint: sup*kappa = {lhs:.15f} vs p_norm = {rhs:.15f}")
    print(f"  theta({j}, p, T) = {theta(float(j), p, T):.15f} = kappa^p = "
          f"{kappa(p, T) ** p:.15f}")
    print(f"  worst random ratio {worst:.6f} (tent ratio 1 exactly)")


if __name__ == "__main__":
    main()
