"""Solve routines, positivity, sublevel minimization, multistart, sweep."""

import numpy as np
import pytest

from dplap.core import GridFunction, Nonlinearity, ProblemSpec, kappa, sup_norm
from dplap.energy import energy, gradient, strong_residual, weak_residual
from dplap.nonlinearities import bounded_rational, constant, linear, zero
from dplap.solver import (INDEFINITE, POSITIVE, ZERO, SolveOutcome,
                          SolverOptions, SweepRow, _worker_count,
                          check_positivity, minimize_on_sublevel,
                          multistart_solve, nontriviality_certificate,
                          solve_descent, solve_newton_p2, sweep_alpha,
                          truncate_nonnegative)
from dplap.spectrum import first_eigenpair

from test_existence import clipped_cubic


def esempio0(T=5, p=2.0):
    return ProblemSpec(T=T, p=p, nonlinearity=bounded_rational())


def eigen_start(prob, scale=0.1):
    pair = first_eigenpair(prob.p, prob.T)
    return GridFunction(scale * pair.phi.values)


# --------------------------------------------------------------- options

def test_solver_options_validation():
    with pytest.raises(ValueError, match="tol"):
        SolverOptions(tol=0.0)
    with pytest.raises(ValueError, match="max_iters"):
        SolverOptions(max_iters=0)
    with pytest.raises(ValueError, match="armijo_c"):
        SolverOptions(armijo_c=1.0)
    with pytest.raises(ValueError, match="backtrack"):
        SolverOptions(backtrack=0.0)
    with pytest.raises(ValueError, match="dedup_dist"):
        SolverOptions(dedup_dist=0.0)


def test_solve_outcome_is_frozen():
    out = solve_descent(esempio0(), 1.0, GridFunction.zero(5))
    assert isinstance(out, SolveOutcome)
    with pytest.raises(AttributeError):
        out.energy = 0.0


# ------------------------------------------------------------ truncation

def test_truncate_bounded_rational():
    nl = truncate_nonnegative(bounded_rational())
    assert nl.eval_f(1, 2.0) == 2.0 / 5.0
    assert nl.eval_f(1, -3.0) == 0.0  # f(0) = 0 extends by zero
    assert nl.eval_F(1, -5.0) == 0.0
    assert nl.eval_F(1, 2.0) == pytest.approx(0.5 * np.log(5.0), rel=1e-15)
    assert nl.eval_df(1, -1.0) == 0.0
    assert nl.is_nonnegative
    assert nl.name.endswith("~trunc")


def test_truncate_constant():
    nl = truncate_nonnegative(constant(2.0))
    assert nl.eval_f(1, -7.0) == 2.0  # extends by f(0) = 2
    assert nl.eval_F(1, -3.0) == -6.0  # f(0) * xi
    assert nl.eval_F(1, 3.0) == 6.0


def test_truncated_problem_keeps_positive_solutions():
    # positive solutions of the truncated problem solve the original one:
    # the residual under either right-hand side is the same number
    prob = esempio0()
    trunc = ProblemSpec(T=5, p=2.0, nonlinearity=truncate_nonnegative(bounded_rational()))
    out = solve_newton_p2(trunc, 1.0, eigen_start(trunc))
    assert out.converged and out.positivity == POSITIVE
    assert strong_residual(out.u, prob, 1.0) == out.residual


# ---------------------------------------------------------- solve_descent

def test_descent_zero_f_stays_at_zero():
    prob = ProblemSpec(T=4, p=2.0, nonlinearity=zero())
    out = solve_descent(prob, 1.0, GridFunction.zero(4))
    assert out.converged
    assert out.residual == 0.0
    assert out.positivity == ZERO
    assert out.energy == 0.0
    assert out.iterations == 0


def test_descent_constant_f_small_grid():
    # A u = (1, 1) has the solution (1, 1)
    prob = ProblemSpec(T=2, p=2.0, nonlinearity=constant(1.0))
    out = solve_descent(prob, 1.0, GridFunction.from_interior([0.3, -0.2]))
    assert out.converged
    assert np.allclose(out.u.interior, [1.0, 1.0], atol=1e-9)
    assert out.positivity == POSITIVE
    assert out.energy == pytest.approx(-1.0, abs=1e-12)


def test_descent_decreases_energy_and_solves():
    prob = esempio0()
    start = eigen_start(prob)
    out = solve_descent(prob, 1.0, start)
    assert out.converged
    assert out.residual <= 1e-10
    assert out.energy < energy(start, prob, 1.0)
    assert out.positivity == POSITIVE
    # anchor values for the positive branch at alpha = 1
    assert sup_norm(out.u) == pytest.approx(1.962256585023781, rel=1e-8)
    assert out.energy == pytest.approx(-1.3080511229489105, rel=1e-10)


def test_descent_p3_converges():
    prob = ProblemSpec(T=4, p=3.0, nonlinearity=constant(1.0))
    out = solve_descent(prob, 1.0, GridFunction.zero(4))
    assert out.converged
    assert out.residual <= 1e-10
    assert out.positivity == POSITIVE


def test_descent_rejects_bad_inputs():
    prob = esempio0()
    with pytest.raises(ValueError, match="alpha must be positive"):
        solve_descent(prob, 0.0, GridFunction.zero(5))
    with pytest.raises(ValueError, match="start has T=3"):
        solve_descent(prob, 1.0, GridFunction.zero(3))


def test_converged_outcome_passes_weak_form_check():
    prob = esempio0()
    out = solve_descent(prob, 1.0, eigen_start(prob))
    rng = np.random.Generator(np.random.Philox(31))
    T = prob.T
    for _ in range(100):
        v = GridFunction.from_interior(rng.uniform(-1.0, 1.0, T))
        bound = out.residual * T * (1.0 + sup_norm(v))
        assert abs(weak_residual(out.u, v, prob, 1.0)) <= bound


# --------------------------------------------------------- solve_newton_p2

def test_newton_matches_descent_from_same_start():
    prob = esempio0()
    start = eigen_start(prob)
    newton = solve_newton_p2(prob, 1.0, start)
    descent = solve_descent(prob, 1.0, start)
    assert newton.converged and descent.converged
    assert np.max(np.abs(newton.u.interior - descent.u.interior)) < 1e-8
    assert newton.iterations < descent.iterations


def test_newton_is_fast_near_solution():
    prob = esempio0()
    out = solve_newton_p2(prob, 1.0, eigen_start(prob))
    assert out.converged
    assert out.iterations <= 25
    assert out.residual <= 1e-10


def test_newton_requires_p2():
    prob = ProblemSpec(T=3, p=3.0, nonlinearity=zero())
    with pytest.raises(ValueError, match="requires p = 2"):
        solve_newton_p2(prob, 1.0, GridFunction.zero(3))


def test_newton_zero_f_immediate():
    prob = ProblemSpec(T=6, p=2.0, nonlinearity=zero())
    out = solve_newton_p2(prob, 1.0, GridFunction.from_interior(np.ones(6)))
    assert out.converged
    assert out.positivity == ZERO
    assert out.iterations <= 2


def test_newton_constant_f_exact_in_one_step():
    prob = ProblemSpec(T=3, p=2.0, nonlinearity=constant(1.0))
    out = solve_newton_p2(prob, 1.0, GridFunction.zero(3))
    assert out.converged
    assert np.allclose(out.u.interior, [1.5, 2.0, 1.5], atol=1e-12)
    assert out.iterations <= 2


# ------------------------------------------------------- check_positivity

def test_positivity_zero():
    prob = esempio0()
    assert check_positivity(GridFunction.zero(5), prob, 1.0, 1e-10) == ZERO


def test_positivity_positive_solution():
    prob = esempio0()
    out = solve_newton_p2(prob, 1.0, eigen_start(prob))
    assert check_positivity(out.u, prob, 1.0, 1e-10) == POSITIVE


def test_positivity_negative_solution_premise_fails():
    prob = esempio0()
    out = solve_newton_p2(prob, 1.0, eigen_start(prob))
    neg = GridFunction(-out.u.values)
    assert check_positivity(neg, prob, 1.0, 1e-10) == INDEFINITE


def test_positivity_sign_changing_premise_fails():
    u = GridFunction.from_interior([0.5, -0.5, 0.5])
    assert check_positivity(u, esempio0(3), 1.0, 1e-10) == INDEFINITE


def test_positivity_tiny_tent_is_zero():
    tent = GridFunction.from_interior(np.array([0.5, 1.0, 0.5]) * 1e-12)
    assert check_positivity(tent, esempio0(3), 1.0, 1e-10) == ZERO


def test_positivity_ambiguous_scale_is_indefinite():
    # superharmonic tent with sup above tol but min at tol: not classifiable
    tent = GridFunction.from_interior(np.array([0.5, 1.0, 0.5]) * 2e-10)
    assert check_positivity(tent, esempio0(3), 1.0, 1e-10) == INDEFINITE


# ---------------------------------------------- nontriviality certificate

def test_nontriviality_found_at_alpha_1():
    prob = esempio0()
    pair = first_eigenpair(2.0, 5)
    cert = nontriviality_certificate(prob, 1.0, pair)
    assert cert is not None
    zeta, e = cert
    assert zeta == 1.0
    assert e == pytest.approx(-0.3130526989980753, rel=1e-10)
    scaled = GridFunction(pair.phi.values * zeta)
    assert energy(scaled, prob, 1.0) == pytest.approx(e, rel=1e-15)


def test_nontriviality_absent_below_lambda1():
    # for alpha < lambda_1 the quadratic part dominates: J >= 0 on the ray
    prob = esempio0()
    pair = first_eigenpair(2.0, 5)
    assert nontriviality_certificate(prob, 0.1, pair) is None


def test_nontriviality_exact_for_linear_f():
    # J_alpha(z phi) = z^2/2 (lambda_1 - alpha) |phi|^2: negative iff
    # alpha > lambda_1, for every z
    prob = ProblemSpec(T=5, p=2.0, nonlinearity=linear())
    pair = first_eigenpair(2.0, 5)
    lam1 = pair.lambda_
    assert nontriviality_certificate(prob, 0.9 * lam1, pair) is None
    hit = nontriviality_certificate(prob, 1.1 * lam1, pair)
    assert hit is not None and hit[1] < 0.0


def test_nontriviality_validates_grid():
    prob = esempio0()
    pair = first_eigenpair(2.0, 5)
    with pytest.raises(ValueError, match="decreasing"):
        nontriviality_certificate(prob, 1.0, pair, zeta_grid=[0.1, 1.0])
    with pytest.raises(ValueError, match="decreasing"):
        nontriviality_certificate(prob, 1.0, pair, zeta_grid=[1.0, -0.5])


# ------------------------------------------------- minimize_on_sublevel

def test_sublevel_zero_f_returns_zero():
    prob = ProblemSpec(T=4, p=2.0, nonlinearity=zero())
    out = minimize_on_sublevel(prob, 1.0, sigma=1.0)
    assert out.converged
    assert not out.boundary_hit
    assert sup_norm(out.u) <= 1e-10
    assert out.energy == pytest.approx(0.0, abs=1e-20)


def test_sublevel_esempio0_certificate_route():
    from dplap.existence import find_admissible_eps
    prob = esempio0()
    cert = find_admissible_eps(prob)
    assert cert is not None
    out = minimize_on_sublevel(prob, 1.0, cert.sigma, certificate=cert)
    assert out.converged
    assert not out.boundary_hit
    assert sup_norm(out.u) < cert.eps
    # the ball is huge, so the constrained minimizer is the global one
    assert out.energy == pytest.approx(-1.3080511229489105, rel=1e-9)


def test_sublevel_boundary_case_is_flagged():
    # linear f at alpha > lambda_1: inf over the ball sits on the boundary
    prob = ProblemSpec(T=3, p=2.0, nonlinearity=linear())
    out = minimize_on_sublevel(prob, 3.0, sigma=1.0)
    assert out.boundary_hit
    assert not out.converged
    assert out.energy < 0.0


def test_sublevel_respects_sigma_scale():
    # same problem, two ball sizes: the smaller ball cannot do better
    prob = esempio0()
    small = minimize_on_sublevel(prob, 1.0, sigma=0.01)
    large = minimize_on_sublevel(prob, 1.0, sigma=100.0)
    assert small.energy >= large.energy - 1e-12


def test_sublevel_validates_sigma():
    with pytest.raises(ValueError, match="sigma"):
        minimize_on_sublevel(esempio0(), 1.0, sigma=0.0)


# ------------------------------------------------------ multistart_solve

def test_multistart_zero_f_single_solution():
    prob = ProblemSpec(T=4, p=2.0, nonlinearity=zero())
    sols = multistart_solve(prob, 1.0, n_starts=4)
    assert len(sols) == 1
    assert sols[0].positivity == ZERO


def test_multistart_esempio0_alpha_1():
    prob = esempio0()
    sols = multistart_solve(prob, 1.0, n_starts=8)
    assert all(s.converged for s in sols)
    assert all(s.seed == 0 for s in sols)
    energies = [s.energy for s in sols]
    assert energies == sorted(energies)
    # the positive branch, its mirror, and the zero solution all appear
    pos = [s for s in sols if s.positivity == POSITIVE]
    assert pos and sup_norm(pos[0].u) == pytest.approx(1.962256585023781, rel=1e-8)
    assert any(s.positivity == ZERO for s in sols)
    assert any(np.min(s.u.interior) < -1.0 for s in sols)


def test_multistart_below_threshold_only_zero():
    # alpha < lambda_1: the zero solution is the only critical point
    sols = multistart_solve(esempio0(), 0.1, n_starts=8)
    assert len(sols) == 1
    assert sols[0].positivity == ZERO
    assert sup_norm(sols[0].u) <= 1e-10


def test_multistart_dedup_distance():
    prob = esempio0()
    fine = multistart_solve(prob, 1.0, n_starts=8)
    coarse = multistart_solve(prob, 1.0, n_starts=8,
                              opts=SolverOptions(dedup_dist=100.0))
    assert len(coarse) == 1  # everything merges into the lowest-energy one
    assert coarse[0].energy == pytest.approx(min(s.energy for s in fine), rel=1e-12)


def test_multistart_extra_starts_are_used():
    prob = esempio0()
    known = solve_newton_p2(prob, 1.0, eigen_start(prob))
    sols = multistart_solve(prob, 1.0, n_starts=1, extra_starts=(known.u,))
    assert any(np.max(np.abs(s.u.interior - known.u.interior)) < 1e-8 for s in sols)


def test_multistart_validates_n_starts():
    with pytest.raises(ValueError, match="n_starts"):
        multistart_solve(esempio0(), 1.0, n_starts=0)


def test_multistart_deterministic_across_seeds():
    prob = esempio0()
    a = multistart_solve(prob, 1.0, n_starts=6)
    b = multistart_solve(prob, 1.0, n_starts=6)
    assert len(a) == len(b)
    for x, y in zip(a, b):
        assert np.array_equal(x.u.values, y.u.values)
        assert x.energy == y.energy
    c = multistart_solve(prob, 1.0, n_starts=6, opts=SolverOptions(seed=99))
    assert all(s.seed == 99 for s in c)


def test_multistart_p3_route_uses_descent():
    prob = ProblemSpec(T=4, p=3.0, nonlinearity=constant(1.0))
    sols = multistart_solve(prob, 1.0, n_starts=2)
    assert sols
    assert sols[0].positivity == POSITIVE
    assert sols[0].residual <= 1e-10


def test_multistart_matches_grid_oracle_off_borderline():
    # T=2 the quadratic part has lambda_1 = 1, so alpha = 3 buys a genuinely
    # nontrivial minimizer; a hand-rolled dense grid on the energy surface
    # must agree with the multistart winner
    prob = esempio0(T=2)
    alpha = 3.0
    x = np.linspace(-3.0, 3.0, 1201)
    U1, U2 = np.meshgrid(x, x, indexing="ij")
    J = 0.5 * (U1 * U1 + (U2 - U1) ** 2 + U2 * U2) \
        - alpha * 0.5 * (np.log1p(U1 * U1) + np.log1p(U2 * U2))
    i, j = np.unravel_index(np.argmin(J), J.shape)
    best = multistart_solve(prob, alpha, n_starts=8)[0]
    assert best.energy < -1e-2  # not the zero branch
    assert abs(best.energy - float(J[i, j])) < 1e-4
    grid_u = np.array([x[i], x[j]])
    loc = min(float(np.max(np.abs(best.u.interior - grid_u))),
              float(np.max(np.abs(best.u.interior + grid_u))))
    assert loc < 6.0 / 1200.0


def test_multistart_multiplicity_inside_window():
    # clipped cubic, alpha inside the certified window: the zero solution,
    # the saddle pair, and remote minima pairs coexist
    from dplap.existence import check_three_solutions_window
    prob = ProblemSpec(T=2, p=2.0, nonlinearity=clipped_cubic())
    win = check_three_solutions_window(prob, 1.0, 10.0)
    assert win.verdict and win.alpha_lo < 1.0 < win.alpha_hi
    sols = multistart_solve(prob, 1.0, n_starts=8,
                            opts=SolverOptions(dedup_dist=1e-3))
    nonzero = [s for s in sols if sup_norm(s.u) > 1e-8]
    assert len(nonzero) >= 2
    # deepest minima sit at the clipping plateau (1000, 1000) with
    # J = 10^6/2 * 2 / 2 - 2 (2500 + 1000*990) = -985000
    assert sols[0].energy == pytest.approx(-985000.0, rel=1e-10)
    assert sup_norm(sols[0].u) == pytest.approx(1000.0, rel=1e-10)
    # the scaled eigenfunction start lands exactly on the saddle (1, 1)
    assert any(np.max(np.abs(s.u.interior - 1.0)) < 5e-3 for s in sols)


# ------------------------------------------------------------ sweep_alpha

def test_sweep_rows_and_transition():
    prob = esempio0()
    rows = sweep_alpha(prob, [0.1, 0.5, 1.0], n_starts=4)
    assert [r.alpha for r in rows] == [0.1, 0.5, 1.0]
    assert all(isinstance(r, SweepRow) for r in rows)
    below = rows[0]
    assert below.n_solutions == 1
    assert below.positivity == ZERO
    assert below.nontriviality_zeta is None
    for above in rows[1:]:
        assert above.n_solutions >= 3
        assert above.positivity == POSITIVE
        assert above.nontriviality_zeta is not None
    # larger alpha deepens the well
    assert rows[2].min_energy < rows[1].min_energy < rows[0].min_energy + 1e-15


def test_sweep_reports_positive_representative_on_ties():
    # u and -u tie in energy; the reported row must carry the positive one
    rows = sweep_alpha(esempio0(), [1.0], n_starts=8)
    assert rows[0].positivity == POSITIVE
    assert rows[0].sup_norm == pytest.approx(1.962256585023781, rel=1e-8)


def test_sweep_validates_alphas():
    prob = esempio0()
    with pytest.raises(ValueError, match="nonempty"):
        sweep_alpha(prob, [])
    with pytest.raises(ValueError, match="positive"):
        sweep_alpha(prob, [-1.0, 1.0])
    with pytest.raises(ValueError, match="increasing"):
        sweep_alpha(prob, [1.0, 1.0])


def test_sweep_captures_row_errors():
    # a nonlinearity whose f blows up far out: remote alphas record errors
    def f(k, t):
        if abs(t) > 1e3:
            raise FloatingPointError("blew up")
        return t / (1.0 + t * t)

    nl = Nonlinearity(f=f, potential=bounded_rational().potential)
    prob = ProblemSpec(T=3, p=2.0, nonlinearity=nl)
    rows = sweep_alpha(prob, [0.1, 1.0], n_starts=2)
    assert len(rows) == 2  # never raises out of the sweep
    assert all(r.error == "" or r.n_solutions == 0 for r in rows)


# ------------------------------------------------------- thread plumbing

def test_worker_count_env(monkeypatch):
    monkeypatch.delenv("DPLAP_THREADS", raising=False)
    assert _worker_count() == 1
    monkeypatch.setenv("DPLAP_THREADS", "")
    assert _worker_count() == 1
    monkeypatch.setenv("DPLAP_THREADS", "4")
    assert _worker_count() == 4
    monkeypatch.setenv("DPLAP_THREADS", "0")
    assert _worker_count() == 1
    monkeypatch.setenv("DPLAP_THREADS", "abc")
    with pytest.raises(ValueError, match="DPLAP_THREADS"):
        _worker_count()


def test_multistart_threaded_matches_serial(monkeypatch):
    prob = esempio0()
    monkeypatch.delenv("DPLAP_THREADS", raising=False)
    serial = multistart_solve(prob, 1.0, n_starts=6)
    monkeypatch.setenv("DPLAP_THREADS", "3")
    threaded = multistart_solve(prob, 1.0, n_starts=6)
    assert len(serial) == len(threaded)
    for a, b in zip(serial, threaded):
        assert np.array_equal(a.u.values, b.u.values)
        assert a.energy == b.energy and a.residual == b.residual
