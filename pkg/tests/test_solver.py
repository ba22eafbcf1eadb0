import numpy as np
import pytest

from lowrank.bases import pauli_basis
from lowrank.errors import InvalidInput
from lowrank.matcore import matrix_sign, tangent_project, tangent_space
from lowrank.sampling import draw_omega, stream_rng
from lowrank.solver import (
    RecoveryProblem,
    SolverConfig,
    extended_basis,
    load_problem,
    recover,
    recover_nonhermitian,
    save_problem,
    uniqueness_probe,
)
from lowrank.bases import verify_basis

from conftest import random_rank_r


def nuclear(A):
    return float(np.abs(np.linalg.eigvalsh(A)).sum())


def test_full_information_recovers_exactly(rng):
    B = pauli_basis(2)
    rho = random_rank_r(4, 2, rng)
    om = draw_omega(4, 16, "without-replacement", seed=1)
    res = recover(RecoveryProblem.from_rho(B, om, rho), rho=rho)
    assert res.converged
    assert res.relative_error <= 1e-8


def test_two_by_two_diagonal_case():
    # constraints on the identity and sigma3 coefficients fix the diagonal;
    # any off-diagonal mass only increases the trace norm, so the minimizer
    # is diag(1, 0)
    B = pauli_basis(1)
    rho = np.diag([1.0, 0.0]).astype(complex)
    problem = RecoveryProblem.from_pairs(
        B, [1, 3], [np.vdot(B.element(1), rho).real, np.vdot(B.element(3), rho).real])
    res = recover(problem)
    assert np.abs(res.sigma - rho).max() <= 1e-6


def test_desk_scale_monte_carlo(rng):
    B = pauli_basis(4)
    n, r = 16, 1
    wins = 0
    for trial in range(10):
        rho = random_rank_r(n, r, stream_rng(trial, 50))
        om = draw_omega(n, 6 * n * r, "iid", seed=trial, stream=(60,))
        res = recover(RecoveryProblem.from_rho(B, om, rho),
                      SolverConfig(eps_primal=1e-7, eps_dual=1e-7), rho=rho)
        wins += res.relative_error <= 1e-4
    assert wins >= 8


def test_against_cvxpy_oracle(rng):
    cp = pytest.importorskip("cvxpy")
    B = pauli_basis(2)
    n = 4
    for trial, m in ((0, 10), (1, 14)):
        rho = random_rank_r(n, 1, stream_rng(trial, 77))
        om = draw_omega(n, m, "iid", seed=trial, stream=(78,))
        problem = RecoveryProblem.from_rho(B, om, rho)
        res = recover(problem)

        X = cp.Variable((n, n), hermitian=True)
        cons = [cp.real(cp.trace(B.element(int(a)).conj().T @ X)) == c
                for a, c in zip(problem.labels, problem.coeffs)]
        cvx = cp.Problem(cp.Minimize(cp.normNuc(X)), cons)
        cvx.solve(solver=cp.SCS, eps=1e-9)
        # both are minimizers of the same program
        assert nuclear(res.sigma) == pytest.approx(cvx.value, abs=1e-5)
        # matrices must agree only when the minimizer is isolated
        if uniqueness_probe(problem, res, trials=30, seed=1).likely_unique:
            assert np.abs(res.sigma - X.value).max() <= 1e-4


def test_result_feasibility_and_duplicates(rng):
    B = pauli_basis(2)
    rho = random_rank_r(4, 1, rng)
    coeff5 = np.vdot(B.element(5), rho).real
    problem = RecoveryProblem.from_pairs(B, [5, 5, 9], [coeff5, coeff5, 0.3])
    assert problem.labels.shape == (2,)
    res = recover(problem)
    assert res.constraint_residual(problem) <= 1e-9 * (1 + np.abs(problem.coeffs).max())

    with pytest.raises(InvalidInput):
        RecoveryProblem.from_pairs(B, [5, 5], [0.1, 0.3])
    with pytest.raises(InvalidInput):
        RecoveryProblem.from_pairs(B, [], [])
    with pytest.raises(InvalidInput):
        RecoveryProblem.from_pairs(B, [99], [0.1])


def test_nonconvergence_returns_best_iterate(rng):
    B = pauli_basis(3)
    rho = random_rank_r(8, 1, rng)
    om = draw_omega(8, 30, "iid", seed=5)
    res = recover(RecoveryProblem.from_rho(B, om, rho),
                  SolverConfig(max_iterations=3), rho=rho)
    assert not res.converged
    assert res.iterations == 3
    assert np.isfinite(res.relative_error)


def test_multiplier_subgradient_certificate(rng):
    # at convergence -penalty*u is a near-subgradient of the trace norm at
    # sigma*, expanded exactly in the sampled elements
    B = pauli_basis(4)
    n = 16
    rho = random_rank_r(n, 1, stream_rng(3, 11))
    om = draw_omega(n, 8 * n, "iid", seed=3)
    problem = RecoveryProblem.from_rho(B, om, rho)
    cfg = SolverConfig()  # eps 1e-9
    res = recover(problem, cfg, rho=rho)
    assert res.converged
    G = res.multiplier
    slack = 10 * cfg.eps_dual
    T_star = tangent_space(res.sigma, 1e-8)
    sgn_star = matrix_sign(res.sigma, 1e-8)
    assert np.linalg.norm(tangent_project(T_star, G) - sgn_star) <= slack
    off = tangent_project(T_star, G, complement=True)
    assert np.abs(np.linalg.eigvalsh(off)).max() <= 1.0 + slack
    W = B.stacked()[problem.labels - 1]
    expanded = np.tensordot(B.coefficients(G, problem.labels), W, axes=(0, 0))
    assert np.linalg.norm(G - expanded) <= slack


def test_uniqueness_probe_cases(rng):
    B = pauli_basis(2)
    rho = random_rank_r(4, 1, rng)
    om_full = draw_omega(4, 16, "without-replacement", seed=2)
    problem = RecoveryProblem.from_rho(B, om_full, rho)
    res = recover(problem)
    rep = uniqueness_probe(problem, res)
    assert rep.likely_unique and rep.kernel_dim == 0

    # single identity-coefficient constraint: the minimizer is far from
    # isolated, kernel directions keep it positive definite
    problem1 = RecoveryProblem.from_pairs(B, [1], [0.5])
    res1 = recover(problem1)
    rep1 = uniqueness_probe(problem1, res1, trials=20, seed=4)
    assert not rep1.likely_unique
    assert rep1.min_increment <= 1e-12

    # successful desk-scale recovery is isolated
    om = draw_omega(4, 14, "without-replacement", seed=8)
    problem2 = RecoveryProblem.from_rho(B, om, rho)
    res2 = recover(problem2, rho=rho)
    if res2.relative_error <= 1e-6:
        rep2 = uniqueness_probe(problem2, res2, trials=40, seed=5)
        assert rep2.likely_unique


def test_extended_basis_is_orthonormal_complete():
    B = pauli_basis(1)
    ext = extended_basis([B.element(a) for a in range(1, 5)])
    rep = verify_basis(ext, exhaustive=True)
    assert rep.ok(1e-12)
    assert ext.size == 16


def test_nonhermitian_lifting_consistency(rng):
    # a Hermitian instance fed through the lifting matches direct recovery
    n = 4
    B = pauli_basis(2)
    rho = random_rank_r(n, 1, rng)
    om = draw_omega(n, 16, "without-replacement", seed=2)
    direct = recover(RecoveryProblem.from_rho(B, om, rho), rho=rho)
    elements = [B.element(a) for a in range(1, n * n + 1)]
    labels = np.arange(1, n * n + 1)
    coeffs = np.array([np.vdot(B.element(int(a)), rho) for a in labels])
    lifted = recover_nonhermitian(elements, labels, coeffs, rho=rho)
    assert np.abs(lifted.sigma - direct.sigma).max() <= 1e-6


def _standard_complex_basis(n):
    out = []
    for i in range(n):
        for j in range(n):
            w = np.zeros((n, n), dtype=complex)
            w[i, j] = 1.0
            out.append(w)
    return out


def test_nonhermitian_full_information():
    n = 2
    rho = np.zeros((n, n), dtype=complex)
    rho[0, 1] = 1.0
    std = _standard_complex_basis(n)
    labels = np.arange(1, 5)
    coeffs = np.array([rho[(a - 1) // n, (a - 1) % n] for a in labels])
    res = recover_nonhermitian(std, labels, coeffs, rho=rho)
    assert np.abs(res.sigma - rho).max() <= 1e-7


def test_nonhermitian_entry_sampling_rate():
    # rank-one 8x8 complex recovery from 60% of the entries; the success
    # count below is the Monte Carlo value computed for this seed stream
    # (recovery at this sampling fraction genuinely fails on a sizable
    # share of instances, matching a direct complex nuclear-norm solve)
    n = 8
    std = _standard_complex_basis(n)
    wins = 0
    for trial in range(20):
        rng = stream_rng(trial, 99)
        u = rng.normal(size=n) + 1j * rng.normal(size=n)
        u /= np.linalg.norm(u)
        v = rng.normal(size=n) + 1j * rng.normal(size=n)
        v /= np.linalg.norm(v)
        rho = np.outer(u, v.conj())
        labels = rng.permutation(n * n)[:int(0.6 * n * n)] + 1
        coeffs = np.array([rho[(a - 1) // n, (a - 1) % n] for a in labels])
        res = recover_nonhermitian(std, labels, coeffs,
                                   SolverConfig(eps_primal=1e-8, eps_dual=1e-8),
                                   rho=rho)
        wins += res.relative_error <= 1e-4
    assert wins >= 8


def test_problem_file_roundtrip(tmp_path, rng):
    B = pauli_basis(2)
    rho = random_rank_r(4, 1, rng)
    om = draw_omega(4, 8, "iid", seed=3)
    problem = RecoveryProblem.from_rho(B, om, rho)
    path = tmp_path / "problem.txt"
    save_problem(problem, str(path))
    loaded = load_problem(str(path))
    assert np.array_equal(loaded.labels, problem.labels)
    assert np.abs(loaded.coeffs - problem.coeffs).max() <= 1e-15
    assert loaded.basis.kind == "pauli"

    bad = tmp_path / "bad.txt"
    bad.write_text("problem v1 n=4 basis=pauli m=1\n1\n")
    with pytest.raises(InvalidInput):
        load_problem(str(bad))
