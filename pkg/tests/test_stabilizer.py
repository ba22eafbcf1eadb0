import numpy as np
import pytest

from lowrank.bases import pauli_basis, pauli_index
from lowrank.errors import InvalidInput
from lowrank.sampling import stream_rng
from lowrank.solver import RecoveryProblem, recover
from lowrank.stabilizer import (
    GF2kField,
    GroupCharacter,
    build_stabilizer_group,
    commutation_sign,
    find_ambiguous_pair,
    gf2k_mul,
    lower_bound_trial,
    pauli_product_phase,
    pauli_w,
    stabilizer_projector,
)


def test_field_construction_and_mul():
    F = GF2kField.default(2)
    for x in range(4):
        assert gf2k_mul(F, x, 0) == 0
        assert gf2k_mul(F, x, 1) == x
    # (10) * (10) = z * z = z + 1 = (11) modulo z^2 + z + 1
    assert gf2k_mul(F, 0b10, 0b10) == 0b11
    with pytest.raises(InvalidInput):
        GF2kField(2, 0b101)  # z^2 + 1 = (z + 1)^2 is reducible
    with pytest.raises(InvalidInput):
        GF2kField(3, 0b111)  # degree mismatch
    for k in range(1, 9):
        GF2kField.default(k)  # all pinned polynomials verify as irreducible


def test_field_axioms_k3():
    F = GF2kField.default(3)
    rng = stream_rng(0, 1)
    for _ in range(50):
        a, b, c = rng.integers(0, 8, size=3)
        assert gf2k_mul(F, int(a), int(b)) == gf2k_mul(F, int(b), int(a))
        lhs = gf2k_mul(F, int(a), gf2k_mul(F, int(b), int(c)))
        rhs = gf2k_mul(F, gf2k_mul(F, int(a), int(b)), int(c))
        assert lhs == rhs
        dist = gf2k_mul(F, int(a), int(b) ^ int(c))
        assert dist == (gf2k_mul(F, int(a), int(b)) ^ gf2k_mul(F, int(a), int(c)))
    # nonzero elements are invertible: x * y = 1 has a solution
    for x in range(1, 8):
        assert any(gf2k_mul(F, x, y) == 1 for y in range(1, 8))


def test_pauli_w_examples():
    assert np.allclose(pauli_w(1, 0, 0), np.eye(2))
    assert np.allclose(pauli_w(1, 1, 1), np.array([[0, 1j], [-1j, 0]]))
    n = 4
    for p in range(n):
        for q in range(n):
            w = pauli_w(2, p, q)
            assert np.abs(w @ w.conj().T - np.eye(n)).max() <= 1e-12  # unitary
            assert np.abs(w - w.conj().T).max() <= 1e-12  # Hermitian
            assert np.abs(w @ w - np.eye(n)).max() <= 1e-12  # squares to identity
    # trace orthogonality over all 256 pairs
    words = {(p, q): pauli_w(2, p, q) for p in range(n) for q in range(n)}
    for (p1, q1), w1 in words.items():
        for (p2, q2), w2 in words.items():
            tr = np.trace(w1 @ w2)
            expected = n if (p1, q1) == (p2, q2) else 0.0
            assert abs(tr - expected) <= 1e-12


def test_product_phase_matches_matrices():
    for k in (1, 2):
        n = 2**k
        for p1 in range(n):
            for q1 in range(n):
                for p2 in range(n):
                    for q2 in range(n):
                        lam = pauli_product_phase(k, p1, q1, p2, q2)
                        assert lam in (1, -1, 1j, -1j)
                        lhs = pauli_w(k, p1, q1) @ pauli_w(k, p2, q2)
                        rhs = lam * pauli_w(k, p1 ^ p2, q1 ^ q2)
                        assert np.abs(lhs - rhs).max() <= 1e-12


@pytest.mark.parametrize("k", [3, 4])
def test_product_phase_random_k3_k4(k):
    rng = stream_rng(3, 9, k)
    n = 2**k
    for _ in range(40):
        p1, q1, p2, q2 = (int(v) for v in rng.integers(0, n, size=4))
        lam = pauli_product_phase(k, p1, q1, p2, q2)
        lhs = pauli_w(k, p1, q1) @ pauli_w(k, p2, q2)
        rhs = lam * pauli_w(k, p1 ^ p2, q1 ^ q2)
        assert np.abs(lhs - rhs).max() <= 1e-12
        # commutation sign
        sign = commutation_sign(p1, q1, p2, q2)
        rhs2 = sign * pauli_w(k, p2, q2) @ pauli_w(k, p1, q1)
        assert np.abs(lhs - rhs2).max() <= 1e-12


def test_build_group_k1():
    G = build_stabilizer_group(GF2kField.default(1), 0)
    assert G.labels() == {(0, 0), (1, 0)}
    assert np.array_equal(G.signs, [1, 1])
    assert np.allclose(G.element(1), np.diag([1.0, -1.0]))


def test_group_invariants_all_x_k2_k3():
    for k in (2, 3):
        F = GF2kField.default(k)
        n = 2**k
        for x in range(n):
            G = build_stabilizer_group(F, x)
            assert G.order == n
            labels = list(zip(G.ps.tolist(), G.qs.tolist()))
            # pairwise commutation
            for p1, q1 in labels:
                for p2, q2 in labels:
                    assert commutation_sign(p1, q1, p2, q2) == 1
            # closure with signs: g_p g_p' = g_(p xor p') as matrices
            for p1 in range(n):
                for p2 in range(n):
                    prod = G.element(p1) @ G.element(p2)
                    assert np.abs(prod - G.element(p1 ^ p2)).max() <= 1e-12
            # -1 not in the group: identity label carries sign +1 and no
            # other element is proportional to the identity
            assert G.signs[0] == 1
    # distinct groups intersect only in the identity label
    F3 = GF2kField.default(3)
    for x1 in range(8):
        for x2 in range(x1 + 1, 8):
            inter = build_stabilizer_group(F3, x1).labels() \
                & build_stabilizer_group(F3, x2).labels()
            assert inter == {(0, 0)}


def test_characters_multiplicative():
    G = build_stabilizer_group(GF2kField.default(3), 5)
    for y in range(8):
        chi = GroupCharacter(3, y)
        for p1 in range(8):
            for p2 in range(8):
                assert chi(p1) * chi(p2) == chi(p1 ^ p2)


def test_projector_examples_and_orthogonality():
    F1 = GF2kField.default(1)
    G = build_stabilizer_group(F1, 0)
    P_triv = stabilizer_projector(G, GroupCharacter(1, 0))
    P_sign = stabilizer_projector(G, GroupCharacter(1, 1))
    assert np.allclose(P_triv, np.diag([1.0, 0.0]))
    assert np.allclose(P_sign, np.diag([0.0, 1.0]))
    assert abs(np.vdot(P_triv, P_sign)) <= 1e-12

    for k, x in ((2, 1), (2, 3), (3, 2), (3, 6)):
        G = build_stabilizer_group(GF2kField.default(k), x)
        projs = [stabilizer_projector(G, GroupCharacter(k, y)) for y in range(2**k)]
        for i, P in enumerate(projs):
            assert abs(np.trace(P).real - 1.0) <= 1e-12
            assert np.abs(P @ P - P).max() <= 1e-12
            assert np.abs(P - P.conj().T).max() <= 1e-12
            for j in range(i + 1, len(projs)):
                assert abs(np.vdot(P, projs[j])) <= 1e-10


def test_find_ambiguous_pair_empty_omega():
    pair = find_ambiguous_pair(2, [])
    assert pair is not None
    assert abs(np.vdot(pair.P1, pair.P2)) <= 1e-10
    assert abs(np.trace(pair.P1).real - 1.0) <= 1e-12


def test_find_ambiguous_pair_small():
    # |omega| = 3 < (n - 2) log2 n = 4 at k = 2
    pair = find_ambiguous_pair(2, [1, 6, 11])
    assert pair is not None
    B = pauli_basis(2)
    for a in (1, 6, 11):
        c1 = np.vdot(B.element(a), pair.P1).real
        c2 = np.vdot(B.element(a), pair.P2).real
        assert abs(c1 - c2) <= 1e-10


def test_find_ambiguous_pair_random_k4():
    n = 16
    B = pauli_basis(4)
    for trial in range(20):
        rng = stream_rng(trial, 0x57AB)
        omega = (rng.permutation(n * n)[:55] + 1).tolist()
        pair = find_ambiguous_pair(4, omega)
        assert pair is not None
        coeff1 = B.coefficients(pair.P1, np.asarray(omega))
        coeff2 = B.coefficients(pair.P2, np.asarray(omega))
        assert np.abs(coeff1 - coeff2).max() <= 1e-10
        assert abs(np.vdot(pair.P1, pair.P2)) <= 1e-10


def test_ambiguity_makes_recovery_non_unique():
    # both projectors satisfy the sampled constraints with trace norm one,
    # so the program cannot distinguish them
    k, n = 3, 8
    B = pauli_basis(k)
    rng = stream_rng(1, 0x57AB)
    omega = (rng.permutation(n * n)[:10] + 1).tolist()
    pair = find_ambiguous_pair(k, omega)
    assert pair is not None
    problem = RecoveryProblem.from_pairs(
        B, omega, B.coefficients(pair.P1, np.asarray(omega)))
    for P in (pair.P1, pair.P2):
        got = B.coefficients(P, problem.labels)
        assert np.abs(got - problem.coeffs).max() <= 1e-10
        assert abs(np.abs(np.linalg.eigvalsh(P)).sum() - 1.0) <= 1e-10
    res = recover(problem)
    assert np.abs(np.linalg.eigvalsh(res.sigma)).sum() <= 1.0 + 1e-6


def test_lower_bound_trial():
    rep0 = lower_bound_trial(4, m=0, epsilon=1.0, trials=200, seed=0)
    assert rep0.frequency == 1.0

    rep = lower_bound_trial(4, m=32, epsilon=1.0, trials=500, seed=0)
    assert rep.premise_ok
    assert rep.p_f == pytest.approx(1.0 - 16 ** (-1.0 / (2 * np.log(2) * (4 / 3))))
    assert rep.frequency >= rep.p_f - rep.sigma3

    rep_big = lower_bound_trial(4, m=10 * 16 * 4, epsilon=1.0, trials=300, seed=0)
    assert rep_big.frequency <= 0.05

    with pytest.raises(InvalidInput):
        lower_bound_trial(0, m=1, epsilon=1.0)


def test_group_labels_match_basis_indices():
    # stabilizer label sets are valid sampling label sets for pauli_basis
    F = GF2kField.default(2)
    G = build_stabilizer_group(F, 1)
    B = pauli_basis(2)
    for p, q in G.labels():
        a = pauli_index(p, q, 2)
        w = B.element(a) * np.sqrt(4.0)
        assert np.abs(w - pauli_w(2, p, q)).max() <= 1e-12
