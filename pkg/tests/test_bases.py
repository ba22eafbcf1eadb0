import numpy as np
import pytest

from lowrank.bases import (
    OperatorBasis,
    coherence,
    hermitian_standard_basis,
    load_basis,
    mu_overlap,
    pauli_basis,
    pauli_index,
    pauli_label,
    pauli_word,
    save_basis,
    verify_basis,
)
from lowrank.errors import InvalidInput
from lowrank.matcore import matrix_sign, tangent_project, tangent_space

from conftest import random_rank_r

SIGMA = {
    1: np.array([[0, 1], [1, 0]], dtype=complex),
    2: np.array([[0, -1j], [1j, 0]], dtype=complex),
    3: np.array([[1, 0], [0, -1]], dtype=complex),
    4: np.eye(2, dtype=complex),
}


def test_standard_basis_small():
    B1 = hermitian_standard_basis(1)
    assert B1.size == 1
    assert np.allclose(B1.element(1), [[1.0]])

    B2 = hermitian_standard_basis(2)
    assert B2.size == 4
    # ordering: diagonals first, then the symmetric pair, then antisymmetric
    assert np.allclose(B2.element(1), np.diag([1.0, 0.0]))
    assert np.allclose(B2.element(2), np.diag([0.0, 1.0]))
    assert np.allclose(B2.element(3), SIGMA[1] / np.sqrt(2))
    # i/sqrt2 (e1 e2^dag - e2 e1^dag) = [[0, i], [-i, 0]]/sqrt2 = -sigma2/sqrt2
    assert np.allclose(B2.element(4), -SIGMA[2] / np.sqrt(2))
    with pytest.raises(InvalidInput):
        B2.element(5)
    with pytest.raises(InvalidInput):
        hermitian_standard_basis(0)


def test_standard_basis_gram_identity():
    B = hermitian_standard_basis(5)
    elems = list(B.elements())
    gram = np.array([[np.vdot(a, b) for b in elems] for a in elems])
    assert np.abs(gram - np.eye(25)).max() <= 1e-12


def test_pauli_basis_k1_table():
    B = pauli_basis(1)
    s = np.sqrt(2.0)
    # lexicographic (p, q): identity, sigma1, sigma3, then i sigma3 sigma1
    assert np.allclose(B.element(1) * s, SIGMA[4])
    assert np.allclose(B.element(2) * s, SIGMA[1])
    assert np.allclose(B.element(3) * s, SIGMA[3])
    assert np.allclose(B.element(4) * s, 1j * SIGMA[3] @ SIGMA[1])
    assert np.allclose(B.element(4) * s, -SIGMA[2])
    assert B.fourier_bound == pytest.approx(0.5)


def test_pauli_basis_opnorm_exact():
    B = pauli_basis(3)
    norms = [np.linalg.norm(w, 2) ** 2 for w in B.elements()]
    assert max(norms) == pytest.approx(1.0 / 8.0, abs=1e-12)
    assert min(norms) == pytest.approx(1.0 / 8.0, abs=1e-12)


def test_pauli_labels_roundtrip():
    for a in (1, 7, 16):
        p, q = pauli_label(a, 2)
        assert pauli_index(p, q, 2) == a
    with pytest.raises(InvalidInput):
        pauli_basis(0)
    with pytest.raises(InvalidInput):
        pauli_basis(9)


def test_verify_basis_clean_and_planted_defect():
    assert verify_basis(pauli_basis(2), exhaustive=True).ok(1e-12)
    assert verify_basis(hermitian_standard_basis(4), exhaustive=True).ok(1e-12)

    inner = pauli_basis(1)

    def scaled(a):
        w = inner.element(a)
        return 2.0 * w if a == 2 else w

    defective = OperatorBasis(2, "custom", scaled)
    rep = verify_basis(defective, exhaustive=True)
    assert rep.orthonormality_deviation == pytest.approx(3.0)
    assert not rep.ok()


def test_pauli_group_closure_exhaustive_k2():
    n = 4
    words = {(p, q): pauli_word(2, p, q) for p in range(n) for q in range(n)}
    for (p1, q1), w1 in words.items():
        for (p2, q2), w2 in words.items():
            prod = w1 @ w2
            target = words[(p1 ^ p2, q1 ^ q2)]
            lam = np.trace(target.conj().T @ prod) / n
            assert min(abs(lam - c) for c in (1, -1, 1j, -1j)) <= 1e-12
            assert np.abs(prod - lam * target).max() <= 1e-12
            # commutation phase
            parity = (bin(p1 & q2).count("1") + bin(q1 & p2).count("1")) % 2
            sign = -1.0 if parity else 1.0
            assert np.abs(w1 @ w2 - sign * w2 @ w1).max() <= 1e-12


def test_coherence_pauli_fourier_route(rng):
    B = pauli_basis(3)
    rho = random_rank_r(8, 2, rng)
    rep = coherence(rho, B)
    assert rep.route == "fourier-norm"
    assert rep.nu == pytest.approx(1.0, abs=1e-10)
    assert rep.rank == 2


def test_coherence_rank_one_standard_basis():
    rho = np.diag([1.0, 0.0]).astype(complex)
    B = hermitian_standard_basis(2)
    rep = coherence(rho, B)
    # enumerating all four elements: max ||P_T w||_2^2 = 1 and
    # max (w, sign rho)^2 = 1, so the pt-and-sign route value is max(1, 4) = 4
    assert rep.detail["pt"] == pytest.approx(1.0, abs=1e-10)
    assert rep.detail["sign"] == pytest.approx(4.0, abs=1e-10)
    assert rep.detail["pt-and-sign"] == pytest.approx(4.0, abs=1e-10)
    # the fourier route gives n * max ||w_a||^2 = 2, which is smaller, and
    # the report returns the minimum over routes
    assert rep.detail["fourier"] == pytest.approx(2.0, abs=1e-10)
    assert rep.nu == pytest.approx(2.0, abs=1e-10)
    assert rep.route == "fourier-norm"
    with pytest.raises(InvalidInput):
        coherence(np.zeros((2, 2)), B)


def test_coherence_matrix_completion_bounds(rng):
    # the pt/sign detail terms obey the matrix-completion style estimates
    # max ||P_T w_a||_2^2 <= 2 mu1 r/n and max (w_a, sign rho)^2 <= 2 mu2^2 r/n^2
    n, r = 8, 2
    rho = random_rank_r(n, r, rng)
    B = hermitian_standard_basis(n)
    T = tangent_space(rho)
    sgn = matrix_sign(rho)
    P = T.projector
    mu1 = max(np.linalg.norm(P[:, i]) ** 2 for i in range(n)) * n / r
    mu2 = np.abs(sgn).max() * np.sqrt(n * n / r)
    max_pt = max(np.linalg.norm(tangent_project(T, w)) ** 2 for w in B.elements())
    max_sign = max(np.vdot(w, sgn).real ** 2 for w in B.elements())
    assert max_pt <= 2 * mu1 * r / n + 1e-10
    assert max_sign <= 2 * mu2**2 * r / (n * n) + 1e-10
    rep = coherence(rho, B)
    assert rep.detail["pt-and-sign"] <= max(mu1, 2 * mu2**2) + 1e-8


def test_holder_chain_invariant(rng):
    # Fourier bound nu/n implies ||P_T w_a||_2^2 <= 2 nu r / n for every element
    B = pauli_basis(4)
    for r in (1, 2, 3):
        rho = random_rank_r(16, r, rng)
        T = tangent_space(rho)
        for a in range(1, B.size + 1):
            val = np.linalg.norm(tangent_project(T, B.element(a))) ** 2
            assert val <= 2.0 * r / 16.0 + 1e-10


def test_opnorm_floor(rng):
    # every orthonormal basis has max ||w_a||^2 >= 1/n
    for B in (pauli_basis(2), hermitian_standard_basis(3)):
        n = B.dim
        vals = [np.linalg.norm(w, 2) ** 2 for w in B.elements()]
        assert max(vals) >= 1.0 / n - 1e-10


def test_mu_overlap_examples():
    B = pauli_basis(1)
    assert mu_overlap(B.element(1), B) == pytest.approx(1.0, abs=1e-12)
    assert mu_overlap(np.zeros((2, 2)), B) == pytest.approx(0.0)
    e11 = np.diag([1.0, 0.0]).astype(complex)
    assert mu_overlap(e11, B) == pytest.approx(0.5, abs=1e-12)
    with pytest.raises(InvalidInput):
        mu_overlap(np.eye(3), B)


def test_basis_file_roundtrip(tmp_path):
    B = pauli_basis(2)
    path = tmp_path / "pauli2.opbasis"
    save_basis(B, str(path))
    loaded = load_basis(str(path))
    assert loaded.dim == 4 and loaded.kind == "custom"
    for a in (1, 5, 16):
        assert np.abs(loaded.element(a) - B.element(a)).max() <= 1e-15

    bad = tmp_path / "bad.opbasis"
    bad.write_text("opbasis v1 n=2 count=3\n")
    with pytest.raises(InvalidInput):
        load_basis(str(bad))

    # a defective basis fails validation at load time
    text = path.read_text().splitlines()
    idx = text.index("element 2") + 1
    text[idx] = " ".join("2+0i" for _ in range(4))
    (tmp_path / "defect.opbasis").write_text("\n".join(text) + "\n")
    with pytest.raises(InvalidInput):
        load_basis(str(tmp_path / "defect.opbasis"))


def test_coefficients_match_elementwise(rng):
    B = pauli_basis(2)
    sigma = random_rank_r(4, 2, rng)
    labels = np.array([1, 3, 9, 16])
    fast = B.coefficients(sigma, labels)
    slow = np.array([np.vdot(B.element(int(a)), sigma).real for a in labels])
    assert np.abs(fast - slow).max() <= 1e-12
