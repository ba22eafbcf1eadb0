"""Operator bases: construction, validation, coherence.

An operator basis is an ordered family of n^2 matrices, orthonormal under
the Hilbert-Schmidt inner product (A, B) = tr(A^dag B).  Elements are
labelled 1..n^2 and generated on demand; the label order is part of the
contract because sampled index sets refer to it.

Orderings:
  hermitian-standard -- the n diagonal projectors e_i e_i^dag (i = 1..n),
      then the (i<j) symmetric pairs in row-major (i, j) order, then the
      (i<j) antisymmetric pairs in the same order.
  pauli -- label a-1 = p*2^k + q, where p, q in [0, 2^k) are the big-endian
      integer readings of the bit vectors of the Pauli word
      w(p,q) = prod_j i^{p_j q_j} sigma3^{p_j} sigma1^{q_j}, normalized by
      1/sqrt(n).
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Iterator

import numpy as np

from .errors import InvalidInput
from .matcore import DEFAULT_ZERO_TOL, matrix_sign, tangent_project, tangent_space

_SIGMA1 = np.array([[0.0, 1.0], [1.0, 0.0]], dtype=complex)
_SIGMA3 = np.array([[1.0, 0.0], [0.0, -1.0]], dtype=complex)

# Elements are cached only up to this many complex entries (~64 MB).
_STACK_ENTRY_LIMIT = 4_194_304


def pauli_word(k: int, p: int, q: int) -> np.ndarray:
    """Unnormalized Pauli word w(p,q) on 2^k dimensions.

    p and q are bitmasks read big-endian: bit (k-j) holds component j, the
    leftmost tensor factor.  Every word is Hermitian, unitary, and squares
    to the identity.
    """
    if not (0 <= p < 2**k and 0 <= q < 2**k):
        raise InvalidInput(f"labels out of range for k={k}: ({p}, {q})")
    out = np.array([[1.0]], dtype=complex)
    for j in range(k - 1, -1, -1):
        pj, qj = (p >> j) & 1, (q >> j) & 1
        factor = np.eye(2, dtype=complex)
        if pj:
            factor = _SIGMA3 @ factor
        if qj:
            factor = factor @ _SIGMA1
        if pj and qj:
            factor = 1j * factor
        out = np.kron(out, factor)
    return out


class OperatorBasis:
    """Ordered orthonormal basis of the n x n matrix space.

    Elements are produced lazily from the label; `stacked()` materializes
    the full family as an (n^2, n, n) array when that fits in memory.
    """

    def __init__(self, dim: int, kind: str, element_fn: Callable[[int], np.ndarray],
                 fourier_bound: float | None = None):
        if dim < 1:
            raise InvalidInput("basis dimension must be positive")
        self.dim = dim
        self.kind = kind
        self.size = dim * dim
        self.fourier_bound = fourier_bound
        self._element_fn = element_fn
        self._stack: np.ndarray | None = None

    def element(self, a: int) -> np.ndarray:
        """Basis element w_a for a 1-based label a in [1, n^2]."""
        if not (1 <= a <= self.size):
            raise InvalidInput(f"basis label {a} outside [1, {self.size}]")
        if self._stack is not None:
            return self._stack[a - 1]
        return self._element_fn(a)

    def elements(self) -> Iterator[np.ndarray]:
        for a in range(1, self.size + 1):
            yield self.element(a)

    def stacked(self) -> np.ndarray:
        """All elements as one (n^2, n, n) array; cached after first call."""
        if self._stack is None:
            if self.size * self.dim * self.dim > _STACK_ENTRY_LIMIT:
                raise InvalidInput(f"basis too large to materialize (n={self.dim})")
            self._stack = np.stack([self._element_fn(a) for a in range(1, self.size + 1)])
            self._stack.setflags(write=False)
        return self._stack

    def coefficients(self, sigma: np.ndarray, labels: np.ndarray | None = None) -> np.ndarray:
        """Real inner products (w_a, sigma), for all labels or a given subset."""
        sigma = np.asarray(sigma, dtype=complex)
        if labels is None:
            labels = np.arange(1, self.size + 1)
        labels = np.asarray(labels, dtype=int)
        if self.size * self.dim * self.dim <= _STACK_ENTRY_LIMIT:
            W = self.stacked()
            return np.einsum("aij,ij->a", W[labels - 1].conj(), sigma).real
        return np.array([np.vdot(self.element(int(a)), sigma).real for a in labels])

    def __repr__(self) -> str:
        return f"OperatorBasis(kind={self.kind!r}, dim={self.dim})"


def hermitian_standard_basis(n: int) -> OperatorBasis:
    """Hermitianized standard basis: diagonal projectors plus paired off-diagonals."""
    if n < 1:
        raise InvalidInput("n must be >= 1")
    pairs = [(i, j) for i in range(n) for j in range(i + 1, n)]

    def gen(a: int) -> np.ndarray:
        w = np.zeros((n, n), dtype=complex)
        idx = a - 1
        if idx < n:
            w[idx, idx] = 1.0
            return w
        idx -= n
        sym = idx < len(pairs)
        i, j = pairs[idx if sym else idx - len(pairs)]
        if sym:
            w[i, j] = w[j, i] = 1.0 / np.sqrt(2.0)
        else:
            w[i, j] = 1j / np.sqrt(2.0)
            w[j, i] = -1j / np.sqrt(2.0)
        return w

    return OperatorBasis(n, "hermitian-standard", gen, fourier_bound=1.0)


def pauli_basis(k: int) -> OperatorBasis:
    """Tensor-product Pauli basis on n = 2^k, elements w(p,q)/sqrt(n)."""
    if not (1 <= k <= 8):
        raise InvalidInput(f"k={k} outside supported range [1, 8]")
    n = 2**k
    scale = 1.0 / np.sqrt(n)

    def gen(a: int) -> np.ndarray:
        p, q = divmod(a - 1, n)
        return pauli_word(k, p, q) * scale

    return OperatorBasis(n, "pauli", gen, fourier_bound=1.0 / n)


def pauli_label(a: int, k: int) -> tuple[int, int]:
    """1-based basis label -> (p, q) bitmask pair."""
    n = 2**k
    if not (1 <= a <= n * n):
        raise InvalidInput(f"label {a} outside [1, {n * n}]")
    p, q = divmod(a - 1, n)
    return p, q


def pauli_index(p: int, q: int, k: int) -> int:
    """(p, q) bitmask pair -> 1-based basis label."""
    n = 2**k
    if not (0 <= p < n and 0 <= q < n):
        raise InvalidInput(f"labels out of range for k={k}: ({p}, {q})")
    return p * n + q + 1


@dataclass(frozen=True)
class BasisReport:
    """Deviations found by verify_basis; failures are reported, not raised."""

    orthonormality_deviation: float
    completeness_deviation: float
    pairs_checked: int
    exhaustive: bool

    def ok(self, tol: float = 1e-8) -> bool:
        return (self.orthonormality_deviation <= tol
                and self.completeness_deviation <= tol)


def verify_basis(B: OperatorBasis, exhaustive: bool = False, pairs: int = 1000) -> BasisReport:
    """Check orthonormality and the completeness relation sum w_a^dag w_a = n 1.

    All element pairs are checked when exhaustive is set or n <= 8;
    otherwise `pairs` random pairs drawn from a fixed stream.
    """
    n = B.dim
    total = np.zeros((n, n), dtype=complex)
    for w in B.elements():
        total += w.conj().T @ w
    completeness = float(np.abs(total - n * np.eye(n)).max())

    ortho = 0.0
    if exhaustive or n <= 8:
        checked = 0
        elems = [B.element(a) for a in range(1, B.size + 1)]
        for i, wi in enumerate(elems):
            for j in range(i, len(elems)):
                g = np.vdot(wi, elems[j])
                target = 1.0 if i == j else 0.0
                ortho = max(ortho, abs(g - target))
                checked += 1
    else:
        rng = np.random.default_rng(np.random.SeedSequence(0, spawn_key=(n, B.size)))
        checked = pairs
        for _ in range(pairs):
            a, b = rng.integers(1, B.size + 1, size=2)
            g = np.vdot(B.element(int(a)), B.element(int(b)))
            target = 1.0 if a == b else 0.0
            ortho = max(ortho, abs(g - target))
    return BasisReport(ortho, completeness, checked, exhaustive or n <= 8)


@dataclass(frozen=True)
class CoherenceReport:
    """Smallest coherence consistent with either route of the definition.

    detail holds the three candidate values: the Fourier-norm route
    n * max ||w_a||^2, and the pair (n/2r) * max ||P_T w_a||_2^2,
    (n^2/r) * max (w_a, sign rho)^2 whose maximum is the second route.
    """

    nu: float
    route: str  # "fourier-norm" | "pt-and-sign"
    detail: dict = field(default_factory=dict)
    rank: int = 0


def coherence(rho: np.ndarray, B: OperatorBasis,
              zero_tol: float = DEFAULT_ZERO_TOL) -> CoherenceReport:
    """Coherence of rho with respect to B, minimized over the two routes."""
    rho = np.asarray(rho, dtype=complex)
    if not np.any(rho):
        raise InvalidInput("coherence of the zero matrix is undefined")
    n = B.dim
    T = tangent_space(rho, zero_tol)
    r = T.rank
    sgn = matrix_sign(rho, zero_tol)

    if B.fourier_bound is not None:
        max_opnorm_sq = float(B.fourier_bound)
    else:
        max_opnorm_sq = max(np.linalg.norm(w, 2) ** 2 for w in B.elements())
    max_pt = 0.0
    max_sign = 0.0
    for w in B.elements():
        max_pt = max(max_pt, float(np.linalg.norm(tangent_project(T, w)) ** 2))
        max_sign = max(max_sign, float(np.vdot(w, sgn).real ** 2))

    fourier = n * max_opnorm_sq
    pt = (n / (2.0 * r)) * max_pt
    sign_term = (n**2 / r) * max_sign
    pt_sign = max(pt, sign_term)
    detail = {"fourier": fourier, "pt": pt, "sign": sign_term, "pt-and-sign": pt_sign}
    if fourier <= pt_sign:
        return CoherenceReport(nu=fourier, route="fourier-norm", detail=detail, rank=r)
    return CoherenceReport(nu=pt_sign, route="pt-and-sign", detail=detail, rank=r)


def mu_overlap(F: np.ndarray, B: OperatorBasis) -> float:
    """Maximal squared overlap max_a (w_a, F)^2."""
    F = np.asarray(F, dtype=complex)
    if F.shape != (B.dim, B.dim):
        raise InvalidInput(f"dimension mismatch: {F.shape} vs basis dim {B.dim}")
    coeffs = B.coefficients(F)
    return float(np.max(coeffs**2)) if coeffs.size else 0.0


def _format_complex(z: complex) -> str:
    return f"{z.real:.17g}{z.imag:+.17g}i"


def _parse_complex(tok: str) -> complex:
    try:
        return complex(tok.replace("i", "j"))
    except ValueError as exc:
        raise InvalidInput(f"bad complex token {tok!r}") from exc


def save_basis(B: OperatorBasis, path: str) -> None:
    """Write a basis in the `opbasis v1` text format."""
    with open(path, "w") as fh:
        fh.write(f"opbasis v1 n={B.dim} count={B.size}\n")
        for a in range(1, B.size + 1):
            fh.write(f"element {a}\n")
            for row in B.element(a):
                fh.write(" ".join(_format_complex(z) for z in row) + "\n")


def load_basis(path: str, validate: bool = True, tol: float = 1e-8) -> OperatorBasis:
    """Read an `opbasis v1` file; the basis is verified before use."""
    with open(path) as fh:
        header = fh.readline().split()
        if len(header) != 4 or header[0] != "opbasis" or header[1] != "v1":
            raise InvalidInput("not an opbasis v1 file")
        try:
            n = int(header[2].removeprefix("n="))
            count = int(header[3].removeprefix("count="))
        except ValueError as exc:
            raise InvalidInput("malformed opbasis header") from exc
        if count != n * n:
            raise InvalidInput(f"count={count} does not equal n^2={n * n}")
        elems = np.empty((count, n, n), dtype=complex)
        for idx in range(count):
            tag = fh.readline().split()
            if len(tag) != 2 or tag[0] != "element" or int(tag[1]) != idx + 1:
                raise InvalidInput(f"expected 'element {idx + 1}' marker")
            for i in range(n):
                toks = fh.readline().split()
                if len(toks) != n:
                    raise InvalidInput(f"element {idx + 1} row {i + 1}: expected {n} entries")
                elems[idx, i] = [_parse_complex(t) for t in toks]
    elems.setflags(write=False)
    basis = OperatorBasis(n, "custom", lambda a: elems[a - 1])
    if validate:
        report = verify_basis(basis)
        if not report.ok(tol):
            raise InvalidInput(
                f"basis file failed validation: orthonormality "
                f"{report.orthonormality_deviation:.3e}, completeness "
                f"{report.completeness_deviation:.3e}")
    return basis
