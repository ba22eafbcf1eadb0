"""Nuclear-norm minimization over sampled-coefficient constraints.

The program  min ||sigma||_1  s.t. (w_a, sigma) = c_a for a in Omega  is
solved by operator splitting: eigenvalue soft-thresholding (the proximal
map of the nuclear norm on Hermitian matrices) alternates with exact
projection onto the affine constraint set, which is cheap because the
constraints are coefficients against orthonormal basis elements.
Non-Hermitian problems are lifted to dimension 2n through the Hermitian
dilation and solved with the same routine.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .bases import OperatorBasis
from .errors import InvalidInput
from .matcore import (
    DEFAULT_ZERO_TOL,
    as_hermitian,
    tangent_project,
    tangent_space,
    tilde_embed,
)
from .sampling import SampleSet, stream_rng

DUPLICATE_COEFF_TOL = 1e-9


@dataclass(frozen=True)
class RecoveryProblem:
    """Deduplicated constraint data for one recovery instance."""

    basis: OperatorBasis
    labels: np.ndarray  # (d,) distinct 1-based labels, sorted
    coeffs: np.ndarray  # (d,) real target coefficients
    n: int

    @classmethod
    def from_pairs(cls, basis: OperatorBasis, labels, coeffs) -> "RecoveryProblem":
        """Build from possibly-duplicated (label, coefficient) pairs.

        Duplicates are merged; the same label carrying two coefficients
        that differ by more than an absolute 1e-9 is rejected as
        inconsistent.
        """
        labels = np.asarray(labels, dtype=np.int64)
        coeffs = np.asarray(coeffs, dtype=float)
        if labels.shape != coeffs.shape or labels.ndim != 1:
            raise InvalidInput("labels and coefficients must align")
        if labels.size == 0:
            raise InvalidInput("at least one constraint is required")
        if labels.min() < 1 or labels.max() > basis.size:
            raise InvalidInput("labels outside [1, n^2]")
        if not np.all(np.isfinite(coeffs)):
            raise InvalidInput("non-finite coefficient")
        uniq, inverse = np.unique(labels, return_inverse=True)
        merged = np.empty(uniq.shape[0])
        for slot in range(uniq.shape[0]):
            vals = coeffs[inverse == slot]
            if vals.max() - vals.min() > DUPLICATE_COEFF_TOL:
                raise InvalidInput(
                    f"inconsistent duplicate coefficients for label {uniq[slot]}")
            merged[slot] = vals[0]
        merged.setflags(write=False)
        uniq.setflags(write=False)
        return cls(basis=basis, labels=uniq, coeffs=merged, n=basis.dim)

    @classmethod
    def from_rho(cls, basis: OperatorBasis, omega: SampleSet, rho: np.ndarray) -> "RecoveryProblem":
        """Constraints read off a known matrix at the sampled labels."""
        rho = as_hermitian(rho)
        labels = np.unique(omega.indices)
        coeffs = basis.coefficients(rho, labels)
        coeffs.setflags(write=False)
        labels.setflags(write=False)
        return cls(basis=basis, labels=labels, coeffs=coeffs, n=basis.dim)


@dataclass(frozen=True)
class SolverConfig:
    max_iterations: int = 20000
    penalty: float = 1.0
    eps_primal: float = 1e-9
    eps_dual: float = 1e-9
    zero_tol: float = DEFAULT_ZERO_TOL

    def __post_init__(self):
        if self.eps_primal <= 0 or self.eps_dual <= 0 or self.penalty <= 0:
            raise InvalidInput("tolerances and penalty must be positive")


@dataclass(frozen=True)
class RecoveryResult:
    """Minimizer estimate with convergence and optional ground-truth diagnostics."""

    sigma: np.ndarray
    converged: bool
    iterations: int
    primal_residual: float
    dual_residual: float
    multiplier: np.ndarray  # subgradient certificate -penalty * u, in span of sampled w_a
    relative_error: float | None = None
    delta_t_norm: float | None = None
    delta_t_perp_norm: float | None = None

    def constraint_residual(self, problem: RecoveryProblem) -> float:
        got = problem.basis.coefficients(self.sigma, problem.labels)
        return float(np.abs(got - problem.coeffs).max())


def _shrink_eigenvalues(A: np.ndarray, tau: float) -> np.ndarray:
    vals, vecs = np.linalg.eigh(A)
    shrunk = np.sign(vals) * np.maximum(np.abs(vals) - tau, 0.0)
    return (vecs * shrunk) @ vecs.conj().T


def recover(problem: RecoveryProblem, cfg: SolverConfig = SolverConfig(),
            rho: np.ndarray | None = None) -> RecoveryResult:
    """Solve the constrained nuclear-norm program.

    Returns the best iterate with converged=False when the iteration
    budget runs out; the reported sigma is always exactly feasible
    because it is the output of the constraint projection step.
    """
    B, labels, coeffs = problem.basis, problem.labels, problem.coeffs
    n = problem.n
    try:
        W = B.stacked()[labels - 1]
        Wf = W.reshape(labels.shape[0], n * n)
        Wc = Wf.conj()
    except InvalidInput:
        W = None

    def coefficients(sig: np.ndarray) -> np.ndarray:
        if W is not None:
            return (Wc @ sig.reshape(n * n)).real
        return B.coefficients(sig, labels)

    def expand(vals: np.ndarray) -> np.ndarray:
        if W is not None:
            return (vals @ Wf).reshape(n, n)
        out = np.zeros((n, n), dtype=complex)
        for a, v in zip(labels, vals):
            out += v * B.element(int(a))
        return out

    def project(sig: np.ndarray) -> np.ndarray:
        delta = coefficients(sig) - coeffs
        out = sig - expand(delta)
        return (out + out.conj().T) / 2

    z = expand(coeffs)  # least-norm feasible seed
    z = (z + z.conj().T) / 2
    u = np.zeros((n, n), dtype=complex)
    pen = cfg.penalty
    converged = False
    r_norm = s_norm = np.inf
    it = 0
    for it in range(1, cfg.max_iterations + 1):
        x = _shrink_eigenvalues(z - u, 1.0 / pen)
        z_new = project(x + u)
        r_norm = float(np.linalg.norm(x - z_new))
        s_norm = pen * float(np.linalg.norm(z_new - z))
        u = u + x - z_new
        z = z_new
        eps_pri = cfg.eps_primal * max(1.0, float(np.linalg.norm(x)), float(np.linalg.norm(z)))
        eps_dua = cfg.eps_dual * max(1.0, pen * float(np.linalg.norm(u)))
        if r_norm <= eps_pri and s_norm <= eps_dua:
            converged = True
            break

    rel = dt = dtp = None
    if rho is not None:
        rho = as_hermitian(rho)
        delta = z - rho
        denom = float(np.linalg.norm(rho))
        rel = float(np.linalg.norm(delta)) / denom if denom > 0 else float(np.linalg.norm(delta))
        T = tangent_space(rho, cfg.zero_tol)
        dt = float(np.linalg.norm(tangent_project(T, delta)))
        dtp = float(np.linalg.norm(tangent_project(T, delta, complement=True)))
    return RecoveryResult(sigma=z, converged=converged, iterations=it,
                          primal_residual=r_norm, dual_residual=s_norm,
                          multiplier=-pen * u, relative_error=rel,
                          delta_t_norm=dt, delta_t_perp_norm=dtp)


# --- non-Hermitian lifting ---------------------------------------------------

def extended_basis(elements: list[np.ndarray]) -> OperatorBasis:
    """Hermitian basis on 2n from a complex orthonormal basis on n.

    Label layout for a in [1, n^2]: off-diagonal dilations of w_a at a and
    of i*w_a at n^2 + a, then the two block-diagonal families at 2n^2 + a
    and 3n^2 + a.
    """
    n = elements[0].shape[0]
    if any(e.shape != (n, n) for e in elements):
        raise InvalidInput("basis elements must share a square shape")
    if len(elements) != n * n:
        raise InvalidInput(f"expected {n * n} elements, got {len(elements)}")
    elems = [np.asarray(e, dtype=complex) for e in elements]

    def gen(a: int) -> np.ndarray:
        family, idx = divmod(a - 1, n * n)
        w = elems[idx]
        out = np.zeros((2 * n, 2 * n), dtype=complex)
        s = 1.0 / np.sqrt(2.0)
        if family == 0:
            out[:n, n:] = s * w
            out[n:, :n] = s * w.conj().T
        elif family == 1:
            out[:n, n:] = 1j * s * w
            out[n:, :n] = -1j * s * w.conj().T
        elif family == 2:
            out[:n, :n] = s * w
            out[n:, n:] = s * w.conj().T
        else:
            out[:n, :n] = 1j * s * w
            out[n:, n:] = -1j * s * w.conj().T
        return out

    return OperatorBasis(2 * n, "tilde-extended", gen)


@dataclass(frozen=True)
class ComplexRecoveryResult:
    sigma: np.ndarray  # complex n x n estimate
    lifted: RecoveryResult
    relative_error: float | None = None


def recover_nonhermitian(elements: list[np.ndarray], labels, coeffs,
                         cfg: SolverConfig = SolverConfig(),
                         rho: np.ndarray | None = None) -> ComplexRecoveryResult:
    """Recover a complex square matrix from sampled complex coefficients.

    Each sampled complex coefficient (w_a, rho) fixes two real
    coefficients of the dilation: Re against the dilation of w_a and Im
    against the dilation of i*w_a.  The Hermitian program runs in
    dimension 2n and the estimate is sqrt(2) times the off-diagonal block.
    """
    labels = np.asarray(labels, dtype=np.int64)
    coeffs = np.asarray(coeffs, dtype=complex)
    if labels.shape != coeffs.shape:
        raise InvalidInput("labels and coefficients must align")
    n = elements[0].shape[0]
    ext = extended_basis(elements)
    ext_labels = np.concatenate([labels, labels + n * n])
    ext_coeffs = np.concatenate([coeffs.real, coeffs.imag])
    lifted_problem = RecoveryProblem.from_pairs(ext, ext_labels, ext_coeffs)
    lifted_rho = tilde_embed(rho) if rho is not None else None
    res = recover(lifted_problem, cfg, rho=lifted_rho)
    estimate = np.sqrt(2.0) * res.sigma[:n, n:]
    rel = None
    if rho is not None:
        denom = float(np.linalg.norm(rho))
        rel = float(np.linalg.norm(estimate - rho)) / denom if denom else None
    return ComplexRecoveryResult(sigma=estimate, lifted=res, relative_error=rel)


# --- uniqueness probe --------------------------------------------------------

@dataclass(frozen=True)
class UniquenessReport:
    likely_unique: bool
    min_increment: float
    kernel_dim: int
    increments: np.ndarray = field(repr=False, default=None)


def uniqueness_probe(problem: RecoveryProblem, result: RecoveryResult,
                     trials: int = 20, seed: int = 0,
                     steps: tuple = (1e-3, 1e-2)) -> UniquenessReport:
    """Check that random feasible perturbations strictly increase the norm.

    Directions are drawn Gaussian, projected onto the kernel of the
    constraint map, and normalized; the report carries the smallest
    nuclear-norm increment over all probes and step lengths.
    """
    B, labels = problem.basis, problem.labels
    n = problem.n
    kernel_dim = n * n - labels.shape[0]
    base = float(np.abs(np.linalg.eigvalsh(result.sigma)).sum())
    if kernel_dim == 0:
        return UniquenessReport(likely_unique=True, min_increment=np.inf,
                                kernel_dim=0, increments=np.empty(0))
    rng = stream_rng(seed, 0xD1CE)
    increments = np.empty(trials)
    for t in range(trials):
        g = rng.normal(size=(n, n)) + 1j * rng.normal(size=(n, n))
        g = (g + g.conj().T) / 2
        coeff = B.coefficients(g, labels)
        try:
            W = B.stacked()[labels - 1]
            g = g - np.tensordot(coeff, W, axes=(0, 0))
        except InvalidInput:
            for a, c in zip(labels, coeff):
                g = g - c * B.element(int(a))
        g = (g + g.conj().T) / 2
        nrm = float(np.linalg.norm(g))
        if nrm < 1e-14:
            increments[t] = 0.0
            continue
        g /= nrm
        increments[t] = min(
            float(np.abs(np.linalg.eigvalsh(result.sigma + h * g)).sum()) - base
            for h in steps)
    return UniquenessReport(likely_unique=bool(np.all(increments > 0)),
                            min_increment=float(increments.min()),
                            kernel_dim=kernel_dim, increments=increments)


# --- problem file format -----------------------------------------------------

def save_problem(problem: RecoveryProblem, path: str) -> None:
    """Write constraints in the `problem v1` text format."""
    with open(path, "w") as fh:
        fh.write(f"problem v1 n={problem.n} basis={problem.basis.kind} "
                 f"m={problem.labels.shape[0]}\n")
        for a, c in zip(problem.labels, problem.coeffs):
            fh.write(f"{int(a)} {c:.17g}\n")


def load_problem(path: str, basis: OperatorBasis | None = None) -> RecoveryProblem:
    """Read a `problem v1` file; pauli and hermitian-standard bases are rebuilt."""
    from .bases import hermitian_standard_basis, pauli_basis

    with open(path) as fh:
        header = fh.readline().split()
        if len(header) != 5 or header[:2] != ["problem", "v1"]:
            raise InvalidInput("not a problem v1 file")
        n = int(header[2].removeprefix("n="))
        kind = header[3].removeprefix("basis=")
        m = int(header[4].removeprefix("m="))
        labels, coeffs = [], []
        for _ in range(m):
            tok = fh.readline().split()
            if len(tok) != 2:
                raise InvalidInput("malformed constraint line")
            labels.append(int(tok[0]))
            coeffs.append(float(tok[1]))
    if basis is None:
        if kind == "pauli":
            k = int(np.log2(n))
            if 2**k != n:
                raise InvalidInput(f"pauli basis needs a power-of-two n, got {n}")
            basis = pauli_basis(k)
        elif kind == "hermitian-standard":
            basis = hermitian_standard_basis(n)
        else:
            raise InvalidInput(f"basis kind {kind!r} requires an explicit basis object")
    if basis.dim != n:
        raise InvalidInput("basis dimension does not match problem header")
    return RecoveryProblem.from_pairs(basis, labels, coeffs)
