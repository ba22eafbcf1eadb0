"""Coefficient-index sampling and the sampling operator.

Index sets are multisets of 1-based basis labels drawn i.i.d. (with
replacement) or as uniform subsets (without replacement).  All draws come
from counter-based Philox streams keyed by (seed, *stream), so parallel
trials and golfing batches consume provably disjoint randomness.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .bases import OperatorBasis
from .errors import InvalidInput

MODES = ("iid", "without-replacement")


def stream_rng(seed: int, *stream: int) -> np.random.Generator:
    """Philox generator on the sub-stream (seed, *stream)."""
    seq = np.random.SeedSequence(seed, spawn_key=tuple(int(s) for s in stream))
    return np.random.Generator(np.random.Philox(seq))


@dataclass(frozen=True)
class SampleSet:
    """A drawn multiset of basis labels with its provenance."""

    n: int
    indices: np.ndarray  # (m,) ints in [1, n^2], multiplicities allowed
    mode: str
    seed: int
    stream: tuple = ()

    @property
    def m(self) -> int:
        return int(self.indices.shape[0])

    def counts(self) -> tuple[np.ndarray, np.ndarray]:
        """Distinct labels and their multiplicities."""
        return np.unique(self.indices, return_counts=True)


def draw_omega(n: int, m: int, mode: str = "iid", seed: int = 0,
               stream: tuple = ()) -> SampleSet:
    """Draw m labels from [1, n^2], deterministically from (seed, stream)."""
    if n < 1:
        raise InvalidInput("n must be >= 1")
    if m < 0:
        raise InvalidInput("m must be >= 0")
    if mode not in MODES:
        raise InvalidInput(f"unknown sampling mode {mode!r}")
    size = n * n
    if mode == "without-replacement" and m > size:
        raise InvalidInput(f"cannot draw {m} distinct labels from {size}")
    rng = stream_rng(seed, *stream)
    if mode == "iid":
        idx = rng.integers(1, size + 1, size=m)
    else:
        idx = rng.permutation(size)[:m] + 1
    idx = np.asarray(idx, dtype=np.int64)
    idx.setflags(write=False)
    return SampleSet(n=n, indices=idx, mode=mode, seed=seed, stream=tuple(stream))


def apply_R(omega: SampleSet, B: OperatorBasis, sigma: np.ndarray) -> np.ndarray:
    """Sampling operator (n^2/m) sum_i w_{A_i} (w_{A_i}, sigma), multiplicities kept."""
    if omega.m == 0:
        raise InvalidInput("sampling operator of an empty index set")
    sigma = np.asarray(sigma, dtype=complex)
    n = B.dim
    if omega.n != n or sigma.shape != (n, n):
        raise InvalidInput("dimension mismatch between omega, basis, and sigma")
    labels, counts = omega.counts()
    coeffs = B.coefficients(sigma, labels)
    weights = coeffs * counts * (n * n / omega.m)
    try:
        W = B.stacked()
        out = np.tensordot(weights, W[labels - 1], axes=(0, 0))
    except InvalidInput:
        out = np.zeros((n, n), dtype=complex)
        for a, wgt in zip(labels, weights):
            out += wgt * B.element(int(a))
    return (out + out.conj().T) / 2


@dataclass(frozen=True)
class BatchPlan:
    """Contiguous batch sizes m_1..m_l over one stretch of draws."""

    sizes: tuple = field(default_factory=tuple)

    def __post_init__(self):
        if any(int(s) < 0 for s in self.sizes):
            raise InvalidInput("batch sizes must be nonnegative")
        object.__setattr__(self, "sizes", tuple(int(s) for s in self.sizes))

    @property
    def total(self) -> int:
        return sum(self.sizes)

    @property
    def offsets(self) -> tuple:
        out, acc = [], 0
        for s in self.sizes:
            out.append(acc)
            acc += s
        return tuple(out)


def split_batches(omega: SampleSet, plan: BatchPlan) -> list[SampleSet]:
    """Slice one draw into the plan's contiguous, disjoint batches."""
    if plan.total != omega.m:
        raise InvalidInput(f"plan covers {plan.total} draws, sample set has {omega.m}")
    out = []
    for i, (off, size) in enumerate(zip(plan.offsets, plan.sizes)):
        idx = omega.indices[off:off + size]
        out.append(SampleSet(n=omega.n, indices=idx, mode=omega.mode,
                             seed=omega.seed, stream=omega.stream + (i,)))
    return out


def save_omega(omega: SampleSet, path: str) -> None:
    """Write an index set in the `omega v1` text format."""
    with open(path, "w") as fh:
        fh.write(f"omega v1 n={omega.n} m={omega.m} mode={omega.mode} seed={omega.seed}\n")
        fh.write(" ".join(str(int(a)) for a in omega.indices) + "\n")


def load_omega(path: str) -> SampleSet:
    """Read an `omega v1` file."""
    with open(path) as fh:
        header = fh.readline().split()
        if len(header) != 6 or header[:2] != ["omega", "v1"]:
            raise InvalidInput("not an omega v1 file")
        try:
            n = int(header[2].removeprefix("n="))
            m = int(header[3].removeprefix("m="))
            mode = header[4].removeprefix("mode=")
            seed = int(header[5].removeprefix("seed="))
        except ValueError as exc:
            raise InvalidInput("malformed omega header") from exc
        idx = np.array(fh.read().split(), dtype=np.int64)
    if mode not in MODES:
        raise InvalidInput(f"unknown sampling mode {mode!r}")
    if idx.shape[0] != m:
        raise InvalidInput(f"expected {m} indices, found {idx.shape[0]}")
    if idx.size and (idx.min() < 1 or idx.max() > n * n):
        raise InvalidInput("indices outside [1, n^2]")
    if mode == "without-replacement" and np.unique(idx).size != idx.size:
        raise InvalidInput("repeated indices in a without-replacement set")
    idx.setflags(write=False)
    return SampleSet(n=n, indices=idx, mode=mode, seed=seed)
