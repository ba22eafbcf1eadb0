"""Analytic tail bounds and their Monte Carlo validation.

Every large-deviation estimate used by the certificate analysis is
exposed as a formula evaluator (`eval_tail_bound`) together with a
matching sampler (`monte_carlo_tail`) that instantiates exactly the
random quantity the bound controls and reports the empirical tail
frequency next to the analytic value.

Bound kinds and validity windows:
  op-bernstein            2n exp(-t^2/4V)           t <= 2V/c
  op-bernstein-poisson    2n exp(-t/2c)             t >  2V/c
  vector-bernstein        exp(-t^2/4V)              t <= V/b, event N >= sqrt(V)+t
  matrix-martingale       2n exp(-t^2/4V)           t <= 2V/c_max
  adev                    4nr exp(-t^2 k/8v)        t < 2
  pbot-fourier            2n exp(-t^2 k r/(4v f^2)) t <= sqrt(2/r) f, else
                          2n exp(-t sqrt(r) k/(2 sqrt(2) v f))
  pbot-general            2n exp(-t^2 k r/(4v f^2)) t <= sqrt(2/r) f
  mu-propagation          2n^2 exp(-t k/(4 mu v))   t <= mu
  dimension-free          exp(-(t-sqrt(2v/k))^2 k/8v)   sqrt(2v/k) <= t <= 2/3
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .bases import OperatorBasis, hermitian_standard_basis, pauli_basis, pauli_word
from .errors import InvalidInput, OutOfWindow
from .matcore import matrix_sign, tangent_basis, tangent_project, tangent_space
from .sampling import stream_rng

KINDS = ("op-bernstein", "op-bernstein-poisson", "vector-bernstein",
         "matrix-martingale", "adev", "pbot-fourier", "pbot-general",
         "mu-propagation", "dimension-free")


@dataclass(frozen=True)
class TailBoundQuery:
    kind: str
    params: dict = field(default_factory=dict)


def _need(params: dict, *names: str) -> list[float]:
    out = []
    for name in names:
        if name not in params:
            raise InvalidInput(f"missing parameter {name!r}")
        val = float(params[name])
        if not math.isfinite(val) or val <= 0:
            if not (name == "t" and val == 0.0):
                raise InvalidInput(f"parameter {name!r} must be positive, got {val}")
        out.append(val)
    return out


_EDGE = 1e-9  # relative slack so printed window-boundary values evaluate


def eval_tail_bound(query: TailBoundQuery) -> float:
    """Evaluate the analytic tail probability; values above 1 are returned as-is."""
    kind, p = query.kind, query.params
    if kind == "op-bernstein":
        n, V, c, t = _need(p, "n", "V", "c", "t")
        if t > 2.0 * V / c * (1.0 + _EDGE):
            raise OutOfWindow(f"t={t} above 2V/c={2 * V / c}")
        return 2.0 * n * math.exp(-t * t / (4.0 * V))
    if kind == "op-bernstein-poisson":
        n, V, c, t = _need(p, "n", "V", "c", "t")
        if t <= 2.0 * V / c * (1.0 - _EDGE):
            raise OutOfWindow(f"t={t} not above 2V/c={2 * V / c}")
        return 2.0 * n * math.exp(-t / (2.0 * c))
    if kind == "vector-bernstein":
        V, b, t = _need(p, "V", "b", "t")
        if t > V / b * (1.0 + _EDGE):
            raise OutOfWindow(f"t={t} above V/b={V / b}")
        return math.exp(-t * t / (4.0 * V))
    if kind == "matrix-martingale":
        n, V, cmax, t = _need(p, "n", "V", "c_max", "t")
        if t > 2.0 * V / cmax * (1.0 + _EDGE):
            raise OutOfWindow(f"t={t} above 2V/c_max={2 * V / cmax}")
        return 2.0 * n * math.exp(-t * t / (4.0 * V))
    if kind == "adev":
        n, r, nu, kappa, t = _need(p, "n", "r", "nu", "kappa", "t")
        if t >= 2.0:
            raise OutOfWindow(f"t={t} not below 2")
        return 4.0 * n * r * math.exp(-t * t * kappa / (8.0 * nu))
    if kind in ("pbot-fourier", "pbot-general"):
        n, r, nu, kappa, f, t = _need(p, "n", "r", "nu", "kappa", "f", "t")
        edge = math.sqrt(2.0 / r) * f
        if t <= edge * (1.0 + _EDGE):
            return 2.0 * n * math.exp(-t * t * kappa * r / (4.0 * nu * f * f))
        if kind == "pbot-general":
            raise OutOfWindow(f"t={t} above sqrt(2/r) f={edge}")
        return 2.0 * n * math.exp(-t * math.sqrt(r) * kappa / (2.0 * math.sqrt(2.0) * nu * f))
    if kind == "mu-propagation":
        n, nu, kappa, mu, t = _need(p, "n", "nu", "kappa", "mu_F", "t")
        if t > mu * (1.0 + _EDGE):
            raise OutOfWindow(f"t={t} above mu(F)={mu}")
        return 2.0 * n * n * math.exp(-t * kappa / (4.0 * mu * nu))
    if kind == "dimension-free":
        nu, kappa, t = _need(p, "nu", "kappa", "t")
        floor = math.sqrt(2.0 * nu / kappa)
        if t > (2.0 / 3.0) * (1.0 + _EDGE):
            raise OutOfWindow(f"t={t} above 2/3")
        if t < floor * (1.0 - _EDGE):
            raise OutOfWindow(f"t={t} below sqrt(2 nu/kappa)={floor}")
        return math.exp(-(max(t - floor, 0.0) ** 2) * kappa / (8.0 * nu))
    raise InvalidInput(f"unknown bound kind {query.kind!r}")


@dataclass(frozen=True)
class TailReport:
    kind: str
    t: float
    analytic: float
    empirical: float
    trials: int
    sigma3: float  # binomial 3-sigma half width of the empirical frequency
    verdict: str  # "respected" | "violated" | "vacuous"
    params: dict = field(default_factory=dict)


def _verdict(empirical: float, sigma3: float, analytic: float) -> str:
    if empirical - sigma3 > analytic:
        return "violated"
    if analytic > 1.0:
        return "vacuous"
    return "respected"


def _haar_rank_r(n: int, r: int, rng: np.random.Generator) -> np.ndarray:
    g = rng.normal(size=(n, n)) + 1j * rng.normal(size=(n, n))
    q, _ = np.linalg.qr(g)
    U = q[:, :r]
    lam = np.full(r, 1.0 / math.sqrt(r))
    return (U * lam) @ U.conj().T


def _basis_for(scn: dict, n: int) -> OperatorBasis:
    kind = scn.get("basis", "pauli")
    if kind == "pauli":
        k = int(round(math.log2(n)))
        if 2**k != n:
            raise InvalidInput("pauli scenarios need a power-of-two n")
        return pauli_basis(k)
    if kind == "hermitian-standard":
        return hermitian_standard_basis(n)
    raise InvalidInput(f"unknown scenario basis {kind!r}")


def monte_carlo_tail(kind: str, scenario: dict, trials: int = 500,
                     seed: int = 0) -> TailReport:
    """Estimate the tail frequency of the bounded statistic over seeded trials.

    The scenario supplies the instance (n, r, kappa, basis, t and, for the
    ensemble theorems, the variable count m and scale).  Trial j draws its
    randomness from the stream (seed, j); the fixture matrix, where one is
    needed, comes from the stream (seed, 2^20).
    """
    if trials < 100:
        raise InvalidInput("at least 100 trials are required")
    if kind in ("adev", "pbot-fourier", "pbot-general", "mu-propagation",
                "dimension-free"):
        stats, threshold, params = _operator_scenario(kind, scenario, trials, seed)
    elif kind in ("op-bernstein", "op-bernstein-poisson", "matrix-martingale"):
        stats, threshold, params = _matrix_sum_scenario(kind, scenario, trials, seed)
    elif kind == "vector-bernstein":
        stats, threshold, params = _vector_sum_scenario(scenario, trials, seed)
    else:
        raise InvalidInput(f"unknown bound kind {kind!r}")
    empirical = float(np.mean(stats > threshold))
    analytic = eval_tail_bound(TailBoundQuery(kind, params))
    sigma3 = 3.0 * math.sqrt(max(empirical * (1.0 - empirical), 0.0) / trials)
    return TailReport(kind=kind, t=float(scenario["t"]), analytic=analytic,
                      empirical=empirical, trials=trials, sigma3=sigma3,
                      verdict=_verdict(empirical, sigma3, analytic), params=params)


def _operator_scenario(kind: str, scn: dict, trials: int, seed: int):
    n = int(scn["n"])
    r = int(scn.get("r", 1))
    nu = float(scn.get("nu", 1.0))
    t = float(scn["t"])
    kappa = float(scn["kappa"])
    m = max(1, round(kappa * r * n))
    kappa_eff = m / (r * n)
    B = _basis_for(scn, n)
    rho = _haar_rank_r(n, r, stream_rng(seed, 1 << 20))
    T = tangent_space(rho)
    W = B.stacked()
    scale_all = n * n / m

    stats = np.empty(trials)
    if kind == "adev":
        tb = tangent_basis(T)
        G = np.einsum("aij,sij->as", W.conj(), tb).real
        d = tb.shape[0]
        for j in range(trials):
            idx = stream_rng(seed, j).integers(0, n * n, size=m)
            labels, counts = np.unique(idx, return_counts=True)
            Gs = G[labels]
            M = scale_all * (Gs.T * counts) @ Gs - np.eye(d)
            stats[j] = np.abs(np.linalg.eigvalsh(M)).max()
        params = {"n": n, "r": r, "nu": nu, "kappa": kappa_eff, "t": t}
        return stats, t, params

    F = matrix_sign(rho)
    f_norm = float(np.linalg.norm(F))
    coeff_F = np.einsum("aij,ij->a", W.conj(), F).real
    for j in range(trials):
        idx = stream_rng(seed, j).integers(0, n * n, size=m)
        labels, counts = np.unique(idx, return_counts=True)
        RF = scale_all * np.tensordot(coeff_F[labels] * counts, W[labels], axes=(0, 0))
        RF = (RF + RF.conj().T) / 2
        if kind in ("pbot-fourier", "pbot-general"):
            off = tangent_project(T, RF, complement=True)
            stats[j] = np.abs(np.linalg.eigvalsh(off)).max()
        elif kind == "mu-propagation":
            resid = F - tangent_project(T, RF)
            overlaps = np.einsum("aij,ij->a", W.conj(), resid).real
            stats[j] = np.max(overlaps**2)
        else:  # dimension-free
            stats[j] = np.linalg.norm(tangent_project(T, RF) - F) / f_norm

    if kind in ("pbot-fourier", "pbot-general"):
        params = {"n": n, "r": r, "nu": nu, "kappa": kappa_eff, "f": f_norm, "t": t}
        return stats, t * f_norm, params
    if kind == "mu-propagation":
        mu_F = float(np.max(coeff_F**2))
        params = {"n": n, "nu": nu, "kappa": kappa_eff, "mu_F": mu_F, "t": t}
        return stats, t, params
    params = {"nu": nu, "kappa": kappa_eff, "t": t}
    return stats, t, params


def _matrix_sum_scenario(kind: str, scn: dict, trials: int, seed: int):
    """Rademacher-signed Pauli words: X_i = eps_i b_i s W_i.

    With activation probability h for the Bernoulli factor b_i, the
    variance proxy is exact: E X_i^2 = h s^2 1, while ||X_i|| <= s.  Small
    h separates the variance scale from the norm bound, which is what the
    Poisson regime of the bound needs to be reachable at all.
    """
    n = int(scn["n"])
    m = int(scn["m"])
    s = float(scn.get("scale", 1.0 / math.sqrt(m)))
    t = float(scn["t"])
    act = float(scn.get("activation", 1.0))
    diag_only = bool(scn.get("commuting", False))
    k = int(round(math.log2(n)))
    if 2**k != n:
        raise InvalidInput("matrix-sum scenarios need a power-of-two n")
    if not (0.0 < act <= 1.0):
        raise InvalidInput("activation must lie in (0, 1]")
    words = np.stack([pauli_word(k, p, q) for p in range(n) for q in range(n)])
    if diag_only:
        words = np.stack([pauli_word(k, p, 0) for p in range(n)])
    stats = np.empty(trials)
    for j in range(trials):
        rng = stream_rng(seed, j)
        picks = rng.integers(0, words.shape[0], size=m)
        signs = rng.integers(0, 2, size=m) * 2.0 - 1.0
        if act < 1.0:
            signs = signs * (rng.random(size=m) < act)
        S = s * np.tensordot(signs, words[picks], axes=(0, 0))
        stats[j] = np.abs(np.linalg.eigvalsh((S + S.conj().T) / 2)).max()
    V = m * act * s * s
    if kind == "matrix-martingale":
        params = {"n": n, "V": V, "c_max": s, "t": t}
    else:
        params = {"n": n, "V": V, "c": s, "t": t}
    return stats, t, params


def _vector_sum_scenario(scn: dict, trials: int, seed: int):
    """Rademacher-signed unit vectors of fixed length s in R^d."""
    d = int(scn.get("d", 64))
    m = int(scn["m"])
    s = float(scn.get("scale", 1.0 / math.sqrt(m)))
    t = float(scn["t"])
    V = m * s * s
    stats = np.empty(trials)
    for j in range(trials):
        rng = stream_rng(seed, j)
        vecs = rng.normal(size=(m, d))
        vecs /= np.linalg.norm(vecs, axis=1, keepdims=True)
        signs = rng.integers(0, 2, size=m) * 2.0 - 1.0
        stats[j] = np.linalg.norm(s * signs @ vecs)
    params = {"V": V, "b": s, "t": t}
    return stats, math.sqrt(V) + t, params


def report_to_csv_row(rep: TailReport) -> str:
    keys = sorted(rep.params)
    ptxt = ";".join(f"{k}={rep.params[k]:.10g}" for k in keys)
    return (f"{rep.kind},{ptxt},{rep.t:.10g},{rep.analytic:.10g},"
            f"{rep.empirical:.10g},{rep.trials},{rep.verdict}")
