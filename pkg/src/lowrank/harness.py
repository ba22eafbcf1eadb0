"""Experiment orchestration: phase diagrams, bound sweeps, reproducible CSV.

Every trial's randomness is pinned by (master_seed, cell_index,
trial_index, purpose) streams, so rerunning a config byte-reproduces the
CSV body; wall-clock information only ever appears in the timestamped
comment header.  Cells and trials fan out to a process pool when workers
are requested; results are re-ordered by (cell, trial) before writing.
"""

from __future__ import annotations

import math
import os
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, replace

import numpy as np

from .bases import OperatorBasis, hermitian_standard_basis, pauli_basis
from .concentration import monte_carlo_tail, report_to_csv_row
from .errors import InvalidInput
from .sampling import draw_omega, stream_rng
from .solver import RecoveryProblem, SolverConfig, recover

SUCCESS_THRESHOLD = 1e-4  # relative error defining a successful recovery

_RHO_STREAM = 11
_OMEGA_STREAM = 13


@dataclass(frozen=True)
class ExperimentConfig:
    kind: str = "phase"
    n_values: tuple = (16,)
    r_values: tuple = (1,)
    basis_kinds: tuple = ("pauli",)
    modes: tuple = ("iid",)
    m_over_nr: tuple = (2.0, 4.0, 6.0, 8.0)
    m_values: tuple = ()  # explicit sizes override m_over_nr when set
    trials: int = 25
    master_seed: int = 0
    spectrum: str = "flat"  # "flat" | "random"
    eps_primal: float = 1e-7
    eps_dual: float = 1e-7
    penalty: float = 1.0
    max_iterations: int = 20000
    workers: int = 0
    out: str | None = None

    def solver_config(self) -> SolverConfig:
        return SolverConfig(max_iterations=self.max_iterations, penalty=self.penalty,
                            eps_primal=self.eps_primal, eps_dual=self.eps_dual)

    def cells(self) -> list[dict]:
        out = []
        for n in self.n_values:
            for r in self.r_values:
                for kind in self.basis_kinds:
                    for mode in self.modes:
                        ms = self.m_values or tuple(
                            int(round(g * n * r)) for g in self.m_over_nr)
                        for m in ms:
                            out.append({"n": int(n), "r": int(r), "basis": kind,
                                        "mode": mode, "m": int(m)})
        return out


_CONFIG_KEYS = {
    "experiment": ("kind", str),
    "n": ("n_values", int),
    "r": ("r_values", int),
    "basis": ("basis_kinds", str),
    "mode": ("modes", str),
    "m_over_nr": ("m_over_nr", float),
    "m": ("m_values", int),
    "trials": ("trials", int),
    "seed": ("master_seed", int),
    "spectrum": ("spectrum", str),
    "eps_primal": ("eps_primal", float),
    "eps_dual": ("eps_dual", float),
    "penalty": ("penalty", float),
    "max_iterations": ("max_iterations", int),
    "workers": ("workers", int),
    "out": ("out", str),
}

_LIST_FIELDS = {"n_values", "r_values", "basis_kinds", "modes", "m_over_nr", "m_values"}


def load_config(path: str) -> ExperimentConfig:
    """Parse a flat key=value config file; unknown keys are rejected."""
    cfg = ExperimentConfig()
    with open(path) as fh:
        for lineno, raw in enumerate(fh, 1):
            line = raw.strip()
            if not line or line.startswith("#"):
                continue
            if "=" not in line:
                raise InvalidInput(f"{path}:{lineno}: expected key=value")
            key, val = (s.strip() for s in line.split("=", 1))
            if key not in _CONFIG_KEYS:
                raise InvalidInput(f"{path}:{lineno}: unknown key {key!r}")
            attr, typ = _CONFIG_KEYS[key]
            if attr in _LIST_FIELDS:
                items = tuple(typ(tok.strip()) for tok in val.split(",") if tok.strip())
                cfg = replace(cfg, **{attr: items})
            else:
                cfg = replace(cfg, **{attr: typ(val)})
    return cfg


def make_basis(kind: str, n: int) -> OperatorBasis:
    if kind == "pauli":
        k = int(round(math.log2(n)))
        if 2**k != n:
            raise InvalidInput(f"pauli basis needs power-of-two n, got {n}")
        return pauli_basis(k)
    if kind == "hermitian-standard":
        return hermitian_standard_basis(n)
    raise InvalidInput(f"unknown basis kind {kind!r}")


def random_rho(n: int, r: int, rng: np.random.Generator,
               spectrum: str = "flat") -> np.ndarray:
    """Rank-r test matrix with Haar-random range and unit Frobenius norm."""
    g = rng.normal(size=(n, n)) + 1j * rng.normal(size=(n, n))
    q, _ = np.linalg.qr(g)
    U = q[:, :r]
    if spectrum == "flat":
        lam = np.full(r, 1.0)
    elif spectrum == "random":
        lam = rng.uniform(0.2, 1.0, size=r)
    else:
        raise InvalidInput(f"unknown spectrum option {spectrum!r}")
    lam = lam / np.linalg.norm(lam)
    return (U * lam) @ U.conj().T


@dataclass(frozen=True)
class TrialRow:
    cell: int
    trial: int
    n: int
    r: int
    basis: str
    mode: str
    m: int
    seed: int
    stream: str
    converged: bool
    iterations: int
    relative_error: float
    success: bool


@dataclass(frozen=True)
class CellResult:
    cell: int
    n: int
    r: int
    basis: str
    mode: str
    m: int
    trials: int
    successes: int
    mean_relative_error: float
    mean_iterations: float
    wall_time: float


def _phase_trial(args: tuple) -> TrialRow:
    (cell_idx, trial_idx, n, r, basis_kind, mode, m, seed,
     spectrum, eps_p, eps_d, penalty, max_iter) = args
    B = make_basis(basis_kind, n)
    rho = random_rho(n, r, stream_rng(seed, cell_idx, trial_idx, _RHO_STREAM), spectrum)
    omega = draw_omega(n, m, mode, seed=seed,
                       stream=(cell_idx, trial_idx, _OMEGA_STREAM))
    problem = RecoveryProblem.from_rho(B, omega, rho)
    cfg = SolverConfig(max_iterations=max_iter, penalty=penalty,
                       eps_primal=eps_p, eps_dual=eps_d)
    res = recover(problem, cfg, rho=rho)
    return TrialRow(cell=cell_idx, trial=trial_idx, n=n, r=r, basis=basis_kind,
                    mode=mode, m=m, seed=seed,
                    stream=f"({seed};{cell_idx};{trial_idx})",
                    converged=res.converged, iterations=res.iterations,
                    relative_error=float(res.relative_error),
                    success=res.relative_error <= SUCCESS_THRESHOLD)


def run_phase_diagram(cfg: ExperimentConfig) -> tuple[list[TrialRow], list[CellResult]]:
    """Run the recovery grid; one row per trial plus per-cell aggregates."""
    cells = cfg.cells()
    if not cells:
        raise InvalidInput("empty experiment grid")
    if cfg.trials < 1:
        raise InvalidInput("trials must be >= 1")
    tasks = []
    for ci, cell in enumerate(cells):
        for ti in range(cfg.trials):
            tasks.append((ci, ti, cell["n"], cell["r"], cell["basis"], cell["mode"],
                          cell["m"], cfg.master_seed, cfg.spectrum, cfg.eps_primal,
                          cfg.eps_dual, cfg.penalty, cfg.max_iterations))
    t0 = time.time()
    if cfg.workers and cfg.workers > 1:
        with ProcessPoolExecutor(max_workers=cfg.workers) as pool:
            rows = list(pool.map(_phase_trial, tasks, chunksize=4))
    else:
        rows = [_phase_trial(t) for t in tasks]
    rows.sort(key=lambda row: (row.cell, row.trial))
    wall = time.time() - t0

    results = []
    for ci, cell in enumerate(cells):
        sub = [row for row in rows if row.cell == ci]
        results.append(CellResult(
            cell=ci, n=cell["n"], r=cell["r"], basis=cell["basis"], mode=cell["mode"],
            m=cell["m"], trials=len(sub), successes=sum(row.success for row in sub),
            mean_relative_error=float(np.mean([row.relative_error for row in sub])),
            mean_iterations=float(np.mean([row.iterations for row in sub])),
            wall_time=wall / len(cells)))
    if cfg.out:
        write_phase_csv(rows, cfg.out, wall)
    return rows, results


def write_phase_csv(rows: list[TrialRow], path: str, wall: float | None = None) -> None:
    """Trial rows as CSV; only the comment header carries timing."""
    with open(path, "w") as fh:
        stamp = time.strftime("%Y-%m-%dT%H:%M:%S")
        extra = f" wall={wall:.1f}s" if wall is not None else ""
        fh.write(f"# schema: phase v1 generated={stamp}{extra}\n")
        fh.write("cell,trial,n,r,basis,mode,m,seed,stream,converged,"
                 "iterations,relative_error,success\n")
        for row in rows:
            fh.write(f"{row.cell},{row.trial},{row.n},{row.r},{row.basis},"
                     f"{row.mode},{row.m},{row.seed},\"{row.stream}\","
                     f"{int(row.converged)},{row.iterations},"
                     f"{row.relative_error:.12g},{int(row.success)}\n")


DEFAULT_BOUND_SWEEP = (
    # (kind, scenario without seed, t grid)
    ("adev", {"n": 16, "r": 1, "nu": 1.0, "kappa": 8.0}, (0.5, 1.0, 1.5)),
    ("adev", {"n": 16, "r": 1, "nu": 1.0, "kappa": 32.0}, (0.5, 1.0, 1.5)),
    ("adev", {"n": 16, "r": 1, "nu": 1.0, "kappa": 72.0}, (1.0, 1.5)),
    ("pbot-fourier", {"n": 16, "r": 1, "nu": 1.0, "kappa": 8.0}, (0.5, 1.0, 1.6)),
    ("pbot-fourier", {"n": 16, "r": 1, "nu": 1.0, "kappa": 32.0}, (0.5, 1.0, 1.6)),
    ("pbot-general", {"n": 16, "r": 1, "nu": 1.0, "kappa": 16.0}, (0.4, 0.8, 1.2)),
    ("mu-propagation", {"n": 16, "r": 1, "nu": 1.0, "kappa": 16.0}, (0.01, 0.03, 0.0625)),
    ("mu-propagation", {"n": 16, "r": 1, "nu": 1.0, "kappa": 96.0}, (0.03, 0.0625)),
    ("dimension-free", {"n": 16, "r": 1, "nu": 1.0, "kappa": 18.0}, (0.4, 0.5, 0.6)),
    ("op-bernstein", {"n": 16, "m": 200}, (1.0, 2.0, 4.0, 5.0)),
    ("op-bernstein", {"n": 16, "m": 200, "commuting": True}, (1.0, 2.0, 4.0)),
    ("op-bernstein-poisson", {"n": 16, "m": 50, "scale": 0.2, "activation": 0.04},
     (1.5, 2.5)),
    ("matrix-martingale", {"n": 16, "m": 200}, (1.0, 2.0, 4.0, 5.0)),
    ("vector-bernstein", {"d": 64, "m": 200}, (0.3, 0.6, 0.9)),
)


def run_bound_validation(trials: int = 500, master_seed: int = 0,
                         sweep=DEFAULT_BOUND_SWEEP, out: str | None = None) -> list:
    """Monte Carlo validation of every bound kind on its default grid."""
    reports = []
    point = 0
    for kind, base_scenario, t_grid in sweep:
        for t in t_grid:
            scenario = dict(base_scenario)
            scenario["t"] = float(t)
            rep = monte_carlo_tail(kind, scenario, trials=trials,
                                   seed=master_seed + point)
            reports.append((point, master_seed + point, rep))
            point += 1
    if out:
        write_bounds_csv(reports, out)
    return reports


def write_bounds_csv(reports: list, path: str) -> None:
    with open(path, "w") as fh:
        stamp = time.strftime("%Y-%m-%dT%H:%M:%S")
        fh.write(f"# schema: bounds v1 generated={stamp}\n")
        fh.write("point,seed,kind,params,t,analytic,empirical,trials,verdict\n")
        for point, seed, rep in reports:
            fh.write(f"{point},{seed},{report_to_csv_row(rep)}\n")


def csv_body(path: str) -> str:
    """File contents with comment lines stripped, for reproducibility checks."""
    with open(path) as fh:
        return "".join(line for line in fh if not line.startswith("#"))


def default_workers() -> int:
    return min(os.cpu_count() or 1, 8)


def replace_field(cfg: ExperimentConfig, **kw) -> ExperimentConfig:
    return replace(cfg, **kw)


def success_monotone_in_m(cells: list[CellResult], slack_sigma: float = 2.0) -> bool:
    """Success rate non-decreasing in m per (n, r, basis, mode), within noise.

    Consecutive rates may dip by at most slack_sigma times the binomial
    standard deviation of the rate difference.
    """
    groups: dict = {}
    for cell in cells:
        groups.setdefault((cell.n, cell.r, cell.basis, cell.mode), []).append(cell)
    for group in groups.values():
        group.sort(key=lambda cell: cell.m)
        for lo, hi in zip(group, group[1:]):
            p_lo = lo.successes / lo.trials
            p_hi = hi.successes / hi.trials
            var = (p_lo * (1 - p_lo) / lo.trials) + (p_hi * (1 - p_hi) / hi.trials)
            if p_hi < p_lo - slack_sigma * math.sqrt(var):
                return False
    return True
