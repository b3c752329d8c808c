"""Idealized end-to-end simulation of the two-jump algorithm.

Jumps are simulated as exact projections onto the target low-energy space;
the amplitude-amplification error model enters only through the query-cost
formula, with the universal constant normalized to 1. Classical-diagonal
endpoints (the cost operator and the transverse field in its own basis)
contribute no oracle calls and need no gap parameter.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .conditions import check_large_excited_energy, check_small_ground_energy_shift
from .cost import CostFunction, CspCost, SpectrumTable, csp_integer_table, enumerate_spectrum, value_table
from .spectral import HbOperator, build_hb, ground_state, plus_state
from .transform import reparameterize_inverse


class JumpAssumptionError(RuntimeError):
    """The actual projection mass fell below the promised lower bound p."""


@dataclass
class Endpoint:
    """One side of a jump: an operator tag plus its cost-model parameters."""

    label: str
    kappa: float
    classical: bool = False
    gap: float | None = None  # irrelevant (and unused) when classical

    def __post_init__(self):
        if not self.classical and (self.gap is None or self.gap <= 0):
            raise ValueError(f"non-classical endpoint {self.label!r} needs a positive gap")


@dataclass
class JumpSpec:
    """Jump K1 -> K2 with target space given either by vectors or a diagonal threshold."""

    start: Endpoint
    end: Endpoint
    p: float                      # promised lower bound on ||Pi_2 psi_1||^2
    delta: float                  # target preparation error
    target_vectors: np.ndarray | None = None   # orthonormal columns spanning ran(Pi_2)
    target_diag: np.ndarray | None = None      # diagonal entries of K2 ...
    target_threshold: float | None = None      # ... kept where diag <= threshold

    def __post_init__(self):
        if not 0 < self.p <= 1:
            raise ValueError("p must be in (0, 1]")
        if not 0 < self.delta < 1:
            raise ValueError("delta must be in (0, 1)")
        has_vectors = self.target_vectors is not None
        has_diag = self.target_diag is not None and self.target_threshold is not None
        if has_vectors == has_diag:
            raise ValueError("specify exactly one of target_vectors or (target_diag, target_threshold)")

    def project(self, v: np.ndarray) -> np.ndarray:
        if self.target_vectors is not None:
            basis = self.target_vectors
            return basis @ (basis.T @ v)
        mask = self.target_diag <= self.target_threshold
        out = np.zeros_like(v)
        out[mask] = v[mask]
        return out


@dataclass
class JumpResult:
    state: np.ndarray
    success_prob: float
    query_cost: float
    amplification_rounds: int


def jump_query_cost(spec: JumpSpec) -> float:
    """Oracle-call count of the amplified jump, universal constant set to 1.

    Per non-classical endpoint: (kappa / (gap sqrt(p))) log(1/delta)
    log(p^{-1/2} delta^{-1} log(1/delta)); classical endpoints are free.
    """
    log_inv_delta = math.log(1.0 / spec.delta)
    inner = math.log(log_inv_delta / (math.sqrt(spec.p) * spec.delta))
    total = 0.0
    for side in (spec.start, spec.end):
        if not side.classical:
            total += side.kappa / (side.gap * math.sqrt(spec.p)) * log_inv_delta * inner
    return total


def simulate_jump(spec: JumpSpec, psi1: np.ndarray) -> JumpResult:
    """Exact projective transfer Pi_2 psi_1 / ||Pi_2 psi_1|| with its cost estimate."""
    norm = np.linalg.norm(psi1)
    if abs(norm - 1.0) > 1e-9:
        raise ValueError(f"input state must be normalized, got ||psi|| = {norm}")
    projected = spec.project(np.asarray(psi1, dtype=np.float64))
    mass = float(np.dot(projected, projected))
    if mass < spec.p:
        raise JumpAssumptionError(
            f"projection mass {mass:.3e} fell below the promised bound p = {spec.p:.3e}"
        )
    state = projected / math.sqrt(mass)
    rounds = 0 if mass >= 1.0 - 1e-12 else math.ceil(math.log(1.0 / spec.delta) / math.sqrt(spec.p))
    return JumpResult(state=state, success_prob=mass, query_cost=jump_query_cost(spec), amplification_rounds=rounds)


@dataclass
class AlgorithmRun:
    z_out: int
    value: float
    optimal: bool
    overlap_plus: float
    overlap_opt: float
    success_prob_step2: float
    success_prob_step3: float
    query_cost: float
    conditions_ok: bool
    warnings: list[str] = field(default_factory=list)
    details: dict = field(default_factory=dict)


def run_algorithm_1(
    cost: CostFunction,
    eta: float,
    b: float,
    seed: int = 0,
    e_star: float | None = None,
    method: str = "auto",
    tol: float | None = None,
    delta: float | None = None,
    table: SpectrumTable | None = None,
) -> AlgorithmRun:
    """Prepare |+>, jump to the ground state of H_b, jump to the optimum space, measure.

    Both jumps are exact projections; the measurement samples the squared
    amplitudes of the final state with a seeded generator. A failed
    large-excited-energy condition voids the runtime guarantee but execution
    continues with a warning. Supplying e_star, per the algorithm's contract,
    skips none of the exhaustive bookkeeping here since the idealized
    projections need the full table anyway.
    """
    if table is None:
        table = enumerate_spectrum(cost)
    values = value_table(cost)
    if e_star is None:
        e_star = table.e_star
    op = build_hb(values, e_star, eta, b, table.optimal_assignments)
    summary = ground_state(op, method=method, tol=tol, seed=seed)
    delta = 2.0 ** (-op.n) if delta is None else delta

    warnings_list: list[str] = []
    large = check_large_excited_energy(summary)
    small = check_small_ground_energy_shift(summary.e_ground, op.n, tol=summary.tol)
    if not large.holds:
        warnings_list.append(
            f"large-excited-energy condition failed (margin {large.margin:.3e}); guarantee void"
        )

    gap = max(summary.gap, 1e-300)
    # step 2: transverse field (classical in the Hadamard basis) -> H_b
    step2 = JumpSpec(
        start=Endpoint(label="-X/n", kappa=1.0, classical=True),
        end=Endpoint(label="H_b", kappa=1.0 + b, gap=gap),
        p=max(summary.overlap_plus**2 * 0.99, 1e-300),
        delta=delta,
        target_vectors=summary.psi.reshape(-1, 1),
    )
    jump2 = simulate_jump(step2, plus_state(op.n))

    # step 3: H_b -> H/|E*| (classical diagonal); keep exactly the optimum set
    mask_diag = np.ones(op.dim)
    mask_diag[list(table.optimal_assignments)] = -1.0
    step3 = JumpSpec(
        start=Endpoint(label="H_b", kappa=1.0 + b, gap=gap),
        end=Endpoint(label="H/|E*|", kappa=1.0, classical=True),
        p=max(summary.overlap_opt**2 * 0.99, 1e-300),
        delta=delta,
        target_diag=mask_diag,
        target_threshold=0.0,
    )
    jump3 = simulate_jump(step3, jump2.state)

    probs = jump3.state**2
    probs = probs / probs.sum()
    rng = np.random.Generator(np.random.Philox(np.random.SeedSequence(entropy=seed, spawn_key=(7,))))
    z_out = int(rng.choice(op.dim, p=probs))
    outcome = float(values[z_out])
    total_cost = jump2.query_cost + jump3.query_cost
    return AlgorithmRun(
        z_out=z_out,
        value=outcome,
        optimal=z_out in table.optimal_assignments,
        overlap_plus=summary.overlap_plus,
        overlap_opt=summary.overlap_opt,
        success_prob_step2=jump2.success_prob,
        success_prob_step3=jump3.success_prob,
        query_cost=total_cost,
        conditions_ok=large.holds and small.holds,
        warnings=warnings_list,
        details={
            "e_ground": summary.e_ground,
            "e_excited": summary.e_excited,
            "gap": summary.gap,
            "method": summary.method,
            "tol": summary.tol,
            "amplification_rounds": (jump2.amplification_rounds, jump3.amplification_rounds),
            "e_star_used": e_star,
        },
    )


@dataclass
class GridpointLog:
    theta: float
    phi: float
    eta_realized: float
    b_realized: float
    iterations: int
    estimate: float
    succeeded: bool


@dataclass
class EstarSearchResult:
    estimate: float
    exact: bool
    gridpoint_logs: list[GridpointLog]
    separation: float


def estimate_estar_binary_search(
    cost: CostFunction,
    q_lower: float,
    q_upper: float,
    seed: int = 0,
    grid_points: int = 5,
    separation: float | None = None,
    method: str = "auto",
    tol: float | None = None,
) -> EstarSearchResult:
    """Recover E* without being told it, via the (theta, phi) grid and binary search.

    Inputs promise q <= |E*| <= Q. Every gridpoint fixes the diagonal
    min(0, phi (H/Q + theta)), prepares that operator's ground state, and runs
    a binary search over thresholds U: measure, amplitude-amplify the event
    H(z) <= U, and observe whether it succeeds. The idealized amplified
    measurement is played by the exhaustive table. For rational-valued CSPs
    the estimate is rounded onto the known value grid, making it exact.
    """
    if not 0 < q_lower <= q_upper:
        raise ValueError("need 0 < q <= Q")
    values = value_table(cost)
    n = cost.n
    e_star_true = float(values.min())
    if separation is None:
        if isinstance(cost, CspCost):
            _, denom = csp_integer_table(cost)
            separation = 1.0 / denom
        else:
            distinct = np.unique(values)
            separation = float(np.min(np.diff(distinct))) if distinct.size > 1 else 1.0
    half = separation / 2.0

    rng = np.random.Generator(np.random.Philox(np.random.SeedSequence(entropy=seed, spawn_key=(11,))))
    thetas = np.linspace(0.0, 1.0, grid_points)
    phis = np.linspace(0.0, q_upper / q_lower, grid_points)
    logs: list[GridpointLog] = []
    candidates: list[float] = []
    for theta in thetas:
        for phi in phis:
            # (theta, phi) fully determine the diagonal; eta/b/e_star on the
            # operator are labels only in this reparameterized family
            diag = np.minimum(0.0, phi * (values / q_upper + theta))
            op = HbOperator(n=n, eta=0.5, b=max(phi, 1e-12), e_star=-q_upper, diag=diag)
            psi = ground_state(op, method=method, tol=tol, seed=seed).psi
            probs = psi**2
            probs /= probs.sum()
            lo, hi = -q_upper - separation, -q_lower
            iterations = 0
            ok = True
            if values[values <= hi].size == 0:
                ok = False  # promised q <= |E*| was wrong at this endpoint
            else:
                while hi - lo > half:
                    mid = 0.5 * (lo + hi)
                    success_mask = values <= mid
                    amplified = probs[success_mask]
                    if amplified.sum() > 0.0:
                        idx = np.flatnonzero(success_mask)
                        sample = int(rng.choice(idx, p=amplified / amplified.sum()))
                        hi = float(values[sample]) if values[sample] <= mid else mid
                    else:
                        lo = mid
                    iterations += 1
            estimate = hi
            if isinstance(cost, CspCost) and ok:
                estimate = round(estimate / separation) * separation
            eta_r, b_r = reparameterize_inverse(theta, phi, abs(e_star_true), q_upper)
            logs.append(GridpointLog(theta=float(theta), phi=float(phi), eta_realized=eta_r,
                                     b_realized=b_r, iterations=iterations,
                                     estimate=estimate, succeeded=ok))
            if ok:
                candidates.append(estimate)
    if not candidates:
        raise RuntimeError("every gridpoint failed; the promised bounds on |E*| look wrong")
    estimate = min(candidates)
    exact = isinstance(cost, CspCost) or abs(estimate - e_star_true) <= half
    return EstarSearchResult(estimate=estimate, exact=exact, gridpoint_logs=logs, separation=separation)


@dataclass
class BaselineResult:
    best_index: int
    best_value: float
    samples_used: int
    reached_target: bool


def classical_baseline(
    cost: CostFunction,
    eta: float,
    budget: int,
    seed: int = 0,
    e_star: float | None = None,
    values: np.ndarray | None = None,
) -> BaselineResult:
    """Uniform random guessing until H(z) <= (1 - eta) E* or the budget runs out."""
    if values is None:
        values = value_table(cost)
    if e_star is None:
        e_star = float(values.min())
    threshold = (1.0 - eta) * e_star
    rng = np.random.Generator(np.random.Philox(np.random.SeedSequence(entropy=seed, spawn_key=(13,))))
    best_idx = -1
    best_val = math.inf
    for step in range(1, budget + 1):
        z = int(rng.integers(0, values.size))
        v = float(values[z])
        if v < best_val:
            best_idx, best_val = z, v
        if v <= threshold:
            return BaselineResult(best_index=best_idx, best_value=best_val, samples_used=step, reached_target=True)
    return BaselineResult(best_index=best_idx, best_value=best_val, samples_used=budget, reached_target=False)
