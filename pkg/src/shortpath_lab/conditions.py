"""Spectral-condition verdicts for a concrete (instance, eta, b).

Three named conditions gate the algorithm's guarantees: the large-excited-
energy condition (non-degenerate ground state, all excited energies above
-1 + 1/n), the small-ground-energy-shift condition (-1 - 1/n^3 <= E_b <= -1),
and the short-path condition (deflated ground energy >= -1 + 1/n, which
implies the first). A tail-bound checker and a b-grid scan harness sit on top.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .cost import SpectrumTable
from .spectral import HbOperator, SpectralSummary, deflated_ground_energy, ground_state

# condition boundaries sit at spectral accuracy limits; verdicts within
# MARGINAL_BAND x tolerance of a boundary are flagged rather than trusted
MARGINAL_BAND = 10.0


@dataclass(frozen=True)
class ConditionVerdict:
    holds: bool
    margin: float
    marginal: bool
    tol: float


def _verdict(margin: float, tol: float, extra_ok: bool = True, inclusive: bool = False) -> ConditionVerdict:
    threshold = -tol if inclusive else tol
    return ConditionVerdict(
        holds=bool(extra_ok and margin > threshold),
        margin=float(margin),
        marginal=bool(abs(margin) <= MARGINAL_BAND * tol),
        tol=tol,
    )


def check_large_excited_energy(summary: SpectralSummary, tol: float | None = None) -> ConditionVerdict:
    """Non-degenerate ground state and first excited energy above -1 + 1/n."""
    tol = summary.tol if tol is None else tol
    margin = summary.e_excited - (-1.0 + 1.0 / summary.n)
    return _verdict(margin, tol, extra_ok=not summary.degenerate)


def check_small_ground_energy_shift(e_ground: float, n: int, tol: float = 1e-10) -> ConditionVerdict:
    """-1 - 1/n^3 <= E_b <= -1, boundary-inclusive up to the solver tolerance.

    The margin is the signed distance to the nearer boundary (positive inside
    the window).
    """
    lower = -1.0 - 1.0 / n**3
    margin = min(e_ground - lower, -1.0 - e_ground)
    return _verdict(margin, tol, inclusive=True)


def check_short_path(deflated_energy: float, n: int, tol: float = 1e-8,
                     large_excited: ConditionVerdict | None = None) -> ConditionVerdict:
    """Deflated ground energy (orthogonal to |+>) at least -1 + 1/n.

    When the large-excited-energy verdict for the same operator is supplied,
    the implication short-path => large-excited-energy is cross-checked.
    """
    margin = deflated_energy - (-1.0 + 1.0 / n)
    verdict = _verdict(margin, tol)
    if verdict.holds and large_excited is not None:
        if not large_excited.holds and not large_excited.marginal and not verdict.marginal:
            raise AssertionError(
                "short-path condition holds but large-excited-energy fails; "
                f"margins {verdict.margin:.3e} vs {large_excited.margin:.3e}"
            )
    return verdict


@dataclass(frozen=True)
class TailBoundVerdict:
    holds: bool
    count: int
    threshold: float
    gamma: float
    gamma_empirical: float


def check_tail_bound(table: SpectrumTable, eta: float, gamma: float) -> TailBoundVerdict:
    """C((1-eta) E*) <= 2^{(1-gamma) n}, plus the empirical gamma the count supports."""
    count = table.cumulative_states((1.0 - eta) * table.e_star)
    threshold = 2.0 ** ((1.0 - gamma) * table.n)
    gamma_emp = 1.0 - math.log2(count) / table.n if count > 0 else 1.0
    return TailBoundVerdict(
        holds=bool(count <= threshold),
        count=count,
        threshold=threshold,
        gamma=gamma,
        gamma_empirical=gamma_emp,
    )


def lemma_gamma_floor(n: int) -> float:
    """Smallest gamma for which the tail-bound lemma applies at size n."""
    return (1.0 + 4.0 * math.log2(n)) / n


@dataclass
class ConditionReport:
    """Everything decided about one (instance, eta, b) point."""

    n: int
    eta: float
    b: float
    e_ground: float
    e_excited: float
    large_excited_energy: ConditionVerdict
    small_ground_energy_shift: ConditionVerdict
    deflated_energy: float | None = None
    short_path: ConditionVerdict | None = None
    tail_bound: TailBoundVerdict | None = None
    b_critical_estimate: float | None = None
    tolerances: dict = field(default_factory=dict)

    @property
    def algorithm_guaranteed(self) -> bool:
        return self.large_excited_energy.holds and self.small_ground_energy_shift.holds


def evaluate_conditions(
    op: HbOperator,
    method: str = "auto",
    tol: float | None = None,
    include_short_path: bool = False,
    table: SpectrumTable | None = None,
    eta_gamma: tuple[float, float] | None = None,
    seed: int = 0,
) -> ConditionReport:
    """Solve one operator and decide Conditions 1-2 (optionally short-path, tail bound)."""
    summary = ground_state(op, method=method, tol=tol, seed=seed)
    large = check_large_excited_energy(summary)
    small = check_small_ground_energy_shift(summary.e_ground, op.n, tol=summary.tol)
    deflated = None
    short = None
    if include_short_path:
        deflated = deflated_ground_energy(op, method=method, tol=tol, seed=seed)
        short = check_short_path(deflated, op.n, tol=summary.tol, large_excited=large)
    tail = None
    if eta_gamma is not None and table is not None:
        tail = check_tail_bound(table, *eta_gamma)
    return ConditionReport(
        n=op.n,
        eta=op.eta,
        b=op.b,
        e_ground=summary.e_ground,
        e_excited=summary.e_excited,
        large_excited_energy=large,
        small_ground_energy_shift=small,
        deflated_energy=deflated,
        short_path=short,
        tail_bound=tail,
        tolerances={"solver": summary.tol, "marginal_band": MARGINAL_BAND * summary.tol},
    )


@dataclass
class BScanResult:
    b_critical: float
    reports: list[ConditionReport]
    monotone: bool


def scan_b_critical(
    values: np.ndarray,
    e_star: float,
    eta: float,
    b_grid,
    method: str = "auto",
    tol: float | None = None,
    refine_steps: int = 0,
    include_short_path: bool = False,
    seed: int = 0,
) -> BScanResult:
    """Largest grid b at which Conditions 1 and 2 both hold.

    b_critical here is operational (the conjunction the runtime theorem needs),
    not the physical transition point. Verdicts are expected but not assumed
    monotone along the grid; non-monotone patterns are reported via the
    `monotone` flag. Optional bisection refinement tightens the boundary
    between the largest passing and the next grid point.
    """
    from .transform import g_eta

    b_grid = sorted(float(b) for b in b_grid)
    if not b_grid:
        raise ValueError("empty b grid")
    g_base = g_eta(eta, values / abs(e_star))

    n = values.size.bit_length() - 1

    def report_at(b: float) -> ConditionReport:
        op = HbOperator(n=n, eta=eta, b=b, e_star=e_star,
                        diag=b * g_base, optimal_assignments=())
        return evaluate_conditions(op, method=method, tol=tol,
                                   include_short_path=include_short_path, seed=seed)

    reports = [report_at(b) for b in b_grid]
    passing = [r.b for r in reports if r.algorithm_guaranteed]
    flags = [r.algorithm_guaranteed for r in reports]
    monotone = all(flags[i] or not flags[i + 1] for i in range(len(flags) - 1))
    if not passing:
        return BScanResult(b_critical=0.0, reports=reports, monotone=monotone)
    b_crit = max(passing)
    if refine_steps > 0:
        later = [b for b in b_grid if b > b_crit]
        hi = later[0] if later else min(1.0, b_crit + (b_grid[-1] - b_grid[0] or 0.1))
        lo = b_crit
        for _ in range(refine_steps):
            mid = 0.5 * (lo + hi)
            rep = report_at(mid)
            reports.append(rep)
            if rep.algorithm_guaranteed:
                lo = mid
            else:
                hi = mid
        b_crit = lo
    return BScanResult(b_critical=b_crit, reports=reports, monotone=monotone)
