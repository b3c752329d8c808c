"""Closed-form overlap and runtime bounds, and super-Grover speedup constants.

The headline object is the constant c in a runtime of the form
poly(n) * 2^{(0.5 - c) n}. For a generic instance with subdepolarizing rate
alpha = a/n, c = b F(1 - eta) / (a eta ln 2); for the named problem families
the published constants pin a specific eta, whose bracketed prefactor is also
re-maximized here numerically for comparison.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .spectral import HbOperator, SpectralSummary, plus_overlaps_P_ell
from .transform import F, LN2, f_eta

E_CONST = math.e
AGSP_PREFACTOR = 1.0 / E_CONST - 2.0 / E_CONST**2  # ~0.0972, the universal Eq-floor constant

# eta values used in the published family constants (not the true maximizers
# of the brackets; see speedup_c docstring)
ETA_PUBLISHED_CSP = 0.189
ETA_PUBLISHED_KSPIN = 0.405


class BoundNotApplicableError(ValueError):
    pass


class PreconditionError(RuntimeError):
    pass


def maximize_unimodal(fn, lo: float, hi: float, tol: float = 1e-10, grid_guard: int = 100_000):
    """Golden-section maximizer with a dense-grid fallback against non-unimodality."""
    invphi = (math.sqrt(5.0) - 1.0) / 2.0
    a, b = lo, hi
    c = b - invphi * (b - a)
    d = a + invphi * (b - a)
    fc, fd = fn(c), fn(d)
    while b - a > tol:
        if fc >= fd:
            b, d, fd = d, c, fc
            c = b - invphi * (b - a)
            fc = fn(c)
        else:
            a, c, fc = c, d, fd
            d = a + invphi * (b - a)
            fd = fn(d)
    x = 0.5 * (a + b)
    fx = fn(x)
    grid = np.linspace(lo, hi, grid_guard)
    values = np.array([fn(g) for g in grid])
    gi = int(np.argmax(values))
    if values[gi] > fx + 1e-12 * max(1.0, abs(fx)):
        return float(grid[gi]), float(values[gi])
    return float(x), float(fx)


def agsp_lower_bound(b: float, alpha: float, eta: float, e_frac: float) -> float:
    """Lower bound on 2^{n/2} <+|P_ell|z> for a deep-valley assignment z.

    e_frac is H(z)/|E*|, required to satisfy e_frac <= -(1 - eta). Returns
    exp((b/alpha)(|e_frac|/eta) F((1-eta)/|e_frac|)) * (1/e - 2/e^2); the
    multiplier of 2^{-n/2}. Needs alpha < (1-b)/2 and b < 1.
    """
    mag = abs(e_frac)
    if e_frac > -(1.0 - eta) + 1e-12:
        raise BoundNotApplicableError(f"need H(z)/|E*| <= -(1-eta); got {e_frac} with eta={eta}")
    if mag > 1.0 + 1e-12:
        raise BoundNotApplicableError("H(z)/|E*| cannot exceed 1 in magnitude")
    if not 0.0 <= b < 1.0:
        raise BoundNotApplicableError(f"need 0 <= b < 1, got {b}")
    if not 0.0 < alpha < (1.0 - b) / 2.0:
        raise BoundNotApplicableError(f"need 0 < alpha < (1-b)/2 = {(1.0 - b) / 2.0}, got {alpha}")
    exponent = (b / alpha) * (mag / eta) * F((1.0 - eta) / mag)
    return math.exp(exponent) * AGSP_PREFACTOR


@dataclass(frozen=True)
class LemmaOverlapResult:
    holds: bool
    passed_ells: tuple[int, ...]
    lhs: float
    measured_by_ell: dict
    rhs_by_ell: dict
    slack_term: float
    z_index: int


def default_projector_degree(n: int) -> int:
    return math.ceil(3.5 * n * n)


def check_lemma_overlap_Pl(
    summary: SpectralSummary,
    op: HbOperator,
    mu: float = 2.0,
    ell_base: int | None = None,
    z_index: int | None = None,
    conditions=None,
) -> LemmaOverlapResult:
    """Verify <+|psi><psi|z> >= <+|P_ell|z> - 2^{-n/2} e^{-mu n} at ell in {L, L+1}.

    The inequality is guaranteed for at least one of the two consecutive
    degrees when Conditions 1-2 hold and L >= (mu + 1.5 ln 2) n^2; callers
    must pass the verified condition verdicts.
    """
    if conditions is None or not all(getattr(c, "holds", False) for c in conditions):
        raise PreconditionError("Conditions 1-2 must be verified before the overlap lemma applies")
    n = op.n
    L = default_projector_degree(n) if ell_base is None else ell_base
    if L < (mu + 1.5 * LN2) * n * n:
        raise ValueError(f"L = {L} is below the lemma floor (mu + 1.5 ln2) n^2 = {(mu + 1.5 * LN2) * n * n:.1f}")
    if z_index is None:
        z_index = op.optimal_assignments[0]
    overlaps = plus_overlaps_P_ell(op, summary.e_ground, [L, L + 1], z_index)
    lhs = summary.overlap_plus * float(summary.psi[z_index])
    slack = 2.0 ** (-n / 2.0) * math.exp(-mu * n)
    eps = 1e-14 * max(1.0, abs(lhs))
    passed = tuple(ell for ell, val in overlaps.items() if lhs >= val - slack - eps)
    return LemmaOverlapResult(
        holds=bool(passed),
        passed_ells=passed,
        lhs=lhs,
        measured_by_ell=dict(overlaps),
        rhs_by_ell={ell: val - slack for ell, val in overlaps.items()},
        slack_term=slack,
        z_index=z_index,
    )


@dataclass(frozen=True)
class WSigmaResult:
    product: float
    exp_lower_bound: float
    j0: int
    factors: tuple[float, ...]


def w_sigma_sum(b: float, alpha: float, eta: float, e_frac_mag: float) -> WSigmaResult:
    """Exact walk-weight sum over all operator strings, as a finite product.

    sum_sigma w(sigma) = prod_{j >= 0} (1 - b f(|E|(1-alpha)^j))^{-1}; factors
    with j >= j0 = ceil((ln(1-eta) - ln|E|)/ln(1-alpha)) are 1 because f
    vanishes at or below the flood level. Also returns the closed-form
    exponential lower bound exp(b|E| F((1-eta)/|E|) / (eta alpha)).
    """
    if not 0 < alpha < 1:
        raise ValueError("alpha must be in (0,1)")
    if b < 0:
        raise ValueError("b must be non-negative")
    mag = float(e_frac_mag)
    if mag <= 1.0 - eta:
        return WSigmaResult(product=1.0, exp_lower_bound=1.0, j0=0, factors=())
    j0 = math.ceil((math.log(1.0 - eta) - math.log(mag)) / math.log(1.0 - alpha))
    factors = []
    for j in range(j0):
        fj = f_eta(eta, mag * (1.0 - alpha) ** j)
        if b * fj >= 1.0:
            raise BoundNotApplicableError(f"geometric factor diverges: b*f = {b * fj} >= 1 at j={j}")
        factors.append(1.0 / (1.0 - b * fj))
    product = float(np.prod(factors)) if factors else 1.0
    exp_bound = math.exp(b * mag * F((1.0 - eta) / mag) / (eta * alpha))
    return WSigmaResult(product=product, exp_lower_bound=exp_bound, j0=j0, factors=tuple(factors))


def w_sigma_tail_correction(b: float, alpha: float, e_frac_mag: float, ell: int, sum_gamma: float) -> float:
    """Upper bound on the walk-weight mass outside the degree-ell expansion.

    Diagnostic only: b|E|(1-alpha)^{ell+1} (e^{2/alpha}/(1-alpha-b) + sum_gamma/alpha).
    """
    if 1.0 - alpha - b <= 0:
        raise BoundNotApplicableError("needs alpha + b < 1")
    decay = b * e_frac_mag * (1.0 - alpha) ** (ell + 1)
    return decay * (math.exp(2.0 / alpha) / (1.0 - alpha - b) + sum_gamma / alpha)


@dataclass(frozen=True)
class RuntimeBounds:
    sum_inverses: float
    eq_bound: float
    overlap_plus: float
    overlap_opt: float
    overlap_zstar_best: float


def runtime_estimate(summary: SpectralSummary) -> RuntimeBounds:
    """1/<+|psi> + 1/||Pi* psi|| and its product-form upper bound 2/(<+|psi><psi|z*>).

    Zero overlaps yield an infinite-runtime sentinel. The bound is checked
    against the quantity it dominates.
    """
    plus = summary.overlap_plus
    opt = summary.overlap_opt
    best_zstar = max(summary.overlap_zstar, default=0.0)
    quantity = (1.0 / plus if plus > 0 else math.inf) + (1.0 / opt if opt > 0 else math.inf)
    bound = 2.0 / (plus * best_zstar) if plus > 0 and best_zstar > 0 else math.inf
    if math.isfinite(bound) and math.isfinite(quantity) and bound < quantity * (1.0 - 1e-12):
        raise AssertionError(f"product bound {bound} fell below the quantity {quantity} it must dominate")
    return RuntimeBounds(
        sum_inverses=quantity,
        eq_bound=bound,
        overlap_plus=plus,
        overlap_opt=opt,
        overlap_zstar_best=best_zstar,
    )


@dataclass(frozen=True)
class SpeedupReport:
    """One speedup constant: c and the runtime exponent 0.5 - c, plus provenance."""

    family: str
    params: dict
    c: float
    runtime_exponent: float
    eta_used: float | None
    formula: str
    bracket_value: float | None = None
    eta_optimal: float | None = None
    c_optimal: float | None = None


def csp_bracket(eta: float) -> float:
    """(1-eta)^3 F(1-eta) / (2 ln2 (2+ln2) eta): the eta-dependent CSP prefactor."""
    return (1.0 - eta) ** 3 * F(1.0 - eta) / (2.0 * LN2 * (2.0 + LN2) * eta)


def kspin_bracket(eta: float) -> float:
    """(1-eta)^2 F(1-eta) / (64 pi ln2 (2+ln2) eta): the k-spin prefactor."""
    return (1.0 - eta) ** 2 * F(1.0 - eta) / (64.0 * math.pi * LN2 * (2.0 + LN2) * eta)


def speedup_c(family: str, **params) -> SpeedupReport:
    """Super-Grover constant c for a problem family.

    Families:
      generic        params b, eta, a      c = b F(1-eta) / (a eta ln2)
      qubo_dichotomy params gamma, eta, k  c = gamma eta / (4 (2+ln2) k)
      max_k_csp      params k, ratio[, eta]  c = (bracket(eta)/2) ratio^3 / (2^{3k} k^3)
      k_spin         params k[, eta]         c = bracket(eta) / k^3

    For the last two the default eta is the published choice (0.189 resp.
    0.405). Those published values are *not* the maximizers of the printed
    brackets; the true interior maximum (found by golden-section search with a
    grid guard) is reported alongside as (eta_optimal, c_optimal).
    """
    if family == "generic":
        b, eta, a = params["b"], params["eta"], params["a"]
        if not 0 < eta < 1:
            raise ValueError("eta must be in (0,1)")
        c = b * F(1.0 - eta) / (a * eta * LN2)
        return SpeedupReport(family=family, params=dict(params), c=c, runtime_exponent=0.5 - c,
                             eta_used=eta, formula="b F(1-eta)/(a eta ln2)")
    if family == "qubo_dichotomy":
        gamma, eta, k = params["gamma"], params["eta"], params.get("k", 2)
        c = gamma * eta / (4.0 * (2.0 + LN2) * k)
        return SpeedupReport(family=family, params=dict(params), c=c, runtime_exponent=0.5 - c,
                             eta_used=eta, formula="gamma eta/(4 (2+ln2) k)")
    if family == "max_k_csp":
        k, ratio = params["k"], params.get("ratio", 1.0)
        eta = params.get("eta", ETA_PUBLISHED_CSP)
        if not 0 < ratio <= 1:
            raise ValueError("ratio |E*|/m must be in (0, 1]")
        bracket = csp_bracket(eta)
        scale = ratio**3 / (8.0**k * k**3)
        c = 0.5 * bracket * scale  # the 1/2 pays for the variable-participation split
        eta_opt, bracket_opt = maximize_unimodal(csp_bracket, 1e-6, 1 - 1e-6)
        return SpeedupReport(family=family, params=dict(params), c=c, runtime_exponent=0.5 - c,
                             eta_used=eta, formula="(bracket/2) (|E*|/m)^3 / (2^{3k} k^3)",
                             bracket_value=bracket, eta_optimal=eta_opt,
                             c_optimal=0.5 * bracket_opt * scale)
    if family == "k_spin":
        k = params["k"]
        eta = params.get("eta", ETA_PUBLISHED_KSPIN)
        bracket = kspin_bracket(eta)
        c = bracket / k**3
        eta_opt, bracket_opt = maximize_unimodal(kspin_bracket, 1e-6, 1 - 1e-6)
        return SpeedupReport(family=family, params=dict(params), c=c, runtime_exponent=0.5 - c,
                             eta_used=eta, formula="bracket / k^3",
                             bracket_value=bracket, eta_optimal=eta_opt, c_optimal=bracket_opt / k**3)
    raise ValueError(f"unknown family {family!r}")


def j_nk_bound(n: int, k: int) -> float:
    """Upper bound on the expected optimal k-spin cost: -n / (sqrt(2 pi) k)."""
    if n < k or k < 1:
        raise ValueError("need n >= k >= 1")
    return -n / (math.sqrt(2.0 * math.pi) * k)


def j_n1_exact(n: int) -> float:
    """Expected optimal cost for k=1: every term is satisfiable, so -n E|N(0,1)|."""
    return -n * math.sqrt(2.0 / math.pi)


@dataclass
class LemmaSuiteRow:
    """Per-instance record of measured overlaps against every applicable bound."""

    k: int
    n: int
    instance_seed: int
    eta: float
    b: float
    cond_large_excited: bool
    cond_small_shift: bool
    overlap_plus: float
    overlap_zstar: float
    lemma_holds: bool
    lemma_passed_ells: tuple[int, ...]
    measured_plus_Pl_z: float
    runtime_quantity: float
    runtime_bound: float
    runtime_ok: bool
    agsp_applicable: bool
    agsp_bound: float | None = None
    agsp_ok: bool | None = None


def feasible_b_for_conditions(values: np.ndarray, e_star: float, eta: float, n: int,
                              b_grid=(0.3, 0.25, 0.2, 0.15, 0.1, 0.07, 0.05, 0.03, 0.02, 0.01, 0.005)) -> float | None:
    """Largest candidate b at which Conditions 1-2 verify (dense), or None.

    The variational certificate E_b <= -1 + b <+|G|+> prunes b values that
    cannot satisfy the small-shift window before any diagonalization runs.
    """
    from .conditions import check_large_excited_energy, check_small_ground_energy_shift
    from .spectral import build_hb, ground_state
    from .transform import g_eta

    g_mean = float(np.mean(g_eta(eta, values / abs(e_star))))
    ceiling = (1.0 / n**3) / abs(g_mean) if g_mean < 0 else math.inf
    for b in b_grid:
        if b > ceiling:
            continue
        op = build_hb(values, e_star, eta, b)
        summary = ground_state(op, method="dense")
        large = check_large_excited_energy(summary)
        small = check_small_ground_energy_shift(summary.e_ground, n, tol=summary.tol)
        if large.holds and small.holds:
            return b
    return None


def lemma_suite(specs, eta: float = 0.5, mu: float = 2.0, master_seed: int = 0) -> list[LemmaSuiteRow]:
    """Run the overlap-lemma battery on seeded homogeneous k-local instances.

    specs is a list of (k, n) pairs, one instance each, drawn from the
    Gaussian k-local ensemble (these are MAX-Ek-LIN2 instances). For each, the
    largest small b verifying Conditions 1-2 is selected, then three checks
    run: the projector-overlap lemma at ell in {L, L+1}, the exponential
    overlap floor where its preconditions (alpha < (1-b)/2, 3/alpha^2 <= ell
    < n^3) apply, and the product-form runtime bound.
    """
    from .conditions import check_large_excited_energy, check_small_ground_energy_shift
    from .cost import derive_seed, enumerate_spectrum, sample_k_spin, value_table
    from .spectral import build_hb, ground_state

    rows: list[LemmaSuiteRow] = []
    for idx, (k, n) in enumerate(specs):
        seed = derive_seed(master_seed, k, n, idx)
        cost = sample_k_spin(n, k, seed)
        table = enumerate_spectrum(cost)
        values = value_table(cost)
        b = feasible_b_for_conditions(values, table.e_star, eta, n)
        if b is None:
            raise RuntimeError(f"no feasible b found for (k={k}, n={n}, seed={seed})")
        op = build_hb(values, table.e_star, eta, b, table.optimal_assignments)
        summary = ground_state(op, method="dense")
        large = check_large_excited_energy(summary)
        small = check_small_ground_energy_shift(summary.e_ground, n, tol=summary.tol)
        lemma = check_lemma_overlap_Pl(summary, op, mu=mu, conditions=(large, small))
        L = default_projector_degree(n)
        measured = lemma.measured_by_ell[L]
        runtime = runtime_estimate(summary)
        alpha = 2.0 * k / n
        applicable = (
            0.0 < alpha < (1.0 - b) / 2.0
            and 3.0 / alpha**2 <= L
            and L + 1 < n**3
        )
        agsp_bound = agsp_ok = None
        if applicable:
            agsp_bound = agsp_lower_bound(b, alpha, eta, -1.0) * 2.0 ** (-n / 2.0)
            agsp_ok = bool(measured >= agsp_bound * (1.0 - 1e-12))
        rows.append(LemmaSuiteRow(
            k=k, n=n, instance_seed=seed, eta=eta, b=b,
            cond_large_excited=large.holds, cond_small_shift=small.holds,
            overlap_plus=summary.overlap_plus,
            overlap_zstar=max(summary.overlap_zstar, default=0.0),
            lemma_holds=lemma.holds, lemma_passed_ells=lemma.passed_ells,
            measured_plus_Pl_z=measured,
            runtime_quantity=runtime.sum_inverses, runtime_bound=runtime.eq_bound,
            runtime_ok=runtime.eq_bound >= runtime.sum_inverses * (1.0 - 1e-12),
            agsp_applicable=applicable, agsp_bound=agsp_bound, agsp_ok=agsp_ok,
        ))
    return rows


def table1_quantum_rows(ks=(3, 4, 5)) -> list[dict]:
    """Runtime exponents 0.5 - c for the concrete problem families.

    The SK row reports the k=2 formula value (~2.8e-5); the companion summary
    table in the literature quotes 2.7e-5 for the same quantity, a rounding
    discrepancy documented rather than matched.
    """
    rows = [
        {
            "problem": "3-CNF-SAT",
            "c": speedup_c("max_k_csp", k=3, ratio=1.0).c,
        },
        *(
            {"problem": f"{k}-CNF-SAT", "c": speedup_c("max_k_csp", k=k, ratio=1.0).c}
            for k in ks
            if k != 3
        ),
        {"problem": "SK model", "c": speedup_c("k_spin", k=2).c},
        *({"problem": f"{k}-spin", "c": speedup_c("k_spin", k=k).c} for k in ks),
    ]
    for row in rows:
        row["runtime_exponent"] = 0.5 - row["c"]
    return rows
