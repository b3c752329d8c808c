import math

import numpy as np
import pytest

from shortpath_lab import bounds, conditions, cost, spectral, transform

from conftest import build_op


@pytest.fixture(scope="module")
def verified_n8():
    """Seeded SK instance with a small b at which Conditions 1-2 verify (dense)."""
    inst = cost.sample_k_spin(8, 2, seed=41)
    table = cost.enumerate_spectrum(inst)
    values = cost.value_table(inst)
    b = bounds.feasible_b_for_conditions(values, table.e_star, 0.5, 8)
    assert b is not None
    op = build_op(values, table, 0.5, b)
    summary = spectral.ground_state(op, method="dense")
    c1 = conditions.check_large_excited_energy(summary)
    c2 = conditions.check_small_ground_energy_shift(summary.e_ground, 8, tol=summary.tol)
    assert c1.holds and c2.holds
    return inst, table, values, op, summary, (c1, c2)


def test_agsp_prefactor_at_b0():
    value = bounds.agsp_lower_bound(0.0, 0.3, 0.5, -1.0)
    assert value == pytest.approx(math.exp(-1.0) - 2.0 * math.exp(-2.0), abs=1e-15)
    assert value == pytest.approx(0.0972, abs=1e-4)


def test_agsp_exponent_at_full_depth():
    b, alpha, eta = 0.2, 0.25, 0.4
    value = bounds.agsp_lower_bound(b, alpha, eta, -1.0)
    manual = math.exp((b / alpha) * transform.F(1.0 - eta) / eta) * (math.exp(-1) - 2 * math.exp(-2))
    assert value == pytest.approx(manual, rel=1e-14)


def test_agsp_preconditions():
    with pytest.raises(bounds.BoundNotApplicableError):
        bounds.agsp_lower_bound(0.2, 0.5, 0.5, -1.0)  # alpha >= (1-b)/2
    with pytest.raises(bounds.BoundNotApplicableError):
        bounds.agsp_lower_bound(0.2, 0.1, 0.5, -0.3)  # shallow z: above the flood level
    with pytest.raises(bounds.BoundNotApplicableError):
        bounds.agsp_lower_bound(1.0, 0.1, 0.5, -1.0)  # b = 1


def test_lemma_check_b0():
    inst = cost.sample_k_spin(8, 2, seed=42)
    table = cost.enumerate_spectrum(inst)
    values = cost.value_table(inst)
    op = build_op(values, table, 0.5, 0.0)
    summary = spectral.ground_state(op, method="dense")
    c1 = conditions.check_large_excited_energy(summary)
    c2 = conditions.check_small_ground_energy_shift(summary.e_ground, 8, tol=summary.tol)
    result = bounds.check_lemma_overlap_Pl(summary, op, conditions=(c1, c2))
    assert result.holds
    assert set(result.passed_ells) == {224, 225}  # both degrees pass at b=0
    assert result.lhs == pytest.approx(2.0 ** (-4), abs=1e-9)


def test_lemma_check_verified_instance(verified_n8):
    _, table, values, op, summary, verdicts = verified_n8
    result = bounds.check_lemma_overlap_Pl(summary, op, conditions=verdicts)
    assert result.holds, result
    # degree floor enforced
    with pytest.raises(ValueError):
        bounds.check_lemma_overlap_Pl(summary, op, ell_base=10, conditions=verdicts)


def test_lemma_check_nonoptimal_deep_z(verified_n8):
    _, table, values, op, summary, verdicts = verified_n8
    deep = np.flatnonzero(values <= (1.0 - op.eta) * table.e_star)
    non_optimal = [z for z in deep if z not in table.optimal_assignments]
    if not non_optimal:
        pytest.skip("instance has no non-optimal deep-valley assignment")
    result = bounds.check_lemma_overlap_Pl(summary, op, z_index=int(non_optimal[0]), conditions=verdicts)
    assert result.holds


def test_lemma_check_requires_conditions(verified_n8):
    _, _, _, op, summary, _ = verified_n8
    with pytest.raises(bounds.PreconditionError):
        bounds.check_lemma_overlap_Pl(summary, op, conditions=None)


def test_w_sigma_trivial_cases():
    assert bounds.w_sigma_sum(0.3, 0.2, 0.5, 0.4).product == 1.0   # |E| <= 1 - eta
    assert bounds.w_sigma_sum(0.0, 0.2, 0.5, 1.0).product == 1.0   # b = 0
    with pytest.raises(bounds.BoundNotApplicableError):
        bounds.w_sigma_sum(1.0, 0.2, 0.5, 1.0)  # b f(1) = 1 diverges


def test_w_sigma_product_dominates_exponential_bound():
    alpha = 0.25
    for b in np.linspace(0.05, 0.9, 8):
        for eta in np.linspace(0.1, 0.9, 8):
            for mag in np.linspace(0.05, 1.0, 8):
                if b * transform.f_eta(eta, mag) >= 1.0:
                    continue
                res = bounds.w_sigma_sum(float(b), alpha, float(eta), float(mag))
                assert res.product >= res.exp_lower_bound * (1.0 - 1e-12)


def test_w_sigma_tail_correction_sign():
    res = bounds.w_sigma_sum(0.2, 0.25, 0.5, 1.0)
    tail = bounds.w_sigma_tail_correction(0.2, 0.25, 1.0, 200, res.product)
    assert tail >= 0.0
    assert tail < 1e-20  # decays like (1-alpha)^ell


def test_runtime_estimate_b0():
    n = 8
    inst = cost.sample_k_spin(n, 3, seed=43)
    table = cost.enumerate_spectrum(inst)
    values = cost.value_table(inst)
    op = build_op(values, table, 0.5, 0.0)
    summary = spectral.ground_state(op, method="dense")
    estimate = bounds.runtime_estimate(summary)
    n_opt = len(table.optimal_assignments)
    assert estimate.sum_inverses == pytest.approx(1.0 + 2.0 ** (n / 2.0) / math.sqrt(n_opt), rel=1e-8)
    if n_opt == 1:
        assert estimate.eq_bound == pytest.approx(2.0 ** (n / 2.0 + 1.0), rel=1e-8)
    assert estimate.eq_bound >= estimate.sum_inverses


def test_runtime_bound_dominates_on_seeded_instances():
    for seed in range(5):
        inst = cost.sample_k_spin(8, 2, seed=100 + seed)
        table = cost.enumerate_spectrum(inst)
        values = cost.value_table(inst)
        for b in (0.1, 0.4):
            summary = spectral.ground_state(build_op(values, table, 0.5, b), method="dense")
            estimate = bounds.runtime_estimate(summary)
            assert estimate.eq_bound >= estimate.sum_inverses


def test_speedup_constants_match_quotes():
    csp = bounds.speedup_c("max_k_csp", k=3, ratio=1.0)
    assert abs(csp.c - 5.22e-7) <= 1e-9                      # one ulp of the quote
    assert abs(csp.bracket_value - 0.0145) <= 1e-4
    assert abs(csp.params.get("eta", csp.eta_used) - 0.189) < 1e-12
    kspin = bounds.speedup_c("k_spin", k=3)
    assert abs(kspin.bracket_value - 2.24e-4) <= 1e-6
    assert kspin.eta_used == pytest.approx(0.405)
    assert kspin.c == pytest.approx(kspin.bracket_value / 27, rel=1e-14)


def test_published_eta_is_not_the_bracket_maximum():
    # documented discrepancy: the printed brackets peak elsewhere
    csp = bounds.speedup_c("max_k_csp", k=3, ratio=1.0)
    assert csp.c_optimal > csp.c
    assert abs(csp.eta_optimal - 0.270) < 5e-3
    kspin = bounds.speedup_c("k_spin", k=2)
    assert kspin.c_optimal > kspin.c
    assert abs(kspin.eta_optimal - 0.368) < 5e-3


def test_generic_family_consistency():
    report = bounds.speedup_c("generic", b=0.2, eta=0.4, a=6.0)
    manual = 0.2 * transform.F(0.6) / (6.0 * 0.4 * math.log(2.0))
    assert report.c == pytest.approx(manual, abs=1e-15)
    assert report.runtime_exponent == 0.5 - report.c


def test_max_k_csp_composes_from_parameter_formulas():
    # dual route: the family constant equals b_max(gamma) F(1-eta)/(a eta ln2)/2
    # with gamma and alpha from the closed-form calculators
    for k, eta, ratio in [(3, 0.189, 1.0), (2, 0.3, 0.8), (4, 0.25, 0.5)]:
        n = 1000.0
        gamma = transform.gamma_csp(k, ratio, eta)
        b = transform.b_max(gamma)
        a = (1.0 / ratio) * k * 2.0**k / (1.0 - eta)  # alpha n
        via_theorem = bounds.speedup_c("generic", b=b, eta=eta, a=a).c / 2.0
        direct = bounds.speedup_c("max_k_csp", k=k, ratio=ratio, eta=eta).c
        assert via_theorem == pytest.approx(direct, rel=1e-12)


def test_qubo_dichotomy_constant():
    report = bounds.speedup_c("qubo_dichotomy", gamma=0.4, eta=0.3, k=2)
    assert report.c == pytest.approx(0.4 * 0.3 / (4.0 * (2.0 + math.log(2.0)) * 2.0), rel=1e-14)
    assert report.c == pytest.approx(0.0928 * 0.4 * 0.3 / 2.0, rel=1e-3)


def test_j_bounds():
    assert bounds.j_n1_exact(10) == pytest.approx(-10.0 * math.sqrt(2.0 / math.pi), rel=1e-15)
    assert bounds.j_nk_bound(10, 1) > bounds.j_n1_exact(10)  # bound is weaker
    assert bounds.j_nk_bound(24, 2) == pytest.approx(2.0 * bounds.j_nk_bound(12, 2), rel=1e-15)


@pytest.mark.slow
def test_j_bound_against_monte_carlo():
    n, k, seeds = 12, 2, 200
    means = []
    for seed in range(seeds):
        table = cost.enumerate_spectrum(cost.sample_k_spin(n, k, seed=seed))
        means.append(table.e_star)
    assert np.mean(means) <= bounds.j_nk_bound(n, k)


def test_table1_rows():
    rows = bounds.table1_quantum_rows(ks=(3, 4))
    problems = [r["problem"] for r in rows]
    assert "3-CNF-SAT" in problems and "SK model" in problems
    for row in rows:
        assert 0.0 < row["c"] < 0.5
        assert row["runtime_exponent"] == 0.5 - row["c"]
    sk = next(r for r in rows if r["problem"] == "SK model")
    assert sk["c"] == pytest.approx(2.8e-5, rel=0.01)  # formula value, not the rounded 2.7e-5


def test_maximize_unimodal_parabola():
    # location accuracy is limited to ~sqrt(eps) because f is flat at the top
    x, fx = bounds.maximize_unimodal(lambda t: -(t - 0.3) ** 2 + 2.0, 0.0, 1.0)
    assert abs(x - 0.3) < 1e-6
    assert abs(fx - 2.0) < 1e-12


def test_lemma_suite_smoke():
    rows = bounds.lemma_suite([(2, 6), (2, 8)], eta=0.5, master_seed=3)
    assert len(rows) == 2
    for row in rows:
        assert row.cond_large_excited and row.cond_small_shift
        assert row.lemma_holds
        assert row.runtime_ok
        if row.agsp_applicable:
            assert row.agsp_ok
