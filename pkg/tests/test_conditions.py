import pytest

from shortpath_lab import conditions, cost, spectral, transform

from conftest import build_op


@pytest.fixture(scope="module")
def sk10():
    inst = cost.sample_k_spin(10, 2, seed=31)
    table = cost.enumerate_spectrum(inst)
    values = cost.value_table(inst)
    return inst, table, values


def test_b0_conditions_hold(sk10):
    _, table, values = sk10
    op = build_op(values, table, 0.5, 0.0)
    report = conditions.evaluate_conditions(op, method="dense", include_short_path=True)
    assert report.large_excited_energy.holds
    assert report.small_ground_energy_shift.holds
    assert report.short_path.holds
    assert abs(report.large_excited_energy.margin - 1.0 / 10) < 1e-9  # E1 = -1 + 2/n
    assert abs(report.short_path.margin - 1.0 / 10) < 1e-9


def test_large_b_surrogate_fails_condition1(sk10):
    _, table, values = sk10
    op = build_op(values, table, 0.5, 1000.0)
    summary = spectral.ground_state(op, method="dense")
    verdict = conditions.check_large_excited_energy(summary)
    assert not verdict.holds
    assert summary.e_excited < -1.0  # excited level tracks the diagonal, far below -1


def test_small_shift_window_boundaries():
    n = 10
    assert conditions.check_small_ground_energy_shift(-1.0, n).holds
    assert conditions.check_small_ground_energy_shift(-1.0 - 1.0 / n**3, n).holds  # inclusive
    assert not conditions.check_small_ground_energy_shift(-1.0 - 2.0 / n**3, n).holds
    assert not conditions.check_small_ground_energy_shift(-0.9, n).holds
    marginal = conditions.check_small_ground_energy_shift(-1.0 - 1.0 / n**3 - 5e-10, n, tol=1e-10)
    assert marginal.marginal


def test_tail_bound_two_variable_cases():
    table = cost.enumerate_spectrum(cost.PolyCost(n=2, terms=(((0, 1), 1.0),)))
    # eta=0: C(E*) = 2 <= 2^{2(1-gamma)} iff gamma <= 1/2
    assert conditions.check_tail_bound(table, 0.0, 0.5).holds
    assert not conditions.check_tail_bound(table, 0.0, 0.51).holds
    # eta -> 1: threshold approaches C(0) <= 2^n, trivially true at gamma 0
    assert conditions.check_tail_bound(table, 0.999999, 0.0).holds


def test_tail_bound_empirical_gamma_n20():
    inst = cost.sample_k_spin(20, 3, seed=2020)
    table = cost.enumerate_spectrum(inst)
    verdict = conditions.check_tail_bound(table, 0.5, 0.1)
    assert 0.0 < verdict.gamma_empirical < 1.0
    assert verdict.count == table.cumulative_states(0.5 * table.e_star)
    # the reported empirical gamma is exactly the largest passing gamma
    assert conditions.check_tail_bound(table, 0.5, verdict.gamma_empirical).holds
    assert not conditions.check_tail_bound(table, 0.5, verdict.gamma_empirical + 1e-6).holds


def test_short_path_implies_condition1_cross_check(sk10):
    _, table, values = sk10
    for b in (0.0, 0.05, 0.15):
        op = build_op(values, table, 0.5, b)
        # raises AssertionError internally if the implication ever fails
        report = conditions.evaluate_conditions(op, method="dense", include_short_path=True)
        if report.short_path.holds:
            assert report.large_excited_energy.holds


def test_deflated_above_ground(sk10):
    _, table, values = sk10
    for b in (0.0, 0.2, 0.6):
        op = build_op(values, table, 0.5, b)
        summary = spectral.ground_state(op, method="dense")
        deflated = spectral.deflated_ground_energy(op, method="dense")
        assert deflated >= summary.e_ground - 1e-12


def test_scan_single_zero_grid(sk10):
    _, table, values = sk10
    scan = conditions.scan_b_critical(values, table.e_star, 0.5, [0.0], method="dense")
    assert scan.b_critical == 0.0
    assert scan.reports[0].algorithm_guaranteed


def test_scan_finds_largest_passing_b(sk10):
    _, table, values = sk10
    grid = [0.0, 0.02, 0.05, 0.1, 0.3, 0.7]
    scan = conditions.scan_b_critical(values, table.e_star, 0.5, grid, method="dense")
    passing = [r.b for r in scan.reports if r.algorithm_guaranteed]
    assert scan.b_critical == max(passing)
    assert scan.b_critical < 0.7  # condition 2 cannot survive b=0.7 at n=10


def test_scan_refinement_tightens(sk10):
    _, table, values = sk10
    coarse = conditions.scan_b_critical(values, table.e_star, 0.5, [0.0, 0.02, 0.04], method="dense")
    refined = conditions.scan_b_critical(values, table.e_star, 0.5, [0.0, 0.02, 0.04],
                                         method="dense", refine_steps=4)
    assert refined.b_critical >= coarse.b_critical


@pytest.mark.slow
def test_tail_bound_lemma_implication_chain():
    # Engineered landscape with a single deep optimum: C(0.99 E*) = 1, so the
    # tail bound holds at gamma = 1 and the lemma guard (1+4 log2 n)/n <= 1 is
    # met at n = 18. Conditions 1-2 must then hold for every b <= b_max(1),
    # and the scanned critical b must reach b_max.
    n = 18
    inst = cost.PolyCost(n=n, terms=tuple(((i,), -1.0) for i in range(n)))
    table = cost.enumerate_spectrum(inst)
    values = cost.value_table(inst)
    eta = 0.01
    verdict = conditions.check_tail_bound(table, eta, 1.0)
    assert verdict.holds and verdict.count == 1
    assert 1.0 >= conditions.lemma_gamma_floor(n)
    cap = transform.b_max(1.0)
    grid = [0.0, 0.1, 0.2, 0.25, cap]
    scan = conditions.scan_b_critical(values, table.e_star, eta, grid, method="lanczos", tol=1e-9)
    for report in scan.reports:
        assert report.algorithm_guaranteed, f"conditions failed at b={report.b}"
    assert scan.b_critical >= cap - 1e-12
