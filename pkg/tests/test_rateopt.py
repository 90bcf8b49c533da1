"""Rate optimizers against the brute-force grid oracle.

The gradient is checked against central finite differences of the
service MGF it claims to differentiate; the analytic optimizers are
checked against grid_argmax_rate, which knows nothing about either.
"""

import math
from dataclasses import replace

import pytest

from conftest import miso_cfg_for_kappa
from irsec.channel import LinkConfig, miso_snr_dist, siso_snr_dist
from irsec.eccore import LN2, on_off_probs
from irsec.rateopt import (
    DescentSettings,
    NonConvergenceError,
    RateSolution,
    grid_argmax_rate,
    optimize_rate_miso_closed,
    optimize_rate_siso,
    siso_ec_gradient,
    solve_rate_miso_exact,
)

CRIT = DescentSettings(r0=1.0, step=0.5, conv_tol=1e-3)


def test_descent_settings_resolve_off_bandwidth():
    assert DescentSettings().resolved(2.0) == (2.0, 0.1, 2e-8)
    assert DescentSettings(r0=0.3, step=0.01, conv_tol=1e-4).resolved(5.0) == (0.3, 0.01, 1e-4)


def test_descent_settings_validation():
    with pytest.raises(ValueError):
        DescentSettings(step=0.0)
    with pytest.raises(ValueError):
        DescentSettings(conv_tol=-1e-3)
    with pytest.raises(ValueError):
        DescentSettings(max_iters=0)


def test_rate_solution_validation():
    with pytest.raises(ValueError):
        RateSolution(r_star=-1.0, ec_at_r_star=0.0, iterations=1, method="grid")
    with pytest.raises(ValueError):
        RateSolution(r_star=1.0, ec_at_r_star=-0.1, iterations=1, method="grid")
    with pytest.raises(ValueError):
        RateSolution(r_star=1.0, ec_at_r_star=0.1, iterations=1, method="newton")


def _service_mgf(cfg, alpha, rate):
    p_on, p_off = on_off_probs(siso_snr_dist(cfg), rate, cfg.bandwidth)
    return p_off + p_on * math.exp(-alpha * rate * cfg.slot)


@pytest.mark.parametrize("alpha,rate", [(0.1, 1.0), (10.0, 0.5), (1.0, 1.35)])
def test_gradient_matches_finite_difference(cfg_siso, alpha, rate):
    h = 1e-6 * rate
    fd = (_service_mgf(cfg_siso, alpha, rate + h)
          - _service_mgf(cfg_siso, alpha, rate - h)) / (2.0 * h)
    assert siso_ec_gradient(cfg_siso, alpha, rate) == pytest.approx(fd, rel=1e-6)


def test_gradient_straddles_optimum(cfg_siso):
    # the MGF is decreasing below the optimal rate and increasing above
    assert siso_ec_gradient(cfg_siso, 0.1, 1.0) < 0.0
    assert siso_ec_gradient(cfg_siso, 0.1, 1.6) > 0.0


def test_gradient_tail_and_domain(cfg_siso):
    assert siso_ec_gradient(cfg_siso, 0.1, 50.0) == 0.0
    assert siso_ec_gradient(cfg_siso, 0.1, 2000.0) == 0.0
    with pytest.raises(ValueError):
        siso_ec_gradient(cfg_siso, 0.1, 0.0)


def test_descent_reference_budget(cfg_siso):
    sol = optimize_rate_siso(cfg_siso, 0.1, CRIT)
    oracle = grid_argmax_rate(cfg_siso, 0.1, "siso_nocsi", 2.5, 1000)
    assert sol.method == "gradient_descent"
    assert sol.r_star == pytest.approx(oracle.r_star, abs=5e-3)
    assert sol.ec_at_r_star == pytest.approx(oracle.ec_at_r_star, abs=1e-2)
    assert oracle.ec_at_r_star == pytest.approx(1.2075111288102630, rel=1e-8)
    assert oracle.r_star == pytest.approx(1.2782898, abs=2e-3)
    # first-order stationarity at the step size's resolution
    assert abs(siso_ec_gradient(cfg_siso, 0.1, sol.r_star)) < 1e-2


def test_descent_tight_qos_needs_fine_step(cfg_siso):
    """step = 0.5B oscillates at alpha = 10; a 10x finer step with a
    tighter stop lands on the grid optimum."""
    coarse = optimize_rate_siso(cfg_siso, 10.0, CRIT)
    fine = optimize_rate_siso(
        cfg_siso, 10.0, DescentSettings(r0=1.0, step=0.05, conv_tol=1e-6))
    oracle = grid_argmax_rate(cfg_siso, 10.0, "siso_nocsi", 2.5, 1000)
    assert oracle.ec_at_r_star == pytest.approx(0.8857591471710352, rel=1e-7)
    assert fine.r_star == pytest.approx(oracle.r_star, abs=1e-2)
    assert fine.ec_at_r_star == pytest.approx(oracle.ec_at_r_star, rel=1e-4)
    assert fine.ec_at_r_star > coarse.ec_at_r_star


def test_descent_plateau_needs_multi_start(cfg_siso_16):
    """With 16 elements the MGF is flat at the default r0 = B (the on
    probability has underflowed), so single-start descent reports the
    start point with zero EC; restarting from smaller rates recovers
    the true optimum."""
    stuck = optimize_rate_siso(cfg_siso_16, 0.1)
    assert stuck.r_star == pytest.approx(1.0, abs=1e-6)
    assert stuck.ec_at_r_star == pytest.approx(0.0, abs=1e-15)

    fine = DescentSettings(r0=0.02, step=0.05, conv_tol=1e-8)
    best = max(
        (optimize_rate_siso(cfg_siso_16, 0.1, replace(fine, r0=r0))
         for r0 in (0.02, 0.1, 0.5, 1.0)),
        key=lambda s: s.ec_at_r_star)
    oracle = grid_argmax_rate(cfg_siso_16, 0.1, "siso_nocsi", 0.3, 1000)
    assert best.r_star == pytest.approx(oracle.r_star, abs=1e-4)
    assert best.ec_at_r_star == pytest.approx(oracle.ec_at_r_star, rel=1e-8)
    assert oracle.ec_at_r_star == pytest.approx(0.03835292574957367, rel=1e-8)


def test_descent_nonconvergence_carries_last_rate(cfg_siso):
    with pytest.raises(NonConvergenceError) as exc:
        optimize_rate_siso(cfg_siso, 0.1, replace(CRIT, max_iters=3))
    assert exc.value.last_rate > 0.0


def test_grid_validation(cfg_siso):
    with pytest.raises(ValueError):
        grid_argmax_rate(cfg_siso, 0.1, "siso_nocsi", 2.0, points=2)
    with pytest.raises(ValueError):
        grid_argmax_rate(cfg_siso, 0.1, "siso_nocsi", 0.0)
    with pytest.raises(ValueError):
        grid_argmax_rate(cfg_siso, 0.1, "siso_csi", 2.0)


def test_grid_flat_budget_returns_smallest_rate(cfg_siso):
    dead = replace(cfg_siso, p_t=1e-300)
    sol = grid_argmax_rate(dead, 0.1, "siso_nocsi", 2.0, points=10)
    assert sol.r_star == pytest.approx(0.2, rel=1e-12)
    assert sol.ec_at_r_star == 0.0


def test_grid_optimum_decreases_with_qos(cfg_siso):
    ecs = [grid_argmax_rate(cfg_siso, a, "siso_nocsi", 2.5, 1000).ec_at_r_star
           for a in (0.1, 10.0, 100.0)]
    assert ecs[0] > ecs[1] > ecs[2] > 0.0


def test_miso_root_reference_points():
    """Frozen roots at rates 0.5 and 0.005; the configured link's
    fitted rate sits ~0.4% off the nominal one, hence the 2% band."""
    mk = miso_cfg_for_kappa(0.5)
    lo = solve_rate_miso_exact(mk, 0.1)
    assert lo.method == "root_find"
    assert lo.r_star == pytest.approx(1.19048707671, rel=0.02)
    assert lo.ec_at_r_star == pytest.approx(0.6093217078, rel=0.02)
    hi = solve_rate_miso_exact(mk, 10.0)
    assert hi.r_star == pytest.approx(0.318386428868, rel=0.02)
    assert hi.ec_at_r_star == pytest.approx(0.1878864752, rel=0.02)
    assert lo.r_star > hi.r_star

    wide = solve_rate_miso_exact(miso_cfg_for_kappa(0.005), 0.1)
    assert wide.r_star == pytest.approx(5.349998487, rel=0.02)
    assert wide.ec_at_r_star == pytest.approx(4.14892246, rel=0.02)


def test_miso_root_satisfies_stationarity():
    mk = miso_cfg_for_kappa(0.5)
    kappa = miso_snr_dist(mk).kappa
    for alpha in (0.1, 1.0, 10.0):
        r = solve_rate_miso_exact(mk, alpha).r_star
        lhs = LN2 * r + math.log(math.expm1(alpha * r))
        rhs = math.log(alpha / (kappa * LN2))
        assert lhs == pytest.approx(rhs, abs=1e-9)


def test_miso_root_is_local_max():
    mk = miso_cfg_for_kappa(0.5)
    from irsec.eccore import ec_miso_nocsi

    sol = solve_rate_miso_exact(mk, 0.1)
    for dr in (-0.05, 0.05):
        worse = ec_miso_nocsi(mk, 0.1, sol.r_star + dr).ec_bits_per_slot
        assert worse < sol.ec_at_r_star


def test_miso_root_matches_grid():
    mk = miso_cfg_for_kappa(0.5)
    root = solve_rate_miso_exact(mk, 0.1)
    grid = grid_argmax_rate(mk, 0.1, "miso_nocsi", 2.5, 1000)
    assert abs(root.r_star - grid.r_star) <= 2.5 / 1000
    assert root.ec_at_r_star == pytest.approx(grid.ec_at_r_star, rel=1e-9)


def test_miso_root_small_alpha_hits_ergodic_argmax():
    # alpha -> 0 turns the problem into maximizing p_on * rate
    mk = miso_cfg_for_kappa(0.5)
    root = solve_rate_miso_exact(mk, 1e-6)
    grid = grid_argmax_rate(mk, 1e-6, "miso_nocsi", 4.0, 4000)
    assert abs(root.r_star - grid.r_star) <= 4.0 / 4000
    assert root.r_star == pytest.approx(1.2274, abs=2e-3)


def test_miso_closed_form_inside_regime():
    mk = miso_cfg_for_kappa(0.5)
    closed = optimize_rate_miso_closed(mk, 10.0)
    root = solve_rate_miso_exact(mk, 10.0)
    assert closed.method == "closed_form"
    assert closed.closed_form_valid
    assert closed.iterations == 0
    assert abs(closed.r_star - root.r_star) / root.r_star <= 0.20
    assert closed.ec_at_r_star == pytest.approx(root.ec_at_r_star, rel=1e-3)


def test_miso_closed_form_clamps_outside_regime():
    # small alpha*B*T/kappa makes the linearized root negative
    mk = miso_cfg_for_kappa(0.5)
    with pytest.warns(UserWarning, match="validity"):
        closed = optimize_rate_miso_closed(mk, 0.1)
    assert closed.r_star == 0.0
    assert not closed.closed_form_valid
    assert closed.ec_at_r_star == 0.0
