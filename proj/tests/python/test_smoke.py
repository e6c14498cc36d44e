import math

import numpy as np
import pytest

import seqrd


def test_symmetric_channel_builder():
    spec = seqrd.build_symmetric_channel()
    assert spec.horizon == 30
    np.testing.assert_allclose(spec.cost, 1.0 - np.eye(2))
    np.testing.assert_allclose(spec.obs, [[0.8, 0.2], [0.2, 0.8]])


def test_model_round_trip(tmp_path):
    spec = seqrd.build_kelly()
    path = tmp_path / "kelly.json"
    seqrd.save_model(spec, str(path))
    back = seqrd.load_model(str(path))
    assert back.num_world == 27
    assert np.array_equal(back.trans, spec.trans)
    assert np.array_equal(back.cost, spec.cost)


def test_validate_rejects_bad_row():
    spec = seqrd.build_symmetric_channel()
    trans = spec.trans.copy()
    trans[1, 1] = 0.7
    spec.trans = trans
    with pytest.raises(Exception, match="row not stochastic"):
        seqrd.validate(spec)


def test_last_step_copies_observation_when_cheap():
    spec = seqrd.build_symmetric_channel()
    theta = seqrd.initial_belief(spec)
    sol = seqrd.solve_last_step(theta, spec, seqrd.Multipliers(gamma_c=1e-3))
    assert sol.converged
    assert sol.report.distortion == pytest.approx(0.2, abs=1e-3)
    for m in range(2):
        for o in range(2):
            assert sol.policy(m, o, o) > 0.99


def test_plan_entropy_dominated_limit():
    spec = seqrd.build_symmetric_channel()
    traj = seqrd.plan(spec, seqrd.Multipliers(1e6, 1e6, 1e6))
    assert traj.converged
    assert traj.distortion == pytest.approx(0.5, abs=1e-3)
    assert len(traj.policies) == 30


def test_plan_rejects_zero_multipliers():
    spec = seqrd.build_symmetric_channel()
    with pytest.raises(ValueError):
        seqrd.plan(spec, seqrd.Multipliers())


def test_evaluate_matches_enumeration():
    spec = seqrd.build_symmetric_channel()
    spec.horizon = 4
    mult = seqrd.Multipliers(0.1, 0.05, 0.02)
    traj = seqrd.plan(spec, mult)
    direct = seqrd.enumerate_cost(spec, traj.policies, mult)
    assert direct["lagrangian"] == pytest.approx(traj.total_cost, abs=1e-10)
    again = seqrd.evaluate_policy(spec, traj.policies, mult)
    assert again.total_cost == pytest.approx(traj.total_cost, abs=1e-12)


def test_sweep_and_classification():
    spec = seqrd.build_symmetric_channel()
    spec.horizon = 3
    grid = [seqrd.Multipliers(0.3, 0.0, 0.1), seqrd.Multipliers(0.2, 0.0, 0.0)]
    points = seqrd.sweep(spec, grid)
    assert len(points) >= 2
    for p in points:
        assert p.r_m >= -1e-12 and p.r_s >= -1e-12
    regime, rates, slope = seqrd.classify_regime(0.5, 0.1, 0.2, seqrd.Multipliers(gamma_c=1.0))
    assert regime == "GammaMS_Zero"
    assert rates[0] == pytest.approx((0.3, 0.2))
    assert rates[1] == pytest.approx((0.1, 0.4))
    assert slope == (-1.0, -1.0)


def test_unbounded_baseline_near_observation_accuracy():
    spec = seqrd.build_symmetric_channel()
    mean, stderr = seqrd.unbounded_baseline(spec, 20000, seed=3)
    assert abs(mean - 0.2) < 4 * stderr + 1e-3


def test_onestep_boundary_endpoints():
    spec = seqrd.build_symmetric_channel()
    theta = seqrd.initial_belief(spec)
    assert seqrd.onestep_boundary(theta, spec, 0.0, 0.0) == pytest.approx(0.5, abs=1e-12)
    assert seqrd.onestep_boundary(theta, spec, 5.0, 5.0) == pytest.approx(0.2, abs=1e-4)
    assert math.isfinite(seqrd.onestep_boundary(theta, spec, 0.1, 0.1))


def test_filter_start_for_sweep():
    spec = seqrd.build_symmetric_channel()
    spec.horizon = 3
    init = seqrd.filter_initial_policy(spec)
    assert len(init) == 3
    # Observation 0 makes memory state 0 the more likely posterior.
    assert init[0](0, 0, 0) > 0.5
    points = seqrd.sweep(spec, [seqrd.Multipliers(0.2, 0.0, 0.1)], init=init)
    assert len(points) >= 1
    with pytest.raises(ValueError):
        seqrd.filter_initial_policy(spec, smoothing=0.0)
