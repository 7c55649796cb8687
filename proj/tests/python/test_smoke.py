import math

import numpy as np
import pytest

import ldpd


def test_bayes_factor_arithmetic():
    bf = ldpd.bayes_factor_from_probability(0.2163, 0.5)
    assert bf.bayes_factor == pytest.approx(0.7837 / 0.2163)
    assert ldpd.bayes_factor_from_probability(0.3, 0.3).bayes_factor == pytest.approx(1.0)


def test_hpd_of_normal_draws():
    rng = np.random.default_rng(1)
    lo, hi = ldpd.hpd_interval(rng.standard_normal(100_000).tolist())
    assert lo == pytest.approx(-1.96, abs=0.05)
    assert hi == pytest.approx(1.96, abs=0.05)


def test_sticks_and_tail_mass():
    rng = ldpd.Rng(3)
    sticks = ldpd.sample_sticks_prior(ldpd.PDParams(0.25, 1.0), 20, rng)
    assert len(sticks.weights) == 20
    assert sum(sticks.weights) == pytest.approx(1.0)
    # Dirichlet process: N - 1 free sticks leave (b / (1 + b))^(N - 1) on the last atom.
    assert ldpd.expected_tail_mass(ldpd.PDParams(0.0, 1.0), 3) == pytest.approx(0.25)


def test_simulate_fit_and_summarize():
    truth_a = ldpd.scenario_truth(ldpd.Scenario.I, ldpd.Group.A)
    truth_b = ldpd.scenario_truth(ldpd.Scenario.I, ldpd.Group.B)
    sim = ldpd.generate(truth_a, truth_b, 20, seed=4)
    assert len(sim.data) == 40
    for unit, times in zip(sim.data.units, sim.truth):
        assert unit.items[0].onset.contains(times.onset)

    priors = ldpd.PriorSpec.defaults(1, 2, 2)
    priors.truncation_level = 8
    ctx = ldpd.ModelContext(sim.data, priors)
    cfg = ldpd.ChainConfig(iterations=60, burn_in=20, thin=4, seed=7)
    draws = ldpd.run_chain(ctx, cfg)
    assert len(draws.states) == 10
    again = ldpd.run_chain(ctx, cfg)
    assert [s.b for s in draws.states] == [s.b for s in again.states]
    assert draws.states[0].Sigma.shape == (2, 2)

    profile = ldpd.group_profile(ldpd.Group.A, ldpd.Target.Onset)
    grid = ldpd.default_time_grid(draws.states, profile, 31)
    band = ldpd.posterior_curves(draws.states, profile, grid)
    assert len(band.mean) == 31
    assert all(lo <= m <= hi for lo, m, hi in zip(band.hpd_lo, band.mean, band.hpd_hi))
    assert band.per_draw.shape == (10, 31)
    assert np.all(np.diff(band.mean) <= 1e-12)


def test_diagnostics():
    rng = np.random.default_rng(2)
    chains = [rng.standard_normal(4000).tolist() for _ in range(2)]
    assert ldpd.split_rhat(chains) == pytest.approx(1.0, abs=0.02)
    assert ldpd.effective_sample_size(chains) > 6000
    s, z, p = ldpd.mann_kendall(list(range(10)))
    assert s == 45.0
    assert math.isclose(z, 44 / math.sqrt(125))


def test_errors_map_to_python_exceptions(tmp_path):
    with pytest.raises(ldpd.ValidationError):
        ldpd.ingest_csv(tmp_path / "missing.csv")
    with pytest.raises(ValueError):
        ldpd.ChainConfig(iterations=10, burn_in=20).validate()


def test_cli_roundtrip(tmp_path):
    out = tmp_path / "sim"
    code, _, err = ldpd.run_cli(["simulate", "--scenario", "II", "--m", "10", "--seed", "1", "-o", str(out)])
    assert code == 0, err
    fit = tmp_path / "fit"
    code, _, err = ldpd.run_cli(["fit", "--data", str(out / "data.csv"), "--seed", "2", "--iterations", "20",
                                 "-s", "prior.truncation=5", "-o", str(fit)])
    assert code == 0, err
    store = ldpd.load_draw_store(fit / "draws")
    assert store.seed == 2
    assert store.total_draws() > 0
    assert ldpd.run_cli(["bogus"])[0] == 2
