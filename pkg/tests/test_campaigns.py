import numpy as np
import pytest

from tline import campaigns
from tline.coupled_solver import run

SIM = {"n_elements": 20}


def test_single_node_is_deterministic_mean(texas):
    camp = campaigns.grid_campaign(texas, params=("I_b",), points=1, n_steps=100, **SIM)
    det = run(texas.build_model(**SIM), n_steps=100)
    np.testing.assert_allclose(camp.statistics()["mean"], det.theta_max, rtol=1e-12)
    np.testing.assert_allclose(camp.statistics()["std"], 0.0, atol=1e-9)


def test_worker_count_does_not_change_results(texas):
    kw = dict(params=("I_b", "g_c"), points=2, n_steps=60, **SIM)
    a = campaigns.grid_campaign(texas, workers=1, **kw)
    b = campaigns.grid_campaign(texas, workers=2, **kw)
    assert np.array_equal(a.series, b.series)
    sa, sb = a.statistics(), b.statistics()
    for key in ("mean", "std", "sobol"):
        assert np.array_equal(sa[key], sb[key])


def test_truncation_and_manifest(texas):
    sc = texas.with_overrides(damage="severe")
    camp = campaigns.grid_campaign(sc, params=("I_b",), points=3, theta_lim=318.0, **SIM)
    stats = camp.statistics()
    first = min(s for s in camp.failure_steps if s is not None)
    assert camp.truncation == first
    assert stats["mean"].size == first and np.all(np.isfinite(stats["mean"]))
    pf = camp.failure_curve()
    assert pf.size == camp.n_steps and np.all(np.diff(pf) >= 0)
    man = camp.manifest()
    assert len(man["nodes"]) == 3 and sum(man["weights"]) == pytest.approx(1.0)
    assert man["truncation_step"] == first


def test_convergence_small(texas):
    study = campaigns.convergence_study(texas, step=20, pcm_points=(2, 3, 4, 12), mc_sizes=(10, 40),
                                        reference_points=12, **SIM)
    pcm = {n: e for m, n, _, e in study.rows if m == "pcm"}
    assert pcm[12] == 0.0
    assert pcm[2] > pcm[3] > pcm[4] or pcm[4] < 1e-13
    mc = [e for m, *_, e in study.rows if m == "mc"]
    assert len(mc) == 2 and all(e > pcm[4] for e in mc)
