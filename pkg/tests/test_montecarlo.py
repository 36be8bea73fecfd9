import json
from collections import Counter

import numpy as np
import pytest
import scipy.stats as sps

from rrtlab import (
    ConfigurationError,
    ExperimentConfig,
    replicate_rng,
    run,
    substream_seed,
)
from rrtlab.exact import exact_profile_law
from rrtlab.montecarlo import _jsonable, splitmix64


# ---------------------------------------------------------------------------
# seeding
# ---------------------------------------------------------------------------


def test_splitmix64_reference_vector():
    # first output of the reference generator seeded at 0
    assert splitmix64(0) == 0xE220A8397B1DCDAF


def test_splitmix64_range_and_determinism():
    vals = {splitmix64(x) for x in range(1000)}
    assert len(vals) == 1000
    assert all(0 <= v < 2**64 for v in vals)
    assert splitmix64(123) == splitmix64(123)


def test_substream_seed_accepts_numpy_ints():
    assert substream_seed(5, np.int64(7)) == substream_seed(5, 7)


def test_replicate_rng_reproducible():
    a = replicate_rng(9, 4).integers(0, 1000, 8)
    b = replicate_rng(9, 4).integers(0, 1000, 8)
    c = replicate_rng(9, 5).integers(0, 1000, 8)
    assert a.tolist() == b.tolist()
    assert a.tolist() != c.tolist()


# ---------------------------------------------------------------------------
# config
# ---------------------------------------------------------------------------


def test_config_rejects_bad_kind():
    with pytest.raises(ConfigurationError):
        ExperimentConfig(kind="nope", n=8, replicates=2)


def test_config_rejects_bad_model():
    with pytest.raises(ConfigurationError):
        ExperimentConfig(kind="simulate", n=8, replicates=2, model="magic")


def test_config_replay_guard():
    with pytest.raises(ConfigurationError):
        ExperimentConfig(kind="simulate", n=10**6, replicates=1, model="kingman-replay")


def test_config_clt_needs_cell_in_window():
    with pytest.raises(ConfigurationError):
        ExperimentConfig(kind="clt", n=1024, replicates=2, imin=-4, imax=4, i=7)


def test_config_tau_exponent_range():
    with pytest.raises(ConfigurationError):
        ExperimentConfig(kind="verify", n=64, replicates=2, tau_exponent=1.5)


def test_config_positive_sizes():
    with pytest.raises(ConfigurationError):
        ExperimentConfig(kind="simulate", n=0, replicates=2)
    with pytest.raises(ConfigurationError):
        ExperimentConfig(kind="simulate", n=4, replicates=0)


def test_config_roundtrip_includes_output_paths():
    cfg = ExperimentConfig(
        kind="simulate",
        n=16,
        replicates=3,
        csv_path="/tmp/x.csv",
        json_path="/tmp/x.json",
    )
    back = ExperimentConfig.from_jsonable(
        {**cfg.to_jsonable(), "csv_path": cfg.csv_path, "json_path": cfg.json_path}
    )
    assert back.csv_path == "/tmp/x.csv"
    assert back.json_path == "/tmp/x.json"


def test_config_roundtrip_moment_specs():
    cfg = ExperimentConfig(kind="moments", n=64, replicates=3)
    back = ExperimentConfig.from_jsonable(cfg.to_jsonable())
    assert back.moment_specs == cfg.moment_specs
    assert len(back.moment_specs) == 3  # the default battery


def test_config_rejects_unknown_keys():
    with pytest.raises(ConfigurationError):
        ExperimentConfig.from_jsonable({"kind": "simulate", "n": 4, "replicates": 1, "bogus": 1})


def test_jsonable_handles_numpy_scalars():
    doc = _jsonable({"a": np.int64(3), "b": np.float64(0.5), "c": np.bool_(True)})
    assert json.dumps(doc, sort_keys=True) == '{"a": 3, "b": 0.5, "c": true}'


# ---------------------------------------------------------------------------
# determinism of full runs
# ---------------------------------------------------------------------------


def test_report_byte_identical_same_config():
    cfg = dict(kind="poisson", n=512, replicates=120, master_seed=5, model="kingman-fast")
    r1 = run(ExperimentConfig(**cfg))
    r2 = run(ExperimentConfig(**cfg))
    assert r1.to_json() == r2.to_json()


def test_report_independent_of_threads():
    r1 = run(ExperimentConfig(kind="poisson", n=512, replicates=120, master_seed=5, threads=1))
    r4 = run(ExperimentConfig(kind="poisson", n=512, replicates=120, master_seed=5, threads=4))
    d1, d4 = r1.data, r4.data
    assert d1["config"]["threads"] == 1 and d4["config"]["threads"] == 4
    strip = lambda d: {k: v for k, v in d.items() if k != "config"}
    assert json.dumps(strip(d1), sort_keys=True) == json.dumps(strip(d4), sort_keys=True)


def test_report_depends_on_seed():
    r1 = run(ExperimentConfig(kind="simulate", n=64, replicates=20, master_seed=1))
    r2 = run(ExperimentConfig(kind="simulate", n=64, replicates=20, master_seed=2))
    assert r1.to_json() != r2.to_json()


def test_models_share_seed_protocol_not_draws():
    # same kind, same seed, different model: reports differ but schema agrees
    r1 = run(ExperimentConfig(kind="simulate", n=64, replicates=10, model="rrt"))
    r2 = run(ExperimentConfig(kind="simulate", n=64, replicates=10, model="kingman-fast"))
    assert set(r1.data) == set(r2.data)


# ---------------------------------------------------------------------------
# the three models draw from one law
# ---------------------------------------------------------------------------


def run_multiset_samples(model, n, reps, seed):
    out = []
    for r in range(reps):
        rng = replicate_rng(seed, r)
        if model == "rrt":
            from rrtlab import degree_sample

            out.append(degree_sample(n, rng).multiset())
        elif model == "kingman-fast":
            from rrtlab import fast_degree_sample

            out.append(fast_degree_sample(n, rng).multiset())
        else:
            from rrtlab import replay_degrees, sample_events

            degs = replay_degrees(sample_events(n, rng))
            out.append(tuple(sorted(degs.tolist(), reverse=True)))
    return Counter(out)


@pytest.mark.parametrize("model", ["rrt", "kingman-fast", "kingman-replay"])
def test_each_model_matches_exact_law_n6(model):
    law = exact_profile_law(6, "rrt")
    reps = 20000
    counts = run_multiset_samples(model, 6, reps, seed=13)
    assert set(counts) <= set(law.support)
    stat = 0.0
    dof = 0
    for ms in law.support:
        e = float(law.prob(ms)) * reps
        if e < 5:
            continue
        stat += (counts.get(ms, 0) - e) ** 2 / e
        dof += 1
    assert sps.chi2.sf(stat, dof - 1) > 1e-4


# ---------------------------------------------------------------------------
# outputs
# ---------------------------------------------------------------------------


def test_simulate_n2_report_values(tmp_path):
    # n = 2 has the single two-vertex tree: one degree-1 vertex, one leaf
    csv_path = tmp_path / "rows.csv"
    cfg = ExperimentConfig(
        kind="simulate",
        n=2,
        replicates=5,
        imin=-1,
        imax=1,
        csv_path=str(csv_path),
    )
    rep = run(cfg)
    assert rep.passed
    prof = rep.data["profile"]
    assert prof["x"]["-1"]["mean"] == 1.0
    assert prof["x"]["0"]["mean"] == 1.0
    assert rep.data["delta"]["mean"] == 1.0
    lines = csv_path.read_text().strip().splitlines()
    assert lines[0] == "replicate,n,eps_n,delta,x_lo,x_-1,x_0,x_hi"
    assert len(lines) == 6
    assert lines[1].startswith("0,2,0.0,1,0,1,1,0")


def test_json_report_file(tmp_path):
    path = tmp_path / "report.json"
    cfg = ExperimentConfig(kind="simulate", n=32, replicates=4, json_path=str(path))
    run(cfg)
    doc = json.loads(path.read_text())
    assert doc["schema"] == "rrtlab/v1"
    assert doc["config"]["n"] == 32
    assert "passed" in doc


def test_verify_kind_small():
    cfg = ExperimentConfig(
        kind="verify",
        n=60,
        replicates=300,
        master_seed=3,
        streak_n=40,
        streak_replicates=60,
        exch_n=24,
        exch_replicates=2000,
        tau_replicates=500,
        ks=(2, 3),
    )
    rep = run(cfg)
    assert rep.data["checks"]["streak"]["mismatches"] == 0
    assert rep.data["checks"]["streak"]["pass"]


def test_verify_checks_subset():
    cfg = ExperimentConfig(
        kind="verify", n=40, replicates=100, streak_n=30, streak_replicates=50, checks="streak"
    )
    rep = run(cfg)
    assert list(rep.checks) == ["streak"]
