import json
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

import oracles
from conftest import CARTPOLE_BASELINE, CARTPOLE_GOAL
from cliprm.envs import make_env, sweep_states
from cliprm.errors import DegenerateDistributionError, SchemaError, ValidationError
from cliprm.evaluation import (
    LandscapeTable,
    canonical_shape,
    epic_distance,
    epic_distance_goal_form,
    ingest_labels,
    reward_histograms,
    reward_landscape,
    success_rate,
)
from cliprm.reward import TaskSpec


def test_canonical_shape():
    np.testing.assert_allclose(canonical_shape([1, 0, 1, 0]), [0.5, -0.5, 0.5, -0.5])
    np.testing.assert_allclose(canonical_shape([3, 3, 3]), [0, 0, 0])
    np.testing.assert_allclose(canonical_shape([7.0]), [0.0])
    with pytest.raises(ValidationError):
        canonical_shape([])


def test_epic_extremes():
    y = [1, 0, 1, 0, 1, 0]
    r = epic_distance(y, y)
    assert r.pearson_rho == pytest.approx(1.0) and r.distance == pytest.approx(0.0, abs=1e-12)
    r = epic_distance([1 - v for v in y], y)
    assert r.pearson_rho == pytest.approx(-1.0) and r.distance == pytest.approx(1.0)
    assert r.p_hat == 0.5


def test_epic_independent_labels_near_root_half():
    rng = np.random.default_rng(7)
    r = epic_distance(rng.standard_normal(1000), rng.integers(0, 2, 1000))
    # rho ~ N(0, 1/n): D = sqrt(1 - rho)/sqrt(2) has sd ~ (1/sqrt(2)) * 0.5 / sqrt(n)
    se = 0.5 / math.sqrt(2) / math.sqrt(1000)
    assert abs(r.distance - 1 / math.sqrt(2)) < 3 * se


def test_four_point_example():
    # Direct arithmetic on the four points (population moments):
    #   means 0.85 | 0.15, Var X = 0.375 - 0.25 = 0.125, Cov = 0.425 - 0.25 = 0.175,
    #   rho = 0.175 / sqrt(0.125 * 0.25) = 0.7 * sqrt(2) = 0.98994949...
    rewards, labels = [0.9, 0.8, 0.1, 0.2], [1, 1, 0, 0]
    rho_frozen = 0.98994949366116653
    d = epic_distance(rewards, labels)
    g = epic_distance_goal_form(rewards, labels)
    assert d.pearson_rho == pytest.approx(rho_frozen, abs=1e-12)
    assert g.pearson_rho == pytest.approx(rho_frozen, abs=1e-12)
    assert d.pearson_rho == pytest.approx(oracles.pearson(rewards, labels), abs=1e-12)
    assert d.distance == pytest.approx(math.sqrt(1 - rho_frozen) / math.sqrt(2), abs=1e-12)
    h = reward_histograms(labels, rewards)
    assert h.positive_mean == pytest.approx(0.85) and h.negative_mean == pytest.approx(0.15)


@settings(max_examples=50, deadline=None)
@given(st.lists(st.tuples(st.floats(-5, 5, allow_nan=False), st.booleans()), min_size=3, max_size=40),
       st.floats(-100, 100), st.floats(0.01, 50))
def test_routes_agree_and_shaping_invariance(pairs, shift, scale):
    x = np.array([p[0] for p in pairs])
    y = np.array([float(p[1]) for p in pairs])
    if y.min() == y.max() or np.var(x) < 1e-6:
        return
    d = epic_distance(x, y)
    assert 0.0 <= d.distance <= 1.0
    assert d.distance == pytest.approx(math.sqrt(1 - d.pearson_rho) / math.sqrt(2), abs=1e-12)
    g = epic_distance_goal_form(x, y)
    assert g.pearson_rho == pytest.approx(d.pearson_rho, abs=1e-12)
    # D = sqrt((1 - rho) / 2) has unbounded slope at rho = 1, where a 1e-16 rounding gap in rho
    # becomes ~7e-9 in D; away from that corner the routes agree to 1e-9 in distance too
    if 1 - d.pearson_rho > 1e-6:
        assert g.distance == pytest.approx(d.distance, abs=1e-9)
    assert epic_distance(x * scale + shift, y).distance == pytest.approx(d.distance, abs=1e-7)
    assert d.pearson_rho == pytest.approx(oracles.pearson(x.tolist(), y.tolist()), abs=1e-9)


def test_epic_errors():
    with pytest.raises(DegenerateDistributionError):
        epic_distance([1.0, 2.0, 3.0], [1, 1, 1])
    with pytest.raises(DegenerateDistributionError):
        epic_distance([2.0, 2.0], [0, 1])
    with pytest.raises(DegenerateDistributionError):
        epic_distance_goal_form([0.1, 0.2], [1, 1])
    with pytest.raises(ValidationError):
        epic_distance([1.0, 2.0], [1, 0, 1])
    with pytest.raises(ValidationError):
        epic_distance_goal_form([1.0, 2.0], [0.5, 1])


def test_success_rate():
    assert success_rate([0.6]) == 1.0
    assert success_rate([0.0, 0.0]) == 0.0
    assert success_rate([0.5, 0.49]) == 0.5  # ties count as success
    with pytest.raises(ValidationError):
        success_rate([])
    with pytest.raises(ValidationError):
        success_rate([1.2])


@settings(max_examples=50, deadline=None)
@given(st.lists(st.floats(0, 1), min_size=1, max_size=30), st.floats(0, 1))
def test_success_rate_monotone(fracs, extra):
    before = success_rate(fracs)
    after = success_rate(fracs + [extra])
    if extra >= 0.5:
        assert after >= before
    else:
        assert after <= before


def test_histograms():
    h = reward_histograms([1, 1, 0, 0], [0.9, 0.95, 0.1, 0.05], bins=4)
    pos_bins = np.nonzero(h.positive_counts)[0]
    neg_bins = np.nonzero(h.negative_counts)[0]
    assert set(pos_bins).isdisjoint(neg_bins)
    assert h.positive_counts.sum() == 2 and h.separation > 0.8
    with pytest.raises(ValidationError):
        reward_histograms([1, 0], [0.1])


def write_lines(path, records):
    path.write_text("\n".join(r if isinstance(r, str) else json.dumps(r) for r in records) + "\n")
    return path


def test_ingest_frames_and_trajectories(tmp_path):
    recs = [{"kind": "frame", "frame_ref": f"f{i}.png", "label": int(i < 4)} for i in range(10)]
    recs.append({"kind": "trajectory", "trajectory_ref": "traj_0000", "bucket": 75})
    s = ingest_labels(write_lines(tmp_path / "l.jsonl", recs))
    assert s.p_hat == pytest.approx(0.4)
    assert s.goal_fractions().tolist() == [0.75]
    assert s.rewards() is None


@pytest.mark.parametrize("bad", [
    "{not json",
    {"kind": "frame", "frame_ref": "a", "label": 2},
    {"kind": "frame", "frame_ref": "a", "label": True},
    {"kind": "trajectory", "trajectory_ref": "t", "bucket": 30},
    {"kind": "clip", "frame_ref": "a"},
    {"kind": "frame", "frame_ref": "a", "label": 1, "extra": 0},
])
def test_ingest_schema_errors_name_line(tmp_path, bad):
    good = {"kind": "frame", "frame_ref": "x", "label": 1}
    p = write_lines(tmp_path / "l.jsonl", [good, good, bad])
    with pytest.raises(SchemaError, match="line 3"):
        ingest_labels(p)


def test_ingest_unknown_frame_reference(tmp_path):
    (tmp_path / "ok.png").write_bytes(b"")
    p = write_lines(tmp_path / "l.jsonl", [{"kind": "frame", "frame_ref": "ok.png", "label": 0},
                                          {"kind": "frame", "frame_ref": "missing.png", "label": 1}])
    with pytest.raises(SchemaError, match="line 2.*missing.png"):
        ingest_labels(p, frame_root=tmp_path)


def test_landscape_table(mock_encoder, tmp_path):
    env = make_env("cartpole-nt", render_size=(90, 60))
    sw = sweep_states(env, "angle", (-1.5, 1.5), 31)
    task = TaskSpec(CARTPOLE_GOAL, CARTPOLE_BASELINE)
    t = reward_landscape(sw, task, mock_encoder, [0, 0.25, 0.5, 0.75, 1.0], env_id="cartpole-nt")
    assert t.rewards.shape == (31, 5)
    assert abs(t.argmax(0.0)) < 0.11
    path = t.to_csv(tmp_path / "l.csv")
    head = path.read_text().splitlines()[0].split(",")
    assert head[0] == "angle" and head[-1] == "task_hash" and len(head) == 7
    back = LandscapeTable.from_csv(path)
    np.testing.assert_array_equal(back.rewards, t.rewards)
    assert back.task_hash == task.digest()
    with pytest.raises(ValidationError):
        reward_landscape(sw, TaskSpec(CARTPOLE_GOAL), mock_encoder, [0.5])


def test_landscape_continuous_in_alpha(mock_encoder):
    env = make_env("cartpole-nt", render_size=(60, 40))
    sw = sweep_states(env, "angle", (0.0, 1.0), 3)
    alphas = np.linspace(0, 1, 201)
    t = reward_landscape(sw, TaskSpec(CARTPOLE_GOAL, CARTPOLE_BASELINE), mock_encoder, alphas)
    assert np.max(np.abs(np.diff(t.rewards, axis=1))) < 0.02


def test_landscape_plot(mock_encoder, tmp_path):
    pytest.importorskip("matplotlib")
    env = make_env("cartpole-nt", render_size=(60, 40))
    sw = sweep_states(env, "angle", (-1, 1), 5)
    t = reward_landscape(sw, TaskSpec(CARTPOLE_GOAL), mock_encoder, [0.0])
    assert t.plot(tmp_path / "p.png").stat().st_size > 0
