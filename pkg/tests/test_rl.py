import csv

import numpy as np
import pytest

from conftest import CARTPOLE_GOAL
from cliprm.envs import make_env
from cliprm.envs.base import Transition
from cliprm.errors import ConfigurationError, ValidationError
from cliprm.reward import TaskSpec, batch_rewards, build_reward_model
from cliprm.rl import (
    Checkpoint,
    RLConfig,
    ReplayBuffer,
    UnlabeledBuffer,
    label_pending,
    rollout,
    select_best,
    train,
)


def small_cfg(**kw):
    base = dict(algorithm="dqn", total_steps=600, learning_starts=200, train_freq=50, updates_per_block=5,
                learning_rate=1e-3, network_widths=(16, 16), reward_batch=64, checkpoint_interval=200,
                batch_size=16, buffer_size=1000, seed=0)
    base.update(kw)
    return RLConfig(**base)


@pytest.fixture
def cartpole():
    return make_env("cartpole-nt", episode_length=50, render_size=(48, 32))


@pytest.fixture
def cart_model(mock_encoder):
    return build_reward_model(TaskSpec(CARTPOLE_GOAL), mock_encoder)


def test_config_validation():
    with pytest.raises(ValidationError):
        RLConfig(gamma=0.0)
    with pytest.raises(ValidationError):
        RLConfig(tau=0.0)
    with pytest.raises(ValidationError):
        RLConfig(reward_batch=0)
    with pytest.raises(ValidationError):
        RLConfig(algorithm="ppo")
    with pytest.raises(ValidationError):
        RLConfig(entropy_coef=-1)
    with pytest.raises(ValidationError):
        RLConfig.from_dict({"gama": 0.9})
    assert RLConfig.from_dict(RLConfig().to_dict()) == RLConfig()


def _transitions(env, n, rng):
    env.reset(seed=0)
    out = []
    for t in range(n):
        s = env.state.copy()
        a = env.action_space.sample(rng)
        s2, gt, _ = env.step(a)
        out.append(Transition(s, a, s2, env.render(s2), gt, 0, t))
    return out


def test_label_pending_drains_everything(cartpole, cart_model, mock_encoder, rng):
    buf = UnlabeledBuffer(5)
    items = _transitions(cartpole, 9, rng)
    for tr in items:
        buf.append(tr)
    assert buf.ready
    labeled = label_pending(buf, cart_model, mock_encoder)
    assert len(labeled) == 9 and len(buf) == 0
    want = batch_rewards(np.stack([tr.frame for tr in items]), cart_model, mock_encoder)
    np.testing.assert_array_equal([lt.reward for lt in labeled], want)
    with pytest.raises(ValidationError):
        label_pending(buf, cart_model, mock_encoder)


class BrokenEncoder:
    def image_array(self, frames):
        raise RuntimeError("device lost")


def test_label_pending_is_all_or_nothing(cartpole, cart_model, rng):
    buf = UnlabeledBuffer(3)
    for tr in _transitions(cartpole, 4, rng):
        buf.append(tr)
    with pytest.raises(RuntimeError):
        label_pending(buf, cart_model, BrokenEncoder())
    assert len(buf) == 4


def test_encoder_failure_dumps_postmortem(cartpole, cart_model, tmp_path):
    with pytest.raises(RuntimeError):
        train(cartpole, cart_model, BrokenEncoder(), small_cfg(reward_batch=10), tmp_path)
    dump = np.load(tmp_path / "unlabeled_postmortem.npz")
    assert dump["frames"].shape[0] == 10 and dump["states"].shape == (10, 4)


def test_replay_buffer_ring(rng):
    rb = ReplayBuffer(3, 2)
    for i in range(5):
        rb.add(np.full(2, i), i % 2, float(i), np.full(2, i + 1))
    assert len(rb) == 3 and rb.total_added == 5
    s, a, r, s2 = rb.sample(100, rng)
    assert set(r.tolist()) == {2.0, 3.0, 4.0}
    with pytest.raises(ValidationError):
        ReplayBuffer(3, 2).sample(1, rng)


def test_train_dqn_artifacts(cartpole, cart_model, mock_encoder, tmp_path):
    cks = train(cartpole, cart_model, mock_encoder, small_cfg(), tmp_path, config_hash="abc123")
    assert [c.step for c in cks] == [200, 400, 600]
    files = sorted(p.name for p in (tmp_path / "checkpoints").iterdir())
    assert len(files) == 3
    loaded = Checkpoint.load(cks[-1].path)
    assert loaded.meta["config_hash"] == "abc123" and loaded.step == 600
    with open(tmp_path / "train_log.csv") as fh:
        rows = list(csv.DictReader(fh))
    assert len(rows) == 600 // 50  # one row per completed episode
    assert {r["config_hash"] for r in rows} == {"abc123"}
    assert select_best(cks).mean_reward == max(c.mean_reward for c in cks)


def test_replay_integrity_and_end_flush(cartpole, cart_model, mock_encoder):
    from cliprm.rl import harness

    seen = {}
    orig = harness.ReplayBuffer.extend

    def spy(self, labeled):
        seen["n"] = seen.get("n", 0) + len(labeled)
        return orig(self, labeled)

    harness.ReplayBuffer.extend = spy
    try:
        # 610 steps with B = 64 leaves 34 pending at the end; they must be flushed
        train(cartpole, cart_model, mock_encoder, small_cfg(total_steps=610, checkpoint_interval=1000))
    finally:
        harness.ReplayBuffer.extend = orig
    assert seen["n"] == 610


def test_reward_labels_do_not_depend_on_batch_size(cartpole, cart_model, mock_encoder, tmp_path):
    # no gradient updates happen before learning_starts, so both runs see the same transitions
    for b in (7, 100):
        cfg = small_cfg(total_steps=300, learning_starts=300, reward_batch=b, checkpoint_interval=1000)
        train(cartpole, cart_model, mock_encoder, cfg, tmp_path / f"b{b}")
    logs = []
    for b in (7, 100):
        with open(tmp_path / f"b{b}" / "train_log.csv") as fh:
            logs.append([float(r["episode_reward"]) for r in csv.DictReader(fh)])
    assert len(logs[0]) == 6
    assert logs[0] == logs[1]


def test_algorithm_action_space_mismatch(cartpole, cart_model, mock_encoder):
    with pytest.raises(ConfigurationError):
        train(cartpole, cart_model, mock_encoder, small_cfg(algorithm="sac"))
    mc = make_env("mountaincar-nt", render_size=(48, 32))
    with pytest.raises(ConfigurationError):
        train(mc, cart_model, mock_encoder, small_cfg())


def test_sac_short_run_and_rollout(mock_encoder):
    env = make_env("mountaincar-textured", episode_length=40, render_size=(48, 32))
    model = build_reward_model(TaskSpec("a car at the peak of the mountain, next to the yellow flag",
                                        "a car in the mountain", 0.5), mock_encoder)
    cfg = small_cfg(algorithm="sac", total_steps=240, learning_starts=80, train_freq=40, updates_per_block=4,
                    tau=0.01, gamma=0.9999, entropy_coef=0.1, checkpoint_interval=120)
    cks = train(env, model, mock_encoder, cfg)
    assert [c.step for c in cks] == [120, 240]
    trajs = rollout(env, cks[-1], 2, seed=3)
    assert all(len(t) == 40 and t.frames.shape == (40, 32, 48, 3) for t in trajs)
    assert all(np.all((-1 <= np.concatenate(t.actions)) & (np.concatenate(t.actions) <= 1)) for t in trajs)


def test_rollout_contract(cartpole, cart_model, mock_encoder, tmp_path):
    (ck,) = train(cartpole, cart_model, mock_encoder, small_cfg(total_steps=200, checkpoint_interval=1000))
    a = rollout(cartpole, ck, 3, seed=11)
    b = rollout(cartpole, ck, 3, seed=11)
    assert len(a) == 3 and all(len(t) == 50 for t in a)
    for x, y in zip(a, b):
        np.testing.assert_array_equal(x.states, y.states)
        np.testing.assert_array_equal(x.frames, y.frames)
        assert x.gt_rewards.shape == (50,) and 0.0 <= x.goal_fraction <= 1.0
    with pytest.raises(ValidationError):
        rollout(cartpole, ck, 0)
    with pytest.raises(ConfigurationError):
        rollout(make_env("mountaincar-nt"), ck, 1)

    from cliprm.rl import save_rollouts

    man = save_rollouts(a, tmp_path / "ro", ck)
    assert len(man["trajectories"]) == 3
    assert (tmp_path / "ro" / man["trajectories"][0]["frames"][0]).is_file()
