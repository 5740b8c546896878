import math

import numpy as np
import pytest

from cliprm.envs import ENV_IDS, gt_goal_label, make_env, sweep_states
from cliprm.envs.classic import MountainCarNoTermination, wrap_angle
from cliprm.errors import CapabilityError, ValidationError


@pytest.mark.parametrize("env_id", ["cartpole-nt", "mountaincar-nt", "mountaincar-textured"])
def test_time_limit_only(env_id):
    env = make_env(env_id, episode_length=30, render_size=(60, 40))
    env.reset(seed=0)
    rng = np.random.default_rng(0)
    flags = [env.step(env.action_space.sample(rng))[2] for _ in range(30)]
    assert flags == [False] * 29 + [True]
    with pytest.raises(ValidationError):
        env.step(env.action_space.sample(rng))
    frame = env.render(env.state)
    assert frame.shape == (40, 60, 3) and frame.dtype == np.uint8


def test_unknown_env():
    with pytest.raises(ValidationError, match="cartpole-nt"):
        make_env("pong")
    assert "humanoid-custom" in ENV_IDS


def test_step_before_reset():
    with pytest.raises(ValidationError):
        make_env("cartpole-nt").step(0)


def test_cartpole_keeps_running_after_pole_falls():
    env = make_env("cartpole-nt")
    env.reset(seed=1)
    rewards = [env.step(1)[1] for _ in range(200)]
    assert rewards[0] == 1.0 and rewards[-1] == -1.0
    assert not gt_goal_label(env, env.state)


def test_cartpole_goal_threshold():
    env = make_env("cartpole-nt")
    t = 12 * math.pi / 180
    assert gt_goal_label(env, [0, 0, t - 1e-9, 0])
    assert not gt_goal_label(env, [0, 0, t + 1e-6, 0])
    assert gt_goal_label(env, [0, 0, 2 * math.pi, 0])
    assert wrap_angle(3 * math.pi / 2) == pytest.approx(-math.pi / 2)


def test_cartpole_matches_reference_dynamics():
    # one Euler step of the classic equations, written out by hand
    env = make_env("cartpole-nt")
    s = np.array([0.1, -0.2, 0.05, 0.3])
    nxt = env.dynamics(s, 1)
    x, xd, th, thd = s
    temp = (10.0 + 0.05 * thd**2 * math.sin(th)) / 1.1
    thacc = (9.8 * math.sin(th) - math.cos(th) * temp) / (0.5 * (4 / 3 - 0.1 * math.cos(th) ** 2 / 1.1))
    xacc = temp - 0.05 * thacc * math.cos(th) / 1.1
    np.testing.assert_allclose(nxt, [x + 0.02 * xd, xd + 0.02 * xacc, th + 0.02 * thd, thd + 0.02 * thacc])


def test_mountaincar_goal_is_absorbing():
    env = make_env("mountaincar-nt")
    s = np.array([0.5, 0.03])
    np.testing.assert_array_equal(env.dynamics(s, [-1.0]), s)
    assert env.gt_reward(s) == 1.0
    assert env.gt_reward(np.array([0.0, 0.0])) == 0.0


def test_mountaincar_full_throttle_reaches_goal_eventually():
    env = make_env("mountaincar-nt", episode_length=1000)
    env.reset(seed=0)
    # bang-bang along the velocity sign climbs out of the valley
    for _ in range(1000):
        s = env.state
        _, r, done = env.step([1.0 if s[1] >= 0 else -1.0])
        if done:
            break
    assert gt_goal_label(env, env.state)


def test_sweeps():
    env = make_env("cartpole-nt", render_size=(60, 40))
    sw = sweep_states(env, "angle", (-1.0, 1.0), 11)
    assert sw.frames.shape == (11, 40, 60, 3)
    assert sw.values[5] == pytest.approx(0.0)
    with pytest.raises(ValidationError):
        sweep_states(env, "x", (-1, 1), 5)
    with pytest.raises(ValidationError):
        sweep_states(env, "angle", (-1, 1), 0)
    with pytest.raises(ValidationError):
        sweep_states(env, "angle", (1, -1), 5)
    mc = make_env("mountaincar-textured", render_size=(60, 40))
    assert sweep_states(mc, "x", (-1.2, 0.6), 3).frames.shape[0] == 3
    with pytest.raises(ValidationError):
        sweep_states(mc, "x", (-2.0, 0.6), 3)


def test_rendering_reflects_state():
    env = make_env("cartpole-nt", render_size=(90, 60))
    a = env.render([0, 0, 0, 0])
    b = env.render([0, 0, 1.0, 0])
    c = env.render([1.0, 0, 0, 0])
    assert np.abs(a.astype(int) - b).sum() > 0 and np.abs(a.astype(int) - c).sum() > 0
    np.testing.assert_array_equal(a, env.render([0, 0, 0, 0]))


def test_textured_mountaincar_differs_from_plain():
    s = [-0.5, 0.0]
    plain = make_env("mountaincar-nt", render_size=(90, 60)).render(s)
    tex = make_env("mountaincar-textured", render_size=(90, 60)).render(s)
    assert np.abs(plain.astype(int) - tex).mean() > 10


def test_missing_textures(tmp_path):
    with pytest.raises(ValidationError, match="lacks"):
        MountainCarNoTermination(textured=True, texture_dir=tmp_path)


def test_humanoid_adapter():
    pytest.importorskip("mujoco")
    env = make_env("humanoid-custom")
    assert env.episode_length == 100
    s = env.reset(seed=0)
    s2, gt, done = env.step(np.zeros(env.action_space.dim))
    assert s2.shape == s.shape and gt is None and not done
    with pytest.raises(CapabilityError):
        env.goal_label(s2)


def test_humanoid_render():
    pytest.importorskip("mujoco")
    env = make_env("humanoid-custom", render_size=(64, 64))
    s = env.reset(seed=0)
    try:
        frame = env.render(s)
    except CapabilityError:
        pytest.skip("no OpenGL context available for MuJoCo rendering")
    assert frame.shape[2] == 3
