"""CartPole and MountainCar without task-based termination.

Dynamics follow the Gym classic-control equations. Episodes run to a fixed
time limit. Ground truth is exposed for evaluation only:

* CartPole: +1 while |angle| is within the 12 degree balance threshold, -1
  once the pole has dropped past it.
* MountainCar (continuous action): 1 at goal states, 0 elsewhere; the goal
  region is absorbing, so once x >= goal_position the state no longer changes.
"""
from __future__ import annotations

import math
from pathlib import Path

import numpy as np
from PIL import Image

from cliprm import kernels
from cliprm.envs.base import ActionSpace, EnvAdapter
from cliprm.envs.draw import NOMINAL, Painter, rotate
from cliprm.errors import ValidationError

ASSET_DIR = Path(__file__).resolve().parent / "assets"
TEXTURE_FILES = ("sky.png", "mountain.png", "car.png")


def wrap_angle(theta):
    return (theta + math.pi) % (2 * math.pi) - math.pi


class CartPoleNoTermination(EnvAdapter):
    env_id = "cartpole-nt"
    sweep_parameters = ("angle",)
    has_ground_truth = True

    gravity = 9.8
    masscart = 1.0
    masspole = 0.1
    length = 0.5  # half the pole length
    force_mag = 10.0
    tau = 0.02
    theta_threshold = 12 * 2 * math.pi / 360
    x_threshold = 2.4

    def __init__(self, episode_length=200, render_size=(300, 200), supersample=4, seed=None):
        super().__init__(episode_length, seed)
        self.action_space = ActionSpace("discrete", n=2)
        self.render_size = (int(render_size[0]), int(render_size[1]))
        self.supersample = int(supersample)

    def initial_state(self, rng):
        return rng.uniform(-0.05, 0.05, size=4)

    def dynamics(self, state, action):
        if int(action) not in (0, 1):
            raise ValidationError(f"cartpole action must be 0 or 1, got {action!r}")
        x, x_dot, theta, theta_dot = state
        force = self.force_mag if int(action) == 1 else -self.force_mag
        total_mass = self.masspole + self.masscart
        pml = self.masspole * self.length
        cos, sin = math.cos(theta), math.sin(theta)
        temp = (force + pml * theta_dot**2 * sin) / total_mass
        thetaacc = (self.gravity * sin - cos * temp) / (
            self.length * (4.0 / 3.0 - self.masspole * cos**2 / total_mass)
        )
        xacc = temp - pml * thetaacc * cos / total_mass
        x = x + self.tau * x_dot
        x_dot = x_dot + self.tau * xacc
        theta = theta + self.tau * theta_dot
        theta_dot = theta_dot + self.tau * thetaacc
        return np.array([x, x_dot, theta, theta_dot])

    def goal_label(self, state) -> bool:
        return abs(wrap_angle(float(state[2]))) <= self.theta_threshold

    def gt_reward(self, state):
        return 1.0 if self.goal_label(state) else -1.0

    def state_for(self, parameter, value):
        if parameter != "angle":
            return super().state_for(parameter, value)
        return np.array([0.0, 0.0, float(value), 0.0])

    def render(self, state):
        x, _, theta, _ = (float(v) for v in state)
        p = Painter(*self.render_size, ss=self.supersample)
        scale = NOMINAL[0] / (2 * self.x_threshold)
        polewidth, polelen = 10.0, scale * 2 * self.length
        cartwidth, cartheight = 50.0, 30.0
        cartx = x * scale + NOMINAL[0] / 2
        carty = 100.0
        axle = cartheight / 4.0
        p.segment((0, carty), (NOMINAL[0], carty), 1.0, (0, 0, 0))
        l, r, t, b = -cartwidth / 2, cartwidth / 2, cartheight / 2, -cartheight / 2
        p.polygon(np.array([(l, b), (l, t), (r, t), (r, b)]) + (cartx, carty), (0, 0, 0))
        l, r, t, b = -polewidth / 2, polewidth / 2, polelen - polewidth / 2, -polewidth / 2
        pole = rotate([(l, b), (l, t), (r, t), (r, b)], -theta) + (cartx, carty + axle)
        p.polygon(pole, (202, 152, 101))
        p.disc(cartx, carty + axle, polewidth / 2, (129, 132, 203))
        return p.image()


def _load_rgb(path):
    return np.asarray(Image.open(path).convert("RGB"), dtype=np.float32)


def _load_rgba(path):
    return np.ascontiguousarray(np.asarray(Image.open(path).convert("RGBA"), dtype=np.float32))


class MountainCarNoTermination(EnvAdapter):
    env_id = "mountaincar-nt"
    sweep_parameters = ("x",)
    has_ground_truth = True

    min_position = -1.2
    max_position = 0.6
    max_speed = 0.07
    power = 0.0015

    def __init__(self, episode_length=200, render_size=(300, 200), supersample=4, goal_position=0.45,
                 textured=False, texture_dir=None, seed=None):
        super().__init__(episode_length, seed)
        self.action_space = ActionSpace("box", low=(-1.0,), high=(1.0,))
        self.render_size = (int(render_size[0]), int(render_size[1]))
        self.supersample = int(supersample)
        self.goal_position = float(goal_position)
        self.textured = bool(textured)
        if self.textured:
            self.env_id = "mountaincar-textured"
            tdir = Path(texture_dir) if texture_dir else ASSET_DIR
            missing = [f for f in TEXTURE_FILES if not (tdir / f).is_file()]
            if missing:
                raise ValidationError(f"texture directory {tdir} lacks {', '.join(missing)}")
            w, h = self.render_size
            sky = _load_rgb(tdir / "sky.png")
            self._sky = kernels.resize_bilinear(np.ascontiguousarray(sky), h, w)
            self._ground = np.ascontiguousarray(_load_rgb(tdir / "mountain.png"))
            self._car = _load_rgba(tdir / "car.png")

    @staticmethod
    def height(xs):
        return np.sin(3 * xs) * 0.45 + 0.55

    def initial_state(self, rng):
        return np.array([rng.uniform(-0.6, -0.4), 0.0])

    def dynamics(self, state, action):
        position, velocity = float(state[0]), float(state[1])
        if position >= self.goal_position:
            return np.array([position, velocity])  # absorbing goal
        force = float(np.clip(np.asarray(action, dtype=np.float64).reshape(-1)[0], -1.0, 1.0))
        velocity += force * self.power - 0.0025 * math.cos(3 * position)
        velocity = min(max(velocity, -self.max_speed), self.max_speed)
        position += velocity
        position = min(max(position, self.min_position), self.max_position)
        if position == self.min_position and velocity < 0:
            velocity = 0.0
        return np.array([position, velocity])

    def goal_label(self, state) -> bool:
        return float(state[0]) >= self.goal_position

    def gt_reward(self, state):
        return 1.0 if self.goal_label(state) else 0.0

    def state_for(self, parameter, value):
        if parameter != "x":
            return super().state_for(parameter, value)
        if not self.min_position <= value <= self.max_position:
            raise ValidationError(f"x={value} outside [{self.min_position}, {self.max_position}]")
        return np.array([float(value), 0.0])

    def render(self, state):
        pos = float(state[0])
        scale = NOMINAL[0] / (self.max_position - self.min_position)
        if self.textured:
            p = Painter(*self.render_size, ss=self.supersample)
            p.canvas[:] = self._sky
            p.fill_below(lambda xn: self.height(xn / scale + self.min_position) * scale, self._ground)
        else:
            p = Painter(*self.render_size, ss=self.supersample)
            xs = np.linspace(self.min_position, self.max_position, 100)
            p.polyline(np.stack([(xs - self.min_position) * scale, self.height(xs) * scale], 1), 2.0, (0, 0, 0))

        # flag
        fx = (self.goal_position - self.min_position) * scale
        fy1 = self.height(self.goal_position) * scale
        fy2 = fy1 + 50
        p.segment((fx, fy1), (fx, fy2), 2.0, (0, 0, 0))
        p.polygon([(fx, fy2), (fx, fy2 - 10), (fx + 25, fy2 - 5)], (204, 204, 0))

        clearance, carwidth, carheight = 10.0, 40.0, 20.0
        angle = math.cos(3 * pos)
        origin = np.array([(pos - self.min_position) * scale, self.height(pos) * scale])
        if self.textured:
            centre = rotate([(0.0, clearance + carheight / 2)], angle)[0] + origin
            p.sprite(self._car, centre[0], centre[1], angle, (carwidth + 8) / self._car.shape[1])
        else:
            l, r, t, b = -carwidth / 2, carwidth / 2, carheight, 0.0
            body = rotate([(l, b + clearance), (l, t + clearance), (r, t + clearance), (r, b + clearance)], angle)
            p.polygon(body + origin, (0, 0, 0))
            for dx in (carwidth / 4, -carwidth / 4):
                c = rotate([(dx, clearance)], angle)[0] + origin
                p.disc(c[0], c[1], carheight / 2.5, (128, 128, 128))
        return p.image()
