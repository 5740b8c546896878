"""MuJoCo humanoid with optional texture and camera modifications.

Needs ``gymnasium[mujoco]``; rendering additionally needs a working OpenGL
backend (``MUJOCO_GL=egl`` or ``osmesa`` on headless machines). The adapter's
state is ``concat(qpos, qvel)`` so any state can be re-rendered.

There is no goal predicate: humanoid tasks are judged by human labels.
"""
from __future__ import annotations

import math
import os
import tempfile
import xml.etree.ElementTree as ET
from pathlib import Path

import numpy as np

from cliprm.envs.base import ActionSpace, EnvAdapter
from cliprm.errors import CapabilityError

FIXED_CAMERA = "fixed_front"
# default extrinsic: 4 m in front of the origin, 1.8 m up, pitched 10 degrees down
DEFAULT_CAMERA_POS = (0.0, -4.0, 1.8)
DEFAULT_CAMERA_PITCH_DEG = 10.0


def _require_mujoco():
    try:
        import gymnasium  # noqa: F401
        import mujoco  # noqa: F401
    except ImportError as exc:
        raise CapabilityError("humanoid-custom needs the physics backend: pip install 'gymnasium[mujoco]'") from exc
    import gymnasium.envs.mujoco as gm

    return Path(gm.__file__).resolve().parent / "assets" / "humanoid.xml"


def modified_xml(src: Path, textures: bool, camera_pos, camera_pitch_deg) -> str:
    tree = ET.parse(src)
    root = tree.getroot()
    asset = root.find("asset")
    if textures:
        for tex in asset.findall("texture"):
            if tex.get("type") == "skybox":
                tex.set("rgb1", "0.55 0.75 0.95")
                tex.set("rgb2", "0.85 0.92 1.0")
            elif tex.get("name") == "texplane":
                tex.attrib.update(builtin="checker", rgb1="0.32 0.45 0.25", rgb2="0.36 0.50 0.28", mark="none")
            elif tex.get("name") == "texgeom":
                tex.attrib.update(builtin="flat", rgb1="0.72 0.74 0.78", rgb2="0.72 0.74 0.78")
        for mat in asset.findall("material"):
            if mat.get("name") == "MatPlane":
                mat.attrib.update(reflectance="0.05", shininess="0.1", specular="0.1", texrepeat="20 20")
        default_geom = root.find("default").find("geom")
        if default_geom is not None:
            default_geom.set("rgba", "0.72 0.74 0.78 1")
        floor = root.find("worldbody").find("geom[@name='floor']")
        if floor is not None:
            floor.set("rgba", "1 1 1 1")
    pitch = math.radians(camera_pitch_deg)
    cam = ET.SubElement(root.find("worldbody"), "camera")
    cam.attrib.update(
        name=FIXED_CAMERA,
        mode="fixed",
        pos=" ".join(f"{v:g}" for v in camera_pos),
        xyaxes=f"1 0 0 0 {math.sin(pitch):.6f} {math.cos(pitch):.6f}",
    )
    return ET.tostring(root, encoding="unicode")


class HumanoidCustom(EnvAdapter):
    env_id = "humanoid-custom"

    def __init__(self, episode_length=100, render_size=(256, 256), textures="modified", camera="fixed",
                 camera_pos=DEFAULT_CAMERA_POS, camera_pitch_deg=DEFAULT_CAMERA_PITCH_DEG, seed=None):
        super().__init__(episode_length, seed)
        src = _require_mujoco()
        import gymnasium

        if textures not in ("modified", "original") or camera not in ("fixed", "original"):
            raise ValueError("textures/camera must be 'modified'|'original' and 'fixed'|'original'")
        self.render_size = (int(render_size[0]), int(render_size[1]))
        xml = modified_xml(src, textures == "modified", camera_pos, camera_pitch_deg)
        fd, self._xml_path = tempfile.mkstemp(suffix=".xml", prefix="humanoid_")
        with os.fdopen(fd, "w") as fh:
            fh.write(xml)
        kwargs = dict(
            xml_file=self._xml_path,
            terminate_when_unhealthy=False,
            render_mode="rgb_array",
            width=self.render_size[0],
            height=self.render_size[1],
        )
        if camera == "fixed":
            kwargs["camera_name"] = FIXED_CAMERA
        self._env = gymnasium.make("Humanoid-v5", max_episode_steps=None, **kwargs).unwrapped
        self._nq = self._env.model.nq
        lo, hi = self._env.action_space.low, self._env.action_space.high
        self.action_space = ActionSpace("box", low=tuple(map(float, lo)), high=tuple(map(float, hi)))

    def _pack(self):
        d = self._env.data
        return np.concatenate([d.qpos, d.qvel]).astype(np.float64)

    def initial_state(self, rng):
        self._env.reset(seed=int(rng.integers(2**31)))
        return self._pack()

    def dynamics(self, state, action):
        self._env.set_state(state[: self._nq], state[self._nq :])
        self._env.step(np.asarray(action, dtype=np.float64))
        return self._pack()

    def render(self, state):
        self._env.set_state(np.asarray(state[: self._nq]), np.asarray(state[self._nq :]))
        try:
            frame = self._env.render()
        except Exception as exc:  # GL context creation errors vary by platform
            raise CapabilityError(f"MuJoCo rendering unavailable (set MUJOCO_GL=egl or osmesa): {exc}") from exc
        return np.ascontiguousarray(frame, dtype=np.uint8)

    def close(self):
        self._env.close()
        try:
            os.unlink(self._xml_path)
        except OSError:
            pass
