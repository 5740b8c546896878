"""DQN (discrete actions) and SAC (continuous actions) in plain torch."""
from __future__ import annotations

import math

import numpy as np
import torch
import torch.nn as nn
import torch.nn.functional as F


def mlp(in_dim, widths, out_dim):
    layers, prev = [], in_dim
    for w in widths:
        layers += [nn.Linear(prev, w), nn.ReLU()]
        prev = w
    layers.append(nn.Linear(prev, out_dim))
    return nn.Sequential(*layers)


def adam(params, lr):
    # the fused kernel roughly halves per-update overhead for small networks on CPU
    try:
        return torch.optim.Adam(params, lr=lr, fused=True)
    except (RuntimeError, TypeError):
        return torch.optim.Adam(params, lr=lr)


class DQNAgent:
    algorithm = "dqn"

    def __init__(self, obs_dim, n_actions, cfg):
        self.obs_dim, self.n_actions = obs_dim, n_actions
        self.widths = tuple(cfg.network_widths)
        self.q = mlp(obs_dim, self.widths, n_actions)
        self.q_target = mlp(obs_dim, self.widths, n_actions)
        self.q_target.load_state_dict(self.q.state_dict())
        self.opt = adam(self.q.parameters(), cfg.learning_rate)
        self.gamma = cfg.gamma
        self.max_grad_norm = cfg.max_grad_norm
        self.target_update_interval = cfg.target_update_interval
        self.n_updates = 0

    @torch.no_grad()
    def act(self, obs, rng=None, epsilon=0.0):
        if rng is not None and epsilon > 0 and rng.random() < epsilon:
            return int(rng.integers(self.n_actions))
        q = self.q(torch.as_tensor(obs, dtype=torch.float32).unsqueeze(0))
        return int(q.argmax(dim=1).item())

    def update(self, batch):
        s, a, r, s2 = (torch.as_tensor(x) for x in batch)
        with torch.no_grad():
            target = r + self.gamma * self.q_target(s2).max(dim=1).values
        q = self.q(s).gather(1, a.long().unsqueeze(1)).squeeze(1)
        loss = F.smooth_l1_loss(q, target)
        self.opt.zero_grad()
        loss.backward()
        nn.utils.clip_grad_norm_(self.q.parameters(), self.max_grad_norm)
        self.opt.step()
        self.n_updates += 1
        if self.n_updates % self.target_update_interval == 0:
            self.q_target.load_state_dict(self.q.state_dict())
        return {"q_loss": float(loss.item())}

    def policy_state(self):
        return {"q": {k: v.clone() for k, v in self.q.state_dict().items()}}

    def load_policy_state(self, state):
        self.q.load_state_dict(state["q"])
        self.q_target.load_state_dict(state["q"])


class Actor(nn.Module):
    LOG_STD_MIN, LOG_STD_MAX = -20.0, 2.0

    def __init__(self, obs_dim, act_dim, widths, low, high):
        super().__init__()
        self.body = mlp(obs_dim, widths[:-1], widths[-1]) if len(widths) > 1 else nn.Linear(obs_dim, widths[0])
        self.mu = nn.Linear(widths[-1], act_dim)
        self.log_std = nn.Linear(widths[-1], act_dim)
        low = torch.as_tensor(low, dtype=torch.float32)
        high = torch.as_tensor(high, dtype=torch.float32)
        self.register_buffer("scale", (high - low) / 2)
        self.register_buffer("bias", (high + low) / 2)

    def forward(self, obs, deterministic=False):
        h = F.relu(self.body(obs))
        mu = self.mu(h)
        if deterministic:
            return torch.tanh(mu) * self.scale + self.bias, None
        log_std = self.log_std(h).clamp(self.LOG_STD_MIN, self.LOG_STD_MAX)
        std = log_std.exp()
        u = mu + std * torch.randn_like(mu)
        a = torch.tanh(u)
        logp = (-0.5 * ((u - mu) / std) ** 2 - log_std - 0.5 * math.log(2 * math.pi)).sum(-1)
        logp = logp - torch.log(self.scale * (1 - a.pow(2)) + 1e-6).sum(-1)
        return a * self.scale + self.bias, logp


class SACAgent:
    algorithm = "sac"

    def __init__(self, obs_dim, low, high, cfg):
        act_dim = len(low)
        self.obs_dim, self.act_dim = obs_dim, act_dim
        self.low, self.high = tuple(low), tuple(high)
        self.widths = tuple(cfg.network_widths)
        self.actor = Actor(obs_dim, act_dim, self.widths, low, high)
        self.q1 = mlp(obs_dim + act_dim, self.widths, 1)
        self.q2 = mlp(obs_dim + act_dim, self.widths, 1)
        self.q1_t = mlp(obs_dim + act_dim, self.widths, 1)
        self.q2_t = mlp(obs_dim + act_dim, self.widths, 1)
        self.q1_t.load_state_dict(self.q1.state_dict())
        self.q2_t.load_state_dict(self.q2.state_dict())
        lr = cfg.learning_rate
        self.pi_opt = adam(self.actor.parameters(), lr)
        self.q_opt = adam(list(self.q1.parameters()) + list(self.q2.parameters()), lr)
        self.gamma, self.tau = cfg.gamma, cfg.tau
        self.auto_entropy = cfg.entropy_coef == "auto"
        if self.auto_entropy:
            self.log_alpha = torch.zeros(1, requires_grad=True)
            self.alpha_opt = adam([self.log_alpha], lr)
            self.target_entropy = -float(act_dim)
        else:
            self.log_alpha = torch.tensor([math.log(float(cfg.entropy_coef))])

    @property
    def alpha(self):
        return float(self.log_alpha.exp().item())

    @torch.no_grad()
    def act(self, obs, rng=None, deterministic=False):
        a, _ = self.actor(torch.as_tensor(obs, dtype=torch.float32).unsqueeze(0), deterministic=deterministic)
        return a.squeeze(0).numpy().astype(np.float64)

    def update(self, batch):
        s, a, r, s2 = (torch.as_tensor(x) for x in batch)
        alpha = self.log_alpha.exp().detach()
        with torch.no_grad():
            a2, logp2 = self.actor(s2)
            sa2 = torch.cat([s2, a2], 1)
            q_next = torch.min(self.q1_t(sa2), self.q2_t(sa2)).squeeze(1) - alpha * logp2
            target = r + self.gamma * q_next
        sa = torch.cat([s, a], 1)
        q_loss = 0.5 * (F.mse_loss(self.q1(sa).squeeze(1), target) + F.mse_loss(self.q2(sa).squeeze(1), target))
        self.q_opt.zero_grad()
        q_loss.backward()
        self.q_opt.step()

        a_pi, logp = self.actor(s)
        sa_pi = torch.cat([s, a_pi], 1)
        q_pi = torch.min(self.q1(sa_pi), self.q2(sa_pi)).squeeze(1)
        pi_loss = (alpha * logp - q_pi).mean()
        self.pi_opt.zero_grad()
        pi_loss.backward()
        self.pi_opt.step()

        out = {"q_loss": float(q_loss.item()), "pi_loss": float(pi_loss.item())}
        if self.auto_entropy:
            a_loss = -(self.log_alpha * (logp.detach() + self.target_entropy)).mean()
            self.alpha_opt.zero_grad()
            a_loss.backward()
            self.alpha_opt.step()
            out["ent_coef"] = self.alpha
        with torch.no_grad():
            for net, tgt in ((self.q1, self.q1_t), (self.q2, self.q2_t)):
                for p, pt in zip(net.parameters(), tgt.parameters()):
                    pt.mul_(1 - self.tau).add_(self.tau * p)
        return out

    def policy_state(self):
        return {"actor": {k: v.clone() for k, v in self.actor.state_dict().items()}}

    def load_policy_state(self, state):
        self.actor.load_state_dict(state["actor"])
