"""Deep deterministic policy gradient in plain numpy.

Networks are small multilayer perceptrons with hand-written reverse-mode
gradients. Batches are row-major: ``x`` has shape ``(batch, features)``.
"""
from __future__ import annotations

import json
from dataclasses import asdict, dataclass, field

import numpy as np

CHECKPOINT_FORMAT = "acc_falsify.ddpg"
CHECKPOINT_VERSION = 1

_ACT = {
    "tanh": (np.tanh, lambda y: 1.0 - y * y),
    "linear": (lambda z: z, lambda y: np.ones_like(y)),
    "relu": (lambda z: np.maximum(z, 0.0), lambda y: (y > 0).astype(float)),
}


class Mlp:
    """Fully connected network ``x -> act_L(... act_1(x W_1 + b_1) ...)``."""

    def __init__(self, sizes, activations, rng=None, out_scale: float = 3e-3):
        sizes = [int(s) for s in sizes]
        if len(activations) != len(sizes) - 1:
            raise ValueError("need one activation per layer")
        for act in activations:
            if act not in _ACT:
                raise ValueError(f"unknown activation {act!r}")
        self.sizes = sizes
        self.activations = list(activations)
        self.W = []
        self.b = []
        rng = np.random.default_rng(0) if rng is None else rng
        for i, (n_in, n_out) in enumerate(zip(sizes[:-1], sizes[1:])):
            lim = out_scale if i == len(sizes) - 2 else 1.0 / np.sqrt(n_in)
            self.W.append(rng.uniform(-lim, lim, size=(n_in, n_out)))
            self.b.append(rng.uniform(-lim, lim, size=n_out))

    @property
    def params(self) -> list[np.ndarray]:
        return [p for pair in zip(self.W, self.b) for p in pair]

    def copy(self) -> "Mlp":
        net = Mlp.__new__(Mlp)
        net.sizes = list(self.sizes)
        net.activations = list(self.activations)
        net.W = [w.copy() for w in self.W]
        net.b = [b.copy() for b in self.b]
        return net

    def forward(self, x):
        """Returns ``(y, cache)``; ``cache`` holds every layer's input and output."""
        x = np.asarray(x, dtype=float)
        single = x.ndim == 1
        h = x[None, :] if single else x
        if h.shape[1] != self.sizes[0]:
            raise ValueError(f"input has {h.shape[1]} features, network expects {self.sizes[0]}")
        outs = [h]
        for W, b, act in zip(self.W, self.b, self.activations):
            h = _ACT[act][0](h @ W + b)
            outs.append(h)
        return (h[0] if single else h), (single, outs)

    def __call__(self, x):
        return self.forward(x)[0]

    def backward(self, cache, dy):
        """Gradients ``(dW, db, dx)`` of a scalar loss given ``dL/dy``."""
        single, outs = cache
        g = np.asarray(dy, dtype=float)
        g = g[None, :] if single else g
        dW = [None] * len(self.W)
        db = [None] * len(self.W)
        for i in reversed(range(len(self.W))):
            g = g * _ACT[self.activations[i]][1](outs[i + 1])
            dW[i] = outs[i].T @ g
            db[i] = g.sum(axis=0)
            g = g @ self.W[i].T
        return dW, db, (g[0] if single else g)

    def to_dict(self) -> dict:
        return {"sizes": self.sizes, "activations": self.activations,
                "W": [w.tolist() for w in self.W], "b": [b.tolist() for b in self.b]}

    @classmethod
    def from_dict(cls, d: dict) -> "Mlp":
        net = cls.__new__(cls)
        net.sizes = [int(s) for s in d["sizes"]]
        net.activations = list(d["activations"])
        net.W = [np.array(w, dtype=float).reshape(a, b)
                 for w, a, b in zip(d["W"], net.sizes[:-1], net.sizes[1:])]
        net.b = [np.array(b, dtype=float) for b in d["b"]]
        return net


def mlp_forward(net: Mlp, x):
    return net.forward(x)


def mlp_backward(net: Mlp, cache, dy):
    return net.backward(cache, dy)


def soft_update(target: Mlp, online: Mlp, tau: float) -> Mlp:
    """In place: ``theta' <- tau * theta + (1 - tau) * theta'``."""
    if target.sizes != online.sizes or target.activations != online.activations:
        raise ValueError("target and online networks differ in architecture")
    for t, o in zip(target.params, online.params):
        t *= 1.0 - tau
        t += tau * o
    return target


class Sgd:
    def __init__(self, lr: float):
        self.lr = lr

    def step(self, params, grads):
        for p, g in zip(params, grads):
            p -= self.lr * g


class Adam:
    def __init__(self, lr: float, beta1=0.9, beta2=0.999, eps=1e-8):
        self.lr, self.beta1, self.beta2, self.eps = lr, beta1, beta2, eps
        self.m = self.v = None
        self.t = 0

    def step(self, params, grads):
        if self.m is None:
            self.m = [np.zeros_like(p) for p in params]
            self.v = [np.zeros_like(p) for p in params]
        self.t += 1
        c1 = 1.0 - self.beta1 ** self.t
        c2 = 1.0 - self.beta2 ** self.t
        for p, g, m, v in zip(params, grads, self.m, self.v):
            m *= self.beta1
            m += (1.0 - self.beta1) * g
            v *= self.beta2
            v += (1.0 - self.beta2) * g * g
            p -= self.lr * (m / c1) / (np.sqrt(v / c2) + self.eps)


@dataclass
class Transition:
    state: np.ndarray
    action: np.ndarray
    reward: float
    next_state: np.ndarray


class ReplayBuffer:
    """Fixed-capacity ring buffer with uniform sampling."""

    def __init__(self, capacity: int, state_dim: int, action_dim: int):
        if capacity < 1:
            raise ValueError("capacity must be positive")
        self.capacity = capacity
        self.s = np.zeros((capacity, state_dim))
        self.a = np.zeros((capacity, action_dim))
        self.r = np.zeros(capacity)
        self.s2 = np.zeros((capacity, state_dim))
        self.size = 0
        self._next = 0

    def __len__(self) -> int:
        return self.size

    def push(self, tr: Transition) -> None:
        i = self._next
        self.s[i], self.a[i], self.r[i], self.s2[i] = tr.state, tr.action, tr.reward, tr.next_state
        self._next = (i + 1) % self.capacity
        self.size = min(self.size + 1, self.capacity)

    def sample(self, batch_size: int, rng):
        if self.size < batch_size:
            raise ValueError(f"buffer holds {self.size} transitions, batch needs {batch_size}")
        idx = rng.choice(self.size, size=batch_size, replace=False)
        return self.s[idx], self.a[idx], self.r[idx], self.s2[idx]


@dataclass
class DdpgConfig:
    batch_size: int = 128
    gamma: float = 0.99
    actor_lr: float = 3e-4
    critic_lr: float = 3e-4
    tau: float = 0.005
    noise_sigma: float = 0.3
    noise_decay: float = 0.995
    hidden: list[int] = field(default_factory=lambda: [64, 64])
    buffer_capacity: int = 100_000
    optimizer: str = "sgd"
    seed: int = 0

    def __post_init__(self):
        if not 0 <= self.gamma <= 1:
            raise ValueError("gamma must lie in [0, 1]")
        if self.actor_lr <= 0 or self.critic_lr <= 0:
            raise ValueError("learning rates must be positive")
        if not 0 < self.tau <= 1:
            raise ValueError("tau must lie in (0, 1]")
        if self.optimizer not in ("sgd", "adam"):
            raise ValueError(f"unknown optimizer {self.optimizer!r}")


def _optimizer(kind: str, lr: float):
    return Adam(lr) if kind == "adam" else Sgd(lr)


class DdpgAgent:
    """Actor-critic agent; not safe for concurrent use."""

    def __init__(self, state_dim: int, action_dim: int, cfg: DdpgConfig):
        self.cfg = cfg
        self.state_dim, self.action_dim = state_dim, action_dim
        self.rng = np.random.default_rng(cfg.seed)
        hid = list(cfg.hidden)
        self.actor = Mlp([state_dim, *hid, action_dim], ["tanh"] * (len(hid) + 1), self.rng)
        self.critic = Mlp([state_dim + action_dim, *hid, 1], ["tanh"] * len(hid) + ["linear"], self.rng)
        self.actor_target = self.actor.copy()
        self.critic_target = self.critic.copy()
        self.actor_opt = _optimizer(cfg.optimizer, cfg.actor_lr)
        self.critic_opt = _optimizer(cfg.optimizer, cfg.critic_lr)
        self.buffer = ReplayBuffer(cfg.buffer_capacity, state_dim, action_dim)
        self.explore_calls = 0

    def noise_sigma(self) -> float:
        return self.cfg.noise_sigma * self.cfg.noise_decay ** self.explore_calls

    def act(self, state, explore: bool = False) -> np.ndarray:
        a = self.actor(np.asarray(state, dtype=float))
        if explore:
            sigma = self.noise_sigma()
            self.explore_calls += 1
            a = a + sigma * self.rng.standard_normal(self.action_dim)
        return np.clip(a, -1.0, 1.0)

    def remember(self, s, a, r, s2) -> None:
        self.buffer.push(Transition(np.asarray(s, float), np.asarray(a, float), float(r), np.asarray(s2, float)))

    def train_step(self) -> tuple[float, float]:
        """One critic and one actor update, then soft target updates."""
        cfg = self.cfg
        s, a, r, s2 = self.buffer.sample(cfg.batch_size, self.rng)
        n = len(r)

        a2 = self.actor_target(s2)
        q2 = self.critic_target(np.hstack([s2, a2]))[:, 0]
        y = r + cfg.gamma * q2
        q, cache = self.critic.forward(np.hstack([s, a]))
        err = q[:, 0] - y
        critic_loss = float(np.mean(err * err))
        dW, db, _ = self.critic.backward(cache, (2.0 / n) * err[:, None])
        self.critic_opt.step(self.critic.params, _interleave(dW, db))

        mu, a_cache = self.actor.forward(s)
        qa, c_cache = self.critic.forward(np.hstack([s, mu]))
        actor_obj = float(np.mean(qa))
        _, _, dx = self.critic.backward(c_cache, np.full((n, 1), -1.0 / n))
        dW, db, _ = self.actor.backward(a_cache, dx[:, self.state_dim:])
        self.actor_opt.step(self.actor.params, _interleave(dW, db))

        soft_update(self.actor_target, self.actor, cfg.tau)
        soft_update(self.critic_target, self.critic, cfg.tau)
        return critic_loss, actor_obj

    def checkpoint(self) -> dict:
        return {
            "format": CHECKPOINT_FORMAT,
            "version": CHECKPOINT_VERSION,
            "config": asdict(self.cfg),
            "state_dim": self.state_dim,
            "action_dim": self.action_dim,
            "explore_calls": self.explore_calls,
            "actor": self.actor.to_dict(),
            "critic": self.critic.to_dict(),
            "actor_target": self.actor_target.to_dict(),
            "critic_target": self.critic_target.to_dict(),
        }

    def save(self, path) -> None:
        with open(path, "w") as fh:
            json.dump(self.checkpoint(), fh)

    @classmethod
    def load(cls, path) -> "DdpgAgent":
        with open(path) as fh:
            d = json.load(fh)
        if d.get("format") != CHECKPOINT_FORMAT or d.get("version") != CHECKPOINT_VERSION:
            raise ValueError(f"{path}: not a version-{CHECKPOINT_VERSION} checkpoint")
        agent = cls(d["state_dim"], d["action_dim"], DdpgConfig(**d["config"]))
        for name in ("actor", "critic", "actor_target", "critic_target"):
            setattr(agent, name, Mlp.from_dict(d[name]))
        agent.explore_calls = d["explore_calls"]
        return agent


def _interleave(dW, db):
    return [g for pair in zip(dW, db) for g in pair]
