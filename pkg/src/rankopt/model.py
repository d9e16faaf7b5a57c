"""Small probabilistic scorer with hand-written forward/backward passes.

``hidden_dim == 0`` gives logistic regression ``sigmoid(w.x + b)``; otherwise a
one-hidden-layer perceptron ``sigmoid(w2 . tanh(W1 x + b1) + b2)``. Parameters
are a plain dict of float64 arrays.
"""
import json
from dataclasses import asdict, dataclass

import numpy as np
from scipy.special import expit

from .errors import ConfigError, DimensionError, TrainingAborted

CHECKPOINT_FORMAT = "rankopt-checkpoint"
CHECKPOINT_VERSION = 1

# keeps sigmoid outputs strictly inside (0, 1) in float64
LOGIT_CLIP = 30.0


@dataclass(frozen=True)
class ScorerConfig:
    input_dim: int
    hidden_dim: int = 0
    seed: int = 0
    init_scale: float = 0.1

    def __post_init__(self):
        if self.input_dim < 1:
            raise ConfigError("input_dim must be >= 1")
        if self.hidden_dim < 0:
            raise ConfigError("hidden_dim must be >= 0")
        if self.init_scale < 0:
            raise ConfigError("init_scale must be >= 0")


def init_params(config):
    """Uniform weights in [-init_scale, init_scale], zero biases."""
    rng = np.random.default_rng(config.seed)
    a = config.init_scale
    if config.hidden_dim == 0:
        return {
            "w": rng.uniform(-a, a, size=config.input_dim),
            "b": np.zeros(()),
        }
    h = config.hidden_dim
    return {
        "W1": rng.uniform(-a, a, size=(h, config.input_dim)),
        "b1": np.zeros(h),
        "w2": rng.uniform(-a, a, size=h),
        "b2": np.zeros(()),
    }


def _check_input(params, features):
    x = np.asarray(features, dtype=np.float64)
    d = params["w"].shape[0] if "w" in params else params["W1"].shape[1]
    if x.ndim != 2 or x.shape[1] != d:
        raise DimensionError(f"expected features of shape (n, {d}), got {x.shape}")
    return x


def forward(params, features, return_hidden=False):
    x = _check_input(params, features)
    if "w" in params:
        hidden = None
        logit = x @ params["w"] + params["b"]
    else:
        hidden = np.tanh(x @ params["W1"].T + params["b1"])
        logit = hidden @ params["w2"] + params["b2"]
    scores = expit(np.clip(logit, -LOGIT_CLIP, LOGIT_CLIP))
    if return_hidden:
        return scores, hidden
    return scores


def backward(params, features, dscore, scores=None, hidden=None):
    """Parameter gradients of ``sum_i dscore[i] * score_i``.

    ``scores`` and ``hidden`` may be passed from a previous ``forward`` call
    to skip recomputation.
    """
    x = _check_input(params, features)
    dscore = np.asarray(dscore, dtype=np.float64)
    if dscore.shape != (x.shape[0],):
        raise DimensionError("dscore must hold one entry per sample")
    if scores is None or ("W1" in params and hidden is None):
        scores, hidden = forward(params, x, return_hidden=True)
    dlogit = dscore * scores * (1.0 - scores)
    if "w" in params:
        return {"w": x.T @ dlogit, "b": np.asarray(dlogit.sum())}
    dhidden = np.outer(dlogit, params["w2"]) * (1.0 - hidden * hidden)
    return {
        "W1": dhidden.T @ x,
        "b1": dhidden.sum(axis=0),
        "w2": hidden.T @ dlogit,
        "b2": np.asarray(dlogit.sum()),
    }


def _check_grads(grads):
    for name, g in grads.items():
        if not np.all(np.isfinite(g)):
            raise TrainingAborted(f"non-finite gradient in parameter {name!r}")


class SGD:
    kind = "sgd"

    def __init__(self, lr=0.01, weight_decay=0.0):
        self.lr = lr
        self.weight_decay = weight_decay

    def step(self, params, grads):
        _check_grads(grads)
        for k, g in grads.items():
            if self.weight_decay:
                g = g + self.weight_decay * params[k]
            params[k] = params[k] - self.lr * g
        return params


class Adam:
    kind = "adam"

    def __init__(self, lr=0.001, beta1=0.9, beta2=0.999, eps=1e-8, weight_decay=0.0):
        self.lr = lr
        self.beta1 = beta1
        self.beta2 = beta2
        self.eps = eps
        self.weight_decay = weight_decay
        self.m = {}
        self.v = {}
        self.t = 0

    def step(self, params, grads):
        _check_grads(grads)
        self.t += 1
        bc1 = 1.0 - self.beta1 ** self.t
        bc2 = 1.0 - self.beta2 ** self.t
        for k, g in grads.items():
            if self.weight_decay:
                g = g + self.weight_decay * params[k]
            if k not in self.m:
                self.m[k] = np.zeros_like(params[k])
                self.v[k] = np.zeros_like(params[k])
            self.m[k] = self.beta1 * self.m[k] + (1.0 - self.beta1) * g
            self.v[k] = self.beta2 * self.v[k] + (1.0 - self.beta2) * (g * g)
            m_hat = self.m[k] / bc1
            v_hat = self.v[k] / bc2
            params[k] = params[k] - self.lr * m_hat / (np.sqrt(v_hat) + self.eps)
        return params


def make_optimizer(kind, lr, weight_decay=0.0):
    if kind == "adam":
        return Adam(lr=lr, weight_decay=weight_decay)
    if kind == "sgd":
        return SGD(lr=lr, weight_decay=weight_decay)
    raise ConfigError(f"unknown optimizer {kind!r}; expected 'adam' or 'sgd'")


def save_checkpoint(path, config, params, extra=None):
    payload = {
        "format": CHECKPOINT_FORMAT,
        "version": CHECKPOINT_VERSION,
        "config": asdict(config),
        "params": {
            k: {"shape": list(v.shape), "data": np.ravel(v).tolist()} for k, v in sorted(params.items())
        },
    }
    if extra:
        payload["extra"] = extra
    with open(path, "w") as fh:
        json.dump(payload, fh, indent=1, sort_keys=True)
        fh.write("\n")


def load_checkpoint(path):
    """Returns (config, params, extra)."""
    with open(path) as fh:
        payload = json.load(fh)
    if payload.get("format") != CHECKPOINT_FORMAT:
        raise ConfigError(f"{path}: not a rankopt checkpoint")
    if payload.get("version") != CHECKPOINT_VERSION:
        raise ConfigError(f"{path}: unsupported checkpoint version {payload.get('version')}")
    config = ScorerConfig(**payload["config"])
    params = {
        k: np.array(v["data"], dtype=np.float64).reshape(v["shape"]) for k, v in payload["params"].items()
    }
    return config, params, payload.get("extra", {})


def flatten(params):
    return np.concatenate([np.ravel(params[k]) for k in sorted(params)])
