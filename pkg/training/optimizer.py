from typing import Dict, Iterable, Tuple

import numpy as np

from sond.params import Params


def clip_grad_norm(grads: Params, max_norm: float) -> Tuple[Params, float]:
    """Scale all gradients together so their global L2 norm is at most max_norm"""
    norm = float(np.sqrt(sum(float((g * g).sum()) for _, g in grads.items())))
    if max_norm > 0 and norm > max_norm:
        scale = max_norm / (norm + 1e-12)
        for name, g in grads.items():
            grads[name] = g * scale
    return grads, norm


class Adam:
    """Adam with bias correction; frozen tensors are never touched"""

    def __init__(self, beta1: float = 0.9, beta2: float = 0.999, eps: float = 1e-8):
        self.beta1 = beta1
        self.beta2 = beta2
        self.eps = eps
        self.t = 0
        self.m: Dict[str, np.ndarray] = {}
        self.v: Dict[str, np.ndarray] = {}

    def step(self, params: Params, grads: Params, lr: float, frozen: Iterable[str] = ()) -> Params:
        frozen = set(frozen)
        self.t += 1
        c1 = 1.0 - self.beta1 ** self.t
        c2 = 1.0 - self.beta2 ** self.t
        for name, g in grads.items():
            if name in frozen:
                continue
            m = self.m.get(name)
            if m is None:
                m = self.m[name] = np.zeros_like(g)
                self.v[name] = np.zeros_like(g)
            v = self.v[name]
            m *= self.beta1
            m += (1.0 - self.beta1) * g
            v *= self.beta2
            v += (1.0 - self.beta2) * g * g
            params[name] = params[name] - lr * (m / c1) / (np.sqrt(v / c2) + self.eps)
        return params
