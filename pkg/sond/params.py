import logging
from collections import OrderedDict
from dataclasses import dataclass, field
from typing import Dict, Iterator, List, Tuple

import numpy as np

from encoding.pse_codec import activity_table
from sond.config import ModelConfig
from utils.errors import ShapeError

logger = logging.getLogger(__name__)

SPEECH_PREFIX = "speech."


@dataclass
class Params:
    """Named float64 tensors of one SOND model"""
    tensors: "OrderedDict[str, np.ndarray]" = field(default_factory=OrderedDict)

    def __getitem__(self, name: str) -> np.ndarray:
        return self.tensors[name]

    def __setitem__(self, name: str, value: np.ndarray) -> None:
        self.tensors[name] = np.asarray(value, dtype=np.float64)

    def __contains__(self, name: str) -> bool:
        return name in self.tensors

    def __iter__(self) -> Iterator[str]:
        return iter(self.tensors)

    def __len__(self) -> int:
        return len(self.tensors)

    def items(self):
        return self.tensors.items()

    @property
    def names(self) -> List[str]:
        return list(self.tensors)

    def shapes(self) -> Dict[str, Tuple[int, ...]]:
        return {name: t.shape for name, t in self.tensors.items()}

    def num_parameters(self) -> int:
        return int(sum(t.size for t in self.tensors.values()))

    def copy(self) -> "Params":
        return Params(OrderedDict((k, v.copy()) for k, v in self.tensors.items()))

    def zeros_like(self) -> "Params":
        return Params(OrderedDict((k, np.zeros_like(v)) for k, v in self.tensors.items()))

    def group(self, prefix: str) -> List[str]:
        return [name for name in self.tensors if name.startswith(prefix)]

    def all_finite(self) -> bool:
        return all(np.all(np.isfinite(t)) for t in self.tensors.values())

    def check_shapes(self, expected: Dict[str, Tuple[int, ...]]) -> None:
        if set(expected) != set(self.tensors):
            missing = sorted(set(expected) - set(self.tensors))
            extra = sorted(set(self.tensors) - set(expected))
            raise ShapeError(f"parameter names differ (missing={missing}, unexpected={extra})")
        for name, shape in expected.items():
            if self.tensors[name].shape != tuple(shape):
                raise ShapeError(f"parameter {name}", self.tensors[name].shape, shape)


def param_shapes(cfg: ModelConfig) -> "OrderedDict[str, Tuple[int, ...]]":
    shapes: "OrderedDict[str, Tuple[int, ...]]" = OrderedDict()
    # speech encoder: conv stack -> windowed statistic pooling -> embedding
    cin = cfg.feat_dim
    for i, cout in enumerate(cfg.conv_channels):
        shapes[f"speech.conv{i}.W"] = (cfg.conv_kernel, cin, cout)
        shapes[f"speech.conv{i}.b"] = (cout,)
        cin = cout
    shapes["speech.emb.W"] = (2 * cin, cfg.emb_dim)
    shapes["speech.emb.b"] = (cfg.emb_dim,)

    din = cfg.profile_dim
    for i in range(cfg.speaker_layers):
        shapes[f"speaker.fc{i}.W"] = (din, cfg.emb_dim)
        shapes[f"speaker.fc{i}.b"] = (cfg.emb_dim,)
        din = cfg.emb_dim

    if cfg.use_cd:
        A, F = cfg.attn_dim, cfg.cd_ff_dim
        shapes["cd.in.W"] = (2 * cfg.emb_dim, A)
        shapes["cd.in.b"] = (A,)
        for l in range(cfg.cd_layers):
            for proj in ("q", "k", "v", "o"):
                shapes[f"cd.l{l}.w{proj}"] = (A, A)
                shapes[f"cd.l{l}.b{proj}"] = (A,)
            shapes[f"cd.l{l}.ff1.W"] = (A, F)
            shapes[f"cd.l{l}.ff1.b"] = (F,)
            shapes[f"cd.l{l}.ff2.W"] = (F, A)
            shapes[f"cd.l{l}.ff2.b"] = (A,)
        shapes["cd.out.W"] = (A, 1)
        shapes["cd.out.b"] = (1,)

    N, dff = cfg.n_slots, cfg.scn_ff_dim
    din = 2 * N
    for l in range(cfg.scn_layers):
        shapes[f"scn.l{l}.ff1.W"] = (din, dff)
        shapes[f"scn.l{l}.ff1.b"] = (dff,)
        shapes[f"scn.l{l}.ln.gain"] = (dff,)
        shapes[f"scn.l{l}.ln.bias"] = (dff,)
        shapes[f"scn.l{l}.ff2.W"] = (dff, N)
        shapes[f"scn.l{l}.ff2.b"] = (N,)
        shapes[f"scn.l{l}.mem.a"] = (cfg.look_back + 1, N)
        shapes[f"scn.l{l}.mem.c"] = (cfg.look_ahead, N)
        din = N
    shapes["out.W"] = (din, cfg.num_outputs)
    shapes["out.b"] = (cfg.num_outputs,)
    return shapes


def init_params(cfg: ModelConfig, seed: int = 0) -> Params:
    """
    Fan-in scaled uniform weights and biases; layer-norm gain 1 / bias 0;
    memory blocks start as identity (centre tap 1, all others 0).

    After an SCN stack the output layer starts factorised: every SCN
    channel is the logit of one slot, so the power-set head begins as
    independent per-speaker decisions restricted to at most K speakers and
    the multilabel head begins as the identity map.
    """
    rng = np.random.default_rng(seed)
    params = Params()
    shapes = param_shapes(cfg)
    for name, shape in shapes.items():
        owner, leaf = name.rsplit(".", 1)
        if leaf == "gain":
            params[name] = np.ones(shape)
        elif leaf in ("bias", "c"):
            params[name] = np.zeros(shape)
        elif leaf == "a":
            taps = np.zeros(shape)
            taps[0] = 1.0
            params[name] = taps
        else:
            weight = f"{owner}.W" if leaf in ("W", "b") else f"{owner}.w{leaf[1:]}"
            bound = 1.0 / np.sqrt(np.prod(shapes[weight][:-1]))
            params[name] = rng.uniform(-bound, bound, size=shape)
    if cfg.scn_layers > 0:
        params["out.W"] = _factorised_output(cfg)
        params["out.b"] = np.zeros(cfg.num_outputs)
    logger.debug("Initialised %d tensors (%d values)", len(params), params.num_parameters())
    return params


def _factorised_output(cfg: ModelConfig) -> np.ndarray:
    """N x outputs map under which class c scores the sum of its speakers' logits"""
    if cfg.output_head == "pse":
        return activity_table(cfg.pse).T.astype(np.float64)
    return np.eye(cfg.n_slots)
