import json
import logging
import struct
from collections import OrderedDict
from typing import Tuple

import numpy as np

from sond.config import ModelConfig
from sond.params import Params, param_shapes
from utils.errors import CheckpointError

logger = logging.getLogger(__name__)

VERSION_TAG = b"sond-ckpt-v1"

# Layout (all little-endian):
#   tag | u32 header length | JSON ModelConfig | u32 entry count |
#   per entry: u16 name length | name | u8 ndim | ndim x u32 | float64 values


def save_checkpoint(path: str, params: Params, cfg: ModelConfig) -> None:
    header = json.dumps(cfg.to_dict(), sort_keys=True).encode("utf-8")
    with open(path, "wb") as f:
        f.write(VERSION_TAG)
        f.write(struct.pack("<I", len(header)))
        f.write(header)
        f.write(struct.pack("<I", len(params)))
        for name, tensor in params.items():
            encoded = name.encode("utf-8")
            f.write(struct.pack("<H", len(encoded)))
            f.write(encoded)
            f.write(struct.pack("<B", tensor.ndim))
            f.write(struct.pack(f"<{tensor.ndim}I", *tensor.shape))
            f.write(np.ascontiguousarray(tensor, dtype="<f8").tobytes())
    logger.info("Saved checkpoint %s (%d tensors)", path, len(params))


def load_checkpoint(path: str) -> Tuple[ModelConfig, Params]:
    with open(path, "rb") as f:
        data = f.read()
    if not data.startswith(VERSION_TAG):
        raise CheckpointError(f"{path} is not a {VERSION_TAG.decode()} checkpoint")
    try:
        pos = len(VERSION_TAG)
        (header_len,) = struct.unpack_from("<I", data, pos)
        pos += 4
        cfg = ModelConfig.from_dict(json.loads(data[pos:pos + header_len].decode("utf-8")))
        pos += header_len
        (count,) = struct.unpack_from("<I", data, pos)
        pos += 4
        tensors = OrderedDict()
        for _ in range(count):
            (name_len,) = struct.unpack_from("<H", data, pos)
            pos += 2
            name = data[pos:pos + name_len].decode("utf-8")
            pos += name_len
            (ndim,) = struct.unpack_from("<B", data, pos)
            pos += 1
            shape = struct.unpack_from(f"<{ndim}I", data, pos)
            pos += 4 * ndim
            size = int(np.prod(shape)) if ndim else 1
            values = np.frombuffer(data, dtype="<f8", count=size, offset=pos)
            pos += 8 * size
            tensors[name] = values.astype(np.float64).reshape(shape)
    except (struct.error, ValueError) as exc:
        raise CheckpointError(f"corrupt checkpoint {path}: {exc}") from exc
    params = Params(tensors)
    params.check_shapes(param_shapes(cfg))
    return cfg, params
