import logging
from dataclasses import dataclass, field
from typing import Callable, Dict, List, Optional, Tuple

import numpy as np

from utils.errors import ConfigError, GradCheckError

logger = logging.getLogger(__name__)

LossFn = Callable[[Dict[str, np.ndarray]], Tuple[float, Dict[str, np.ndarray]]]


@dataclass
class GradCheckReport:
    max_rel_err: float
    param_count: int
    tol: float
    # (tensor name, flat index, analytic, numeric, relative error), worst first
    worst: List[Tuple[str, int, float, float, float]] = field(default_factory=list)
    # entries whose difference interval straddles a non-differentiable point
    skipped: int = 0

    @property
    def passed(self) -> bool:
        return self.max_rel_err < self.tol

    @property
    def checked(self) -> int:
        return self.param_count - self.skipped


def relative_error(analytic: float, numeric: float, floor: float = 1e-5) -> float:
    return abs(analytic - numeric) / max(abs(analytic), abs(numeric), floor)


def grad_check(loss_fn: LossFn, params: Dict[str, np.ndarray], h: float = 1e-5, tol: float = 1e-4,
               max_entries: Optional[int] = None, seed: int = 0, floor: float = 1e-5,
               keep_worst: int = 10, kink_tol: Optional[float] = None) -> GradCheckReport:
    """
    Compare the analytic gradient returned by loss_fn with central differences.

    loss_fn(params) must return (loss, grads) with grads keyed like params.
    max_entries limits how many entries per tensor are perturbed (random subset).
    With kink_tol set, entries whose forward and backward one-sided slopes
    disagree by more than kink_tol (relative) are treated as straddling a
    kink (ReLU, hinge) and left out of the error statistics.
    """
    if not 1e-5 <= h <= 1e-3:
        raise ConfigError(f"finite-difference step must lie in [1e-5, 1e-3], got {h}")
    work = {name: np.array(value, dtype=np.float64, copy=True) for name, value in params.items()}
    f0, analytic = loss_fn(work)
    rng = np.random.default_rng(seed)

    results = []
    checked = skipped = 0
    for name, tensor in work.items():
        flat = tensor.reshape(-1)
        grad = np.asarray(analytic.get(name, np.zeros_like(tensor))).reshape(-1)
        indices = np.arange(flat.size)
        if max_entries is not None and flat.size > max_entries:
            indices = np.sort(rng.choice(flat.size, size=max_entries, replace=False))
        for index in indices:
            original = flat[index]
            flat[index] = original + h
            f_plus, _ = loss_fn(work)
            flat[index] = original - h
            f_minus, _ = loss_fn(work)
            flat[index] = original
            if not (np.isfinite(f_plus) and np.isfinite(f_minus)):
                raise GradCheckError(f"non-finite loss while perturbing {name}[{index}]", index=int(index), name=name)
            checked += 1
            if kink_tol is not None:
                forward = (f_plus - f0) / h
                backward = (f0 - f_minus) / h
                if relative_error(forward, backward, floor) > kink_tol:
                    skipped += 1
                    continue
            numeric = (f_plus - f_minus) / (2.0 * h)
            rel = relative_error(float(grad[index]), numeric, floor)
            results.append((name, int(index), float(grad[index]), float(numeric), rel))

    results.sort(key=lambda r: r[4], reverse=True)
    max_rel = results[0][4] if results else 0.0
    logger.debug("grad check over %d entries (%d skipped at kinks): max relative error %.3e",
                 checked, skipped, max_rel)
    return GradCheckReport(max_rel_err=max_rel, param_count=checked, tol=tol, worst=results[:keep_worst],
                           skipped=skipped)
