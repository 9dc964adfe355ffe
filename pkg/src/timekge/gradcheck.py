"""Finite-difference checking of hand-derived gradients.

Central differences on a scalar loss, compared coordinate-by-coordinate
against analytic gradients. Large tensors are probed at a seeded random
sample of coordinates; checking every coordinate of a realistically
sized model would take hours and adds nothing.
"""

from dataclasses import dataclass
from typing import Callable, Mapping

import numpy as np

from .errors import GradCheckError, ShapeError

DEFAULT_MAX_COORDS = 256
# floor for the relative-error denominator, so that near-zero gradient
# pairs compare on absolute terms
REL_FLOOR = 1e-8


@dataclass
class GradCheckReport:
    max_rel_error: float
    worst_param: str
    num_checked: int


def relative_error(analytic: float, numeric: float) -> float:
    return abs(analytic - numeric) / max(abs(analytic), abs(numeric), REL_FLOOR)


def finite_diff_check(
    loss_fn: Callable[[], float],
    params: Mapping[str, np.ndarray],
    analytic_grads: Mapping[str, np.ndarray],
    epsilon: float = 1e-5,
    max_coords: int = DEFAULT_MAX_COORDS,
    seed: int = 0,
) -> GradCheckReport:
    """Compare analytic gradients against central differences of ``loss_fn``.

    ``loss_fn`` takes no arguments and must read the (temporarily
    perturbed) arrays in ``params``; each array is restored before the
    next probe. At most ``max_coords`` coordinates per tensor are probed,
    chosen by a generator seeded with ``seed``.
    """
    if epsilon <= 0:
        raise ValueError(f"epsilon must be positive, got {epsilon}")
    for name, p in params.items():
        g = analytic_grads.get(name)
        if g is None or np.shape(g) != np.shape(p):
            raise ShapeError(
                f"gradient for '{name}' has shape "
                f"{None if g is None else np.shape(g)}, parameter has {np.shape(p)}"
            )

    rng = np.random.default_rng(seed)
    worst = 0.0
    worst_param = ""
    checked = 0
    for name in sorted(params):
        param = params[name]
        grad = analytic_grads[name]
        flat = param.reshape(-1)
        gflat = np.asarray(grad).reshape(-1)
        n = flat.shape[0]
        if n == 0:
            continue
        if n <= max_coords:
            coords = np.arange(n)
        else:
            coords = rng.choice(n, size=max_coords, replace=False)
        for c in coords:
            orig = flat[c]
            flat[c] = orig + epsilon
            f_plus = float(loss_fn())
            flat[c] = orig - epsilon
            f_minus = float(loss_fn())
            flat[c] = orig
            if not (np.isfinite(f_plus) and np.isfinite(f_minus)):
                raise GradCheckError(
                    f"non-finite loss while probing {name}[{c}]: "
                    f"f(+eps)={f_plus}, f(-eps)={f_minus}"
                )
            numeric = (f_plus - f_minus) / (2.0 * epsilon)
            err = relative_error(float(gflat[c]), numeric)
            checked += 1
            if err > worst:
                worst = err
                worst_param = f"{name}[{c}]"
    return GradCheckReport(max_rel_error=worst, worst_param=worst_param, num_checked=checked)
