"""Adaptive Simpson quadrature with interval bisection.

Vectorized breadth-first variant: all unconverged intervals of one level are
refined together, so integrands must accept numpy arrays.
"""

from collections.abc import Callable
from dataclasses import dataclass

import numpy as np

from hyperstab.config.constants import QUAD_MAX_LEVELS, QUAD_MAX_PANELS, QUAD_REL_TOL
from hyperstab.utils.logger import get_logger

logger = get_logger(__name__)

_MAX_ACTIVE = 1 << 18

Integrand = Callable[[np.ndarray], np.ndarray]


@dataclass
class Quadrature:
    """Integral value with its error estimate."""
    value: float
    error: float
    evaluations: int
    converged: bool


def adaptive_simpson(
    f: Integrand,
    a: float,
    b: float,
    rel_tol: float = QUAD_REL_TOL,
    abs_tol: float = 0.0,
    panels: int = 1,
    max_levels: int = QUAD_MAX_LEVELS,
) -> Quadrature:
    """Integrate f over [a, b] to max(abs_tol, rel_tol * |I|).

    Args:
        f: Vectorized integrand.
        a: Lower bound.
        b: Upper bound.
        rel_tol: Relative tolerance against the first coarse estimate.
        abs_tol: Absolute tolerance floor.
        panels: Number of equal starting panels (use ~ one per kernel width).
        max_levels: Maximum bisection depth.
    """
    if a == b:
        return Quadrature(0.0, 0.0, 0, True)
    if a > b:
        q = adaptive_simpson(f, b, a, rel_tol, abs_tol, panels, max_levels)
        return Quadrature(-q.value, q.error, q.evaluations, q.converged)

    integrand = f

    def f(x: np.ndarray) -> np.ndarray:
        return np.broadcast_to(np.asarray(integrand(x), dtype=float), x.shape)

    panels = int(min(max(panels, 1), QUAD_MAX_PANELS))
    edges = np.linspace(a, b, panels + 1)
    lo, hi = edges[:-1], edges[1:]
    mid = 0.5 * (lo + hi)
    f_lo, f_mid, f_hi = f(lo), f(mid), f(hi)
    whole = (hi - lo) / 6.0 * (f_lo + 4.0 * f_mid + f_hi)
    evaluations = 3 * panels

    length = b - a
    total = 0.0
    error = 0.0
    converged = True

    for level in range(max_levels):
        l_mid = 0.5 * (lo + mid)
        r_mid = 0.5 * (mid + hi)
        f_lmid, f_rmid = f(l_mid), f(r_mid)
        evaluations += 2 * lo.size

        left = (mid - lo) / 6.0 * (f_lo + 4.0 * f_lmid + f_mid)
        right = (hi - mid) / 6.0 * (f_mid + 4.0 * f_rmid + f_hi)
        delta = left + right - whole

        # Tolerance tracks the running estimate of the whole integral
        target = max(abs_tol, rel_tol * abs(total + float(np.sum(left + right))))
        done = np.abs(delta) <= 15.0 * target * (hi - lo) / length
        if level == max_levels - 1 or np.count_nonzero(~done) > _MAX_ACTIVE:
            if not done.all():
                converged = False
            done[:] = True

        # Richardson-corrected accepted pieces
        total += float(np.sum((left + right + delta / 15.0)[done]))
        error += float(np.sum(np.abs(delta[done]) / 15.0))

        keep = ~done
        if not keep.any():
            break
        lo, mid, hi = (
            np.concatenate([lo[keep], mid[keep]]),
            np.concatenate([l_mid[keep], r_mid[keep]]),
            np.concatenate([mid[keep], hi[keep]]),
        )
        f_lo, f_mid, f_hi = (
            np.concatenate([f_lo[keep], f_mid[keep]]),
            np.concatenate([f_lmid[keep], f_rmid[keep]]),
            np.concatenate([f_mid[keep], f_hi[keep]]),
        )
        whole = np.concatenate([left[keep], right[keep]])

    if not converged:
        logger.warning("quadrature_not_converged", a=a, b=b, error=error)
    return Quadrature(total, error, evaluations, converged)
