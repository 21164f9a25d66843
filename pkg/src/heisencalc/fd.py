"""Finite differences for closure-valued symbols.

Derivatives of symbol evaluators f(lam, xi_1..xi_n, u_1..u_n) are taken with
5-point central stencils (exact on quartics), one first-derivative level per
requested order so the difference operators compose the way the calculus
does.  Steps are relative: coordinate slots use rel_step * max(1, |coord|),
the lambda slot uses rel_step * |lambda| (lambda never crosses zero).

Each stencil level evaluates the wrapped closure once on a stacked array (a
new leading axis holds the four shifted copies), so deeply nested derivative
trees cost a handful of vectorized calls rather than 4^depth Python calls.
"""

from __future__ import annotations

import numpy as np

_OFFSETS = np.array([-2.0, -1.0, 1.0, 2.0])
_WEIGHTS = np.array([1.0, -8.0, 8.0, -1.0]) / 12.0


class NonSmoothEvaluatorError(ValueError):
    """Finite-difference estimates failed to converge: evaluator not smooth."""


def _lead_shape(ndim: int) -> tuple:
    return (4,) + (1,) * ndim


def coordinate_partial(fn, slot: int, rel_step: float = 1e-2, scale: float = 1.0):
    """d/d(coords[slot]) of fn(lam, *coords), as a new closure."""

    def d(lam, *coords):
        coords = [np.asarray(c, dtype=float) for c in coords]
        ndim = max([np.ndim(lam)] + [c.ndim for c in coords])
        c0 = coords[slot]
        h = rel_step * np.maximum(scale, np.abs(c0))
        off = _OFFSETS.reshape(_lead_shape(ndim))
        shifted = list(coords)
        shifted[slot] = c0 + off * h
        vals = np.asarray(fn(lam, *shifted), dtype=complex)
        # evaluators that ignore the shifted slot come back without the
        # stencil axis; broadcast it in before contracting
        vals = np.broadcast_to(vals, np.broadcast_shapes(vals.shape,
                                                         _lead_shape(ndim)))
        return np.tensordot(_WEIGHTS, vals, axes=(0, 0)) / h

    return d


def lambda_partial(fn, rel_step: float = 1e-2):
    """d/d lambda of fn(lam, *coords), multiplicative step (lambda != 0)."""

    def d(lam, *coords):
        lam_arr = np.asarray(lam, dtype=float)
        ndim = max([lam_arr.ndim] + [np.ndim(c) for c in coords])
        h = rel_step * np.abs(lam_arr)
        off = _OFFSETS.reshape(_lead_shape(ndim))
        vals = np.asarray(fn(lam_arr + off * h, *coords), dtype=complex)
        vals = np.broadcast_to(vals, np.broadcast_shapes(vals.shape,
                                                         _lead_shape(ndim)))
        return np.tensordot(_WEIGHTS, vals, axes=(0, 0)) / h

    return d


def check_smoothness(fn, lam, coords, slots=None, rel_step: float = 1e-2,
                     tol: float = 1e-4):
    """Raise NonSmoothEvaluatorError when step-halving moves a derivative.

    ``slots``: iterable of "lam" or coordinate indices; defaults to all.
    The comparison is relative to the local value scale.
    """
    coords = [np.asarray(c, dtype=float) for c in coords]
    base = np.max(np.abs(np.asarray(fn(lam, *coords)))) + 1e-30
    if slots is None:
        slots = ["lam"] + list(range(len(coords)))
    for slot in slots:
        if slot == "lam":
            d1 = lambda_partial(fn, rel_step)(lam, *coords)
            d2 = lambda_partial(fn, rel_step / 2.0)(lam, *coords)
            scale = abs(lam)
        else:
            d1 = coordinate_partial(fn, slot, rel_step)(lam, *coords)
            d2 = coordinate_partial(fn, slot, rel_step / 2.0)(lam, *coords)
            scale = 1.0
        drift = np.max(np.abs(d1 - d2)) * scale
        level = max(base, np.max(np.abs(d2)) * scale)
        if drift > tol * level:
            raise NonSmoothEvaluatorError(
                f"slot {slot}: derivative drifts by {drift:.2e} "
                f"(tolerance {tol:.1e} x {level:.2e}) under step halving")
