"""The Heisenberg group H_n: points, group law, dilations, vector fields.

Functions on the group are sampled on tensor grids over R^{2n+1} with axis
order (x_1..x_n, y_1..y_n, t).  Left-invariant vector fields are realized by
4th-order central differences; iterated application gives the ordered
monomials X^{b1} Y^{b2} T^{b3} (rightmost factor acts first).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .grids import Grid1D, GridFunction, GridError


@dataclass(frozen=True)
class HPoint:
    """Group element g = (x, y, t) with x, y in R^n."""

    x: tuple[float, ...]
    y: tuple[float, ...]
    t: float

    def __post_init__(self):
        object.__setattr__(self, "x", tuple(float(v) for v in np.atleast_1d(self.x)))
        object.__setattr__(self, "y", tuple(float(v) for v in np.atleast_1d(self.y)))
        object.__setattr__(self, "t", float(self.t))
        if len(self.x) != len(self.y):
            raise ValueError("x and y must have the same dimension")

    @property
    def n(self) -> int:
        return len(self.x)

    @classmethod
    def identity(cls, n: int) -> "HPoint":
        return cls((0.0,) * n, (0.0,) * n, 0.0)


def group_mul(g: HPoint, g2: HPoint) -> HPoint:
    """(x,y,t)(x',y',t') = (x+x', y+y', t+t'+ (x.y' - x'.y)/2)."""
    if g.n != g2.n:
        raise ValueError("dimension mismatch")
    x = np.add(g.x, g2.x)
    y = np.add(g.y, g2.y)
    twist = 0.5 * (np.dot(g.x, g2.y) - np.dot(g2.x, g.y))
    return HPoint(tuple(x), tuple(y), g.t + g2.t + twist)


def group_inverse(g: HPoint) -> HPoint:
    return HPoint(tuple(-v for v in g.x), tuple(-v for v in g.y), -g.t)


def dilate(r: float, g: HPoint) -> HPoint:
    """Anisotropic dilation (rx, ry, r^2 t); a group automorphism for r > 0."""
    if r <= 0:
        raise ValueError(f"dilation factor must be positive, got {r}")
    return HPoint(tuple(r * v for v in g.x), tuple(r * v for v in g.y), r * r * g.t)


@dataclass(frozen=True)
class MultiIndex:
    """Triple index (alpha1, alpha2, alpha3) over (x, y, t) slots."""

    alpha1: tuple[int, ...]
    alpha2: tuple[int, ...]
    alpha3: int = 0

    def __post_init__(self):
        object.__setattr__(self, "alpha1", tuple(int(v) for v in np.atleast_1d(self.alpha1)))
        object.__setattr__(self, "alpha2", tuple(int(v) for v in np.atleast_1d(self.alpha2)))
        if any(v < 0 for v in self.alpha1 + self.alpha2) or self.alpha3 < 0:
            raise ValueError("multi-index entries must be nonnegative")

    @property
    def homogeneous_degree(self) -> int:
        """|alpha1| + |alpha2| + 2*alpha3 (t counts twice under dilations)."""
        return sum(self.alpha1) + sum(self.alpha2) + 2 * self.alpha3

    @property
    def total_order(self) -> int:
        return sum(self.alpha1) + sum(self.alpha2) + self.alpha3


def group_dimension(f: GridFunction) -> int:
    if f.ndim % 2 != 1 or f.ndim < 3:
        raise GridError(f"expected 2n+1 axes, got {f.ndim}")
    return (f.ndim - 1) // 2


# 4th-order central difference; 2nd-order one-sided rows at the edges.
_INT4 = np.array([1.0, -8.0, 0.0, 8.0, -1.0]) / 12.0


def _diff_axis(values: np.ndarray, axis: int, h: float) -> np.ndarray:
    M = values.shape[axis]
    if M < 5:
        raise GridError("axis too short for the 4th-order stencil")
    v = np.moveaxis(values, axis, 0)
    out = np.empty_like(v)
    out[2:-2] = (_INT4[0] * v[:-4] + _INT4[1] * v[1:-3]
                 + _INT4[3] * v[3:-1] + _INT4[4] * v[4:]) / h
    out[0] = (-1.5 * v[0] + 2.0 * v[1] - 0.5 * v[2]) / h
    out[1] = (v[2] - v[0]) / 2.0 / h
    out[-2] = (v[-1] - v[-3]) / 2.0 / h
    out[-1] = (1.5 * v[-1] - 2.0 * v[-2] + 0.5 * v[-3]) / h
    return np.moveaxis(out, 0, axis)


def _coord_grid(f: GridFunction, axis: int) -> np.ndarray:
    shape = [1] * f.ndim
    shape[axis] = f.grids[axis].points
    return f.grids[axis].nodes.reshape(shape)


def vector_field_apply(which: str, f: GridFunction, j: int = 1) -> GridFunction:
    """Apply X_j, Y_j or T by central differences.

    ``which`` is one of "X", "Y", "T"; ``j`` is 1-based.  Axis order of f is
    (x_1..x_n, y_1..y_n, t).
    """
    n = group_dimension(f)
    if which in ("X", "Y") and not (1 <= j <= n):
        raise ValueError(f"j={j} out of range for n={n}")
    t_ax = 2 * n
    ht = f.grids[t_ax].spacing
    if which == "T":
        return f.with_values(_diff_axis(f.values, t_ax, ht))
    xj_ax, yj_ax = j - 1, n + j - 1
    if which == "X":
        # X_j = d/dx_j - (y_j/2) d/dt
        dv = _diff_axis(f.values, xj_ax, f.grids[xj_ax].spacing)
        dv -= 0.5 * _coord_grid(f, yj_ax) * _diff_axis(f.values, t_ax, ht)
        return f.with_values(dv)
    if which == "Y":
        # Y_j = d/dy_j + (x_j/2) d/dt
        dv = _diff_axis(f.values, yj_ax, f.grids[yj_ax].spacing)
        dv += 0.5 * _coord_grid(f, xj_ax) * _diff_axis(f.values, t_ax, ht)
        return f.with_values(dv)
    raise ValueError(f"unknown field {which!r}")


def monomial_apply(beta: MultiIndex, f: GridFunction) -> GridFunction:
    """Ordered X^{b1} Y^{b2} T^{b3} f; the T factors act first."""
    n = group_dimension(f)
    if len(beta.alpha1) != n or len(beta.alpha2) != n:
        raise ValueError("multi-index dimension mismatch")
    out = f
    for _ in range(beta.alpha3):
        out = vector_field_apply("T", out)
    for j in range(n, 0, -1):
        for _ in range(beta.alpha2[j - 1]):
            out = vector_field_apply("Y", out, j)
    for j in range(n, 0, -1):
        for _ in range(beta.alpha1[j - 1]):
            out = vector_field_apply("X", out, j)
    return out


def sublaplacian_apply(f: GridFunction) -> GridFunction:
    """L f = sum_j (X_j^2 + Y_j^2) f by composed central differences."""
    n = group_dimension(f)
    acc = np.zeros_like(f.values)
    for j in range(1, n + 1):
        acc += vector_field_apply("X", vector_field_apply("X", f, j), j).values
        acc += vector_field_apply("Y", vector_field_apply("Y", f, j), j).values
    return f.with_values(acc)


def default_group_grids(n: int, box: float = 2.0, points: int = 64,
                        t_box: float | None = None, t_points: int | None = None):
    """Box grids for H_n sampling; ``t_box >= box**2`` respects dilations."""
    if t_box is None:
        t_box = box * box
    if t_points is None:
        t_points = points
    return tuple([Grid1D(box, points)] * (2 * n) + [Grid1D(t_box, t_points)])


def interior_slices(f: GridFunction, margin: int = 4) -> tuple[slice, ...]:
    """Index region where iterated central differences are trustworthy."""
    return tuple(slice(margin, g.points - margin) for g in f.grids)
