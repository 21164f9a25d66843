"""Phase-space discretization: Hermite basis, Weyl quantization, traces.

The Weyl operator Op^W(a) f(u) = (2pi)^{-n} iint e^{i(u-v).xi} a(xi,(u+v)/2)
f(v) dv dxi is realized as a dense kernel on the midpoint u-grid.  The xi
quadrature runs over the conjugate band [-pi/h, pi/h] with twice-oversampled
nodes: at M nodes the lag sum aliases for |u-v| beyond half the box, at 2M
nodes every grid lag is alias-free while Op^W(1) = I stays exact.

Symbols enter either as callables a(xi, u) (evaluated exactly at midpoints)
or as sampled :class:`WeylSymbol` data (cubic interpolation onto midpoints).
"""

from __future__ import annotations

from dataclasses import dataclass, field
from itertools import combinations_with_replacement

import numpy as np
from scipy.interpolate import CubicSpline
from scipy.linalg import sqrtm

from .grids import Grid1D, GridFunction, GridError

_KERNEL_BUDGET = 2 ** 24  # max sample-tensor entries for the general-n kernel


class AliasingError(GridError):
    """Requested spectral content exceeds what the grid resolves."""


@dataclass(frozen=True)
class WeylSymbol:
    """Sampled phase-space symbol a(xi, u) for one fixed lambda slice."""

    xi_grids: tuple[Grid1D, ...]
    u_grids: tuple[Grid1D, ...]
    values: np.ndarray = field(repr=False)

    def __post_init__(self):
        shape = tuple(g.points for g in self.xi_grids) + tuple(g.points for g in self.u_grids)
        if self.values.shape != shape:
            raise GridError(f"symbol shape {self.values.shape} != {shape}")
        if not np.all(np.isfinite(self.values)):
            raise GridError("symbol values must be finite")
        object.__setattr__(self, "values", np.ascontiguousarray(self.values, dtype=complex))

    @property
    def n(self) -> int:
        return len(self.u_grids)

    @classmethod
    def sample(cls, fn, u_grids, xi_grids=None) -> "WeylSymbol":
        """Sample fn(xi_1..xi_n, u_1..u_n) on the tensor grid."""
        u_grids = tuple(u_grids)
        if xi_grids is None:
            xi_grids = tuple(g.conjugate() for g in u_grids)
        xi_grids = tuple(xi_grids)
        axes = [g.nodes for g in xi_grids] + [g.nodes for g in u_grids]
        mesh = np.meshgrid(*axes, indexing="ij", sparse=True)
        vals = np.broadcast_to(np.asarray(fn(*mesh), dtype=complex),
                               tuple(len(a) for a in axes))
        return cls(xi_grids, u_grids, vals.copy())

    def evaluator(self):
        """Cubic-interpolating callable (0 outside the sampled box); n = 1 only."""
        if self.n != 1:
            raise NotImplementedError("sampled-symbol interpolation is 1d only")
        xs, us = self.xi_grids[0].nodes, self.u_grids[0].nodes
        cs_u = CubicSpline(us, self.values, axis=1, extrapolate=False)

        def ev(xi, u):
            xi = np.atleast_1d(np.asarray(xi, dtype=float)).ravel()
            u = np.atleast_1d(np.asarray(u, dtype=float)).ravel()
            block = np.nan_to_num(cs_u(u))            # (Mxi, nu)
            cs_x = CubicSpline(xs, block, axis=0, extrapolate=False)
            return np.nan_to_num(cs_x(xi))            # (nxi, nu)

        return ev


@dataclass(frozen=True)
class RepOperator:
    """Truncated operator on L^2(R^n) in the Hermite basis at fixed lambda."""

    lam: float
    matrix: np.ndarray = field(repr=False)
    degrees: tuple[int, ...] = ()
    group_dim: int = 1

    def __post_init__(self):
        m = np.asarray(self.matrix, dtype=complex)
        if m.ndim != 2 or m.shape[0] != m.shape[1]:
            raise ValueError("matrix must be square")
        if not np.all(np.isfinite(m)):
            raise ValueError("matrix must be finite")
        object.__setattr__(self, "matrix", m)
        if not self.degrees:
            object.__setattr__(self, "degrees", tuple(range(m.shape[0])))
        if len(self.degrees) != m.shape[0]:
            raise ValueError("degrees length mismatch")

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]


def trace(op: RepOperator) -> complex:
    return complex(np.trace(op.matrix))


def hs_norm(op: RepOperator) -> float:
    """Hilbert-Schmidt norm Tr(B* B)^{1/2} of the truncated matrix."""
    return float(np.linalg.norm(op.matrix, "fro"))


def operator_norm(op: RepOperator) -> float:
    """Largest singular value of the truncated matrix."""
    return float(np.linalg.norm(op.matrix, 2))


def oscillator_spectrum(lam: float, degrees, group_dim: int) -> np.ndarray:
    """Eigenvalues 1 + |lambda| (2|k| + n) of the rep of I - L per basis index."""
    ks = np.asarray(degrees, dtype=float)
    return 1.0 + abs(lam) * (2.0 * ks + group_dim)


def sandwich_power(op: RepOperator, s_left: float, s_right: float) -> RepOperator:
    """D^{s_left} op D^{s_right} with D = diag(1 + |lambda|(2|k| + n))."""
    d = oscillator_spectrum(op.lam, op.degrees, op.group_dim)
    m = (d ** s_left)[:, None] * op.matrix * (d ** s_right)[None, :]
    return RepOperator(op.lam, m, op.degrees, op.group_dim)


def hermite_index_order(n: int, count: int) -> list[tuple[int, ...]]:
    """First ``count`` multi-degrees ordered by total degree, then lexicographically."""
    out: list[tuple[int, ...]] = []
    total = 0
    while len(out) < count:
        level = sorted({tuple(sorted(c, reverse=False)) if False else c
                        for c in _compositions(total, n)})
        out.extend(level)
        total += 1
    return out[:count]


def _compositions(total: int, n: int):
    if n == 1:
        yield (total,)
        return
    for first in range(total + 1):
        for rest in _compositions(total - first, n - 1):
            yield (first,) + rest


def _hermite_table(nodes: np.ndarray, count: int) -> np.ndarray:
    """Hermite functions h_0..h_{count-1} columnwise, by the stable recurrence."""
    H = np.zeros((len(nodes), count))
    H[:, 0] = np.pi ** -0.25 * np.exp(-nodes ** 2 / 2.0)
    if count > 1:
        H[:, 1] = np.sqrt(2.0) * nodes * H[:, 0]
    for k in range(1, count - 1):
        H[:, k + 1] = (np.sqrt(2.0 / (k + 1)) * nodes * H[:, k]
                       - np.sqrt(k / (k + 1)) * H[:, k - 1])
    return H


class HermiteBasis:
    """Quadrature-orthonormalized Hermite tensor basis on a midpoint grid.

    The raw recurrence samples are symmetrically (Loewdin) reorthonormalized
    against the Riemann inner product; for degrees well inside the box this
    perturbs nothing (< 1e-6), and it keeps projections honest when the top
    degrees graze the box edge.
    """

    def __init__(self, u_grids, n_h: int, orthonormalize: bool = True):
        self.u_grids = tuple(u_grids)
        self.n = len(self.u_grids)
        self.n_h = int(n_h)
        if self.n_h < 1:
            raise ValueError("n_h must be positive")
        self.index_order = hermite_index_order(self.n, self.n_h)
        self.degrees = tuple(sum(k) for k in self.index_order)
        max_axis_degree = max(max(k[a] for k in self.index_order) for a in range(self.n))
        for g in self.u_grids:
            if max_axis_degree + 1 > g.points // 2:
                raise AliasingError(
                    f"n_h={n_h} needs per-axis degree {max_axis_degree} "
                    f"> M/2 - 1 = {g.points // 2 - 1}")
        tables = [_hermite_table(g.nodes, max_axis_degree + 1) for g in self.u_grids]
        cols = []
        for k in self.index_order:
            v = tables[0][:, k[0]]
            for a in range(1, self.n):
                v = np.multiply.outer(v, tables[a][:, k[a]])
            cols.append(v.ravel())
        self.cell = float(np.prod([g.spacing for g in self.u_grids]))
        raw = np.stack(cols, axis=1)
        if orthonormalize:
            gram = raw.T @ raw * self.cell
            raw = raw @ np.linalg.inv(sqrtm(gram).real)
        self.matrix = raw                      # (prod M, n_h)
        self._shift_cache = None

    @property
    def grid_shape(self) -> tuple[int, ...]:
        return tuple(g.points for g in self.u_grids)

    def functions(self) -> list[GridFunction]:
        return [GridFunction(self.u_grids, self.matrix[:, k].reshape(self.grid_shape))
                for k in range(self.n_h)]

    def truncate(self, n_h: int) -> "HermiteBasis":
        """View with the leading n_h columns (shared samples, no re-Loewdin)."""
        if n_h > self.n_h:
            raise ValueError("cannot extend by truncation")
        out = object.__new__(HermiteBasis)
        out.u_grids = self.u_grids
        out.n = self.n
        out.n_h = n_h
        out.index_order = self.index_order[:n_h]
        out.degrees = self.degrees[:n_h]
        out.cell = self.cell
        out.matrix = self.matrix[:, :n_h]
        out._shift_cache = None
        return out

    def project(self, values: np.ndarray) -> np.ndarray:
        """Quadrature coefficients <h_k, f> for flattened or grid-shaped samples."""
        return self.matrix.conj().T @ values.reshape(-1) * self.cell

    def shifted_matrix(self, shift: float) -> np.ndarray:
        """Basis sampled at u + shift via padded band-limited translation (n=1)."""
        if self.n != 1:
            raise NotImplementedError("fast shifts are 1d only")
        g = self.u_grids[0]
        M = g.points
        if self._shift_cache is None:
            padded = np.zeros((2 * M, self.n_h), dtype=complex)
            padded[M // 2: M // 2 + M, :] = self.matrix
            self._shift_cache = (np.fft.fft(padded, axis=0),
                                 2.0 * np.pi * np.fft.fftfreq(2 * M, d=g.spacing))
        fftpad, freqs = self._shift_cache
        out = np.fft.ifft(fftpad * np.exp(1j * freqs * shift)[:, None], axis=0)
        return out[M // 2: M // 2 + M, :]


def hermite_basis(u_grids, n_h: int) -> list[GridFunction]:
    """First n_h normalized Hermite functions on the grid (tensor order)."""
    return HermiteBasis(u_grids, n_h).functions()


# ---------------------------------------------------------------------------
# Weyl kernel


def _midpoints(g: Grid1D) -> np.ndarray:
    # (u_i + u_j)/2 for i + j = s, s = 0..2M-2: the half-spacing grid
    return -g.half_width + (np.arange(2 * g.points - 1) + 1.0) * g.spacing / 2.0


def _kernel_axes(u_grids, oversample: int = 2):
    xi_nodes, xi_steps, mid_nodes, phases, lags = [], [], [], [], []
    for g in u_grids:
        M = g.points
        band = np.pi / g.spacing
        q = Grid1D(band, oversample * M)
        xi_nodes.append(q.nodes)
        xi_steps.append(q.spacing)
        mid_nodes.append(_midpoints(g))
        lv = np.arange(-(M - 1), M)
        phases.append(np.exp(1j * lv * g.spacing * (-band + q.spacing / 2.0)))
        lags.append(lv)
    return xi_nodes, xi_steps, mid_nodes, phases, lags


def kernel_sample_axes(u_grids, oversample: int = 2):
    """(xi_axes, mid_axes) the Weyl kernel quadrature samples symbols on."""
    xi_nodes, _, mid_nodes, _, _ = _kernel_axes(tuple(u_grids), oversample)
    return xi_nodes, mid_nodes


def opw_kernel_from_samples(A: np.ndarray, u_grids, oversample: int = 2) -> np.ndarray:
    """Kernel from symbol samples on the :func:`kernel_sample_axes` tensor."""
    u_grids = tuple(u_grids)
    n = len(u_grids)
    xi_nodes, xi_steps, _, phases, _ = _kernel_axes(u_grids, oversample)
    sizes = [g.points for g in u_grids]
    nq = [len(x) for x in xi_nodes]
    expected = tuple(nq) + tuple(2 * M - 1 for M in sizes)
    if A.shape != expected:
        raise GridError(f"sample tensor shape {A.shape} != {expected}")
    A = np.asarray(A, dtype=complex)
    for ax in range(n):
        A = np.fft.ifft(A, axis=ax) * nq[ax]
    # index lag axes at l mod (oversample*M); alias-free for every grid lag
    idx = [np.mod(np.arange(-(M - 1), M), nq[ax]) for ax, M in enumerate(sizes)]
    for ax in range(n):
        A = np.take(A, idx[ax], axis=ax)
        shape = [1] * A.ndim
        shape[ax] = A.shape[ax]
        A = A * (phases[ax] * xi_steps[ax]).reshape(shape)
    grids_i = np.indices(sizes).reshape(n, -1)
    K_idx = []
    for ax in range(n):
        K_idx.append(grids_i[ax][:, None] - grids_i[ax][None, :] + sizes[ax] - 1)
    for ax in range(n):
        K_idx.append(grids_i[ax][:, None] + grids_i[ax][None, :])
    return A[tuple(K_idx)] / (2.0 * np.pi) ** n


def opw_kernel(symbol, u_grids, oversample: int = 2) -> np.ndarray:
    """Dense Weyl kernel K[(u),(v)] (flattened) for a callable or WeylSymbol.

    Applying is ``(K @ f.ravel()) * cell_volume``.
    """
    u_grids = tuple(u_grids)
    n = len(u_grids)
    symfun = _as_symbol_function(symbol, n)
    xi_nodes, mid_nodes = kernel_sample_axes(u_grids, oversample)
    sizes = [g.points for g in u_grids]
    nq = [len(x) for x in xi_nodes]
    total = int(np.prod(nq)) * int(np.prod([2 * M - 1 for M in sizes]))
    if total > _KERNEL_BUDGET:
        raise MemoryError(f"kernel sample tensor too large ({total} entries); "
                          "reduce the grid or the dimension")
    mesh = np.meshgrid(*xi_nodes, *mid_nodes, indexing="ij", sparse=True)
    A = np.asarray(symfun(*mesh), dtype=complex)
    A = np.broadcast_to(A, tuple(nq) + tuple(2 * M - 1 for M in sizes)).copy()
    return opw_kernel_from_samples(A, u_grids, oversample)


def _as_symbol_function(symbol, n: int):
    if isinstance(symbol, WeylSymbol):
        if symbol.n != n:
            raise GridError("symbol dimension mismatch")
        if n != 1:
            raise NotImplementedError("sampled symbols are supported for n=1")
        ev = symbol.evaluator()

        def fn(xi, u):
            return ev(np.ravel(xi), np.ravel(u))

        return fn
    if callable(symbol):
        return symbol
    raise TypeError("symbol must be a WeylSymbol or a callable")


def opw_apply(symbol, f: GridFunction, oversample: int = 2) -> GridFunction:
    """Op^W(symbol) applied to f by dense tensor quadrature."""
    if isinstance(symbol, WeylSymbol) and symbol.u_grids != f.grids:
        raise GridError("symbol and function u-grids differ")
    K = opw_kernel(symbol, f.grids, oversample)
    out = (K @ f.values.reshape(-1)) * f.cell_volume
    return f.with_values(out.reshape(f.values.shape))


def opw_matrix(symbol, basis: HermiteBasis, lam: float = 1.0,
               oversample: int = 2) -> RepOperator:
    """Matrix <h_j, Op^W(symbol) h_k> over the Hermite basis."""
    K = opw_kernel(symbol, basis.u_grids, oversample)
    m = basis.matrix.conj().T @ (K @ basis.matrix) * basis.cell ** 2
    return RepOperator(lam, m, basis.degrees, basis.n)


def truncation_delta(compute, basis: HermiteBasis):
    """(value, delta) where delta = |value - value at n_h/2| (truncation report)."""
    value = compute(basis)
    half = compute(basis.truncate(max(1, basis.n_h // 2)))
    return value, abs(value - half)
