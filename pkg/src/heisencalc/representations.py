"""Schroedinger representations, the group Fourier transform, Plancherel.

The representation with parameter lambda != 0 acts on L^2(R^n) by

    pi_lambda(x,y,t) h(u) = e^{i lambda (t + x.y/2)} e^{i sqrt(lambda) y.u}
                            h(u + sqrt(|lambda|) x),

with the signed convention sqrt(lambda) = sgn(lambda) sqrt(|lambda|).  The
group Fourier transform pi_lambda(kappa) = int kappa(g) pi_lambda(g)^* dg is
computed as a rescaled Euclidean Fourier transform followed by Weyl
quantization; the numerical prefactor is fixed by cross-checking against the
defining integral (see ``weyl_prefactor``).
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field

import numpy as np
from scipy.interpolate import CubicSpline

from .grids import Grid1D, GridFunction, GridError, fourier_transform, fourier_shift
from .heisenberg import HPoint, group_dimension
from .phase_space import (HermiteBasis, RepOperator, WeylSymbol,
                          kernel_sample_axes, opw_kernel_from_samples, opw_matrix)


class SupportOverflowError(ValueError):
    """A translated function lost more boundary mass than tolerated."""


class BandError(ValueError):
    """A lambda value outside the resolved frequency band was requested."""


class CalibrationError(RuntimeError):
    """Plancherel calibration spread exceeded the consistency threshold."""


def signed_sqrt(lam):
    """sgn(lambda) * sqrt(|lambda|); accepts scalars or arrays."""
    arr = np.asarray(lam)
    if np.any(arr == 0):
        raise ValueError("lambda must be nonzero")
    out = np.sign(arr) * np.sqrt(np.abs(arr))
    return float(out) if arr.ndim == 0 else out


@dataclass(frozen=True)
class SignedSqrt:
    """The signed square root attached to a representation parameter."""

    lam: float
    value: float = field(init=False)

    def __post_init__(self):
        object.__setattr__(self, "value", signed_sqrt(self.lam))


def weyl_prefactor(n: int) -> float:
    """(2 pi)^{(2n+1)/2}: the factor making

        pi_lambda(kappa) = pref * Op^W[ F kappa (sqrt|l| ., sqrt(l) ., l) ]

    reproduce the defining integral with the unitary (2pi)^{-N/2} Fourier
    normalization (verified directly by quadrature of the integral).
    """
    return float((2.0 * np.pi) ** ((2 * n + 1) / 2.0))


@dataclass(frozen=True)
class LambdaGrid:
    """Signed quadrature grid carrying the measure |lambda|^n d lambda.

    ``weights`` already contain the |lambda|^n factor: for a density f,
    ``sum(f(nodes) * weights)`` approximates int f |lambda|^n d lambda.
    """

    nodes: np.ndarray
    weights: np.ndarray
    n: int
    plancherel_constant: float | None = None

    def __post_init__(self):
        nodes = np.asarray(self.nodes, dtype=float)
        weights = np.asarray(self.weights, dtype=float)
        if nodes.shape != weights.shape or nodes.ndim != 1:
            raise ValueError("nodes/weights must be matching 1d arrays")
        if np.any(nodes == 0.0):
            raise ValueError("lambda nodes must be nonzero")
        if np.any(weights <= 0.0):
            raise ValueError("weights must be positive")
        sym = np.sort(np.concatenate([nodes, -nodes]))
        if not np.allclose(sym[: len(nodes)], -sym[len(nodes):][::-1]):
            raise ValueError("node set must be symmetric under lambda -> -lambda")
        object.__setattr__(self, "nodes", nodes)
        object.__setattr__(self, "weights", weights)

    @classmethod
    def build(cls, lam_min: float, lam_max: float, per_sign: int, n: int) -> "LambdaGrid":
        """Log-spaced nodes on +-[lam_min, lam_max], trapezoid weights in log."""
        if not (0 < lam_min < lam_max):
            raise ValueError("need 0 < lam_min < lam_max")
        if per_sign < 4:
            raise ValueError("need at least 4 nodes per sign")
        pos = np.exp(np.linspace(np.log(lam_min), np.log(lam_max), per_sign))
        dlog = np.gradient(np.log(pos))
        tw = dlog.copy()
        tw[0] /= 2.0
        tw[-1] /= 2.0
        w = tw * pos ** (n + 1)           # |lambda|^n dlambda = lambda^{n+1} dlog
        return cls(np.concatenate([-pos[::-1], pos]),
                   np.concatenate([w[::-1], w]), n)

    @property
    def lam_min(self) -> float:
        return float(np.min(np.abs(self.nodes)))

    @property
    def lam_max(self) -> float:
        return float(np.max(np.abs(self.nodes)))

    @property
    def per_sign(self) -> int:
        return int(np.sum(self.nodes > 0))

    def with_constant(self, c: float) -> "LambdaGrid":
        return LambdaGrid(self.nodes, self.weights, self.n, float(c))

    def refine(self, band_factor: float = 2.0, node_factor: int = 2) -> "LambdaGrid":
        """Wider band (both ends) and denser nodes, for stability sweeps."""
        return LambdaGrid.build(self.lam_min / band_factor,
                                self.lam_max * band_factor,
                                self.per_sign * node_factor, self.n)

    def integrate(self, density_values: np.ndarray) -> float:
        return float(np.real(np.sum(density_values * self.weights)))


# ---------------------------------------------------------------------------
# point action


def pi_point(lam: float, g: HPoint, f: GridFunction,
             support_tol: float = 1e-3) -> GridFunction:
    """pi_lambda(g) f by band-limited shift, modulation and phase.

    Mass shifted outside the grid window is dropped (treated as zero); a
    warning is raised when it is noticeable and an error beyond
    ``support_tol`` of the total mass.
    """
    if lam == 0:
        raise ValueError("lambda must be nonzero")
    n = len(f.grids)
    if g.n != n:
        raise GridError("group point and grid dimension differ")
    sl = np.sqrt(abs(lam))
    ss = signed_sqrt(lam)
    vals = f.values
    total = float(np.sum(np.abs(vals) ** 2))
    for ax in range(n):
        shift = sl * g.x[ax]
        if shift != 0.0:
            vals = fourier_shift(vals, ax, f.grids[ax].spacing, shift)
    kept = float(np.sum(np.abs(vals) ** 2))
    if total > 0 and (loss := (total - kept) / total) > 1e-9:
        if loss > support_tol:
            raise SupportOverflowError(
                f"shift lost {loss:.2e} of mass (tolerance {support_tol:.1e})")
        warnings.warn(f"pi_point shift clipped {loss:.2e} of mass", stacklevel=2)
    for ax in range(n):
        if g.y[ax] != 0.0:
            shape = [1] * n
            shape[ax] = f.grids[ax].points
            vals = vals * np.exp(1j * ss * g.y[ax] * f.grids[ax].nodes).reshape(shape)
    phase = np.exp(1j * lam * (g.t + 0.5 * float(np.dot(g.x, g.y))))
    return f.with_values(vals * phase)


def pi_point_matrix(lam: float, g: HPoint, basis: HermiteBasis,
                    support_tol: float = 1e-3) -> RepOperator:
    """Projection of pi_lambda(g) onto the Hermite basis."""
    if basis.n == 1:
        sl = np.sqrt(abs(lam))
        shifted = basis.shifted_matrix(sl * g.x[0])
        nodes = basis.u_grids[0].nodes
        mod = np.exp(1j * signed_sqrt(lam) * g.y[0] * nodes)
        phase = np.exp(1j * lam * (g.t + 0.5 * g.x[0] * g.y[0]))
        m = basis.matrix.conj().T @ (mod[:, None] * shifted) * basis.cell * phase
        return RepOperator(lam, m, basis.degrees, basis.n)
    cols = []
    for func in basis.functions():
        cols.append(basis.project(pi_point(lam, g, func, support_tol).values))
    return RepOperator(lam, np.stack(cols, axis=1), basis.degrees, basis.n)


# ---------------------------------------------------------------------------
# infinitesimal symbols


def infinitesimal_evaluator(which: str, n: int = 1, j: int = 1):
    """Closure (lam, xi_1..xi_n, u_1..u_n) -> Weyl symbol of X_j, Y_j, T or L."""
    if which in ("X", "Y") and not (1 <= j <= n):
        raise ValueError(f"j={j} out of range for n={n}")
    jj = j - 1

    if which == "X":
        def ev(lam, *coords):
            return 1j * np.sqrt(np.abs(lam)) * coords[jj] + 0.0j
    elif which == "Y":
        def ev(lam, *coords):
            return 1j * signed_sqrt(lam) * coords[n + jj] + 0.0j
    elif which == "T":
        def ev(lam, *coords):
            ones = np.ones(np.broadcast_shapes(*(np.shape(c) for c in coords)))
            return 1j * np.asarray(lam) * ones + 0.0j
    elif which == "L":
        def ev(lam, *coords):
            rho = sum(np.asarray(c) ** 2 for c in coords)
            return -np.abs(lam) * rho + 0.0j
    else:
        raise ValueError(f"unknown generator {which!r}")
    return ev


def infinitesimal_symbol(which: str, lam: float, u_grids, j: int = 1) -> WeylSymbol:
    """Sampled Weyl symbol of the infinitesimal generator at fixed lambda."""
    u_grids = tuple(u_grids)
    ev = infinitesimal_evaluator(which, len(u_grids), j)
    return WeylSymbol.sample(lambda *coords: ev(lam, *coords), u_grids)


# ---------------------------------------------------------------------------
# group Fourier transform


def _axis_interp(values: np.ndarray, nodes: np.ndarray, targets: np.ndarray,
                 axis: int) -> np.ndarray:
    cs = CubicSpline(nodes, values, axis=axis, extrapolate=False)
    out = cs(targets)
    # cubic spline returns the target axis in place of `axis`
    return np.nan_to_num(np.moveaxis(out, axis, axis))


def left_translate(phi: GridFunction, g0: HPoint) -> GridFunction:
    """phi(g0 . ) sampled on the same grid via band-limited shifts.

    The twisted t-shift t -> t + t0 + (x0 . y - x . y0)/2 is applied as a
    frequency-domain phase that varies over the (x, y) axes.
    """
    n = group_dimension(phi)
    vals = phi.values
    for ax in range(n):                                # x-axes
        if g0.x[ax] != 0.0:
            vals = fourier_shift(vals, ax, phi.grids[ax].spacing, g0.x[ax])
    for ax in range(n):                                # y-axes
        if g0.y[ax] != 0.0:
            vals = fourier_shift(vals, n + ax, phi.grids[n + ax].spacing, g0.y[ax])
    t_ax = 2 * n
    tg = phi.grids[t_ax]
    M = tg.points
    P = 2 * M
    lo = (P - M) // 2
    padded_shape = list(vals.shape)
    padded_shape[t_ax] = P
    padded = np.zeros(padded_shape, dtype=complex)
    sl = [slice(None)] * vals.ndim
    sl[t_ax] = slice(lo, lo + M)
    padded[tuple(sl)] = vals
    w = 2.0 * np.pi * np.fft.fftfreq(P, d=tg.spacing)
    mesh = np.meshgrid(*[g.nodes for g in phi.grids[:2 * n]], indexing="ij", sparse=True)
    tshift = np.full((), g0.t, dtype=float)
    for ax in range(n):
        tshift = tshift + 0.5 * (g0.x[ax] * mesh[n + ax] - mesh[ax] * g0.y[ax])
    phase = np.exp(1j * np.multiply.outer(tshift, w))  # (x,y axes..., P)
    shifted = np.fft.ifft(np.fft.fft(padded, axis=t_ax) * phase, axis=t_ax)
    return phi.with_values(np.ascontiguousarray(shifted[tuple(sl)]))


class GroupFourier:
    """Group Fourier transform of one function kappa on H_n.

    Precomputes the Euclidean transform once; lambda slices are produced by
    cubic interpolation along the t-frequency axis and separable cubic
    interpolation in the remaining frequency slots (zero outside the resolved
    band).
    """

    def __init__(self, kappa: GridFunction, band_margin: int = 4):
        self.n = group_dimension(kappa)
        self.kappa = kappa
        self.freq = fourier_transform(kappa)
        t_ax = 2 * self.n
        self._tau = self.freq.grids[t_ax].nodes
        self._spline_t = CubicSpline(self._tau, self.freq.values, axis=t_ax)
        self._band = float(self._tau[-band_margin])
        self.prefactor = weyl_prefactor(self.n)

    def resolved_band(self) -> float:
        return self._band

    def _check_band(self, lam: float):
        if abs(lam) > self._band:
            raise BandError(f"|lambda|={abs(lam):.3g} outside resolved band "
                            f"{self._band:.3g}")

    def slab(self, lam: float) -> np.ndarray:
        """F kappa(., ., lam) on the (eta_x, eta_y) frequency axes."""
        self._check_band(lam)
        return self._spline_t(lam)

    def slab_at(self, lam: float, axis_targets) -> np.ndarray:
        """Slab interpolated onto per-axis target arrays (tensor product)."""
        vals = self.slab(lam)
        for ax, targets in enumerate(axis_targets):
            nodes = self.freq.grids[ax].nodes
            vals = _axis_interp(vals, nodes, np.asarray(targets), ax)
        return vals

    def _scaled_targets(self, lam: float, xi_axes, u_axes):
        sl = np.sqrt(abs(lam))
        ss = signed_sqrt(lam)
        return [sl * np.asarray(a) for a in xi_axes] + \
               [ss * np.asarray(a) for a in u_axes]

    def weyl_symbol(self, lam: float, u_grids, xi_grids=None) -> WeylSymbol:
        """pref * F kappa(sqrt|l| xi, sqrt(l) u, lam) sampled as a WeylSymbol."""
        u_grids = tuple(u_grids)
        if xi_grids is None:
            xi_grids = tuple(g.conjugate() for g in u_grids)
        targets = self._scaled_targets(lam, [g.nodes for g in xi_grids],
                                       [g.nodes for g in u_grids])
        vals = self.slab_at(lam, targets) * self.prefactor
        return WeylSymbol(tuple(xi_grids), u_grids, vals)

    def matrix(self, lam: float, basis: HermiteBasis, oversample: int = 2) -> RepOperator:
        """pi_lambda(kappa) projected on the Hermite basis (fused kernel path)."""
        xi_axes, mid_axes = kernel_sample_axes(basis.u_grids, oversample)
        targets = self._scaled_targets(lam, xi_axes, mid_axes)
        A = self.slab_at(lam, targets) * self.prefactor
        K = opw_kernel_from_samples(A, basis.u_grids, oversample)
        m = basis.matrix.conj().T @ (K @ basis.matrix) * basis.cell ** 2
        return RepOperator(lam, m, basis.degrees, basis.n)

    def hs_density(self, lam: float) -> float:
        """||pi_lambda(kappa)||_HS^2 by the exact symbol-side identity.

        Evaluated on the full frequency slab, so no Hermite truncation and no
        rescaling loss enters:  pref^2 (2pi)^{-n} |l|^{-n} int |F|^2 d eta.
        """
        slab = self.slab(lam)
        cell = float(np.prod([g.spacing for g in self.freq.grids[:2 * self.n]]))
        return (self.prefactor ** 2 / (2.0 * np.pi) ** self.n / abs(lam) ** self.n
                * float(np.sum(np.abs(slab) ** 2)) * cell)

    def sheared_slab(self, lam: float, g: HPoint, xi_axis: np.ndarray,
                     u_axis: np.ndarray) -> np.ndarray:
        """F[kappa(g .)](sqrt|l| xi, sqrt(l) u, lam) without the prefactor (n=1).

        Uses F[kappa(g .)](eta) = e^{i g.eta'} F kappa(sheared eta); the shear
        couples the t-frequency lam into the (x, y) frequency slots.
        """
        if self.n != 1:
            raise NotImplementedError("sheared evaluation is 1d only")
        self._check_band(lam)
        sl = np.sqrt(abs(lam))
        ss = signed_sqrt(lam)
        x0, y0, t0 = g.x[0], g.y[0], g.t
        t1 = sl * np.asarray(xi_axis) + 0.5 * y0 * lam
        t2 = ss * np.asarray(u_axis) - 0.5 * x0 * lam
        vals = self.slab_at(lam, [t1, t2])
        phase = np.exp(1j * (x0 * t1[:, None] + y0 * t2[None, :] + t0 * lam))
        return vals * phase


def group_fourier(kappa: GridFunction, lam: float, u_grids,
                  basis: HermiteBasis | None = None):
    """One-shot group Fourier transform: WeylSymbol and, optionally, matrix."""
    gf = GroupFourier(kappa)
    sym = gf.weyl_symbol(lam, u_grids)
    if basis is None:
        return sym
    return sym, gf.matrix(lam, basis)


# ---------------------------------------------------------------------------
# Plancherel calibration


@dataclass(frozen=True)
class CalibrationResult:
    constant: float
    per_function: tuple[float, ...]
    spread: float
    tail_fraction: float

    def as_records(self):
        rows = [("c_n", self.constant), ("spread", self.spread),
                ("tail_fraction", self.tail_fraction)]
        rows += [(f"c_n_fn{i}", v) for i, v in enumerate(self.per_function)]
        return rows


def plancherel_tail_fraction(gf: GroupFourier, lgrid: LambdaGrid) -> float:
    """Estimated mass of the Plancherel integral outside the lambda band."""
    dens = np.array([gf.hs_density(l) for l in lgrid.nodes])
    total = lgrid.integrate(dens)
    lo = lgrid.lam_min
    low = sum(gf.hs_density(s * lo) * lo ** (lgrid.n + 1.0) for s in (+1, -1))
    pos = lgrid.nodes > 0
    order = np.argsort(np.abs(lgrid.nodes))
    top = order[-4:]                      # outermost two nodes per sign
    high = float(np.sum(dens[top] * lgrid.weights[top]))
    return float((low + high) / (total + low))


def calibrate_plancherel(test_functions, lgrid: LambdaGrid,
                         spread_tol: float = 1e-2) -> CalibrationResult:
    """Fit c_n from ||kappa||^2 = c_n int ||pi_lambda(kappa)||_HS^2 |l|^n dl.

    Uses the exact symbol-side Hilbert-Schmidt densities; the matrix route is
    available separately (``plancherel_check_matrix``) as an independent
    verification.
    """
    if len(test_functions) < 2:
        raise ValueError("need at least two test functions")
    ests = []
    tails = []
    for kappa in test_functions:
        gf = GroupFourier(kappa)
        dens = np.array([gf.hs_density(l) for l in lgrid.nodes])
        integral = lgrid.integrate(dens)
        if integral <= 0:
            raise CalibrationError("vanishing Plancherel integral")
        ests.append(kappa.norm_l2() ** 2 / integral)
        tails.append(plancherel_tail_fraction(gf, lgrid))
    ests = np.array(ests)
    mean = float(ests.mean())
    spread = float(np.max(np.abs(ests / mean - 1.0)))
    result = CalibrationResult(mean, tuple(float(e) for e in ests), spread,
                               float(max(tails)))
    if spread > spread_tol:
        raise CalibrationError(
            f"calibration spread {spread:.2e} exceeds {spread_tol:.1e}; "
            "the discretization does not resolve the test functions")
    if result.tail_fraction > spread_tol:
        raise CalibrationError(
            f"lambda-band tail fraction {result.tail_fraction:.2e} exceeds "
            f"{spread_tol:.1e}; widen the band or change test functions")
    return result


def plancherel_check_matrix(kappa: GridFunction, lgrid: LambdaGrid,
                            basis: HermiteBasis, c_n: float) -> float:
    """Relative Plancherel defect via the truncated-matrix HS route."""
    gf = GroupFourier(kappa)
    dens = np.array([np.sum(np.abs(gf.matrix(l, basis).matrix) ** 2)
                     for l in lgrid.nodes])
    rhs = c_n * lgrid.integrate(dens)
    lhs = kappa.norm_l2() ** 2
    return abs(rhs / lhs - 1.0)


def modulated_gaussian(grids, widths, modulation, center=None) -> GridFunction:
    """exp(i om.g) Gaussian; the workhorse test function on the group."""
    grids = tuple(grids)
    if center is None:
        center = [0.0] * len(grids)

    def fn(*coords):
        out = None
        for c, w, om, c0 in zip(coords, widths, modulation, center):
            term = np.exp(1j * om * c - (c - c0) ** 2 / (2.0 * w * w))
            out = term if out is None else out * term
        return out

    return GridFunction.sample(grids, fn)


def calibration_functions(grids, n: int, count: int = 3,
                          seed: int = 7) -> list[GridFunction]:
    """t-modulated Gaussians whose Plancherel mass sits inside a [1/16,16] band.

    Unmodulated Gaussians put O(1) spectral density at lambda -> 0 where the
    band cannot reach; modulating in t at |omega| ~ 4 moves the content into
    the band and makes the calibration band-insensitive.
    """
    rng = np.random.default_rng(seed)
    out = []
    for _ in range(count):
        widths = rng.uniform(0.85, 1.25, size=2 * n + 1)
        om = np.zeros(2 * n + 1)
        om[:2 * n] = rng.uniform(-0.8, 0.8, size=2 * n)
        om[-1] = rng.choice([-1.0, 1.0]) * rng.uniform(3.5, 4.5)
        out.append(modulated_gaussian(grids, widths, om))
    return out
