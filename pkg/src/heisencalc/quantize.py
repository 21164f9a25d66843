"""Operator quantization: Op(sigma) phi via the representation trace formula.

    A phi(g) = c_n int Tr( pi_l(g) sigma(g,l) pi_l(phi) ) |l|^n dl

realized per lambda node as Hermite-basis matrix algebra, with the group
point split as pi_l(x,y,t) = e^{i l t} pi_l(x,y,0) so the t-axis of the
output is a phase sum.  The alternative Euclidean-trace route (apply_weyl_form)
evaluates Tr(Op^W(a) Op^W(b)) = (2pi)^{-n} int a b over phase space with the
sheared Fourier data of the left-translate; its constant c'_n is calibrated
independently of c_n.

Sobolev norms are spectral: ||phi||_{L2_s}^2 = c_n int || D^{s/2} pi_l(phi)
||_HS^2 |l|^n dl with D the diagonal rep of I - L on the Hermite basis.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field, replace

import numpy as np

from .grids import Grid1D, GridFunction, GridError
from .heisenberg import HPoint
from .phase_space import (HermiteBasis, RepOperator, kernel_sample_axes,
                          opw_kernel_from_samples, oscillator_spectrum)
from .representations import (GroupFourier, LambdaGrid, modulated_gaussian,
                              plancherel_tail_fraction, signed_sqrt)
from .symbol_calculus import LambdaSymbol


class NumericalInstabilityError(RuntimeError):
    """Truncation or band tails dominate a computed quantity."""


@dataclass(frozen=True)
class Calibration:
    """Calibrated quantization constants and their diagnostics."""

    c_n: float
    c_n_prime: float
    spread: float = 0.0
    tail_fraction: float = 0.0
    prime_spread: float = 0.0

    def __post_init__(self):
        if self.c_n <= 0 or self.c_n_prime <= 0:
            raise ValueError("calibrated constants must be positive")

    @property
    def ratio(self) -> float:
        return self.c_n_prime / self.c_n


@dataclass(frozen=True)
class CoarseField:
    """Values on a strided sub-lattice of the group grid (output container)."""

    axes: tuple[np.ndarray, ...]
    indices: tuple[np.ndarray, ...]
    values: np.ndarray
    cell_volume: float

    def norm_l2(self) -> float:
        return float(np.sqrt(np.sum(np.abs(self.values) ** 2) * self.cell_volume))

    def diff_norm(self, other: "CoarseField") -> float:
        return float(np.sqrt(np.sum(np.abs(self.values - other.values) ** 2)
                             * self.cell_volume))


@dataclass(frozen=True)
class QuantConfig:
    """Grids, truncation, lambda quadrature and constants for quantization."""

    lgrid: LambdaGrid
    basis: HermiteBasis
    group_grids: tuple[Grid1D, ...]
    calibration: Calibration | None = None
    output_strides: tuple[int, ...] = (4, 4, 16)
    output_fractions: tuple[float, ...] = (0.7, 0.7, 0.5)

    @property
    def n(self) -> int:
        return (len(self.group_grids) - 1) // 2

    def with_calibration(self, cal: Calibration) -> "QuantConfig":
        return replace(self, calibration=cal)

    def require_calibration(self) -> Calibration:
        if self.calibration is None:
            raise ValueError("config has no calibration; run calibrate first")
        return self.calibration

    def output_indices(self) -> tuple[np.ndarray, ...]:
        out = []
        for g, stride, frac in zip(self.group_grids, self.output_strides,
                                   self.output_fractions):
            idx = np.arange(g.points // (2 * stride) % stride, g.points, stride)
            keep = np.abs(g.nodes[idx]) <= frac * g.half_width
            out.append(idx[keep])
        return tuple(out)

    def subsample(self, phi: GridFunction) -> CoarseField:
        if phi.grids != self.group_grids:
            raise GridError("function lives on different group grids")
        idx = self.output_indices()
        axes = tuple(g.nodes[i] for g, i in zip(self.group_grids, idx))
        cell = float(np.prod([g.spacing * s for g, s in
                              zip(self.group_grids, self.output_strides)]))
        return CoarseField(axes, idx, phi.values[np.ix_(*idx)], cell)

    def field_like(self, values: np.ndarray) -> CoarseField:
        idx = self.output_indices()
        axes = tuple(g.nodes[i] for g, i in zip(self.group_grids, idx))
        cell = float(np.prod([g.spacing * s for g, s in
                              zip(self.group_grids, self.output_strides)]))
        return CoarseField(axes, idx, values, cell)


def default_quant_config(n: int = 1, u_half_width: float = 8.0, u_points: int = 256,
                         n_h: int = 32, lam_min: float = 1.0 / 16.0,
                         lam_max: float = 16.0, lam_per_sign: int = 64,
                         group_box: float = 6.0, group_points: int = 64,
                         t_box: float = 12.0, t_points: int = 256) -> QuantConfig:
    """Desk-scale defaults (n = 1): all acceptance suites run on these."""
    if n != 1:
        raise NotImplementedError("quantization defaults are n=1")
    basis = HermiteBasis((Grid1D(u_half_width, u_points),), n_h)
    lgrid = LambdaGrid.build(lam_min, lam_max, lam_per_sign, n)
    grids = (Grid1D(group_box, group_points), Grid1D(group_box, group_points),
             Grid1D(t_box, t_points))
    return QuantConfig(lgrid, basis, grids)


# ---------------------------------------------------------------------------
# symbol matrices


def symbol_matrix(sym_or_family, lam: float, basis: HermiteBasis,
                  g: HPoint | None = None, oversample: int = 2) -> np.ndarray:
    """Op^W matrix of a lambda-symbol slice over the kernel quadrature."""
    xi_axes, mid_axes = kernel_sample_axes(basis.u_grids, oversample)
    mesh = np.meshgrid(*xi_axes, *mid_axes, indexing="ij", sparse=True)
    if isinstance(sym_or_family, LambdaSymbol):
        vals = sym_or_family(g, lam, *mesh)
    else:
        vals = sym_or_family(lam, *mesh)
    shape = tuple(len(a) for a in xi_axes) + tuple(len(a) for a in mid_axes)
    A = np.broadcast_to(np.asarray(vals, dtype=complex), shape).copy()
    K = opw_kernel_from_samples(A, basis.u_grids, oversample)
    return basis.matrix.conj().T @ (K @ basis.matrix) * basis.cell ** 2


class SymbolMatrices:
    """Per-lambda Op^W matrices of a g-independent symbol (lazy, cached)."""

    def __init__(self, sym: LambdaSymbol, cfg: QuantConfig):
        if not sym.g_independent:
            raise ValueError("SymbolMatrices requires a g-independent symbol")
        self.sym = sym
        self.cfg = cfg
        self._cache: dict[float, np.ndarray] = {}

    def at(self, lam: float) -> np.ndarray:
        if lam not in self._cache:
            self._cache[lam] = symbol_matrix(self.sym, lam, self.cfg.basis, None)
        return self._cache[lam]


class FunctionTransform:
    """Group Fourier data of one function phi, cached per lambda node."""

    def __init__(self, phi: GridFunction, cfg: QuantConfig):
        if phi.grids != cfg.group_grids:
            raise GridError("function grids differ from config group grids")
        self.phi = phi
        self.cfg = cfg
        self.gf = GroupFourier(phi)
        self._mats: dict[float, np.ndarray] = {}

    def matrix(self, lam: float) -> np.ndarray:
        if lam not in self._mats:
            self._mats[lam] = self.gf.matrix(lam, self.cfg.basis).matrix
        return self._mats[lam]

    def all_matrices(self) -> list[np.ndarray]:
        return [self.matrix(l) for l in self.cfg.lgrid.nodes]

    def tail_fraction(self) -> float:
        return plancherel_tail_fraction(self.gf, self.cfg.lgrid)


# ---------------------------------------------------------------------------
# apply


def _trace_sweep(cfg: QuantConfig, weights_fn, out_x, out_y):
    """tau[x, y, lam] = Tr( pi_l(x,y,0) W(lam) ) over output (x, y) nodes.

    ``weights_fn(lam) -> W`` supplies the per-node matrix; uses the shifted
    Hermite basis so each (lam, x) pair costs one dense product.
    """
    basis = cfg.basis
    u = basis.u_grids[0].nodes
    h = basis.u_grids[0].spacing
    nodes = cfg.lgrid.nodes
    tau = np.zeros((len(out_x), len(out_y), len(nodes)), dtype=complex)
    for li, lam in enumerate(nodes):
        W = weights_fn(lam)
        sl = np.sqrt(abs(lam))
        ss = signed_sqrt(lam)
        phase_y = np.exp(1j * ss * np.outer(u, out_y))
        for ix, xval in enumerate(out_x):
            shifted = basis.shifted_matrix(sl * xval)
            Gu = np.einsum("uj,uj->u", basis.matrix.conj(), shifted @ W)
            col = (Gu[:, None] * phase_y).sum(axis=0) * h
            tau[ix, :, li] = col * np.exp(1j * lam * xval * out_y / 2.0)
    return tau


def apply(sym: LambdaSymbol, phi, cfg: QuantConfig, adjoint: bool = False):
    """Op(sigma) phi on the coarse output lattice.

    ``phi`` may be a GridFunction or a prepared :class:`FunctionTransform`.
    ``adjoint=True`` conjugate-transposes every symbol matrix in the trace,
    probing Op(sigma)^*.  Symbols with ``g_components`` are combined as
    sum_i c_i(g) * apply(sigma_i); general g-dependence is rejected here
    (use :func:`apply_weyl_form` on a small g-set instead).
    """
    cal = cfg.require_calibration()
    if cfg.n != 1:
        raise NotImplementedError("apply is implemented for n=1")
    ft = phi if isinstance(phi, FunctionTransform) else FunctionTransform(phi, cfg)
    idx = cfg.output_indices()
    out_x = cfg.group_grids[0].nodes[idx[0]]
    out_y = cfg.group_grids[1].nodes[idx[1]]
    out_t = cfg.group_grids[2].nodes[idx[2]]

    def run(component_family):
        mats = {lam: symbol_matrix(component_family, lam, cfg.basis)
                for lam in cfg.lgrid.nodes}

        def weights(lam):
            S = mats[lam]
            if adjoint:
                S = S.conj().T
            return S @ ft.matrix(lam)

        tau = _trace_sweep(cfg, weights, out_x, out_y)
        phases = np.exp(1j * np.outer(cfg.lgrid.nodes, out_t))
        return cal.c_n * np.einsum("xyl,l,lt->xyt", tau, cfg.lgrid.weights, phases)

    if sym.g_independent:
        vals = run(sym.family_at(None).evaluator)
    elif sym.g_components:
        vals = np.zeros((len(out_x), len(out_y), len(out_t)), dtype=complex)
        mesh = np.meshgrid(out_x, out_y, out_t, indexing="ij")
        for coef, fam in sym.g_components:
            cvals = np.empty_like(vals)
            it = np.nditer(mesh[0], flags=["multi_index"])
            for _ in it:
                i = it.multi_index
                cvals[i] = coef(HPoint((mesh[0][i],), (mesh[1][i],), mesh[2][i]))
            vals = vals + cvals * run(fam.evaluator)
    else:
        raise NotImplementedError(
            "general g-dependent symbols: use apply_weyl_form on a g-set")
    return cfg.field_like(vals)


def apply_weyl_form(sym: LambdaSymbol, phi, cfg: QuantConfig, g_points,
                    constant: float | None = None) -> np.ndarray:
    """The Euclidean-trace route at selected group points.

        A phi(g) = c'_n int Tr( Op^W(a_{g,l}) Op^W[ F(phi(g .))(scaled) ] ) |l|^n dl

    with the trace evaluated exactly as (2pi)^{-n} int a b over phase space.
    ``constant=None`` uses the calibrated c'_n; pass 1.0 for raw values.
    """
    if cfg.n != 1:
        raise NotImplementedError("apply_weyl_form is implemented for n=1")
    if constant is None:
        constant = cfg.require_calibration().c_n_prime
    ft = phi if isinstance(phi, FunctionTransform) else FunctionTransform(phi, cfg)
    ugrid = cfg.basis.u_grids[0]
    xi = ugrid.conjugate().nodes
    uu = ugrid.nodes
    cell = ugrid.conjugate().spacing * ugrid.spacing
    out = np.zeros(len(g_points), dtype=complex)
    mesh_xi = xi[:, None]
    mesh_u = uu[None, :]
    for li, (lam, w) in enumerate(zip(cfg.lgrid.nodes, cfg.lgrid.weights)):
        for gi, g in enumerate(g_points):
            a_vals = np.asarray(sym(g, lam, mesh_xi, mesh_u), dtype=complex)
            b_vals = ft.gf.sheared_slab(lam, g, xi, uu)
            out[gi] += w * np.sum(a_vals * b_vals) * cell / (2.0 * np.pi)
    return constant * out


# ---------------------------------------------------------------------------
# calibration of c'_n


def calibrate_prime(cfg: QuantConfig, samples, points_per_sample: int = 5,
                    seed: int = 11) -> tuple[float, float]:
    """c'_n from the sym = 1 inversion: phi(g) = c'_n * raw_weyl_value(g).

    Returns (estimate, spread).  Sample points are drawn where |phi| is
    within a factor 5 of its maximum, so the quotient is well conditioned.
    """
    one = _unit_symbol(cfg.n)
    rng = np.random.default_rng(seed)
    ests = []
    for phi in samples:
        ft = FunctionTransform(phi, cfg)
        flat = np.abs(phi.values).ravel()
        good = np.flatnonzero(flat >= flat.max() / 5.0)
        chosen = rng.choice(good, size=min(points_per_sample, len(good)),
                            replace=False)
        g_points = []
        for fi in chosen:
            ii = np.unravel_index(fi, phi.values.shape)
            g_points.append(HPoint((phi.grids[0].nodes[ii[0]],),
                                   (phi.grids[1].nodes[ii[1]],),
                                   phi.grids[2].nodes[ii[2]]))
        raw = apply_weyl_form(one, ft, cfg, g_points, constant=1.0)
        target = np.array([phi.values[np.unravel_index(fi, phi.values.shape)]
                           for fi in chosen])
        ests.extend(np.real(target / raw))
    ests = np.array(ests)
    return float(ests.mean()), float(np.max(np.abs(ests / ests.mean() - 1.0)))


def _unit_symbol(n: int) -> LambdaSymbol:
    def ev(g, lam, *coords):
        shape = np.broadcast_shapes(*(np.shape(c) for c in coords))
        return np.ones(shape, dtype=complex)
    return LambdaSymbol(ev, order=0.0, n=n, label="one")


# ---------------------------------------------------------------------------
# Sobolev norms and probes


def sobolev_norm(phi, s: float, cfg: QuantConfig,
                 tail_warn: float = 0.05, tail_error: float = 0.25) -> float:
    """Spectral Sobolev norm through powers of the rep of I - L."""
    cal = cfg.require_calibration()
    ft = phi if isinstance(phi, FunctionTransform) else FunctionTransform(phi, cfg)
    basis = cfg.basis
    total = 0.0
    top = 0.0
    shell = max(1, basis.n_h // 8)
    for lam, w in zip(cfg.lgrid.nodes, cfg.lgrid.weights):
        d = oscillator_spectrum(lam, basis.degrees, basis.n) ** (s / 2.0)
        weighted = np.abs(d[:, None] * ft.matrix(lam)) ** 2
        total += float(np.sum(weighted)) * w
        top += float(np.sum(weighted[-shell:, :])) * w
    if total > 0:
        frac = top / total
        if frac > tail_error:
            raise NumericalInstabilityError(
                f"top Hermite shell carries {frac:.1%} of the s={s} norm")
        if frac > tail_warn:
            warnings.warn(f"s={s} norm has {frac:.1%} in the top Hermite shell",
                          stacklevel=2)
    return float(np.sqrt(cal.c_n * total))


@dataclass(frozen=True)
class ProbeResult:
    mode: str
    s: float
    order: float
    ratios: tuple[float, ...]
    tail_fractions: tuple[float, ...]

    @property
    def worst(self) -> float:
        return max(self.ratios)

    def as_records(self):
        head = ("sample", "ratio", "tail_fraction")
        rows = [(i, r, t) for i, (r, t) in
                enumerate(zip(self.ratios, self.tail_fractions))]
        return head, rows


def _norm_of_transformed(ft: FunctionTransform, mats: SymbolMatrices,
                         s: float, cfg: QuantConfig) -> float:
    """||Op(sigma) phi||_{L2_s} purely spectrally: D^{s/2} S(l) M(l)."""
    cal = cfg.require_calibration()
    basis = cfg.basis
    total = 0.0
    for lam, w in zip(cfg.lgrid.nodes, cfg.lgrid.weights):
        d = oscillator_spectrum(lam, basis.degrees, basis.n) ** (s / 2.0)
        total += float(np.sum(np.abs(d[:, None] * (mats.at(lam) @ ft.matrix(lam))) ** 2)) * w
    return float(np.sqrt(cal.c_n * total))


def boundedness_probe(sym: LambdaSymbol, s: float, samples, cfg: QuantConfig) -> ProbeResult:
    """max over samples of ||Op(sigma) phi||_{s-m} / ||phi||_s."""
    mats = SymbolMatrices(sym, cfg)
    ratios, tails = [], []
    for phi in samples:
        ft = FunctionTransform(phi, cfg)
        num = _norm_of_transformed(ft, mats, s - sym.order, cfg)
        den = sobolev_norm(ft, s, cfg)
        ratios.append(num / den)
        tails.append(ft.tail_fraction())
    return ProbeResult("bounded", s, sym.order, tuple(ratios), tuple(tails))


def subelliptic_probe(sym: LambdaSymbol, m0: float, s: float, samples,
                      cfg: QuantConfig, floor: float = 1e-8) -> ProbeResult:
    """max over samples of ||phi||_{s+m0} / ||Op(sigma) phi||_s."""
    mats = SymbolMatrices(sym, cfg)
    ratios, tails = [], []
    for phi in samples:
        ft = FunctionTransform(phi, cfg)
        num = sobolev_norm(ft, s + m0, cfg)
        den = _norm_of_transformed(ft, mats, s, cfg)
        if den < floor * num:
            raise NumericalInstabilityError(
                "denominator nearly vanishes: sample is almost annihilated")
        ratios.append(num / den)
        tails.append(ft.tail_fraction())
    return ProbeResult("subelliptic", s, m0, tuple(ratios), tuple(tails))


def composition_residual(sym_b: LambdaSymbol, sym_a: LambdaSymbol, phi,
                         cfg: QuantConfig) -> float:
    """|| Op(b) Op(a) phi - phi || / || phi ||, at the operator level.

    For g-independent symbols the group transform of Op(sigma) phi is
    S(lambda) pi_lambda(phi), so the composition residual is the Plancherel
    sum of (S_b S_a - I) pi_lambda(phi).
    """
    if not (sym_a.g_independent and sym_b.g_independent):
        raise NotImplementedError("operator-level composition needs "
                                  "g-independent symbols")
    cal = cfg.require_calibration()
    ft = phi if isinstance(phi, FunctionTransform) else FunctionTransform(phi, cfg)
    mats_a = SymbolMatrices(sym_a, cfg)
    mats_b = SymbolMatrices(sym_b, cfg)
    eye = np.eye(cfg.basis.n_h)
    num = 0.0
    den = 0.0
    for lam, w in zip(cfg.lgrid.nodes, cfg.lgrid.weights):
        M = ft.matrix(lam)
        E = mats_b.at(lam) @ mats_a.at(lam) - eye
        num += float(np.sum(np.abs(E @ M) ** 2)) * w
        den += float(np.sum(np.abs(M) ** 2)) * w
    return float(np.sqrt(num / den))


# ---------------------------------------------------------------------------
# seeded sample functions


def probe_samples(cfg: QuantConfig, count: int = 3, seed: int = 23,
                  t_modulation: tuple[float, float] = (3.0, 4.5)) -> list[GridFunction]:
    """Random modulated Gaussians whose content sits inside the lambda band."""
    rng = np.random.default_rng(seed)
    out = []
    dim = len(cfg.group_grids)
    for _ in range(count):
        widths = rng.uniform(0.85, 1.25, size=dim)
        om = np.zeros(dim)
        om[:-1] = rng.uniform(-1.0, 1.0, size=dim - 1)
        om[-1] = rng.choice([-1.0, 1.0]) * rng.uniform(*t_modulation)
        center = np.zeros(dim)
        center[:-1] = rng.uniform(-0.5, 0.5, size=dim - 1)
        out.append(modulated_gaussian(cfg.group_grids, widths, om, center))
    return out


def parametrix_sample(cfg: QuantConfig) -> GridFunction:
    """The fixed high-frequency Schwartz sample used by the parametrix suite.

    Spatial modulation 6 puts the phase-space content near
    |lambda| rho ~ 36, well above the default cutoffs; the mild t-modulation
    keeps the lambda content around 1.2 where the cutoff transition is
    resolved by whole phase-space cells.
    """
    dim = len(cfg.group_grids)
    widths = [1.0] * (dim - 1) + [2.5]
    om = [6.0] + [0.0] * (dim - 2) + [1.2]
    return modulated_gaussian(cfg.group_grids, widths, om)
