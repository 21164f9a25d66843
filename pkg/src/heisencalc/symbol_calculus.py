"""Symbol classes S^m_{rho,delta}: membership checks, ellipticity, parametrix.

The membership checker certifies the Shubin-type estimate

    |d_xi^a d_u^b dtilde^at X_g^bt a(g,l,xi,u)|
        <= C |l|^{rho(|a|+|b|)/2} (1 + |l|(1 + |xi|^2 + |u|^2))^{e/2},
    e = m - 2 rho at + delta [bt] - rho (|a|+|b|),

by sampling a finite box and re-checking on a refined sample (finer, larger
box, wider lambda band): the verdict is "pass" when the best constants stay
within a growth tolerance.

Sampling excludes the spectrally void disc |xi|^2 + |u|^2 < n: the Hermite
spectrum of the representations occupies the annuli |xi|^2+|u|^2 ~ 2|k|+n,
so no operator content lives below the ground-state annulus at any lambda.
Without this cut the weight (1 + |lambda|(1 + rho)) over-penalizes
reciprocal symbols at large lambda and the leading parametrix of I - L
would be rejected even though the inverse operator is perfectly tame.  The
cut is configurable (``SampleSpec.spectral_margin = 0`` disables it).
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace

import numpy as np

from . import fd
from .difference_ops import (SymbolFamily, delta_power, generator_family,
                             tilde_partial)
from .heisenberg import HPoint, MultiIndex, group_mul
from .phase_space import HermiteBasis, operator_norm, opw_matrix, sandwich_power
from .representations import LambdaGrid, signed_sqrt


class EllipticityError(ValueError):
    """Parametrix construction refused: the ellipticity check failed."""

    def __init__(self, message, result=None):
        super().__init__(message)
        self.result = result


class TruncationInstabilityError(RuntimeError):
    """A truncated operator quantity moved too much under basis halving."""


@dataclass(frozen=True)
class LambdaSymbol:
    """A lambda-symbol family a(g, lambda, xi, u) with class metadata.

    ``evaluator(g, lam, xi_1..xi_n, u_1..u_n)`` must accept ``g=None`` when
    ``g_independent``; ``g_components`` optionally expresses the symbol as
    sum_i c_i(g) * sigma_i(lambda, xi, u), which the quantizer exploits.
    """

    evaluator: object
    order: float
    rho: float = 1.0
    delta: float = 0.0
    n: int = 1
    g_independent: bool = True
    g_components: tuple = ()
    label: str = ""
    lambda_band: tuple[float, float] = (1.0 / 16.0, 16.0)
    rel_step: float = 1e-2

    def __post_init__(self):
        if not (0.0 <= self.delta <= self.rho <= 1.0) or (self.rho, self.delta) == (0.0, 0.0):
            raise ValueError("need 1 >= rho >= delta >= 0 and (rho, delta) != 0")

    def __call__(self, g, lam, *coords):
        return self.evaluator(g, lam, *coords)

    def family_at(self, g: HPoint | None) -> SymbolFamily:
        ev = self.evaluator
        return SymbolFamily(lambda lam, *coords: ev(g, lam, *coords), n=self.n,
                            lambda_band=self.lambda_band, label=self.label,
                            rel_step=self.rel_step)

    @classmethod
    def from_family(cls, fam: SymbolFamily, order: float, rho: float = 1.0,
                    delta: float = 0.0, label: str | None = None) -> "LambdaSymbol":
        ev = fam.evaluator
        return cls(lambda g, lam, *coords: ev(lam, *coords), order, rho, delta,
                   n=fam.n, g_independent=True,
                   label=fam.label if label is None else label,
                   lambda_band=fam.lambda_band, rel_step=fam.rel_step)


def group_partial(fn_of_g, which: str, j: int, n: int, rel_step: float = 1e-3):
    """Left-invariant derivative of g -> fn_of_g(g) along X_j, Y_j or T.

    (X f)(g) = d/ds f(g . exp(s X)); realized by a 5-point stencil in s.
    """
    ej = [0.0] * n
    if which in ("X", "Y"):
        ej[j - 1] = 1.0

    def shifted(g: HPoint, s: float) -> HPoint:
        if which == "X":
            return group_mul(g, HPoint(tuple(v * s for v in ej), (0.0,) * n, 0.0))
        if which == "Y":
            return group_mul(g, HPoint((0.0,) * n, tuple(v * s for v in ej), 0.0))
        return group_mul(g, HPoint((0.0,) * n, (0.0,) * n, s))

    coeffs = ((1.0 / 12.0, -2), (-8.0 / 12.0, -1), (8.0 / 12.0, 1), (-1.0 / 12.0, 2))

    def d(g: HPoint, *rest):
        h = rel_step
        acc = None
        for w, k in coeffs:
            term = w * np.asarray(fn_of_g(shifted(g, k * h), *rest), dtype=complex)
            acc = term if acc is None else acc + term
        return acc / h

    return d


def group_monomial_partial(fn, beta_g: MultiIndex, n: int):
    """X^{b1} Y^{b2} T^{b3} applied to the g-slot of fn(g, *rest) (T first)."""
    for _ in range(beta_g.alpha3):
        fn = group_partial(fn, "T", 1, n)
    for j in range(n, 0, -1):
        for _ in range(beta_g.alpha2[j - 1]):
            fn = group_partial(fn, "Y", j, n)
    for j in range(n, 0, -1):
        for _ in range(beta_g.alpha1[j - 1]):
            fn = group_partial(fn, "X", j, n)
    return fn


# ---------------------------------------------------------------------------
# sampling


@dataclass(frozen=True)
class SampleSpec:
    """Finite sampling surrogate for the sup over phase space and lambda.

    ``spectral_margin`` scales the excluded disc |xi|^2+|u|^2 < margin * n
    (see the module docstring); ``region_floor`` optionally restricts to
    |lambda| (|xi|^2+|u|^2) >= R for ellipticity checks.
    """

    box: float = 6.0
    points_per_axis: int = 9
    lam_min: float = 1.0 / 16.0
    lam_max: float = 16.0
    lam_count: int = 17
    both_signs: bool = True
    spectral_margin: float = 1.0
    region_floor: float | None = None

    def refine(self, box_factor: float = 2.0, band_factor: float = 2.0,
               points_factor: int = 2) -> "SampleSpec":
        return replace(self, box=self.box * box_factor,
                       points_per_axis=self.points_per_axis * points_factor + 1,
                       lam_min=self.lam_min / band_factor,
                       lam_max=self.lam_max * band_factor,
                       lam_count=self.lam_count * points_factor)

    def lambda_values(self) -> np.ndarray:
        pos = np.exp(np.linspace(np.log(self.lam_min), np.log(self.lam_max),
                                 self.lam_count))
        return np.concatenate([-pos[::-1], pos]) if self.both_signs else pos

    def phase_points(self, n: int):
        """(coords, rho) with coords a list of 2n flat arrays on the box grid."""
        axis = np.linspace(-self.box, self.box, self.points_per_axis)
        mesh = np.meshgrid(*([axis] * (2 * n)), indexing="ij")
        coords = [m.ravel() for m in mesh]
        rho = sum(c ** 2 for c in coords)
        keep = rho >= self.spectral_margin * n
        return [c[keep] for c in coords], rho[keep]


def shubin_weight(lam, rho_pts, order_exponent: float) -> np.ndarray:
    return (1.0 + np.abs(lam) * (1.0 + rho_pts)) ** (order_exponent / 2.0)


# ---------------------------------------------------------------------------
# the Shubin-side checker


def _derived_family(sym: LambdaSymbol, alpha, beta, alpha_t: int,
                    beta_g: MultiIndex, g: HPoint | None):
    """Evaluator of d_xi^alpha d_u^beta dtilde^{alpha_t} X_g^{beta_g} a at fixed g."""
    n = sym.n
    if beta_g.total_order > 0:
        if sym.g_independent:
            return None                       # derivative vanishes identically
        base_fn = group_monomial_partial(sym.evaluator, beta_g, n)
        fam = SymbolFamily(lambda lam, *coords: base_fn(g, lam, *coords), n=n,
                           lambda_band=sym.lambda_band, rel_step=sym.rel_step)
    else:
        fam = sym.family_at(g)
    for _ in range(alpha_t):
        fam = tilde_partial(fam)
    ev = fam.evaluator
    for j in range(n):
        for _ in range(beta[j]):
            ev = fd.coordinate_partial(ev, n + j, sym.rel_step)
    for j in range(n):
        for _ in range(alpha[j]):
            ev = fd.coordinate_partial(ev, j, sym.rel_step)
    return ev


def shubin_seminorm(sym: LambdaSymbol, alpha=(0,), beta=(0,), alpha_t: int = 0,
                    beta_g: MultiIndex | None = None,
                    sample: SampleSpec | None = None,
                    g: HPoint | None = None) -> float:
    """Best constant sup |LHS| / RHS over the sampled region."""
    alpha = tuple(alpha)
    beta = tuple(beta)
    if beta_g is None:
        beta_g = MultiIndex((0,) * sym.n, (0,) * sym.n, 0)
    if sample is None:
        sample = SampleSpec()
    if g is None:
        g = HPoint.identity(sym.n)
    ev = _derived_family(sym, alpha, beta, alpha_t, beta_g, g)
    if ev is None:
        return 0.0
    coords, rho_pts = sample.phase_points(sym.n)
    if sample.region_floor is not None:
        raise ValueError("region_floor applies to elliptic_check, not membership")
    ab = sum(alpha) + sum(beta)
    expo = (sym.order - 2.0 * sym.rho * alpha_t + sym.delta * beta_g.homogeneous_degree
            - sym.rho * ab)
    lam_col = sample.lambda_values()[:, None]
    coords_row = [c[None, :] for c in coords]
    lhs = np.abs(np.asarray(ev(lam_col, *coords_row)))
    if not np.all(np.isfinite(lhs)):
        raise FloatingPointError("non-finite derivative in shubin_seminorm")
    rhs = (np.abs(lam_col) ** (sym.rho * ab / 2.0)
           * shubin_weight(lam_col, rho_pts[None, :], expo))
    return float(np.max(lhs / rhs))


@dataclass(frozen=True)
class MembershipRow:
    alpha: tuple
    beta: tuple
    alpha_t: int
    beta_g: tuple
    constant: float
    refined_constant: float
    ratio: float
    passed: bool
    g_row: bool


@dataclass(frozen=True)
class MembershipReport:
    symbol: str
    order: float
    rho: float
    delta: float
    max_orders: tuple[int, int, int]
    rows: tuple[MembershipRow, ...]
    growth_tol: float

    @property
    def passed(self) -> bool:
        return all(r.passed for r in self.rows)

    def worst(self) -> MembershipRow:
        return max(self.rows, key=lambda r: r.ratio)

    def as_records(self):
        head = ("alpha", "beta", "alpha_t", "beta_g", "constant",
                "refined_constant", "ratio", "verdict", "g_row")
        rows = [(";".join(map(str, r.alpha)), ";".join(map(str, r.beta)),
                 r.alpha_t, ";".join(map(str, r.beta_g)), r.constant,
                 r.refined_constant, r.ratio, "pass" if r.passed else "fail",
                 int(r.g_row)) for r in self.rows]
        return head, rows


def _phase_multi_indices(n: int, max_total: int):
    if n == 1:
        for a in range(max_total + 1):
            for b in range(max_total + 1 - a):
                yield (a,), (b,)
        return
    def across(total, slots):
        if slots == 1:
            yield (total,)
            return
        for first in range(total + 1):
            for rest in across(total - first, slots - 1):
                yield (first,) + rest
    for total in range(max_total + 1):
        for combined in across(total, 2 * n):
            yield combined[:n], combined[n:]


def _group_multi_indices(n: int, max_degree: int):
    for d1 in range(max_degree + 1):
        for comb1 in _compositions_list(d1, n):
            for d2 in range(max_degree + 1 - d1):
                for comb2 in _compositions_list(d2, n):
                    max3 = (max_degree - d1 - d2) // 2
                    for a3 in range(max3 + 1):
                        yield MultiIndex(comb1, comb2, a3)


def _compositions_list(total, slots):
    if slots == 1:
        return [(total,)]
    out = []
    for first in range(total + 1):
        for rest in _compositions_list(total - first, slots - 1):
            out.append((first,) + rest)
    return out


def membership(sym: LambdaSymbol, max_orders=(4, 2, 2),
               sample: SampleSpec | None = None, growth_tol: float = 0.10,
               g: HPoint | None = None) -> MembershipReport:
    """Sweep the estimate over |alpha|+|beta| <= a, [beta_g] <= b, alpha_t <= c.

    Each tuple is certified on the base sample and once more on a refined
    sample (double resolution, double box, double band both ends); the row
    passes when the constant is finite and grows by at most ``growth_tol``.
    Rows with exact-zero constants (vanishing derivatives) pass trivially.
    """
    a_max, b_max, c_max = max_orders
    if sample is None:
        sample = SampleSpec()
    refined = sample.refine()
    base = shubin_seminorm(sym, (0,) * sym.n, (0,) * sym.n, 0, None, sample, g)
    # rows whose true derivative vanishes sit at stencil-roundoff level;
    # anchor the zero floor to the symbol's own magnitude scale
    zero_floor = 1e-6 * max(1.0, base)
    rows = []
    for alpha, beta in _phase_multi_indices(sym.n, a_max):
        for alpha_t in range(c_max + 1):
            for beta_g in _group_multi_indices(sym.n, b_max):
                g_row = beta_g.total_order > 0
                if g_row and sym.g_independent:
                    rows.append(MembershipRow(alpha, beta, alpha_t,
                                              beta_g.alpha1 + beta_g.alpha2 + (beta_g.alpha3,),
                                              0.0, 0.0, 1.0, True, True))
                    continue
                c0 = shubin_seminorm(sym, alpha, beta, alpha_t, beta_g, sample, g)
                c1 = shubin_seminorm(sym, alpha, beta, alpha_t, beta_g, refined, g)
                if max(c0, c1) <= zero_floor:
                    ratio, passed = 1.0, True
                else:
                    ratio = c1 / c0 if c0 > 0 else np.inf
                    passed = bool(np.isfinite(c1) and ratio <= 1.0 + growth_tol)
                rows.append(MembershipRow(alpha, beta, alpha_t,
                                          beta_g.alpha1 + beta_g.alpha2 + (beta_g.alpha3,),
                                          float(c0), float(c1), float(ratio),
                                          passed, g_row))
    return MembershipReport(sym.label, sym.order, sym.rho, sym.delta,
                            tuple(max_orders), tuple(rows), growth_tol)


# ---------------------------------------------------------------------------
# operator-side seminorm


def operator_seminorm(sym: LambdaSymbol, a: int, b: int, c: int, lam: float,
                      basis: HermiteBasis, g: HPoint | None = None,
                      stability_tol: float = 0.10) -> float:
    """sup over [alpha]<=a, [beta_g]<=b, |gamma|<=c of the sandwiched norm

        || D^{(rho[alpha] - m - delta[beta] + gamma)/2}
             Op^W(Delta'^alpha X_g^beta a) D^{-gamma/2} ||_op,

    with D the diagonal rep of I - L.  Raises TruncationInstabilityError when
    halving the basis moves the value by more than ``stability_tol``.
    """
    if g is None:
        g = HPoint.identity(sym.n)

    def compute(bas: HermiteBasis) -> float:
        worst = 0.0
        for alpha in _group_multi_indices(sym.n, a):
            for beta_g in _group_multi_indices(sym.n, b):
                if beta_g.total_order > 0 and sym.g_independent:
                    continue
                if beta_g.total_order > 0:
                    fn = group_monomial_partial(sym.evaluator, beta_g, sym.n)
                    fam = SymbolFamily(lambda l2, *co, _fn=fn: _fn(g, l2, *co),
                                       n=sym.n, rel_step=sym.rel_step)
                else:
                    fam = sym.family_at(g)
                fam = delta_power(alpha, fam)
                op = opw_matrix(lambda *co: fam(lam, *co), bas, lam)
                for gamma in range(-c, c + 1):
                    e_left = (sym.rho * alpha.homogeneous_degree - sym.order
                              - sym.delta * beta_g.homogeneous_degree + gamma) / 2.0
                    val = operator_norm(sandwich_power(op, e_left, -gamma / 2.0))
                    worst = max(worst, val)
        return worst

    full = compute(basis)
    half = compute(basis.truncate(max(2, basis.n_h // 2)))
    if full > 0 and abs(full - half) > stability_tol * full:
        raise TruncationInstabilityError(
            f"operator seminorm moved {abs(full - half) / full:.1%} "
            f"under basis halving (n_h {basis.n_h} -> {basis.n_h // 2})")
    return full


# ---------------------------------------------------------------------------
# ellipticity and parametrix


@dataclass(frozen=True)
class EllipticResult:
    passed: bool
    constant: float
    refined_constant: float
    region_floor: float
    points_used: int


def elliptic_check(sym: LambdaSymbol, region_floor: float,
                   sample: SampleSpec | None = None, g: HPoint | None = None,
                   decay_tol: float = 0.25) -> EllipticResult:
    """Largest certified C with |a| >= C (1+|l|(1+rho))^{m/2} on |l| rho >= R.

    Pass requires C > 0 on the refined sample without collapsing (a grid
    minimum shrinking under refinement signals an in-region zero).
    """
    if sample is None:
        sample = SampleSpec()
    if g is None:
        g = HPoint.identity(sym.n)
    ev = sym.evaluator

    def constant(spec: SampleSpec):
        coords, rho_pts = spec.phase_points(sym.n)
        lam_col = spec.lambda_values()[:, None]
        r = np.abs(lam_col) * rho_pts[None, :]
        mask = r >= region_floor
        used = int(np.sum(mask))
        if used == 0:
            return np.inf, 0
        vals = np.abs(np.asarray(ev(g, lam_col, *[c[None, :] for c in coords])))
        vals = np.broadcast_to(vals, mask.shape)
        w = shubin_weight(lam_col, rho_pts[None, :], sym.order)
        return float(np.min((vals / w)[mask])), used

    c0, used0 = constant(sample)
    c1, used1 = constant(sample.refine())
    if not np.isfinite(c0) or used0 == 0:
        raise ValueError("region floor excludes every sample point")
    passed = bool(c1 > 0 and c1 >= (1.0 - decay_tol) * c0)
    return EllipticResult(passed, float(c0), float(c1), float(region_floor),
                          used0 + used1)


def smoothstep(x):
    """Quintic smoothstep: 0 below 0, 1 above 1, C^2 across."""
    x = np.clip(x, 0.0, 1.0)
    return x ** 3 * (10.0 - 15.0 * x + 6.0 * x ** 2)


def radial_cutoff(r, region_floor: float):
    """chi_R: vanishes below R, equals 1 above 2R, quintic in between."""
    return smoothstep((np.asarray(r) - region_floor) / region_floor)


def parametrix_leading(sym: LambdaSymbol, region_floor: float,
                       sample: SampleSpec | None = None,
                       elliptic: EllipticResult | None = None) -> LambdaSymbol:
    """Leading parametrix symbol b = chi_R(|l| rho) / a, declared order -m."""
    if elliptic is None:
        elliptic = elliptic_check(sym, region_floor, sample)
    if not elliptic.passed:
        raise EllipticityError(
            f"symbol {sym.label!r} is not elliptic at R={region_floor}: "
            f"certified constant {elliptic.constant:.3e} -> "
            f"{elliptic.refined_constant:.3e} under refinement", elliptic)
    ev = sym.evaluator
    n = sym.n

    def bev(g, lam, *coords):
        rho_pts = sum(np.asarray(c) ** 2 for c in coords)
        chi = radial_cutoff(np.abs(lam) * rho_pts, region_floor)
        vals = np.asarray(ev(g, lam, *coords))
        out = np.zeros(np.broadcast_shapes(chi.shape, vals.shape), dtype=complex)
        lit = chi > 0
        np.divide(chi * np.ones_like(out), vals, out=out, where=lit)
        return out

    return LambdaSymbol(bev, -sym.order, sym.rho, sym.delta, n=n,
                        g_independent=sym.g_independent,
                        label=f"parametrix[{sym.label}]@R={region_floor:g}",
                        lambda_band=sym.lambda_band, rel_step=sym.rel_step)


# ---------------------------------------------------------------------------
# built-in symbols


_F_PRESETS = {
    "one": lambda g: 1.0 + 0.0j,
    "zero": lambda g: 0.0j,
    "two_plus_sin_x": lambda g: 2.0 + np.sin(g.x[0]) + 0.0j,
}


def _resolve_coefficient(spec):
    if callable(spec):
        return spec
    if isinstance(spec, str):
        if spec in _F_PRESETS:
            return _F_PRESETS[spec]
        value = complex(spec)
        return lambda g, _v=value: _v
    value = complex(spec)
    return lambda g, _v=value: _v


def builtin_symbols(name: str, n: int = 1, **params) -> LambdaSymbol:
    """Named symbols: one | X | Y | T | L | I-L | XY-T | f1-f2L."""
    if name == "one":
        fam = SymbolFamily(lambda lam, *c: np.ones(
            np.broadcast_shapes(*(np.shape(x) for x in c)), dtype=complex), n=n,
            label="one")
        return LambdaSymbol.from_family(fam, order=0.0)
    if name in ("X", "Y"):
        j = int(params.get("j", 1))
        return LambdaSymbol.from_family(generator_family(name, n, j), order=1.0)
    if name == "T":
        return LambdaSymbol.from_family(generator_family("T", n), order=2.0)
    if name == "L":
        return LambdaSymbol.from_family(generator_family("L", n), order=2.0)
    if name == "I-L":
        def ev(lam, *coords):
            rho = sum(np.asarray(c) ** 2 for c in coords)
            return 1.0 + np.abs(lam) * rho + 0.0j
        return LambdaSymbol.from_family(SymbolFamily(ev, n=n, label="I-L"),
                                        order=2.0)
    if name == "XY-T":
        if n != 1:
            raise ValueError("the XY-T family is defined on H_1")
        m = int(params.get("m", 2))
        m0 = int(params.get("m0", 2))
        if m % 2 or m0 % 2 or m < m0 or m0 < 2:
            raise ValueError("need even m >= m0 >= 2")

        def ev(lam, xi, uu):
            # direct substitution of the generator symbols:
            #   (i sq|l| xi)^m + i (i sq(l) u)^{m0} + (i l)^{m0/2}
            return ((1j * np.sqrt(np.abs(lam)) * np.asarray(xi)) ** m
                    + 1j * (1j * signed_sqrt(lam) * np.asarray(uu)) ** m0
                    + (1j * np.asarray(lam)) ** (m0 // 2))

        return LambdaSymbol.from_family(
            SymbolFamily(ev, n=1, label=f"XY-T(m={m},m0={m0})"), order=float(m))
    if name == "f1-f2L":
        f1 = _resolve_coefficient(params.get("f1", "one"))
        f2 = _resolve_coefficient(params.get("f2", "one"))

        def gev(g, lam, *coords):
            rho = sum(np.asarray(c) ** 2 for c in coords)
            return f1(g) + f2(g) * np.abs(lam) * rho + 0.0j

        one_fam = SymbolFamily(lambda lam, *c: np.ones(
            np.broadcast_shapes(*(np.shape(x) for x in c)), dtype=complex), n=n)
        osc_fam = SymbolFamily(lambda lam, *c: np.abs(lam) * sum(
            np.asarray(x) ** 2 for x in c) + 0.0j, n=n)
        return LambdaSymbol(gev, order=2.0, n=n, g_independent=False,
                            g_components=((f1, one_fam), (f2, osc_fam)),
                            label="f1-f2L")
    raise ValueError(f"unknown builtin symbol {name!r}")


# ---------------------------------------------------------------------------
# variable-coefficient ellipticity condition


@dataclass(frozen=True)
class VariableCoeffResult:
    passed: bool
    infimum: float
    refined_infimum: float
    derivative_sups: tuple[float, ...]


def variable_coeff_condition(f1, f2, lam_floor: float = 0.0,
                             box: float = 4.0, points: int = 9,
                             lam_max: float = 64.0, lam_count: int = 33,
                             derivative_order: int = 2, n: int = 1,
                             decay_tol: float = 0.25) -> VariableCoeffResult:
    """inf over x and lambda >= Lambda of |f1 + f2 lambda| / (1 + lambda),
    plus sup norms of the X-derivatives of f1, f2 up to ``derivative_order``.

    The lambda -> infinity limit |f2(x)| joins the sampled values, so the
    infimum surrogate covers the unbounded end.
    """
    f1 = _resolve_coefficient(f1)
    f2 = _resolve_coefficient(f2)

    def points_on_group(b, count):
        axis = np.linspace(-b, b, count)
        pts = []
        for xv in axis:
            for yv in axis:
                for tv in np.linspace(-b * b, b * b, 3):
                    pts.append(HPoint((xv,) * n, (yv,) * n, tv))
        return pts

    def infimum(b, count, lcount):
        lams = np.concatenate([[lam_floor], np.geomspace(
            max(lam_floor, 1e-4) + 1e-12, lam_max, lcount)])
        best = np.inf
        for g in points_on_group(b, count):
            v1, v2 = complex(f1(g)), complex(f2(g))
            vals = np.abs(v1 + v2 * lams) / (1.0 + lams)
            best = min(best, float(np.min(vals)), abs(v2))
        return best

    inf0 = infimum(box, points, lam_count)
    inf1 = infimum(box * 1.5, points * 2 - 1, lam_count * 2)
    sups = []
    for fn in (f1, f2):
        worst = 0.0
        for beta in _group_multi_indices(n, derivative_order):
            if beta.total_order == 0:
                continue
            dfn = group_monomial_partial(lambda g, *unused, _f=fn: _f(g), beta, n)
            for g in points_on_group(box, points):
                worst = max(worst, float(np.abs(dfn(g))))
        sups.append(worst)
    passed = bool(inf1 > 0 and inf1 >= (1.0 - decay_tol) * inf0
                  and all(np.isfinite(s) for s in sups))
    return VariableCoeffResult(passed, float(inf0), float(inf1), tuple(sups))
