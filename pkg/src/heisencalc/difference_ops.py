"""Difference operators acting on lambda-symbol families.

On the Weyl-symbol side the difference operators are first-order operators:

    delta_x_j  ->  (i / sqrt|lambda|)   d/d xi_j
    delta_y_j  ->  (i / sqrt(lambda))   d/d u_j      (signed square root)
    delta_t    ->  i ( d/d lambda - (1/2 lambda) sum_j (u_j d/du_j + xi_j d/dxi_j) )

together with the renormalization a(xi, u) = a~(sqrt|l| xi, sqrt(l) u) under
which all three become plain coordinate derivatives of a~.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace

import numpy as np

from . import fd
from .heisenberg import MultiIndex
from .phase_space import WeylSymbol
from .representations import infinitesimal_evaluator, signed_sqrt


@dataclass(frozen=True)
class SymbolFamily:
    """A family of Weyl symbols a_lambda(xi, u), given as a closure.

    ``evaluator(lam, xi_1..xi_n, u_1..u_n)`` must broadcast over coordinate
    arrays and be smooth to the order of any difference operators applied;
    :meth:`validate` spot-checks that by step-halving.
    """

    evaluator: object
    n: int = 1
    lambda_band: tuple[float, float] = (1.0 / 16.0, 16.0)
    label: str = ""
    rel_step: float = 1e-2

    def __call__(self, lam, *coords):
        if np.any(np.asarray(lam) == 0):
            raise ValueError("lambda must be nonzero")
        return self.evaluator(lam, *coords)

    def at_lambda(self, lam: float, u_grids, xi_grids=None) -> WeylSymbol:
        return WeylSymbol.sample(lambda *coords: self(lam, *coords),
                                 u_grids, xi_grids)

    def validate(self, lam: float, coords, slots=None, tol: float = 1e-4):
        fd.check_smoothness(self.evaluator, lam, coords, slots,
                            self.rel_step, tol)

    def relabel(self, label: str) -> "SymbolFamily":
        return replace(self, label=label)

    def __add__(self, other: "SymbolFamily") -> "SymbolFamily":
        if self.n != other.n:
            raise ValueError("dimension mismatch")
        a, b = self.evaluator, other.evaluator
        return replace(self, evaluator=lambda lam, *c: a(lam, *c) + b(lam, *c),
                       label=f"({self.label}+{other.label})")

    def scale(self, factor: complex) -> "SymbolFamily":
        a = self.evaluator
        return replace(self, evaluator=lambda lam, *c: factor * a(lam, *c),
                       label=f"{factor}*{self.label}")


def generator_family(which: str, n: int = 1, j: int = 1) -> SymbolFamily:
    """Symbol family of X_j, Y_j, T or the sub-Laplacian L."""
    return SymbolFamily(infinitesimal_evaluator(which, n, j), n=n,
                        label=f"{which}{j if which in ('X', 'Y') and n > 1 else ''}")


def delta_x(j: int, fam: SymbolFamily, validate: bool = False) -> SymbolFamily:
    """(i/sqrt|lambda|) d/d xi_j on the family."""
    _check_j(j, fam)
    d = fd.coordinate_partial(fam.evaluator, j - 1, fam.rel_step)

    def ev(lam, *coords):
        return 1j / np.sqrt(np.abs(np.asarray(lam))) * d(lam, *coords)

    return replace(fam, evaluator=ev, label=f"Dx{j}[{fam.label}]")


def delta_y(j: int, fam: SymbolFamily, validate: bool = False) -> SymbolFamily:
    """(i/sqrt(lambda)) d/d u_j, with the signed square root."""
    _check_j(j, fam)
    d = fd.coordinate_partial(fam.evaluator, fam.n + j - 1, fam.rel_step)

    def ev(lam, *coords):
        return 1j / signed_sqrt(lam) * d(lam, *coords)

    return replace(fam, evaluator=ev, label=f"Dy{j}[{fam.label}]")


def lambda_partial(fam: SymbolFamily) -> SymbolFamily:
    """Plain d/d lambda at fixed (xi, u)."""
    d = fd.lambda_partial(fam.evaluator, fam.rel_step)
    return replace(fam, evaluator=d, label=f"dl[{fam.label}]")


def tilde_partial(fam: SymbolFamily) -> SymbolFamily:
    """d/d lambda - (1/2 lambda) sum_j (u_j d/du_j + xi_j d/dxi_j)."""
    n = fam.n
    dl = fd.lambda_partial(fam.evaluator, fam.rel_step)
    dcs = [fd.coordinate_partial(fam.evaluator, s, fam.rel_step)
           for s in range(2 * n)]

    def ev(lam, *coords):
        out = np.asarray(dl(lam, *coords), dtype=complex).copy()
        radial = None
        for s in range(2 * n):
            term = np.asarray(coords[s]) * dcs[s](lam, *coords)
            radial = term if radial is None else radial + term
        return out - radial / (2.0 * np.asarray(lam))

    return replace(fam, evaluator=ev, label=f"dtilde[{fam.label}]")


def delta_t(fam: SymbolFamily, validate: bool = False) -> SymbolFamily:
    """i * tilde_partial."""
    return tilde_partial(fam).scale(1j).relabel(f"Dt[{fam.label}]")


def delta_power(alpha: MultiIndex, fam: SymbolFamily) -> SymbolFamily:
    """Ordered composition Dx^{a1} Dy^{a2} Dt^{a3}; the Dt factors act first.

    Dx and Dy factors commute among themselves (mixed partials); Dt does not
    commute with them, so the displayed order is fixed and documented.
    """
    if len(alpha.alpha1) != fam.n or len(alpha.alpha2) != fam.n:
        raise ValueError("multi-index dimension mismatch")
    out = fam
    for _ in range(alpha.alpha3):
        out = delta_t(out)
    for j in range(fam.n, 0, -1):
        for _ in range(alpha.alpha2[j - 1]):
            out = delta_y(j, out)
    for j in range(fam.n, 0, -1):
        for _ in range(alpha.alpha1[j - 1]):
            out = delta_x(j, out)
    return out


def renormalize(fam: SymbolFamily) -> SymbolFamily:
    """a~ with a(xi, u) = a~(sqrt|l| xi, sqrt(l) u), i.e. evaluate at shrunk args."""
    n = fam.n
    ev0 = fam.evaluator

    def ev(lam, *coords):
        sl = np.sqrt(np.abs(np.asarray(lam)))
        ss = signed_sqrt(lam)
        scaled = [np.asarray(c) / sl for c in coords[:n]] + \
                 [np.asarray(c) / ss for c in coords[n:]]
        return ev0(lam, *scaled)

    return replace(fam, evaluator=ev, label=f"ren[{fam.label}]")


def derenormalize(fam: SymbolFamily) -> SymbolFamily:
    """Inverse of :func:`renormalize` (evaluate at stretched arguments)."""
    n = fam.n
    ev0 = fam.evaluator

    def ev(lam, *coords):
        sl = np.sqrt(np.abs(np.asarray(lam)))
        ss = signed_sqrt(lam)
        scaled = [np.asarray(c) * sl for c in coords[:n]] + \
                 [np.asarray(c) * ss for c in coords[n:]]
        return ev0(lam, *scaled)

    return replace(fam, evaluator=ev, label=f"deren[{fam.label}]")


def _check_j(j: int, fam: SymbolFamily):
    if not (1 <= j <= fam.n):
        raise ValueError(f"j={j} out of range for n={fam.n}")


# ---------------------------------------------------------------------------
# identity tables (n = 1)


def _phase_space_probe(box: float = 3.0, count: int = 9):
    pts = np.linspace(-box, box, count)
    xi, uu = np.meshgrid(pts, pts, indexing="ij")
    return xi.ravel(), uu.ravel()


def _maxerr(fam: SymbolFamily, target, lams, xi, uu) -> float:
    err = 0.0
    for lam in lams:
        got = np.asarray(fam(lam, xi, uu))
        want = np.asarray(target(lam, xi, uu))
        want = np.broadcast_to(want, got.shape)
        err = max(err, float(np.max(np.abs(got - want))))
    return err


def identity_table(lams=(0.25, -0.25, 1.0, -1.0, 4.0, -4.0), box: float = 3.0):
    """Max pointwise error for each displayed difference-operator identity.

    Returns a list of (name, error) rows; all should sit at stencil-roundoff
    level since every symbol involved is polynomial.
    """
    xi, uu = _phase_space_probe(box)
    X = generator_family("X")
    Y = generator_family("Y")
    T = generator_family("T")
    L = generator_family("L")
    zero = lambda lam, xi, uu: np.zeros_like(xi, dtype=complex)
    rows = [
        ("delta_x[Y] = 0", _maxerr(delta_x(1, Y), zero, lams, xi, uu)),
        ("delta_x[T] = 0", _maxerr(delta_x(1, T), zero, lams, xi, uu)),
        ("delta_y[X] = 0", _maxerr(delta_y(1, X), zero, lams, xi, uu)),
        ("delta_y[T] = 0", _maxerr(delta_y(1, T), zero, lams, xi, uu)),
        ("delta_x[X] = -1", _maxerr(delta_x(1, X),
                                    lambda lam, a, b: -np.ones_like(a, dtype=complex),
                                    lams, xi, uu)),
        ("delta_y[Y] = -1", _maxerr(delta_y(1, Y),
                                    lambda lam, a, b: -np.ones_like(a, dtype=complex),
                                    lams, xi, uu)),
        ("delta_t[T] = -1", _maxerr(delta_t(T),
                                    lambda lam, a, b: -np.ones_like(a, dtype=complex),
                                    lams, xi, uu)),
        ("delta_x[L] = -2 X", _maxerr(delta_x(1, L),
                                      lambda lam, a, b: -2.0 * X(lam, a, b),
                                      lams, xi, uu)),
        ("delta_y[L] = -2 Y", _maxerr(delta_y(1, L),
                                      lambda lam, a, b: -2.0 * Y(lam, a, b),
                                      lams, xi, uu)),
        ("delta_t[L] = 0", _maxerr(delta_t(L), zero, lams, xi, uu)),
    ]
    return rows


def _poly_test_family() -> SymbolFamily:
    def ev(lam, xi, uu):
        return ((1.0 + lam * lam) * xi ** 2 * uu
                - lam * uu ** 3 + xi + 0.5 * lam * xi * uu + 0.0j)

    return SymbolFamily(ev, n=1, label="poly")


def lemma_renormalization_table(lams=(0.25, -0.25, 1.0, -1.0, 4.0, -4.0),
                                box: float = 2.0, fam: SymbolFamily | None = None):
    """Check the three renormalization identities on a polynomial family.

    With a~ the renormalization of a (a = a~ composed with the stretch):
      1. tilde_partial a   (xi,u) = (d_lambda a~)(sqrt|l| xi, sqrt(l) u)
      2. (1/sqrt|l|) d_xi a(xi,u) = (d_xi a~)(sqrt|l| xi, sqrt(l) u)
      3. (1/sqrt(l)) d_u a (xi,u) = (d_u a~)(sqrt|l| xi, sqrt(l) u)
    """
    if fam is None:
        fam = _poly_test_family()
    xi, uu = _phase_space_probe(box)
    tilde = renormalize(fam)

    def stretched(derived: SymbolFamily):
        def ev(lam, a, b):
            sl, ss = np.sqrt(abs(lam)), signed_sqrt(lam)
            return derived(lam, sl * np.asarray(a), ss * np.asarray(b))
        return ev

    lhs1 = tilde_partial(fam)
    rhs1 = stretched(lambda_partial(tilde))

    d_xi = fd.coordinate_partial(fam.evaluator, 0, fam.rel_step)
    lhs2 = SymbolFamily(lambda lam, a, b: d_xi(lam, a, b) / np.sqrt(abs(lam)), n=1)
    rhs2 = stretched(SymbolFamily(
        fd.coordinate_partial(tilde.evaluator, 0, fam.rel_step), n=1))

    d_u = fd.coordinate_partial(fam.evaluator, 1, fam.rel_step)
    lhs3 = SymbolFamily(lambda lam, a, b: d_u(lam, a, b) / signed_sqrt(lam), n=1)
    rhs3 = stretched(SymbolFamily(
        fd.coordinate_partial(tilde.evaluator, 1, fam.rel_step), n=1))

    rows = []
    for name, lhs, rhs in (("tilde_partial vs d_lambda of renormalized", lhs1, rhs1),
                           ("xi-derivative vs renormalized", lhs2, rhs2),
                           ("u-derivative vs renormalized", lhs3, rhs3)):
        rows.append((name, _maxerr(lhs, rhs, lams, xi, uu)))
    return rows
