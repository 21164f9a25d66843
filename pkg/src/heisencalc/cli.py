"""Batch front-end: calibrate | identity-table | membership | parametrix |
probe | apply.

Every command resolves one RunConfig (file + flag overrides), loads or
produces the persisted calibration, and writes deterministic reports under
the output directory.  Exit codes: 0 pass, 1 verdict fail, 2 configuration
error, 3 numerical instability.
"""

from __future__ import annotations

import sys
from pathlib import Path

import click
import numpy as np

from . import __version__
from .config import (ConfigError, RunConfig, load_calibration, load_config,
                     save_calibration)
from .container import ContainerError, read_function, write_function, write_lambda_grid
from .difference_ops import identity_table, lemma_renormalization_table
from .heisenberg import vector_field_apply
from .quantize import (Calibration, FunctionTransform, NumericalInstabilityError,
                       apply as quant_apply, boundedness_probe, calibrate_prime,
                       composition_residual, parametrix_sample, probe_samples,
                       sobolev_norm, subelliptic_probe)
from .representations import (CalibrationError, calibrate_plancherel,
                              calibration_functions, plancherel_check_matrix)
from .reports import write_report
from .symbol_calculus import (EllipticityError, SampleSpec,
                              TruncationInstabilityError, builtin_symbols,
                              elliptic_check, membership, parametrix_leading)

EXIT_OK = 0
EXIT_VERDICT = 1
EXIT_CONFIG = 2
EXIT_NUMERIC = 3


def parse_symbol_spec(spec: str):
    """NAME[:k=v,...] -> LambdaSymbol."""
    name, _, rest = spec.partition(":")
    params = {}
    if rest:
        for item in rest.split(","):
            key, sep, val = item.partition("=")
            if not sep:
                raise ConfigError(f"bad symbol parameter {item!r}")
            for conv in (int, float, str):
                try:
                    params[key] = conv(val)
                    break
                except ValueError:
                    continue
    try:
        return builtin_symbols(name, **params)
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc


def _parse_tol(pairs) -> dict:
    out = {}
    for item in pairs:
        key, sep, val = item.partition("=")
        if not sep:
            raise ConfigError(f"bad --tol {item!r}, expected NAME=VALUE")
        out[key] = float(val)
    return out


class Session:
    """Resolved config, output directory, persisted calibration."""

    def __init__(self, config_path, out_override, seed_override, tol_pairs):
        if config_path:
            self.run = load_config(config_path)
        else:
            self.run = RunConfig()
        updates = {}
        if seed_override is not None:
            updates["seed"] = seed_override
        if out_override:
            updates["out_dir"] = str(out_override)
        if tol_pairs:
            merged = dict(self.run.tolerances)
            merged.update(_parse_tol(tol_pairs))
            updates["tolerances"] = merged
        if updates:
            from dataclasses import replace
            self.run = replace(self.run, **updates)
        self.out = Path(self.run.out_dir)
        self.out.mkdir(parents=True, exist_ok=True)

    def meta(self, command: str, **extra) -> dict:
        meta = {"version": __version__, "command": command}
        meta.update(self.run.as_flat_dict())
        for k, v in extra.items():
            meta[k] = v
        return meta

    def calibration_path(self) -> Path:
        return self.out / "calibration.ini"

    def compute_calibration(self) -> Calibration:
        qc = self.run.build_quant_config()
        funcs = calibration_functions(qc.group_grids, self.run.n,
                                      seed=self.run.seed)
        plan = calibrate_plancherel(funcs, qc.lgrid,
                                    self.run.tolerance("calibration_spread", 1e-2))
        prime, prime_spread = calibrate_prime(
            qc.with_calibration(Calibration(plan.constant, 1.0)), funcs[:2])
        return Calibration(plan.constant, prime, plan.spread,
                           plan.tail_fraction, prime_spread)

    def ensure_calibration(self) -> Calibration:
        cal = load_calibration(self.calibration_path())
        if cal is None:
            cal = self.compute_calibration()
            save_calibration(self.calibration_path(), cal, __version__)
        return cal

    def quant_config(self):
        return self.run.build_quant_config(self.ensure_calibration())


def _session(ctx) -> Session:
    return ctx.obj


@click.group()
@click.option("--config", "config_path", type=click.Path(exists=False),
              default=None, help="INI run configuration.")
@click.option("--out", "out_dir", type=click.Path(), default=None,
              help="Output directory override.")
@click.option("--seed", type=int, default=None,
              help="Seed override for sample-function generation.")
@click.option("--tol", "tol_pairs", multiple=True,
              help="Tolerance override NAME=VALUE (repeatable).")
@click.version_option(__version__)
@click.pass_context
def main(ctx, config_path, out_dir, seed, tol_pairs):
    """Desk-scale pseudo-differential calculus on the Heisenberg group."""
    try:
        ctx.obj = Session(config_path, out_dir, seed, tol_pairs)
    except ConfigError as exc:
        click.echo(f"configuration error: {exc}", err=True)
        ctx.exit(EXIT_CONFIG)


def _guarded(ctx, fn):
    try:
        rc = fn()
    except ConfigError as exc:
        click.echo(f"configuration error: {exc}", err=True)
        ctx.exit(EXIT_CONFIG)
    except (CalibrationError, NumericalInstabilityError,
            TruncationInstabilityError) as exc:
        click.echo(f"numerical instability: {exc}", err=True)
        ctx.exit(EXIT_NUMERIC)
    ctx.exit(rc)


@main.command()
@click.pass_context
def calibrate(ctx):
    """Calibrate the Plancherel constant c_n and the trace constant c'_n."""
    ses = _session(ctx)

    def body():
        cal = ses.compute_calibration()
        save_calibration(ses.calibration_path(), cal, __version__)
        qc = ses.run.build_quant_config(cal)
        held_out = calibration_functions(qc.group_grids, ses.run.n,
                                         count=4, seed=ses.run.seed + 1)[-1]
        defect = plancherel_check_matrix(held_out, qc.lgrid, qc.basis, cal.c_n)
        half = qc.basis.truncate(max(2, qc.basis.n_h // 2))
        defect_half = plancherel_check_matrix(held_out, qc.lgrid, half, cal.c_n)
        rows = [("c_n", cal.c_n),
                ("c_n_prime", cal.c_n_prime),
                ("ratio_prime_over_cn", cal.ratio),
                ("spread", cal.spread),
                ("prime_spread", cal.prime_spread),
                ("tail_fraction", cal.tail_fraction),
                ("held_out_matrix_defect", defect),
                ("held_out_truncation_delta", abs(defect - defect_half))]
        write_report(ses.out / "calibration_report.tsv",
                     ses.meta("calibrate"), ("quantity", "value"), rows)
        click.echo(f"c_n={cal.c_n:.12g} c'_n={cal.c_n_prime:.12g} "
                   f"spread={cal.spread:.3g} tail={cal.tail_fraction:.3g}")
        return EXIT_OK

    _guarded(ctx, body)


@main.command("identity-table")
@click.pass_context
def identity_table_cmd(ctx):
    """Difference-operator identities and the renormalization lemma rows."""
    ses = _session(ctx)

    def body():
        tol = ses.run.tolerance("identity", 1e-5)
        rows = [("identity", name, err) for name, err in identity_table()]
        rows += [("renormalization", name, err)
                 for name, err in lemma_renormalization_table()]
        write_report(ses.out / "identity_table.tsv",
                     ses.meta("identity-table", tolerance=tol),
                     ("kind", "name", "max_error"), rows)
        worst = max(r[2] for r in rows)
        click.echo(f"{len(rows)} identities, worst error {worst:.3e}")
        return EXIT_OK if worst <= tol else EXIT_VERDICT

    _guarded(ctx, body)


@main.command("membership")
@click.option("--symbol", "symbol_spec", required=True)
@click.option("--m", "order", type=float, default=None,
              help="Tested order (defaults to the symbol's natural order).")
@click.option("--rho", type=float, default=1.0)
@click.option("--delta", type=float, default=0.0)
@click.option("--orders", default="4,2,2", help="a,b,c sweep bounds.")
@click.pass_context
def membership_cmd(ctx, symbol_spec, order, rho, delta, orders):
    """Shubin-type class membership check for a lambda-symbol."""
    ses = _session(ctx)

    def body():
        from dataclasses import replace
        sym = parse_symbol_spec(symbol_spec)
        if order is not None or rho != sym.rho or delta != sym.delta:
            sym = replace(sym, order=sym.order if order is None else order,
                          rho=rho, delta=delta)
        try:
            a, b, c = (int(v) for v in orders.split(","))
        except ValueError:
            raise ConfigError(f"bad --orders {orders!r}") from None
        spec = SampleSpec(lam_min=ses.run.lam_min, lam_max=ses.run.lam_max)
        report = membership(sym, (a, b, c), spec)
        head, rows = report.as_records()
        write_report(ses.out / "membership.tsv",
                     ses.meta("membership", symbol=symbol_spec, m=sym.order,
                              rho=sym.rho, delta=sym.delta, orders=orders,
                              verdict="pass" if report.passed else "fail"),
                     head, rows)
        click.echo(f"membership {symbol_spec} at (m={sym.order:g}, rho={sym.rho:g}, "
                   f"delta={sym.delta:g}): {'pass' if report.passed else 'fail'} "
                   f"(worst ratio {report.worst().ratio:.3f})")
        return EXIT_OK if report.passed else EXIT_VERDICT

    _guarded(ctx, body)


@main.command("parametrix")
@click.option("--symbol", "symbol_spec", default="I-L")
@click.option("--region-floor", "-R", "region_floor", type=float, default=4.0)
@click.pass_context
def parametrix_cmd(ctx, symbol_spec, region_floor):
    """Build the leading parametrix and report residuals at R and 2R."""
    ses = _session(ctx)

    def body():
        sym = parse_symbol_spec(symbol_spec)
        spec = SampleSpec(lam_min=ses.run.lam_min, lam_max=ses.run.lam_max)
        check = elliptic_check(sym, region_floor, spec)
        if not check.passed:
            write_report(ses.out / "parametrix.tsv",
                         ses.meta("parametrix", symbol=symbol_spec,
                                  region_floor=region_floor, verdict="refused"),
                         ("quantity", "value"),
                         [("elliptic_constant", check.constant),
                          ("elliptic_constant_refined", check.refined_constant),
                          ("points_used", check.points_used)])
            click.echo(f"refused: {symbol_spec} fails ellipticity at "
                       f"R={region_floor:g} (C {check.constant:.3e} -> "
                       f"{check.refined_constant:.3e})")
            return EXIT_VERDICT
        qc = ses.quant_config()
        phi = parametrix_sample(qc)
        ft = FunctionTransform(phi, qc)
        rows = [("elliptic_constant", check.constant),
                ("elliptic_constant_refined", check.refined_constant)]
        for R in (region_floor, 2 * region_floor):
            b = parametrix_leading(sym, R, spec)
            rows.append((f"residual_R{R:g}",
                         composition_residual(b, sym, ft, qc)))
        b = parametrix_leading(sym, region_floor, spec)
        mem = membership(b, (2, 0, 1), spec)
        rows.append(("parametrix_membership",
                     1.0 if mem.passed else 0.0))
        rows.append(("parametrix_worst_ratio", mem.worst().ratio))
        rows.append(("sample_tail_fraction", ft.tail_fraction()))
        write_report(ses.out / "parametrix.tsv",
                     ses.meta("parametrix", symbol=symbol_spec,
                              region_floor=region_floor, verdict="built"),
                     ("quantity", "value"), rows)
        click.echo("; ".join(f"{k}={v:.4g}" if isinstance(v, float) else f"{k}={v}"
                             for k, v in rows))
        return EXIT_OK

    _guarded(ctx, body)


@main.command("probe")
@click.option("--symbol", "symbol_spec", required=True)
@click.option("--mode", type=click.Choice(["bounded", "subelliptic"]),
              default="bounded")
@click.option("--s", "s_order", type=float, default=0.0)
@click.option("--m0", type=float, default=None,
              help="Gained orders for subelliptic mode (default: symbol order).")
@click.option("--samples", "n_samples", type=int, default=3)
@click.pass_context
def probe_cmd(ctx, symbol_spec, mode, s_order, m0, n_samples):
    """Sobolev boundedness / subelliptic ratio probes on seeded samples."""
    ses = _session(ctx)

    def body():
        sym = parse_symbol_spec(symbol_spec)
        qc = ses.quant_config()
        samples = probe_samples(qc, count=n_samples, seed=ses.run.seed)
        gained = sym.order if m0 is None else m0
        if mode == "bounded":
            result = boundedness_probe(sym, s_order, samples, qc)
        else:
            result = subelliptic_probe(sym, gained, s_order, samples, qc)
        from dataclasses import replace as dc_replace
        refined_run = dc_replace(ses.run, lam_per_sign=2 * ses.run.lam_per_sign)
        qc2 = refined_run.build_quant_config(qc.calibration)
        samples2 = probe_samples(qc2, count=n_samples, seed=ses.run.seed)
        if mode == "bounded":
            refined = boundedness_probe(sym, s_order, samples2, qc2)
        else:
            refined = subelliptic_probe(sym, gained, s_order, samples2, qc2)
        head, rows = result.as_records()
        rows = [r + (refined.ratios[r[0]],) for r in rows]
        write_report(ses.out / f"probe_{mode}.tsv",
                     ses.meta("probe", symbol=symbol_spec, mode=mode, s=s_order,
                              m0=gained, worst=result.worst,
                              worst_refined=refined.worst),
                     head + ("ratio_refined_lambda",), rows)
        click.echo(f"{mode} probe {symbol_spec}: worst ratio {result.worst:.4g} "
                   f"(lambda-refined {refined.worst:.4g})")
        return EXIT_OK

    _guarded(ctx, body)


@main.command("apply")
@click.option("--symbol", "symbol_spec", required=True)
@click.option("--input", "input_path", type=click.Path(exists=True), default=None,
              help="Container file with the input function (else a seeded sample).")
@click.option("--output", "output_name", default="apply_output")
@click.pass_context
def apply_cmd(ctx, symbol_spec, input_path, output_name):
    """Apply Op(symbol) to a function; write values on the coarse lattice."""
    ses = _session(ctx)

    def body():
        sym = parse_symbol_spec(symbol_spec)
        qc = ses.quant_config()
        if input_path:
            try:
                phi = read_function(input_path)
            except ContainerError as exc:
                raise ConfigError(str(exc)) from exc
            if phi.grids != qc.group_grids:
                raise ConfigError("input function grids differ from the "
                                  "configured group grids")
        else:
            phi = probe_samples(qc, count=1, seed=ses.run.seed)[0]
            write_function(ses.out / f"{output_name}_input.hnc", phi)
        ft = FunctionTransform(phi, qc)
        field = quant_apply(sym, ft, qc)
        mesh = np.meshgrid(*field.axes, indexing="ij")
        rows = zip(mesh[0].ravel(), mesh[1].ravel(), mesh[2].ravel(),
                   field.values.ravel().real, field.values.ravel().imag)
        write_report(ses.out / f"{output_name}.tsv",
                     ses.meta("apply", symbol=symbol_spec,
                              input=input_path or "seeded",
                              tail_fraction=ft.tail_fraction(),
                              output_l2=field.norm_l2()),
                     ("x", "y", "t", "re", "im"), rows)
        write_lambda_grid(ses.out / "lambda_grid.hnc",
                          qc.lgrid.with_constant(qc.calibration.c_n))
        click.echo(f"applied {symbol_spec}; output L2 {field.norm_l2():.6g}, "
                   f"tail fraction {ft.tail_fraction():.3g}")
        return EXIT_OK

    _guarded(ctx, body)


if __name__ == "__main__":
    main()
