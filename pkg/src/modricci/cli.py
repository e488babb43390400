"""Scenario runner: load a config, run suites, write JSON and CSV reports.

Config files are INI style::

    [scenario]
    name = hyperbolic
    suites = radial, convergence      # or all, or comparison kind names
    seed = 0
    tolerance = 1e-8

    [model]                           # more models: [model.<label>]
    kind = Hyperbolic
    dimension = 3
    lam = 2
    curvature = -1

    [ladders]                         # optional comma separated lists
    R = 0.1, 0.5, 1
    lam = 2, 1

    [convergence]                     # optional per-suite options
    n_pairs = 100000

Ladders over lam, K and alpha rebuild each model with every combination of
the listed values; the R ladder is the radius grid of the radial and
functional checks.  Exit codes: 0 all pass, 1 some check failed, 2 config
error, 3 numerical failure.
"""

from __future__ import annotations

import configparser
import csv
import dataclasses
import io
import itertools
import json
import math
import os
import sys
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import click
import numpy as np

from . import convergence as cv
from . import curvature, functional, pde, radial
from .certificate import BoundCertificate, _plain, single
from .constants import DEFAULT_TOL
from .errors import (
    ConfigError,
    ConfigParseError,
    DimensionTooLow,
    ExponentOutOfRange,
    InvalidSpec,
    ModelUnknown,
    ModRicciError,
    RadiusAboveThreshold,
    UnknownKind,
    UnsupportedDimension,
    UnsupportedKind,
)
from .models import KINDS, ModelSpec, build_model, catalog_spec, coerce_fields, list_models

SCHEMA = 1
SUITES = ("curvature", "radial", "functional", "pde", "convergence")
NOT_APPLICABLE = (UnsupportedKind, UnsupportedDimension, DimensionTooLow, ExponentOutOfRange, RadiusAboveThreshold)
LADDER_KEYS = ("lam", "K", "alpha", "R")


@dataclass
class Scenario:
    name: str
    models: list
    suites: list
    ladders: dict
    seed: int = 0
    tolerance: float = DEFAULT_TOL
    out: str = "."
    options: dict = field(default_factory=dict)

    def echo(self):
        return {
            "name": self.name,
            "models": [m.to_dict() for m in self.models],
            "suites": list(self.suites),
            "ladders": {k: list(v) for k, v in self.ladders.items()},
            "seed": self.seed,
            "tolerance": self.tolerance,
            "options": self.options,
        }


@dataclass
class Report:
    scenario: dict
    certificates: list
    rows: list
    skipped: list
    summary: dict
    timing: dict = field(default_factory=dict)

    def to_json(self):
        body = {
            "schema": SCHEMA,
            "scenario": self.scenario,
            "summary": self.summary,
            "certificates": self.certificates,
            "skipped": self.skipped,
            "rows": self.rows,
        }
        return json.dumps(_finite(body), indent=1) + "\n"

    def to_csv(self):
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["kind", "model", "sample", "lhs", "rhs", "margin", "pass"])
        for r in self.rows:
            w.writerow([r["kind"], r["model"], _label(r["s"]), repr(r["lhs"]), repr(r["rhs"]), repr(r["margin"]),
                        int(r["pass"])])
        return buf.getvalue()

    @property
    def exit_code(self):
        return 0 if self.summary["n_fail"] == 0 else 1


def _finite(obj):
    """Replace non finite floats by strings so the JSON stays standard."""
    if isinstance(obj, dict):
        return {k: _finite(v) for k, v in obj.items()}
    if isinstance(obj, list):
        return [_finite(v) for v in obj]
    if isinstance(obj, float) and not math.isfinite(obj):
        return "nan" if obj != obj else ("inf" if obj > 0 else "-inf")
    return obj


def _label(s):
    if isinstance(s, (dict, list)):
        return json.dumps(s, sort_keys=True)
    return str(s)


# ---------------------------------------------------------------------------
# config


def _line_of(text, section, key):
    current = None
    for i, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if line.startswith("[") and line.endswith("]"):
            current = line[1:-1].strip()
        elif current == section and line.split("=")[0].strip() == key:
            return i
    return None


def _floats(text, section, key, value):
    try:
        vals = [float(v) for v in value.replace(";", ",").split(",") if v.strip()]
    except ValueError:
        raise ConfigParseError(f"expected a list of numbers, got {value!r}", _line_of(text, section, key), key) from None
    if not vals:
        raise ConfigParseError("ladder must not be empty", _line_of(text, section, key), key)
    return vals


def parse_scenario(text, overrides=None):
    cp = configparser.ConfigParser(inline_comment_prefixes=("#", ";"))
    cp.optionxform = str
    try:
        cp.read_string(text)
    except configparser.ParsingError as exc:
        line = exc.errors[0][0] if exc.errors else None
        raise ConfigParseError("malformed line", line) from None
    except (configparser.DuplicateOptionError, configparser.DuplicateSectionError) as exc:
        raise ConfigParseError(str(exc).split(":")[-1].strip(), getattr(exc, "lineno", None)) from None
    except configparser.MissingSectionHeaderError as exc:
        raise ConfigParseError("missing section header", exc.lineno) from None
    if not cp.has_section("scenario"):
        raise ConfigParseError("missing [scenario] section")
    sc = cp["scenario"]
    suites = [s.strip() for s in sc.get("suites", "").split(",") if s.strip()]
    if not suites:
        raise ConfigParseError("at least one suite is required", _line_of(text, "scenario", "suites"), "suites")
    for s in suites:
        if s != "all" and s not in SUITES and s not in radial.COMPARISON_KINDS:
            raise ConfigParseError(f"unknown suite {s!r}", _line_of(text, "scenario", "suites"), "suites")
    models = []
    for sec in cp.sections():
        if sec != "model" and not sec.startswith("model."):
            continue
        data = dict(cp[sec])
        kind = data.get("kind")
        if kind not in KINDS:
            raise ModelUnknown(f"[{sec}] unknown model kind {kind!r}; known: {', '.join(KINDS)}")
        try:
            given = coerce_fields(data)
            base = catalog_spec(kind, given.get("dimension")).to_dict()
            spec = ModelSpec.from_dict({**base, **given})
            build_model(spec)
        except InvalidSpec as exc:
            raise ConfigParseError(str(exc), _line_of(text, sec, exc.field), exc.field) from None
        models.append(spec)
    if not models:
        raise ConfigParseError("at least one [model] section is required")
    ladders = {}
    if cp.has_section("ladders"):
        for key, value in cp["ladders"].items():
            if key not in LADDER_KEYS:
                raise ConfigParseError(f"unknown ladder {key!r}", _line_of(text, "ladders", key), key)
            ladders[key] = _floats(text, "ladders", key, value)

    def number(key, cast, default):
        if key not in sc:
            return default
        try:
            return cast(sc[key])
        except ValueError:
            raise ConfigParseError(f"bad value {sc[key]!r}", _line_of(text, "scenario", key), key) from None

    options = {}
    for sec in cp.sections():
        if sec in SUITES:
            opts = {}
            for key, value in cp[sec].items():
                try:
                    opts[key] = float(value) if "." in value or "e" in value.lower() else int(value)
                except ValueError:
                    raise ConfigParseError(f"bad value {value!r}", _line_of(text, sec, key), key) from None
            options[sec] = opts
    scen = Scenario(
        name=sc.get("name", "scenario"),
        models=models,
        suites=suites,
        ladders=ladders,
        seed=number("seed", int, 0),
        tolerance=number("tolerance", float, DEFAULT_TOL),
        out=sc.get("out", "."),
        options=options,
    )
    for key, value in (overrides or {}).items():
        if value is not None:
            setattr(scen, key, value)
    return scen


def load_scenario(path, overrides=None):
    try:
        with open(path) as fh:
            text = fh.read()
    except OSError as exc:
        raise ConfigParseError(f"cannot read {path}: {exc.strerror}") from None
    return parse_scenario(text, overrides)


# ---------------------------------------------------------------------------
# suites


def _radii(ctx, model, cap=1.0):
    r_top = min(cap, 0.999 * model.cut_radius)
    rs = [r for r in ctx.ladders.get("R", []) if 0 < r <= r_top]
    return rs or None


def _opt(ctx, suite, key, default):
    return ctx.options.get(suite, {}).get(key, default)


def suite_curvature(model, ctx):
    pts = curvature.sample_ball(model, 20, seed=ctx.seed)
    yield lambda: curvature.verify_lower_bound(model, pts, tol=ctx.tolerance,
                                               directions="radial" if model.singular else "all")

    def fd():
        x = curvature.default_sample_point(model)
        conv = curvature.fd_convergence(model, x)
        return single("CurvatureFiniteDifference", conv.error_h, 1e-6, label="h=1e-3", tolerance=0.0,
                      model=model.name, params=model.params(),
                      extras={"error_h2": conv.error_h2, "order": conv.order, "exact": conv.exact})

    yield fd
    if model.kind in ("GaussianSoliton", "CigarSoliton"):
        def soliton():
            s = np.linspace(0.01, 5.0, 1000)
            ident = curvature.soliton_identity(model, s)
            return single("SolitonIdentity", float(np.max(np.abs(ident - ident[0]))), 1e-10, label="spread",
                          tolerance=0.0, model=model.name, params=model.params(),
                          extras={"value": float(ident[0])})

        yield soliton


def suite_radial(model, ctx, kinds=None):
    radii = _radii(ctx, model)
    for kind in kinds or radial.COMPARISON_KINDS:
        if kind == "Jensen":
            continue
        yield lambda kind=kind: radial.verify_comparison(model, kind, radii=radii, tol=ctx.tolerance)
    if kinds is None or "VolumeRatioBound" in kinds:
        grid = None
        if radii is not None and len(radii) > 1:
            grid = sorted(radii)
        yield lambda: radial.verify_volume_ratio_monotone(model, r_grid=grid, tol=ctx.tolerance)
    if kinds is None or "Jensen" in kinds:
        yield lambda: radial.verify_jensen(500, seed=ctx.seed)


def suite_functional(model, ctx):
    radii = _radii(ctx, model) or [0.1, 0.5, 1.0 if model.cut_radius > 1.0 else 0.5 * model.cut_radius]
    if model.has_field:
        yield lambda: functional.verify_lq_vector_bound(model, [None], radii, 2.0, tol=ctx.tolerance)
    yield lambda: functional.verify_distance_power(model, radii, 1.0, tol=ctx.tolerance)

    def half():
        r0 = functional.half_volume_radius(model)
        return functional.verify_half_volume(model, [None], [0.5 * r0, r0], tol=ctx.tolerance)

    yield half
    yield lambda: functional.verify_hypersurface_bound(model, None, radii, tol=ctx.tolerance)
    yield lambda: functional.verify_sobolev(model, form="L1" if model.n == 2 else "both", tol=ctx.tolerance)


def suite_pde(model, ctx):
    box = {}

    def heat():
        box["grid"] = pde.heat_kernel_radial(model, t_max=1.0)
        return pde.verify_heat_kernel_bounds(box["grid"], model, tol=ctx.tolerance,
                                             max_rows=int(_opt(ctx, "pde", "heat_rows", 2000)))

    yield heat
    yield lambda: pde.verify_parabolic_gradient_estimate(model, box["grid"], 1.0, 0.5, tol=ctx.tolerance)
    R = float(_opt(ctx, "pde", "green_radius", 0.5))
    yield lambda: pde.verify_green_bound(model, R=min(R, 0.5 * model.cut_radius), tol=ctx.tolerance)
    r = min(0.5, 0.5 * model.cut_radius)

    def u(s, nu=0):
        s = np.asarray(s, dtype=float)
        return (s * s, 2.0 * s, 2.0 + 0.0 * s)[nu]

    def f(s):
        s = np.asarray(s, dtype=float)
        out = np.full(s.shape, 2.0 * model.n)
        pos = s > 0
        out[pos] = 2.0 + 2.0 * s[pos] * model.mean_curvature(s[pos])
        return out

    yield lambda: pde.verify_gradient_estimate(model, u, f, r, tol=ctx.tolerance)
    yield lambda: pde.verify_max_principle(model, u, f, r, tol=ctx.tolerance)
    if model.n == 2 and model.base_curvature == 0 and not model.has_field:
        yield lambda: pde.verify_cutoff(pde.build_cutoff(model, r0=1.0))


def _endpoints(model):
    lam = model.spec.lam
    D = 1.0 / math.sqrt(lam) if lam > 0 else 1.0
    D = min(D, 0.45 * model.cut_radius)
    e = np.zeros(model.n)
    e[0] = 1.0
    return model.point_at(D, e), model.point_at(D, -e), D


def suite_convergence(model, ctx):
    if not model.is_space_form:
        raise UnsupportedKind(f"{model.kind}: convergence diagnostics need closed form distances")
    n_pairs = int(_opt(ctx, "convergence", "n_pairs", 100_000))

    def seg():
        rep = cv.segment_inequality_mc(model, None, 0.5, lambda p: np.ones(p.shape[:-1]), n_pairs=n_pairs,
                                       seed=ctx.seed)
        return rep.certificate(ctx.tolerance, model.name)

    yield seg
    qp, qm, D = _endpoints(model)
    R = min(0.1, 0.5 * D)
    yield lambda: cv.excess_suite(model, None, qp, qm, R, tol=ctx.tolerance)
    if model.n == 2:
        yield lambda: cv.harmonic_approximation(model, None, R, qp, qm, tol=ctx.tolerance)
    yield lambda: cv.splitting_trend(model, None, (0.2, 0.1, 0.05), cv.coordinate_map(model.n), tol=ctx.tolerance)
    R0 = min(0.4, 0.3 * model.cut_radius)
    yield lambda: cv.cone_rigidity_suite(model, None, R0, ladder=(R0, R0 / 2, R0 / 4), seed=ctx.seed,
                                         tol=ctx.tolerance)


SUITE_FUNCS = {
    "curvature": suite_curvature,
    "radial": suite_radial,
    "functional": suite_functional,
    "pde": suite_pde,
    "convergence": suite_convergence,
}


def _expand(suites):
    out = []
    kinds = []
    for s in suites:
        if s == "all":
            out.extend(x for x in SUITES if x not in out)
        elif s in SUITES:
            if s not in out:
                out.append(s)
        else:
            kinds.append(s)
    return out, kinds


def _variants(spec, ladders):
    keys = [k for k in ("lam", "K", "alpha") if k in ladders]
    if not keys:
        return [spec]
    return [dataclasses.replace(spec, **dict(zip(keys, combo)))
            for combo in itertools.product(*(ladders[k] for k in keys))]


class ScenarioFailure(ModRicciError):
    """A module error annotated with the cell it came from."""

    def __init__(self, cause, where):
        self.cause = cause
        self.exit_code = cause.exit_code
        super().__init__(f"{where}: {type(cause).__name__}: {cause}")


def run_cell(args):
    """Run one (model, suite) cell; returns (certificates, skipped)."""
    spec, suite, kinds, ctx = args
    model = build_model(spec)
    where = f"{model.name} / {suite}"
    certs, skipped = [], []
    try:
        if suite == "radial-kinds":
            gen = suite_radial(model, ctx, kinds)
        else:
            gen = SUITE_FUNCS[suite](model, ctx)
        checks = list(gen)
    except NOT_APPLICABLE as exc:
        return [], [{"model": model.name, "suite": suite, "reason": str(exc)}]
    for i, check in enumerate(checks):
        try:
            cert = check()
        except NOT_APPLICABLE as exc:
            skipped.append({"model": model.name, "suite": suite, "check": i, "reason": str(exc)})
            continue
        except ModRicciError as exc:
            raise ScenarioFailure(exc, f"{where} check {i}") from exc
        certs.append(cert)
    return certs, skipped


def run(scenario, jobs=1):
    t0 = time.time()
    suites, kinds = _expand(scenario.suites)
    cells = []
    for spec in scenario.models:
        for variant in _variants(spec, scenario.ladders):
            for s in suites:
                cells.append((variant, s, None, scenario))
            if kinds:
                cells.append((variant, "radial-kinds", kinds, scenario))
    if jobs > 1 and len(cells) > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            results = list(pool.map(run_cell, cells))
    else:
        results = [run_cell(c) for c in cells]
    certs, skipped = [], []
    for c, s in results:
        certs.extend(c)
        skipped.extend(s)
    return build_report(scenario, certs, skipped, time.time() - t0)


def _constants(cert):
    out = {}
    for k, v in cert.extras.items():
        v = _plain(v)
        if isinstance(v, (int, float)) and not isinstance(v, bool):
            out[k] = v
    return out


def build_report(scenario, certs, skipped, wall):
    rows, cdicts, table = [], [], []
    for c in certs:
        for r in c.rows():
            r["pass"] = bool(r["margin"] == r["margin"] and r["margin"] >= -c.tolerance)
            rows.append(r)
        cdicts.append(c.to_dict())
        consts = _constants(c)
        if consts:
            table.append({"kind": c.kind, "model": c.model, "constants": consts})
    n_fail = sum(not c.passed for c in certs)
    margins = [c.min_margin for c in certs]
    worst = min((m for m in margins if m == m), default=float("nan"))
    if any(m != m for m in margins):
        worst = float("nan")
    summary = {
        "n_certificates": len(certs),
        "n_rows": len(rows),
        "n_pass": len(certs) - n_fail,
        "n_fail": n_fail,
        "n_skipped": len(skipped),
        "worst_margin": worst,
        "failed": [f"{c.kind} {c.model}" for c in certs if not c.passed],
        "constants": table,
    }
    timing = {"wall_time": wall, "finished": time.strftime("%Y-%m-%dT%H:%M:%S", time.gmtime())}
    return Report(scenario.echo(), cdicts, rows, skipped, summary, timing)


def write_report(report, out_dir, stem="report"):
    os.makedirs(out_dir, exist_ok=True)
    paths = {
        "json": os.path.join(out_dir, f"{stem}.json"),
        "csv": os.path.join(out_dir, f"{stem}.csv"),
        "timing": os.path.join(out_dir, f"{stem}.timing.json"),
    }
    with open(paths["json"], "w") as fh:
        fh.write(report.to_json())
    with open(paths["csv"], "w") as fh:
        fh.write(report.to_csv())
    with open(paths["timing"], "w") as fh:
        json.dump(report.timing, fh, indent=1)
        fh.write("\n")
    return paths


def run_scenario(path, seed=None, tolerance=None, out=None, jobs=1):
    """Load, run and write a scenario; returns the Report."""
    scen = load_scenario(path, {"seed": seed, "tolerance": tolerance, "out": out})
    report = run(scen, jobs)
    write_report(report, scen.out)
    return report


# ---------------------------------------------------------------------------
# plot data

PLOT_COLUMNS = ("parameter", "lhs", "rhs", "margin")


def _parameter(s):
    if isinstance(s, (int, float)):
        return repr(float(s))
    if isinstance(s, dict) and len(s) == 1:
        return _parameter(next(iter(s.values())))
    return _label(s)


def emit_plotdata(report, kind):
    """CSV with columns parameter, lhs, rhs, margin for every row of ``kind``.

    ``report`` is a Report, a parsed JSON dict or a path to a JSON report.
    """
    if isinstance(report, str):
        with open(report) as fh:
            report = json.load(fh)
    rows = report.rows if isinstance(report, Report) else report["rows"]
    sel = [r for r in rows if r["kind"] == kind]
    if not sel:
        known = sorted({r["kind"] for r in rows})
        raise UnknownKind(f"no rows of kind {kind!r}; present: {', '.join(known)}")
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(PLOT_COLUMNS)
    for r in sel:
        w.writerow([_parameter(r["s"]), repr(float(r["lhs"])), repr(float(r["rhs"])), repr(float(r["margin"]))])
    return buf.getvalue()


# ---------------------------------------------------------------------------
# command line


def _fail(exc):
    click.echo(f"error: {exc}", err=True)
    sys.exit(getattr(exc, "exit_code", 3))


@click.group()
def main():
    """Numerical certificates for comparison geometry."""


@main.command()
@click.argument("config", type=click.Path(dir_okay=False))
@click.option("--seed", type=int, default=None, help="override the scenario seed")
@click.option("--tolerance", type=float, default=None, help="override the pass tolerance")
@click.option("--out", type=click.Path(file_okay=False), default=None, help="output directory")
@click.option("--jobs", type=int, default=1, show_default=True, help="parallel (model, suite) cells")
def verify(config, seed, tolerance, out, jobs):
    """Run the scenario in CONFIG and write report.json / report.csv."""
    try:
        report = run_scenario(config, seed, tolerance, out, jobs)
    except ModRicciError as exc:
        _fail(exc)
    s = report.summary
    click.echo(f"{s['n_pass']}/{s['n_certificates']} certificates pass ({s['n_rows']} rows, "
               f"{s['n_skipped']} skipped), worst margin {s['worst_margin']:.3e}")
    for name in s["failed"]:
        click.echo(f"FAIL {name}")
    sys.exit(report.exit_code)


@main.command("list-models")
def list_models_cmd():
    """List the catalog models with their default parameters."""
    for row in list_models():
        d = row["default"]
        click.echo(f"{row['kind']:<20} n={d['dimension']:<2} lam={d['lam']:<5g} K={d['K']:<5g} "
                   f"alpha={d['alpha']:<4g} {row['description']}")


@main.command()
@click.argument("report", type=click.Path(exists=True, dir_okay=False))
@click.argument("kind")
@click.option("--out", type=click.Path(dir_okay=False), default=None, help="write CSV here instead of stdout")
def plot(report, kind, out):
    """Emit (parameter, lhs, rhs, margin) CSV rows of KIND from REPORT."""
    try:
        text = emit_plotdata(report, kind)
    except ConfigError as exc:
        _fail(exc)
    if out:
        with open(out, "w") as fh:
            fh.write(text)
    else:
        click.echo(text, nl=False)


if __name__ == "__main__":
    main()
