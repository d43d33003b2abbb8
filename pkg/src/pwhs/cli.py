"""Command-line front end driven by INI-style scenario files.

    pwhs classify|portrait|cycle|homoclinic|regularize SCENARIO [--out PATH] [--format csv|svg]

See the README for the scenario grammar.  Exit status is 0 on success, 2 for
invalid input and 3 when a computation fails.
"""

from __future__ import annotations

import argparse
import configparser
import csv
import io
import sys
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace
from fractions import Fraction
from pathlib import Path
from typing import Sequence

import numpy as np

from . import complexfield as cf
from .cycles import (
    CycleResult,
    HomoclinicResult,
    closed_orbit,
    homoclinic,
    linear_cycle,
    pole_cycle,
    shooting_fixed_point,
    zn_cycle,
)
from .errors import IoFailure, NumericalError, PWHSError, ScenarioError, ValidationError
from .flow import IntegratorOptions, Trajectory, integrate
from .regularize import TransitionExperiment, TransitionFunction, default_workers, transition_map_experiment
from .switching import PWSystem, RegionClass, RegionReport, SwitchingLine, classify_regions

TASKS = ("classify", "portrait", "cycle", "homoclinic", "regularize")


# -- scenario parsing ---------------------------------------------------------------------------

def parse_real(text: str) -> float:
    """Decimal with optional exponent, or a ratio such as ``-1/5``."""
    t = text.strip()
    try:
        return float(Fraction(t)) if "/" in t else float(t)
    except (ValueError, ZeroDivisionError) as exc:
        raise ScenarioError(f"not a real number: {text!r}") from exc


def parse_complex(text: str) -> complex:
    """Python-style complex literal; a trailing ``i`` is accepted for ``j``."""
    t = text.strip().replace(" ", "").replace("i", "j")
    try:
        return complex(t)
    except ValueError as exc:
        raise ScenarioError(f"not a complex number: {text!r}") from exc


def parse_int(text: str) -> int:
    try:
        return int(text.strip())
    except ValueError as exc:
        raise ScenarioError(f"not an integer: {text!r}") from exc


def _split(text: str) -> list[str]:
    return [p for p in (s.strip() for s in text.replace("\n", ",").split(",")) if p]


_FIELD_KEYS = {
    "Constant": {"value": parse_complex},
    "Linear": {"a": parse_real, "b": parse_real, "center": parse_complex},
    "Power": {"n": parse_int, "center": parse_complex, "m": parse_int},
    "Pole": {"n": parse_int, "center": parse_complex, "m": parse_int},
    "Rational": {"gamma": parse_real, "n": parse_int, "center": parse_complex},
    "EssentialExp": {"m": parse_int, "n": parse_int, "center": parse_complex},
    "Laurent": {"center": parse_complex, "principal": None, "analytic": None},
}
_REQUIRED = {
    "Constant": (),
    "Linear": ("a", "b"),
    "Power": ("n",),
    "Pole": ("n",),
    "Rational": ("gamma", "n"),
    "EssentialExp": ("m", "n"),
    "Laurent": (),
}


def parse_field(section: configparser.SectionProxy) -> cf.FieldSpec:
    kind = section.get("kind")
    if kind is None:
        raise ScenarioError(f"[{section.name}] needs a kind")
    if kind not in _FIELD_KEYS:
        raise ScenarioError(f"[{section.name}] unknown kind {kind!r}; choose from {sorted(_FIELD_KEYS)}")
    keys = _FIELD_KEYS[kind]
    extra = set(section) - set(keys) - {"kind"}
    if extra:
        raise ScenarioError(f"[{section.name}] unexpected keys for {kind}: {sorted(extra)}")
    missing = [k for k in _REQUIRED[kind] if k not in section]
    if missing:
        raise ScenarioError(f"[{section.name}] {kind} needs {', '.join(missing)}")
    kwargs = {}
    for k, conv in keys.items():
        if k not in section:
            continue
        if conv is None:
            kwargs[k] = tuple(parse_complex(v) for v in _split(section[k]))
        else:
            kwargs[k] = conv(section[k])
    return getattr(cf, kind)(**kwargs)


@dataclass
class Scenario:
    task: str
    config: configparser.ConfigParser
    path: Path
    system: PWSystem | None = None
    out: str | None = None
    fmt: str = "csv"
    options: IntegratorOptions = field(default_factory=IntegratorOptions)

    def section(self, name: str) -> configparser.SectionProxy:
        if not self.config.has_section(name):
            raise ScenarioError(f"scenario has no [{name}] section")
        return self.config[name]

    def real(self, sec: str, key: str, default: float | None = None) -> float:
        s = self.section(sec)
        if key not in s:
            if default is None:
                raise ScenarioError(f"[{sec}] needs {key}")
            return default
        return parse_real(s[key])

    def integer(self, sec: str, key: str, default: int | None = None) -> int:
        s = self.section(sec)
        if key not in s:
            if default is None:
                raise ScenarioError(f"[{sec}] needs {key}")
            return default
        return parse_int(s[key])

    def text(self, sec: str, key: str, default: str | None = None) -> str:
        s = self.section(sec)
        if key not in s:
            if default is None:
                raise ScenarioError(f"[{sec}] needs {key}")
            return default
        return s[key].strip()

    def require_system(self) -> PWSystem:
        if self.system is None:
            raise ScenarioError("this task needs [plus] and [minus] field sections")
        return self.system


def load_scenario(path: str | Path, task: str, out: str | None = None, fmt: str | None = None) -> Scenario:
    path = Path(path)
    cfg = configparser.ConfigParser(inline_comment_prefixes=(";", "#"))
    try:
        with open(path, encoding="utf-8") as fh:
            cfg.read_file(fh)
    except configparser.Error as exc:
        raise ScenarioError(f"cannot parse {path}: {exc}") from exc
    except OSError as exc:
        raise IoFailure(f"cannot read {path}: {exc}") from exc
    if task not in TASKS:
        raise ScenarioError(f"unknown task {task!r}")
    sc = Scenario(task, cfg, path)
    if cfg.has_section("plus") or cfg.has_section("minus"):
        if not (cfg.has_section("plus") and cfg.has_section("minus")):
            raise ScenarioError("both [plus] and [minus] are needed")
        line = SwitchingLine("vertical", 0.0)
        if cfg.has_section("system"):
            line = SwitchingLine(sc.text("system", "line", "vertical"), sc.real("system", "offset", 0.0))
        sc.system = PWSystem(parse_field(cfg["plus"]), parse_field(cfg["minus"]), line)
    if cfg.has_section("integrator"):
        sec = cfg["integrator"]
        defaults = IntegratorOptions()
        sc.options = IntegratorOptions(
            **{k: parse_real(sec[k]) if k in sec else getattr(defaults, k) for k in defaults.__dataclass_fields__}
        )
    sc.fmt = fmt or (cfg["output"].get("format", "csv").strip() if cfg.has_section("output") else "csv")
    if sc.fmt not in ("csv", "svg"):
        raise ScenarioError(f"format must be csv or svg, got {sc.fmt!r}")
    sc.out = out or (cfg["output"].get("path") if cfg.has_section("output") else None)
    if not sc.out:
        sc.out = str(path.with_suffix("." + sc.fmt))
    if not cfg.has_section(task):
        raise ScenarioError(f"scenario has no [{task}] section")
    return sc


# -- output ---------------------------------------------------------------------------------------

def _fmt(x) -> str:
    if isinstance(x, (float, np.floating)):
        return repr(float(x))
    return "" if x is None else str(x)


def write_csv(rows: Sequence[Sequence], header: Sequence[str], comments: Sequence[str] = ()) -> str:
    buf = io.StringIO()
    for c in comments:
        buf.write(f"# {c}\n")
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for r in rows:
        w.writerow([_fmt(v) for v in r])
    return buf.getvalue()


def _emit(text: str, out: str) -> None:
    if out == "-":
        sys.stdout.write(text)
        return
    try:
        Path(out).write_text(text, encoding="utf-8")
    except OSError as exc:
        raise IoFailure(f"cannot write {out}: {exc}") from exc


_COLORS = {
    RegionClass.SEWING: "#1f77b4",
    RegionClass.SLIDING_ATTRACT: "#d62728",
    RegionClass.SLIDING_REPEL: "#2ca02c",
    RegionClass.TANGENCY: "#ff7f0e",
}

PORTRAIT_HEADER = ("record", "index", "t", "x", "y", "x2", "y2", "label")


def portrait_rows(trajectories: Sequence[Trajectory], regions: RegionReport | None, line: SwitchingLine | None):
    rows = []
    for i, tr in enumerate(trajectories):
        for s in tr.samples:
            rows.append(("sample", i, float(s.t), s.z.real, s.z.imag, None, None, s.mode.value))
        for e in tr.events:
            rows.append(("event", i, float(e.t), e.z.real, e.z.imag, None, None, e.kind.value))
    if regions is not None and line is not None:
        for j, seg in enumerate(regions.segments):
            p, q = line.point(seg.lo), line.point(seg.hi)
            rows.append(("segment", j, None, p.real, p.imag, q.real, q.imag, seg.cls.value))
        for j, s in enumerate(regions.tangency_points):
            p = line.point(s)
            rows.append(("tangency", j, None, p.real, p.imag, None, None, RegionClass.TANGENCY.value))
    return rows


def _svg(polylines: Sequence[np.ndarray], regions: RegionReport | None, line: SwitchingLine | None) -> str:
    pts = [z for pl in polylines for z in pl]
    if regions is not None and line is not None:
        pts += [line.point(regions.lo), line.point(regions.hi)]
    if not pts:
        raise ValidationError("nothing to draw")
    xs = np.array([z.real for z in pts])
    ys = np.array([z.imag for z in pts])
    xmin, xmax, ymin, ymax = xs.min(), xs.max(), ys.min(), ys.max()
    pad = 0.05 * max(xmax - xmin, ymax - ymin, 1e-9)  # a segment alone still gets a visible frame
    mx, my = pad, pad
    xmin, xmax, ymin, ymax = xmin - mx, xmax + mx, ymin - my, ymax + my
    size = 600.0
    scale = size / max(xmax - xmin, ymax - ymin)
    W, H = (xmax - xmin) * scale, (ymax - ymin) * scale

    def px(z: complex) -> tuple[str, str]:
        return f"{(z.real - xmin) * scale:.4f}", f"{(ymax - z.imag) * scale:.4f}"  # y axis points up

    stroke = 1.5
    out = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{W:.2f}" height="{H:.2f}" viewBox="0 0 {W:.4f} {H:.4f}">',
        f'<rect x="0" y="0" width="{W:.4f}" height="{H:.4f}" fill="white"/>',
    ]
    if regions is not None and line is not None:
        for seg in regions.segments:
            (x1, y1), (x2, y2) = px(line.point(seg.lo)), px(line.point(seg.hi))
            out.append(
                f'<line x1="{x1}" y1="{y1}" x2="{x2}" y2="{y2}" '
                f'stroke="{_COLORS[seg.cls]}" stroke-width="{3 * stroke}" class="{seg.cls.value}"/>'
            )
        for s in regions.tangency_points:
            x, y = px(line.point(s))
            out.append(f'<circle cx="{x}" cy="{y}" r="4" fill="{_COLORS[RegionClass.TANGENCY]}" class="Tangency"/>')
    for pl in polylines:
        if len(pl) == 0:
            continue
        out.append(
            f'<polyline fill="none" stroke="black" stroke-width="{stroke}" points="{" ".join(",".join(px(z)) for z in pl)}"/>'
        )
    out.append("</svg>")
    return "\n".join(out) + "\n"


def export_portrait(
    trajectories: Sequence[Trajectory],
    regions: RegionReport | None,
    fmt: str,
    out: str,
    line: SwitchingLine | None = None,
) -> str:
    """Write trajectories and switching-line segments as CSV rows or an SVG drawing."""
    if not trajectories and (regions is None or not regions.segments):
        raise ValidationError("export_portrait needs at least one trajectory or region")
    if fmt == "csv":
        text = write_csv(portrait_rows(trajectories, regions, line), PORTRAIT_HEADER)
    elif fmt == "svg":
        text = _svg([tr.z for tr in trajectories], regions, line)
    else:
        raise ValidationError(f"unknown format {fmt!r}")
    _emit(text, out)
    return text


# -- tasks --------------------------------------------------------------------------------------------

def run_classify(sc: Scenario) -> str:
    system = sc.require_system()
    rep = classify_regions(
        system, sc.real("classify", "lo"), sc.real("classify", "hi"), sc.integer("classify", "resolution", 256)
    )
    if sc.fmt == "svg":
        return export_portrait([], rep, "svg", sc.out, system.line)
    text = write_csv(rep.csv_rows(), ("record", "lo", "hi", "class"))
    _emit(text, sc.out)
    return text


def _integrate_seed(args):
    system, z, opts = args
    return integrate(system, z, opts)


def _map(fn, items, workers: int):
    if workers > 1 and len(items) > 1:
        with ProcessPoolExecutor(max_workers=min(workers, len(items))) as pool:
            return list(pool.map(fn, items))
    return [fn(it) for it in items]


def run_portrait(sc: Scenario) -> str:
    system = sc.require_system()
    seeds = [parse_complex(s) for s in _split(sc.text("portrait", "seeds"))]
    if not seeds:
        raise ScenarioError("[portrait] seeds is empty")
    opts = sc.options
    if "t_max" in sc.section("portrait"):
        opts = replace(opts, t_max=sc.real("portrait", "t_max"))
    trajs = _map(_integrate_seed, [(system, z, opts) for z in seeds], default_workers())
    regions = None
    if "lo" in sc.section("portrait") or "hi" in sc.section("portrait"):
        regions = classify_regions(system, sc.real("portrait", "lo"), sc.real("portrait", "hi"))
    return export_portrait(trajs, regions, sc.fmt, sc.out, system.line)


def cycle_summary(res: CycleResult) -> str:
    pr = res.poincare
    return (
        f"fixed_point={pr.fixed_point!r} w0={res.w0!r} derivative={pr.derivative!r} "
        f"stability={pr.stability} period={res.period!r} closure={res.closure!r}"
    )


def run_cycle(sc: Scenario) -> str:
    fam = sc.text("cycle", "family")
    g = lambda k, d=None: sc.real("cycle", k, d)  # noqa: E731
    gi = lambda k, d=None: sc.integer("cycle", k, d)  # noqa: E731
    if fam == "linear":
        res = linear_cycle(g("a"), g("b"), g("c"), g("d"), g("x0"), sc.options)
    elif fam == "zn":
        n = gi("n")
        res = zn_cycle(n, gi("m", n % 2), g("a"), g("b"), g("d"), g("y0"), g("x0", 0.0), sc.options)
    elif fam == "pole":
        n = gi("n")
        res = pole_cycle(n, gi("m", n % 2), g("a"), g("b"), g("d"), g("y0"), sc.options)
    elif fam == "shooting":
        system = sc.require_system()
        side = sc.text("cycle", "first_side", "") or None
        shot = shooting_fixed_point(system, (g("lo"), g("hi")), sc.options, side)
        first = side or ("plus" if system.line.normal_part(system.plus(system.line.point(shot.fixed_point))) > 0 else "minus")
        orbit, period, closure = closed_orbit(system, shot.fixed_point, first, sc.options)
        summary = (
            f"fixed_point={shot.fixed_point!r} derivative={shot.derivative!r} "
            f"stability={shot.stability} period={period!r} closure={closure!r}"
        )
        return _cycle_output(sc, summary, orbit, system)
    else:
        raise ScenarioError(f"[cycle] family must be linear, zn, pole or shooting, got {fam!r}")
    return _cycle_output(sc, cycle_summary(res), res.orbit, res.system)


def _cycle_output(sc: Scenario, summary: str, orbit: Trajectory, system: PWSystem) -> str:
    print(summary, file=sys.stderr if sc.out == "-" else sys.stdout)
    if sc.fmt == "svg":
        s = [system.line.param(z) for z in orbit.z]
        regions = classify_regions(system, min(s), max(s)) if max(s) > min(s) else None
        return export_portrait([orbit], regions, "svg", sc.out, system.line)
    text = write_csv(portrait_rows([orbit], None, None), PORTRAIT_HEADER, comments=[summary])
    _emit(text, sc.out)
    return text


def run_homoclinic(sc: Scenario) -> str:
    n = sc.integer("homoclinic", "n")
    res: HomoclinicResult = homoclinic(
        n,
        sc.integer("homoclinic", "m", n % 2),
        sc.real("homoclinic", "b"),
        sc.real("homoclinic", "y0"),
        sc.text("homoclinic", "family"),
        sc.options,
    )
    summary = (
        f"endpoints={res.endpoints[0]!r},{res.endpoints[1]!r} arrival={res.arrival!r} "
        f"departure={res.departure!r} radius={res.arc_radius!r} closure={res.closure!r}"
    )
    print(summary, file=sys.stderr if sc.out == "-" else sys.stdout)
    if sc.fmt == "svg":
        text = _svg([res.orbit], None, None)
    else:
        rows = [("orbit", i, None, z.real, z.imag, None, None, "") for i, z in enumerate(res.orbit)]
        text = write_csv(rows, PORTRAIT_HEADER, comments=[summary])
    _emit(text, sc.out)
    return text


def run_regularize(sc: Scenario) -> str:
    sec = sc.section("regularize")
    case = sc.text("regularize", "case")
    params = {k: parse_real(sec[k]) for k in ("a", "b", "x0", "y0") if k in sec}
    kw = {}
    if "eps" in sec:
        kw["eps_grid"] = tuple(parse_real(v) for v in _split(sec["eps"]))
    if "theta" in sec:
        kw["theta_grid"] = tuple(parse_real(v) for v in _split(sec["theta"]))
    if "lambda" in sec:
        kw["lam"] = parse_real(sec["lambda"])
    if "rho" in sec:
        kw["rho"] = parse_real(sec["rho"])
    kw["phi"] = TransitionFunction(sc.text("regularize", "transition", "Quintic"))
    E = transition_map_experiment(TransitionExperiment(case, params, **kw), workers=default_workers())
    if sc.fmt == "svg":
        raise ScenarioError("regularize output is CSV only")
    text = write_csv(
        E.csv_rows(),
        ("eps", "theta", "x_theta", "alpha_fit", "alpha_formula", "rel_error"),
        comments=[f"case={case} lambda={E.lam!r} lambda_star={E.lam_star!r} q={E.q!r}"],
    )
    _emit(text, sc.out)
    return text


_RUNNERS = {
    "classify": run_classify,
    "portrait": run_portrait,
    "cycle": run_cycle,
    "homoclinic": run_homoclinic,
    "regularize": run_regularize,
}


def run(sc: Scenario) -> str:
    return _RUNNERS[sc.task](sc)


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="pwhs", description="Piecewise holomorphic systems: regions, orbits, cycles.")
    p.add_argument("task", choices=TASKS)
    p.add_argument("scenario", help="scenario file (INI syntax)")
    p.add_argument("--out", help="output path, '-' for standard output (default: scenario name with format suffix)")
    p.add_argument("--format", choices=("csv", "svg"), help="output format (default: [output] format or csv)")
    return p


def main(argv: Sequence[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        sc = load_scenario(args.scenario, args.task, args.out, args.format)
        run(sc)
    except ValidationError as exc:
        print(f"pwhs: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 2
    except NumericalError as exc:
        print(f"pwhs: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 3
    except PWHSError as exc:  # I/O
        print(f"pwhs: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
