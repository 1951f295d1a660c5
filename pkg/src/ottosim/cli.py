"""Command-line entry point: config ingestion, CSV emission, validation.

Four subcommands drive the library end to end:

    ottosim adiabat  --preset two_level_paper --out results
    ottosim sweep    --config engine.toml --threads 4
    ottosim protocol --preset oscillator_paper
    ottosim validate --preset two_level_paper

Configs are TOML with sections [medium], [baths], [schedule], [grid],
[tolerances], and optional [output]; the two shipped presets reproduce
the reference parameter sets for each working medium.  Output is UTF-8
CSV with '#'-prefixed metadata lines; every float is written with repr,
so a rerun with the same config is byte-identical (a sha256 over the
physics sections is stamped into the metadata for provenance).

Exit codes: 0 success, 2 config or usage error, 3 numerical error,
4 validation failure.
"""

from __future__ import annotations

import argparse
import hashlib
import io
import json
import math
import re
import sys
from dataclasses import dataclass
from pathlib import Path

try:
    import tomllib
except ModuleNotFoundError:  # Python < 3.11
    import tomli as tomllib

import numpy as np

from . import engine, oscillator, twolevel
from .core import BathPair, DomainError, WorkBreakdown
from .engine import (CycleSpec, OscillatorMedium, TauGrid, TwoLevelMedium,
                     stroke_adiabats)
from .numerics import IntegratorConfig, NumericsError

__all__ = ["ConfigError", "RunConfig", "load_config", "preset_config",
           "cmd_adiabat", "cmd_sweep", "cmd_protocol", "cmd_validate", "main"]

PRESETS = ("two_level_paper", "oscillator_paper")


class ConfigError(Exception):
    """The config file is missing, malformed, or fails a precondition."""


@dataclass(frozen=True)
class RunConfig:
    """A validated run: cycle spec, integrator tolerances, output directory.

    hash_payload holds the parsed physics sections verbatim; its sorted
    JSON serialization is what the CSV provenance hash digests, so two
    configs that differ only in [output] hash identically.
    """

    spec: CycleSpec
    out_dir: str
    hash_payload: dict

    @property
    def config_hash(self) -> str:
        blob = json.dumps(self.hash_payload, sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(blob.encode("utf-8")).hexdigest()


def _key_line(text: str, section: str, key: str) -> str:
    """Best-effort 'line N' anchor for a key inside a [section] block."""
    in_section = False
    for lineno, line in enumerate(text.splitlines(), start=1):
        stripped = line.strip()
        if stripped.startswith("["):
            in_section = stripped == f"[{section}]"
        elif in_section and re.match(rf"\s*{re.escape(key)}\s*=", line):
            return f"line {lineno}"
    return f"[{section}].{key}"


class _SectionReader:
    """Typed access to one TOML section with anchored error messages."""

    def __init__(self, text: str, data: dict, section: str):
        self.text = text
        self.section = section
        if section not in data:
            raise ConfigError(f"missing [{section}] section")
        self.table = data[section]
        if not isinstance(self.table, dict):
            raise ConfigError(f"[{section}] must be a section, not a value")

    def fail(self, key: str, message: str):
        anchor = _key_line(self.text, self.section, key)
        raise ConfigError(f"{anchor}: [{self.section}].{key} {message}")

    def get(self, key: str, kind, default=None, required=True):
        if key not in self.table:
            if required:
                self.fail(key, "is required")
            return default
        value = self.table[key]
        if kind is float and isinstance(value, int) and not isinstance(value, bool):
            value = float(value)
        if not isinstance(value, kind) or isinstance(value, bool) and kind is not bool:
            self.fail(key, f"must be of type {kind.__name__}")
        return value


def _parse_grid(reader: _SectionReader, key: str) -> TauGrid:
    table = reader.get(key, dict)
    try:
        return TauGrid(minimum=float(table.get("min", 0.0)),
                       maximum=float(table.get("max", 0.0)),
                       count=int(table.get("count", 0)),
                       spacing=str(table.get("spacing", "linear")))
    except (DomainError, TypeError, ValueError) as exc:
        reader.fail(key, f"is not a valid grid: {exc}")


def _config_from_text(text: str, source: str) -> RunConfig:
    try:
        data = tomllib.loads(text)
    except tomllib.TOMLDecodeError as exc:
        raise ConfigError(f"{source}: not valid TOML: {exc}") from exc
    if not data:
        raise ConfigError(f"{source}: config is empty; sections [medium], [baths], "
                          "[schedule], [grid] are required")

    med = _SectionReader(text, data, "medium")
    kind = med.get("kind", str)
    schedule = _SectionReader(text, data, "schedule")
    kind1 = schedule.get("kind", str)
    kind3 = schedule.get("kind3", str, required=False)

    try:
        if kind == "two_level":
            medium = TwoLevelMedium(epsilon=med.get("epsilon", float),
                                    theta=med.get("theta", float),
                                    lambda0=med.get("lambda0", float),
                                    lambda1=med.get("lambda1", float),
                                    schedule_kind=kind1)
            theta = medium.theta
            if not 0.0 < theta < math.pi:
                med.fail("theta", "must lie in (0, pi)")
        elif kind == "oscillator":
            medium = OscillatorMedium(omega0=med.get("omega0", float),
                                      omega1=med.get("omega1", float),
                                      mass=med.get("mass", float, default=1.0,
                                                   required=False),
                                      schedule_kind=kind1)
        else:
            med.fail("kind", "must be 'two_level' or 'oscillator'")
    except DomainError as exc:
        raise ConfigError(f"[medium]: {exc}") from exc

    baths_r = _SectionReader(text, data, "baths")
    try:
        baths = BathPair(t_hot=baths_r.get("t_hot", float),
                         t_cold=baths_r.get("t_cold", float))
    except DomainError as exc:
        baths_r.fail("t_hot", f"/ t_cold invalid: {exc}")

    grid_r = _SectionReader(text, data, "grid")
    grid1 = _parse_grid(grid_r, "tau1")
    grid3 = _parse_grid(grid_r, "tau3")

    cfg = None
    if "tolerances" in data:
        tol = _SectionReader(text, data, "tolerances")
        try:
            cfg = IntegratorConfig(rel_tol=tol.get("rel", float, default=1e-10,
                                                   required=False),
                                   abs_tol=tol.get("abs", float, default=1e-12,
                                                   required=False))
        except DomainError as exc:
            tol.fail("rel", f"/ abs invalid: {exc}")

    out_dir = "."
    if "output" in data and isinstance(data["output"], dict):
        out_dir = str(data["output"].get("directory", "."))

    try:
        spec = CycleSpec(medium=medium, baths=baths, grid1=grid1, grid3=grid3,
                         schedule_kind3=kind3, cfg=cfg)
    except DomainError as exc:
        raise ConfigError(f"{source}: {exc}") from exc

    payload = {k: data[k] for k in ("medium", "baths", "schedule", "grid",
                                    "tolerances") if k in data}
    return RunConfig(spec=spec, out_dir=out_dir, hash_payload=payload)


def load_config(path: str) -> RunConfig:
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    return _config_from_text(text, path)


def preset_config(name: str) -> RunConfig:
    if name not in PRESETS:
        raise ConfigError(f"unknown preset {name!r}; available: {', '.join(PRESETS)}")
    from importlib.resources import files
    text = (files("ottosim") / "presets" / f"{name}.toml").read_text(encoding="utf-8")
    return _config_from_text(text, f"preset {name}")


# ---------------------------------------------------------------------------
# CSV plumbing


def _fmt(value) -> str:
    if isinstance(value, str):
        return value
    if isinstance(value, (bool, np.bool_)):
        return "1" if value else "0"
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    return repr(float(value))


def _render_csv(meta: list[tuple[str, object]], header: list[str],
                rows: list[list]) -> str:
    buf = io.StringIO()
    for key, value in meta:
        buf.write(f"# {key} = {value if isinstance(value, str) else _fmt(value)}\n")
    buf.write(",".join(header) + "\n")
    for row in rows:
        buf.write(",".join(_fmt(x) for x in row) + "\n")
    return buf.getvalue()


def _write(out_dir: str, name: str, content: str) -> Path:
    directory = Path(out_dir)
    directory.mkdir(parents=True, exist_ok=True)
    path = directory / name
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(content)
    return path


def _base_meta(config: RunConfig, command: str) -> list[tuple[str, object]]:
    m = config.spec.medium
    kind = "two_level" if isinstance(m, TwoLevelMedium) else "oscillator"
    return [("ottosim", command),
            ("config_sha256", config.config_hash),
            ("medium", kind),
            ("schedule_kind", m.schedule_kind),
            ("schedule_kind3", config.spec.schedule_kind3 or m.schedule_kind)]


# ---------------------------------------------------------------------------
# commands


def _stroke_work_functions(adiabat):
    if isinstance(adiabat, twolevel.TwoLevelAdiabat):
        return (twolevel.exact_extra_work, twolevel.mean_extra_work,
                twolevel.osc_extra_work, twolevel.quasistatic_work)

    def quasi(ad):
        return (ad.omega_end - ad.omega_start) * ad.thermal_factor

    return (oscillator.exact_extra_work, oscillator.mean_extra_work,
            oscillator.osc_extra_work, quasi)


def cmd_adiabat(config: RunConfig, stroke: int = 1,
                taus: list[float] | None = None) -> Path:
    """Emit (tau, w_exact, w_first_order, w_mean, w_osc) for one stroke."""
    spec = config.spec
    ad1, ad3 = stroke_adiabats(spec)
    adiabat = ad1 if stroke == 1 else ad3
    grid = spec.grid1 if stroke == 1 else spec.grid3
    exact_fn, mean_fn, osc_fn, quasi_fn = _stroke_work_functions(adiabat)
    if taus is None:
        taus = [float(t) for t in grid.values()]
    rows = []
    for tau in taus:
        if tau <= 0:
            raise ConfigError(f"tau values must be positive, got {tau!r}")
        wb = WorkBreakdown(tau=tau,
                           w_adi=quasi_fn(adiabat),
                           w_ex_exact=exact_fn(adiabat, tau, cfg=spec.cfg),
                           w_mean=mean_fn(adiabat, tau),
                           w_osc=osc_fn(adiabat, tau))
        rows.append([wb.tau, wb.w_ex_exact, wb.w_first_order, wb.w_mean, wb.w_osc])
    meta = _base_meta(config, "adiabat")
    meta += [("stroke", str(stroke)), ("w_adi", quasi_fn(adiabat))]
    content = _render_csv(meta, ["tau", "w_exact", "w_first_order", "w_mean", "w_osc"],
                          rows)
    return _write(config.out_dir, "adiabat.csv", content)


def _sweep_csv_bundle(config: RunConfig, result) -> dict[str, str]:
    meta = _base_meta(config, "sweep")
    meta += [("tau1_axis", len(result.tau1_values)),
             ("tau3_axis", len(result.tau3_values))]

    cloud_rows = []
    for model, pts in (("exact", result.points), ("mean", result.points_mean)):
        for p in pts:
            cloud_rows.append([model, p.tau1, p.tau3, p.power, p.efficiency,
                               p.stalled, p.valid])
    cloud = _render_csv(
        meta, ["model", "tau1", "tau3", "power", "efficiency", "stall_flag",
               "valid"],
        cloud_rows)

    frontier_rows = []
    for model, pts in (("exact", result.frontier), ("mean", result.frontier_mean)):
        for p in pts:
            frontier_rows.append([model, p.tau1, p.tau3, p.power, p.efficiency])
    frontier = _render_csv(meta, ["model", "tau1", "tau3", "power", "efficiency"],
                           frontier_rows)

    cyc = engine.quasistatic(config.spec)
    baths = config.spec.baths
    mp, mpm = result.max_power_point, result.max_power_point_mean
    summary_rows = [
        ["max_power", mp.power], ["eta_at_max_power", mp.efficiency],
        ["tau1_at_max_power", mp.tau1], ["tau3_at_max_power", mp.tau3],
        ["max_power_mean", mpm.power], ["eta_at_max_power_mean", mpm.efficiency],
        ["tau1_at_max_power_mean", mpm.tau1], ["tau3_at_max_power_mean", mpm.tau3],
        ["eta_adi", cyc.eta_adi],
        ["eta_carnot", 1.0 - baths.t_cold / baths.t_hot],
        ["eta_emp_model", result.eta_emp_model],
        ["sigma1", result.sigma1], ["sigma3", result.sigma3],
        ["w_total_adi", cyc.w_total_adi], ["q_hot_adi", cyc.q_hot_adi],
    ]
    summary = _render_csv(meta, ["key", "value"], summary_rows)
    return {"cloud.csv": cloud, "frontier.csv": frontier, "summary.csv": summary}


def cmd_sweep(config: RunConfig, workers: int = 1) -> list[Path]:
    """Sweep the (tau1, tau3) grid; write cloud.csv, frontier.csv, summary.csv."""
    result = engine.sweep(config.spec, workers=workers)
    bundle = _sweep_csv_bundle(config, result)
    return [_write(config.out_dir, name, content)
            for name, content in sorted(bundle.items())]


def cmd_protocol(config: RunConfig, stroke: int = 1, samples: int = 201) -> Path:
    """Emit (s, value, derivative) of one stroke's schedule."""
    if samples < 2:
        raise ConfigError("samples must be at least 2")
    ad1, ad3 = stroke_adiabats(config.spec)
    schedule = (ad1 if stroke == 1 else ad3).schedule
    rows = []
    for s in np.linspace(0.0, 1.0, samples):
        value, derivative = schedule.value_and_derivative(float(s))
        rows.append([float(s), value, derivative])
    meta = _base_meta(config, "protocol")
    meta += [("stroke", str(stroke)), ("kind", schedule.kind),
             ("samples", samples)]
    content = _render_csv(meta, ["s", "value", "derivative"], rows)
    return _write(config.out_dir, "protocol.csv", content)


# ---------------------------------------------------------------------------
# validation suite


class _Report:
    def __init__(self):
        self.lines: list[str] = []
        self.failed = False

    def check(self, name: str, measured: float, threshold: float, note: str = ""):
        ok = measured <= threshold
        self.failed |= not ok
        verdict = "PASS" if ok else "FAIL"
        suffix = f" ({note})" if note else ""
        self.lines.append(f"{verdict} {name}: measured {measured:.3e} vs "
                          f"threshold {threshold:.3e}{suffix}")

    def check_flag(self, name: str, ok: bool, note: str = ""):
        self.failed |= not ok
        suffix = f" ({note})" if note else ""
        self.lines.append(f"{'PASS' if ok else 'FAIL'} {name}{suffix}")


def _tiny_sweep_spec(spec: CycleSpec) -> CycleSpec:
    # narrow windows around mid-grid keep this cheap and densification-free
    def shrink(grid: TauGrid) -> TauGrid:
        mid = 0.5 * (grid.minimum + grid.maximum)
        width = min(0.4, 0.2 * (grid.maximum - grid.minimum) + 1e-9)
        return TauGrid(mid, mid + width, 5, "linear")

    return CycleSpec(medium=spec.medium, baths=spec.baths,
                     grid1=shrink(spec.grid1), grid3=shrink(spec.grid3),
                     schedule_kind3=spec.schedule_kind3, cfg=spec.cfg)


def _coarse_spec(spec: CycleSpec, count: int = 25) -> CycleSpec:
    def cap(grid: TauGrid) -> TauGrid:
        return TauGrid(grid.minimum, grid.maximum,
                       min(grid.count, count), grid.spacing)

    return CycleSpec(medium=spec.medium, baths=spec.baths, grid1=cap(spec.grid1),
                     grid3=cap(spec.grid3), schedule_kind3=spec.schedule_kind3,
                     cfg=spec.cfg)


def cmd_validate(config: RunConfig) -> tuple[int, str]:
    """Run the invariant suite for the configured medium; (exit_code, report)."""
    spec = config.spec
    report = _Report()
    ad1, ad3 = stroke_adiabats(spec)
    cyc = engine.quasistatic(spec)

    if isinstance(spec.medium, TwoLevelMedium):
        drift = max(twolevel.norm_drift(ad1, tau, cfg=spec.cfg)
                    for tau in (3.0, 5.921, 17.3))
        report.check("unitarity |b_g|^2+|b_e|^2 = 1", drift, 1e-9)

        ident = max(abs(twolevel.mean_extra_work(ad1, t) + twolevel.osc_extra_work(ad1, t)
                        - 2.0 * ad1.params.epsilon * ad1.gap_end * ad1.thermal_weight
                        * abs(twolevel.first_order_amplitude(ad1, t)) ** 2)
                    for t in (2.0, 7.7, 31.0))
        report.check("first-order identity mean+osc = 2 eps Lambda tanh |c1|^2",
                     ident, 1e-12)
    else:
        n_floor = min(oscillator.nonadiabatic_factor(ad1, tau, cfg=spec.cfg)
                      for tau in (0.3, 1.0, 2.0, 5.0, 11.0, 23.0))
        report.check("nonadiabatic factor floor 1 - min N(tau)", 1.0 - n_floor, 0.0,
                     note="N >= 1")

        worst = max(abs(oscillator.exact_extra_work(ad1, tau, cfg=spec.cfg)
                        - oscillator.extra_work_fock(ad1, tau, cfg=spec.cfg))
                    for tau in (2.0, 5.0))
        report.check("Ermakov vs Fock extra work", worst, 1e-6)

        ladder = oscillator.fock_integrate(ad1, 3.0, 1, cfg=spec.cfg)
        off_parity = max(abs(ladder.amplitude(m)) for m in (0, 2, 4, 6))
        report.check("parity conservation (off-parity amplitude)", off_parity, 0.0)
        report.check("fock ladder unitarity (integrator drift)",
                     abs(1.0 - ladder.norm), 1e-8)
        amps2 = np.abs(ladder.amplitudes) ** 2
        report.check("fock ladder boundary population",
                     float(amps2[-1] + amps2[-2]), 1e-8)

        m = spec.medium
        alt = OscillatorMedium(omega0=m.omega0, omega1=m.omega1, mass=3.0 * m.mass,
                               schedule_kind=m.schedule_kind)
        alt_spec = CycleSpec(medium=alt, baths=spec.baths, grid1=spec.grid1,
                             grid3=spec.grid3, schedule_kind3=spec.schedule_kind3,
                             cfg=spec.cfg)
        alt1, _ = stroke_adiabats(alt_spec)
        mass_dev = abs(oscillator.exact_extra_work(alt1, 4.0, cfg=spec.cfg)
                       - oscillator.exact_extra_work(ad1, 4.0, cfg=spec.cfg))
        report.check("mass invariance of extra work", mass_dev, 0.0)

    mean_fn = (twolevel.mean_extra_work
               if isinstance(spec.medium, TwoLevelMedium)
               else oscillator.mean_extra_work)
    constancy = max(abs(t * t * mean_fn(ad, t) - mean_fn(ad, 1.0))
                    for ad in (ad1, ad3) for t in (3.0, 10.0, 100.0))
    report.check("tau^2 * mean extra work constancy", constancy, 1e-12)

    coarse = engine.sweep(_coarse_spec(spec), densify=False)
    eta_cap = min(cyc.eta_adi, 1.0 - spec.baths.t_cold / spec.baths.t_hot)
    excess = max((p.efficiency - eta_cap for p in coarse.points if p.valid),
                 default=-math.inf)
    report.check("efficiency bound eta <= min(eta_adi, eta_carnot)",
                 max(excess, 0.0), 1e-12)

    tiny = _tiny_sweep_spec(spec)
    first = _sweep_csv_bundle(config, engine.sweep(tiny))["cloud.csv"]
    second = _sweep_csv_bundle(config, engine.sweep(tiny))["cloud.csv"]
    report.check_flag("deterministic CSV (byte-identical reruns)", first == second)

    text = "\n".join(report.lines) + "\n"
    return (4 if report.failed else 0), text


# ---------------------------------------------------------------------------
# argument parsing


def _add_common(sub: argparse.ArgumentParser):
    sub.add_argument("--config", help="path to a TOML config file")
    sub.add_argument("--preset", choices=PRESETS,
                     help="use a shipped parameter set instead of --config")
    sub.add_argument("--out", help="output directory (overrides [output].directory)")
    sub.add_argument("--threads", type=int, default=1,
                     help="worker processes for grid sweeps")


def _resolve_config(args) -> RunConfig:
    if bool(args.config) == bool(args.preset):
        raise ConfigError("exactly one of --config or --preset is required")
    config = load_config(args.config) if args.config else preset_config(args.preset)
    if args.out:
        config = RunConfig(spec=config.spec, out_dir=args.out,
                           hash_payload=config.hash_payload)
    return config


def main(argv: list[str] | None = None) -> int:
    parser = argparse.ArgumentParser(
        prog="ottosim",
        description="Finite-time quantum Otto engine simulation toolkit")
    commands = parser.add_subparsers(dest="command", required=True)

    p_adiabat = commands.add_parser(
        "adiabat", help="extra-work decomposition of one stroke vs control time")
    _add_common(p_adiabat)
    p_adiabat.add_argument("--stroke", type=int, choices=(1, 3), default=1)
    p_adiabat.add_argument("--taus", help="comma-separated control times "
                                          "(default: the stroke's grid)")

    p_sweep = commands.add_parser(
        "sweep", help="map the (tau1, tau3) grid; cloud, frontier, summary CSVs")
    _add_common(p_sweep)

    p_protocol = commands.add_parser(
        "protocol", help="sample one stroke's schedule and derivative")
    _add_common(p_protocol)
    p_protocol.add_argument("--stroke", type=int, choices=(1, 3), default=1)
    p_protocol.add_argument("--samples", type=int, default=201)

    p_validate = commands.add_parser(
        "validate", help="run the module invariant suite for this config")
    _add_common(p_validate)

    args = parser.parse_args(argv)
    try:
        config = _resolve_config(args)
        if args.command == "adiabat":
            taus = None
            if args.taus:
                try:
                    taus = [float(t) for t in args.taus.split(",") if t.strip()]
                except ValueError as exc:
                    raise ConfigError(f"--taus: {exc}") from exc
            path = cmd_adiabat(config, stroke=args.stroke, taus=taus)
            print(f"wrote {path}")
        elif args.command == "sweep":
            for path in cmd_sweep(config, workers=max(1, args.threads)):
                print(f"wrote {path}")
        elif args.command == "protocol":
            path = cmd_protocol(config, stroke=args.stroke, samples=args.samples)
            print(f"wrote {path}")
        else:
            code, text = cmd_validate(config)
            print(text, end="")
            return code
    except ConfigError as exc:
        print(f"ottosim: config error: {exc}", file=sys.stderr)
        return 2
    except DomainError as exc:
        print(f"ottosim: config error: {exc}", file=sys.stderr)
        return 2
    except NumericsError as exc:
        print(f"ottosim: numerical error: {exc}", file=sys.stderr)
        return 3
    except OSError as exc:
        print(f"ottosim: io error: {exc}", file=sys.stderr)
        return 2
    return 0


if __name__ == "__main__":
    sys.exit(main())
