"""Scenario configuration, end-to-end run orchestration, and persistence.

Pipeline order is fixed: plant -> measurement -> fault injection ->
residuals -> low-pass -> thresholds. A (scenario, seed) pair fully
determines every output byte.
"""

import configparser
import json
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path

from . import detector, plant, residuals, sensors
from .detector import Thresholds
from .errors import ConfigurationError, ScenarioError
from .plant import Excitation, JointParams
from .residuals import CONSTRAINTS, compute_residuals
from .sensors import CHANNELS, FaultSpec, NoiseSpec, SensorSuite, apply_faults

TELEMETRY_HEADER = "t,theta_m,omega_m,i_m,v_m,theta_l,tau_sea"
RESIDUALS_HEADER = ("t,torsional_raw,torsional_filt,dynamics_raw,"
                    "dynamics_filt,electrical_raw,electrical_filt")


@dataclass
class Scenario:
    """Everything needed to reproduce one run."""

    params: JointParams
    excitation: Excitation
    thresholds: Thresholds
    duration: float              # s
    noise: NoiseSpec = field(default_factory=NoiseSpec)
    faults: tuple = ()
    dt: float = 0.0005           # integration step (s)
    sensor_rate: float = 1000.0  # telemetry rate (Hz)
    cutoff_hz: float = 5.0       # residual low-pass cutoff (Hz)
    seed: int = 0
    label: str = ""

    def __post_init__(self):
        self.faults = tuple(self.faults)
        self.validate()

    def validate(self):
        if not self.duration > 0.0:
            raise ConfigurationError(f"duration must be positive, got {self.duration}")
        if not self.dt > 0.0:
            raise ConfigurationError(f"dt must be positive, got {self.dt}")
        if not self.sensor_rate > 0.0:
            raise ConfigurationError(
                f"sensor_rate must be positive, got {self.sensor_rate}")
        decim = 1.0 / (self.dt * self.sensor_rate)
        if decim < 1.0 - 1e-9:
            raise ConfigurationError(
                f"sensor_rate ({self.sensor_rate} Hz) exceeds the integration "
                f"rate 1/dt ({1.0 / self.dt} Hz)")
        if abs(decim - round(decim)) > 1e-6:
            raise ConfigurationError(
                f"sensor_rate ({self.sensor_rate} Hz) must divide the "
                f"integration rate 1/dt ({1.0 / self.dt} Hz)")
        if not 0.0 < self.cutoff_hz < 0.5 * self.sensor_rate:
            raise ConfigurationError(
                f"cutoff_hz must lie in (0, sensor_rate/2), got {self.cutoff_hz}")
        if not self.noise.bandwidth < 0.5 * self.sensor_rate:
            raise ConfigurationError(
                f"noise bandwidth ({self.noise.bandwidth} Hz) must be below "
                f"sensor_rate/2 ({0.5 * self.sensor_rate} Hz)")
        if not self.duration > self.thresholds.settling:
            raise ConfigurationError(
                f"duration ({self.duration} s) must exceed the settling "
                f"window ({self.thresholds.settling} s)")
        if not (isinstance(self.seed, int) and self.seed >= 0):
            raise ConfigurationError(f"seed must be a nonnegative integer, got {self.seed}")
        seen = set()
        for fault in self.faults:
            if fault.channel in seen:
                raise ConfigurationError(
                    f"multiple faults on channel {fault.channel!r}; at most one allowed")
            seen.add(fault.channel)

    def decimation(self):
        return round(1.0 / (self.dt * self.sensor_rate))

    def n_steps(self):
        """Integration steps, trimmed to a whole number of sensor periods."""
        decim = self.decimation()
        return (int(self.duration / self.dt + 1e-9) // decim) * decim


@dataclass
class RunResult:
    telemetry: sensors.TelemetryLog
    residuals: residuals.ResidualLog
    report: detector.DiagnosticReport


def run(scenario, out_dir=None):
    """Execute the full pipeline; optionally persist CSVs and the report."""
    scenario.validate()
    true_states = plant.simulate(
        scenario.params, scenario.excitation, scenario.dt,
        scenario.n_steps(), scenario.decimation())
    suite = SensorSuite(scenario.params, scenario.noise, scenario.sensor_rate,
                        scenario.seed)
    telemetry = apply_faults(suite.measure_batch(true_states), scenario.faults)
    residual_log = compute_residuals(telemetry, scenario.params,
                                     scenario.sensor_rate, scenario.cutoff_hz)
    report = detector.evaluate(residual_log, scenario.thresholds)
    if out_dir is not None:
        export_csv(telemetry, residual_log, report, out_dir)
    return RunResult(telemetry=telemetry, residuals=residual_log, report=report)


# ---------------------------------------------------------------------------
# scenario files
# ---------------------------------------------------------------------------

_SCENARIO_KEYS = {"label": str, "duration": float, "dt": float,
                  "sensor_rate": float, "cutoff_hz": float, "seed": int}
_PARAMS_KEYS = {name: float for name in (
    "k1", "k2", "g1", "gr", "k_eq", "k_sea", "k_gear", "j_gear", "b_gear",
    "j_load", "k_t", "k_e", "r_motor", "l_motor")}
_EXCITATION_KEYS = {"kind": str, "amplitude": float, "frequency": float,
                    "offset": float}
_NOISE_KEYS = {"bandwidth": float, "seed": int,
               **{ch: float for ch in CHANNELS}}
_THRESHOLDS_KEYS = {"torsional": float, "dynamics": float,
                    "electrical": float, "settling": float}
_FAULT_KEYS = {"channel": str, "kind": str, "onset": float,
               "bias_magnitude": float}


def _line_of(text, section, key=None):
    """1-based line of a section header or of a key inside it, for errors."""
    current = None
    for lineno, line in enumerate(text.splitlines(), start=1):
        stripped = line.strip()
        if stripped.startswith("[") and stripped.endswith("]"):
            current = stripped[1:-1].strip()
            if key is None and current == section:
                return lineno
        elif key is not None and current == section:
            name = stripped.split("=", 1)[0].strip()
            if name == key:
                return lineno
    return None


class _SectionReader:
    def __init__(self, cp, text, section, schema):
        self.cp = cp
        self.text = text
        self.section = section
        self.schema = schema
        for key in cp[section]:
            if key not in schema:
                lineno = _line_of(text, section, key)
                raise ScenarioError(
                    f"unknown key '{key}' in [{section}]"
                    + (f" (line {lineno})" if lineno else ""))

    def get(self, key, default=None, required=False):
        if not self.cp.has_option(self.section, key):
            if required:
                lineno = _line_of(self.text, self.section)
                raise ScenarioError(
                    f"missing required key '{key}' in [{self.section}]"
                    + (f" (line {lineno})" if lineno else ""))
            return default
        raw = self.cp.get(self.section, key)
        kind = self.schema[key]
        if kind is str:
            return raw
        try:
            value = kind(raw)
        except ValueError:
            lineno = _line_of(self.text, self.section, key)
            raise ScenarioError(
                f"cannot parse {self.section}.{key} = {raw!r} as {kind.__name__}"
                + (f" (line {lineno})" if lineno else "")) from None
        return value


def _parse(text, source):
    cp = configparser.ConfigParser(delimiters=("=",), interpolation=None,
                                   inline_comment_prefixes=("#",), strict=True)
    try:
        cp.read_string(text, source=str(source))
    except configparser.MissingSectionHeaderError as exc:
        raise ScenarioError(f"{source}: line {exc.lineno}: "
                            "content before the first section header") from None
    except configparser.ParsingError as exc:
        detail = "; ".join(f"line {lineno}: {line.strip()}"
                           for lineno, line in exc.errors)
        raise ScenarioError(f"{source}: parse error: {detail}") from None
    except configparser.Error as exc:
        raise ScenarioError(f"{source}: {exc}") from None
    return cp


def load_scenario(path, overrides=None):
    """Parse and validate a scenario file (strict: unknown keys rejected).

    overrides is an optional list of 'section.key=value' strings applied on
    top of the file contents before validation.
    """
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise ScenarioError(f"cannot read scenario file {path}: {exc}") from None
    cp = _parse(text, path)
    if overrides:
        for item in overrides:
            try:
                dotted, value = item.split("=", 1)
                section, key = dotted.strip().split(".", 1)
            except ValueError:
                raise ScenarioError(
                    f"override {item!r} is not of the form section.key=value") from None
            if not cp.has_section(section):
                cp.add_section(section)
            cp.set(section, key.strip(), value.strip())

    for section in cp.sections():
        base = section.split(":", 1)[0]
        if section not in ("scenario", "params", "excitation", "noise",
                           "thresholds") and base != "fault":
            lineno = _line_of(text, section)
            raise ScenarioError(f"unknown section [{section}]"
                                + (f" (line {lineno})" if lineno else ""))
    for required in ("scenario", "params", "excitation", "thresholds"):
        if not cp.has_section(required):
            raise ScenarioError(f"{path}: missing required section [{required}]")

    try:
        sc = _SectionReader(cp, text, "scenario", _SCENARIO_KEYS)
        pr = _SectionReader(cp, text, "params", _PARAMS_KEYS)
        ex = _SectionReader(cp, text, "excitation", _EXCITATION_KEYS)
        th = _SectionReader(cp, text, "thresholds", _THRESHOLDS_KEYS)

        params = JointParams(
            k1=pr.get("k1", required=True), k2=pr.get("k2", required=True),
            g1=pr.get("g1", required=True), gr=pr.get("gr", required=True),
            k_eq=pr.get("k_eq", required=True),
            j_gear=pr.get("j_gear", required=True),
            b_gear=pr.get("b_gear", required=True),
            j_load=pr.get("j_load", required=True),
            k_t=pr.get("k_t", required=True), k_e=pr.get("k_e", required=True),
            r_motor=pr.get("r_motor", required=True),
            l_motor=pr.get("l_motor", required=True),
            k_sea=pr.get("k_sea"), k_gear=pr.get("k_gear"))
        excitation = Excitation(
            kind=ex.get("kind", default="open_loop_voltage"),
            amplitude=ex.get("amplitude", default=0.0),
            frequency=ex.get("frequency", default=0.0),
            offset=ex.get("offset", default=0.0))
        thresholds = Thresholds(
            torsional=th.get("torsional", required=True),
            dynamics=th.get("dynamics", required=True),
            electrical=th.get("electrical", required=True),
            settling=th.get("settling", default=0.2))

        noise = NoiseSpec()
        if cp.has_section("noise"):
            no = _SectionReader(cp, text, "noise", _NOISE_KEYS)
            noise = NoiseSpec(
                std_per_channel={ch: no.get(ch, default=0.0) for ch in CHANNELS},
                bandwidth=no.get("bandwidth", default=50.0),
                seed=no.get("seed"))

        faults = []
        for section in cp.sections():
            if section.split(":", 1)[0] != "fault":
                continue
            fa = _SectionReader(cp, text, section, _FAULT_KEYS)
            faults.append(FaultSpec(
                channel=fa.get("channel", required=True),
                kind=fa.get("kind", required=True),
                onset=fa.get("onset", required=True),
                bias_magnitude=fa.get("bias_magnitude", default=0.0)))

        return Scenario(
            params=params, excitation=excitation, noise=noise,
            faults=tuple(faults), thresholds=thresholds,
            duration=sc.get("duration", required=True),
            dt=sc.get("dt", default=0.0005),
            sensor_rate=sc.get("sensor_rate", default=1000.0),
            cutoff_hz=sc.get("cutoff_hz", default=5.0),
            seed=sc.get("seed", default=0),
            label=sc.get("label", default=path.stem))
    except ScenarioError:
        raise
    except ConfigurationError as exc:
        raise ScenarioError(f"{path}: {exc}") from None


def _fmt_value(value):
    if isinstance(value, float):
        return repr(value)
    return str(value)


def save_scenario(scenario, path):
    """Write a scenario file that load_scenario() round-trips exactly."""
    lines = ["[scenario]"]
    lines.append(f"label = {scenario.label}")
    for key in ("duration", "dt", "sensor_rate", "cutoff_hz", "seed"):
        lines.append(f"{key} = {_fmt_value(getattr(scenario, key))}")
    lines.append("")
    lines.append("[params]")
    for key in _PARAMS_KEYS:
        lines.append(f"{key} = {_fmt_value(getattr(scenario.params, key))}")
    lines.append("")
    lines.append("[excitation]")
    for key in _EXCITATION_KEYS:
        lines.append(f"{key} = {_fmt_value(getattr(scenario.excitation, key))}")
    lines.append("")
    lines.append("[noise]")
    lines.append(f"bandwidth = {_fmt_value(scenario.noise.bandwidth)}")
    if scenario.noise.seed is not None:
        lines.append(f"seed = {scenario.noise.seed}")
    for channel in CHANNELS:
        lines.append(f"{channel} = {_fmt_value(scenario.noise.std(channel))}")
    lines.append("")
    lines.append("[thresholds]")
    for key in _THRESHOLDS_KEYS:
        lines.append(f"{key} = {_fmt_value(getattr(scenario.thresholds, key))}")
    for index, fault in enumerate(scenario.faults):
        lines.append("")
        lines.append("[fault]" if len(scenario.faults) == 1 else f"[fault:{index}]")
        lines.append(f"channel = {fault.channel}")
        lines.append(f"kind = {fault.kind}")
        lines.append(f"onset = {_fmt_value(fault.onset)}")
        lines.append(f"bias_magnitude = {_fmt_value(fault.bias_magnitude)}")
    Path(path).write_text("\n".join(lines) + "\n")


def bundled_scenario(name):
    """Path of a scenario file shipped with the package (nominal, bias, stuck)."""
    path = resources.files(__package__).joinpath("scenarios", f"{name}.scenario")
    return Path(str(path))


# ---------------------------------------------------------------------------
# persistence
# ---------------------------------------------------------------------------

def _fmt(x):
    return format(float(x), ".12g")


def export_csv(telemetry, residual_log, report, out_dir):
    """Write telemetry.csv, residuals.csv, and report.json into out_dir.

    Numbers are decimal text with 12 significant digits; identical runs
    produce byte-identical files.
    """
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)

    rows = [TELEMETRY_HEADER]
    cols = [telemetry.t, telemetry.theta_m, telemetry.omega_m, telemetry.i_m,
            telemetry.v_m, telemetry.theta_l, telemetry.tau_sea]
    for k in range(len(telemetry)):
        rows.append(",".join(_fmt(c[k]) for c in cols))
    telemetry_path = out / "telemetry.csv"
    telemetry_path.write_text("\n".join(rows) + "\n")

    rows = [RESIDUALS_HEADER]
    cols = [residual_log.t]
    for c in CONSTRAINTS:
        cols.append(residual_log.raw[c])
        cols.append(residual_log.filtered[c])
    for k in range(len(residual_log)):
        rows.append(",".join(_fmt(c[k]) for c in cols))
    residuals_path = out / "residuals.csv"
    residuals_path.write_text("\n".join(rows) + "\n")

    report_path = out / "report.json"
    report_path.write_text(json.dumps(report.to_dict(), indent=2) + "\n")

    return {"telemetry": telemetry_path, "residuals": residuals_path,
            "report": report_path}
