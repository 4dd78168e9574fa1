"""Experiment configuration files.

Text format::

    # comment
    n_agents = 1000          # keys before any header belong to [market]
    coupling.constant = 2.0  # dotted keys name their section inline

    [noise]
    agent = logistic

The same structure is accepted as JSON (``{"market": {...}, "noise": {...}}``).
Every accepted key is declared in :data:`SCHEMAS`, which also drives the
``--help`` listing.  Unknown keys, missing required keys and invalid values
are errors carrying the offending line number.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Any, Callable

from ..errors import ConfigError
from ..market.config import CouplingSchedule, FieldSchedule, ImpactFunction, MarketConfig, NoiseSpec
from ..market.topology import TopologySpec
from ..qdt import ProspectSet

REQUIRED = object()


@dataclass(frozen=True)
class Key:
    kind: str  # int | float | str | bool | floats | ints | strs
    default: Any
    help: str
    optional: bool = False  # "none" allowed
    minimum: float | None = None
    minimum_strict: bool = False

    def describe(self) -> str:
        if self.default is REQUIRED:
            d = "required"
        elif self.default is None:
            d = "default: none"
        elif isinstance(self.default, bool):
            d = f"default: {'true' if self.default else 'false'}"
        elif isinstance(self.default, (list, tuple)):
            d = "default: " + ",".join(str(v) for v in self.default)
        else:
            d = f"default: {self.default}"
        return f"{self.help} ({self.kind}; {d})"


def _market_sections() -> dict[str, dict[str, Key]]:
    return {
        "market": {
            "n_agents": Key("int", 100, "number of agents", minimum=2),
            "horizon": Key("int", 1000, "number of time steps", minimum=1),
            "seed": Key("int", 0, "master random seed"),
            "initial_price": Key("float", 100.0, "price at t = 0", minimum=0, minimum_strict=True),
            "update_scheme": Key("str", "synchronous", "synchronous | random_sequential"),
            "price_mode": Key("str", "log", "log | raw"),
            "normalization": Key("str", "n_agents", "neighbor-sum divisor: n_agents | degree"),
        },
        "topology": {
            "kind": Key("str", "complete", "complete | lattice2d | erdos_renyi"),
            "width": Key("int", None, "lattice width", optional=True, minimum=2),
            "height": Key("int", None, "lattice height", optional=True, minimum=2),
            "periodic": Key("bool", True, "periodic lattice boundaries"),
            "p": Key("float", None, "erdos_renyi edge probability", optional=True),
            "seed": Key("int", None, "graph seed (defaults to the market seed)", optional=True),
        },
        "impact": {
            "kind": Key("str", "linear", "linear | square_root"),
            "lambda": Key("float", 0.01, "impact coefficient", minimum=0, minimum_strict=True),
        },
        "noise": {
            "agent": Key("str", "logistic", "agent noise law: logistic | gaussian"),
            "agent_scale": Key("float", 1.0, "logistic scale or gaussian std", minimum=0, minimum_strict=True),
            "agent_sigma": Key("float", 1.0, "multiplier of the agent noise", minimum=0, minimum_strict=True),
            "price_sigma": Key("float", 0.01, "price volatility per unit time", minimum=0),
        },
        "coupling": {
            "kind": Key("str", "constant", "constant | linear_ramp | sinusoid | ou_process"),
            "constant": Key("float", 0.0, "coupling value for kind = constant", minimum=0),
            "start": Key("float", 0.0, "linear_ramp start"),
            "end": Key("float", 0.0, "linear_ramp end"),
            "mean": Key("float", 0.0, "sinusoid / ou_process mean"),
            "amplitude": Key("float", 0.0, "sinusoid amplitude"),
            "period": Key("float", 100.0, "sinusoid period", minimum=0, minimum_strict=True),
            "reversion": Key("float", 0.01, "ou_process per-step mean reversion"),
            "vol": Key("float", 0.0, "ou_process per-step volatility", minimum=0),
            "seed": Key("int", None, "ou_process seed (defaults to a stream of the market seed)", optional=True),
        },
        "field": {
            "kind": Key("str", "none", "none | sinusoid | square_wave | iid_shocks"),
            "amplitude": Key("float", 0.0, "sinusoid / square_wave amplitude"),
            "period": Key("float", 10.0, "sinusoid / square_wave period", minimum=0, minimum_strict=True),
            "std": Key("float", 0.0, "iid_shocks standard deviation", minimum=0),
            "seed": Key("int", None, "iid_shocks seed (defaults to a stream of the market seed)", optional=True),
        },
    }


def _schemas() -> dict[str, dict[str, dict[str, Key]]]:
    simulate = _market_sections()
    sweep = _market_sections()
    sweep["sweep"] = {
        "lambda_grid": Key("floats", REQUIRED, "ascending comma-separated coupling values"),
        "burn_in": Key("int", None, "discarded steps per run (default 20% of horizon)", optional=True, minimum=0),
        "measure_steps": Key("int", None, "measured steps per run (default: rest of horizon)", optional=True,
                             minimum=2),
    }
    nivol = _market_sections()
    nivol["nivol"] = {
        "field_amplitude": Key("float", REQUIRED, "amplitude of the driving field"),
        "field_period": Key("float", 4.0, "period of the driving field", minimum=0, minimum_strict=True),
        "field_kind": Key("str", "square_wave", "square_wave | sinusoid"),
        "n_seeds": Key("int", 20, "number of paired seeds", minimum=1),
        "burn_in": Key("int", None, "discarded steps (default 20% of horizon)", optional=True, minimum=0),
    }
    stylized = {
        "stylized": {
            "input": Key("str", REQUIRED, "CSV file with a price column (relative to the config file)"),
            "column": Key("str", "price", "name of the price column"),
            "mode": Key("str", "log", "log | simple returns"),
            "max_lag": Key("int", 50, "largest ACF lag", minimum=1),
            "hill_fraction": Key("float", 0.05, "tail fraction used by the Hill fit", minimum=0,
                                 minimum_strict=True),
        }
    }
    choice = {
        "choice": {
            "utilities": Key("floats", REQUIRED, "deterministic utilities, comma-separated"),
            "gamma": Key("float", 1.0, "Gumbel noise scale", minimum=0, minimum_strict=True),
            "n_samples": Key("int", 100_000, "Monte Carlo draws", minimum=1),
            "seed": Key("int", 0, "random seed"),
        }
    }
    qdt = {
        "qdt": {
            "labels": Key("strs", REQUIRED, "prospect labels"),
            "utilities": Key("floats", REQUIRED, "expected utilities (>= 0)"),
            "q": Key("floats", None, "attraction factors (give q or ranking)", optional=True),
            "ranking": Key("strs", None, "labels from most to least attractive", optional=True),
            "counts": Key("ints", None, "observed choice counts for a chi-square comparison", optional=True),
        }
    }
    return {"simulate": simulate, "sweep": sweep, "nivol": nivol, "stylized": stylized, "choice": choice, "qdt": qdt}


SCHEMAS = _schemas()
DEFAULT_SECTION = {"simulate": "market", "sweep": "market", "nivol": "market", "stylized": "stylized",
                   "choice": "choice", "qdt": "qdt"}


def documented_keys(subcommand: str) -> set[str]:
    return {f"{s}.{k}" for s, keys in SCHEMAS[subcommand].items() for k in keys}


def help_text(subcommand: str) -> str:
    lines = ["configuration keys:"]
    for section, keys in SCHEMAS[subcommand].items():
        lines.append(f"  [{section}]")
        for name, key in keys.items():
            lines.append(f"    {section}.{name}: {key.describe()}")
    return "\n".join(lines)


_TRUE = {"true", "yes", "on", "1"}
_FALSE = {"false", "no", "off", "0"}


def _convert(raw: Any, key: Key, label: str, line: int | None, path: str | None) -> Any:
    def fail(msg: str) -> ConfigError:
        return ConfigError(f"{label}: {msg}", line=line, path=path)

    if isinstance(raw, str) and raw.strip().lower() in ("none", "") and key.optional:
        return None
    if raw is None:
        if key.optional:
            return None
        raise fail("value required")
    try:
        if key.kind == "int":
            if isinstance(raw, bool):
                raise ValueError
            if isinstance(raw, float):
                if not raw.is_integer():
                    raise ValueError
                v: Any = int(raw)
            else:
                v = int(str(raw).strip())
        elif key.kind == "float":
            if isinstance(raw, bool):
                raise ValueError
            v = float(str(raw).strip()) if isinstance(raw, str) else float(raw)
            if not math.isfinite(v):
                raise ValueError
        elif key.kind == "bool":
            if isinstance(raw, bool):
                v = raw
            elif str(raw).strip().lower() in _TRUE:
                v = True
            elif str(raw).strip().lower() in _FALSE:
                v = False
            else:
                raise ValueError
        elif key.kind == "str":
            v = str(raw).strip()
        else:
            items = raw if isinstance(raw, list) else [x for x in str(raw).split(",") if x.strip() != ""]
            conv: Callable[[Any], Any] = {"floats": float, "ints": int, "strs": lambda s: str(s).strip()}[key.kind]
            v = [conv(x.strip() if isinstance(x, str) else x) for x in items]
            if key.kind == "ints" and any(isinstance(x, float) for x in items):
                raise ValueError
            if key.kind == "floats" and not all(math.isfinite(x) for x in v):
                raise ValueError
    except (TypeError, ValueError):
        raise fail(f"cannot read {raw!r} as {key.kind}") from None
    if key.minimum is not None and isinstance(v, (int, float)) and not isinstance(v, bool):
        if v < key.minimum or (key.minimum_strict and v == key.minimum):
            op = ">" if key.minimum_strict else "≥"
            m = int(key.minimum) if float(key.minimum).is_integer() else key.minimum
            raise fail(f"{label.split('.')[-1]} {op} {m} required, got {v}")
    return v


@dataclass
class ParsedConfig:
    """Section -> key -> converted value, with the line each value came from."""

    subcommand: str
    values: dict[str, dict[str, Any]]
    lines: dict[str, int]
    path: str | None
    base_dir: Path

    def get(self, section: str, key: str) -> Any:
        return self.values[section][key]

    def line_of(self, section: str, key: str | None = None) -> int | None:
        if key is not None and f"{section}.{key}" in self.lines:
            return self.lines[f"{section}.{key}"]
        return self.lines.get(f"[{section}]")

    def error(self, msg: str, section: str, key: str | None = None) -> ConfigError:
        return ConfigError(msg, line=self.line_of(section, key), path=self.path)


def _read_text(text: str, path: str | None, default_section: str) -> tuple[dict[tuple[str, str], tuple[str, int]], dict[str, int]]:
    entries: dict[tuple[str, str], tuple[str, int]] = {}
    headers: dict[str, int] = {}
    section = default_section
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith(("#", ";")):
            continue
        if line.startswith("["):
            if not line.endswith("]") or len(line) < 3:
                raise ConfigError(f"malformed section header {line!r}", line=lineno, path=path)
            section = line[1:-1].strip()
            headers[section] = lineno
            continue
        if "=" not in line:
            raise ConfigError(f"expected 'key = value', got {line!r}", line=lineno, path=path)
        key, value = (s.strip() for s in line.split("=", 1))
        if " #" in value:
            value = value.split(" #", 1)[0].strip()
        sec = section
        if "." in key:
            sec, key = key.split(".", 1)
        if not key:
            raise ConfigError("empty key", line=lineno, path=path)
        if (sec, key) in entries:
            raise ConfigError(f"duplicate key {sec}.{key}", line=lineno, path=path)
        entries[(sec, key)] = (value, lineno)
    return entries, headers


def _read_json(text: str, path: str | None, subcommand: str) -> dict[tuple[str, str], tuple[Any, int | None]]:
    try:
        doc = json.loads(text)
    except ValueError as exc:
        raise ConfigError(f"invalid JSON: {exc}", path=path) from None
    if not isinstance(doc, dict):
        raise ConfigError("JSON configuration must be an object", path=path)
    if subcommand == "qdt" and "labels" in doc:
        doc = {"qdt": doc}
    entries: dict[tuple[str, str], tuple[Any, int | None]] = {}
    default = DEFAULT_SECTION[subcommand]
    for sec, body in doc.items():
        if isinstance(body, dict):
            for k, v in body.items():
                entries[(sec, k)] = (v, None)
        else:
            entries[(default, sec)] = (body, None)
    return entries


def parse_text(text: str, subcommand: str, *, path: str | None = None, json_format: bool = False,
               base_dir: Path | None = None) -> ParsedConfig:
    if subcommand not in SCHEMAS:
        raise ConfigError(f"unknown subcommand {subcommand!r}")
    schema = SCHEMAS[subcommand]
    headers: dict[str, int] = {}
    if json_format:
        entries = _read_json(text, path, subcommand)
    else:
        entries, headers = _read_text(text, path, DEFAULT_SECTION[subcommand])
    for sec, line in headers.items():
        if sec not in schema:
            raise ConfigError(f"unknown section [{sec}]", line=line, path=path)
    lines: dict[str, int] = {f"[{s}]": l for s, l in headers.items()}
    values: dict[str, dict[str, Any]] = {s: {} for s in schema}
    for (sec, key), (raw, line) in entries.items():
        if sec not in schema:
            raise ConfigError(f"unknown section {sec!r} (key {sec}.{key})", line=line, path=path)
        if key not in schema[sec]:
            raise ConfigError(f"unknown key {sec}.{key}", line=line, path=path)
        values[sec][key] = _convert(raw, schema[sec][key], f"{sec}.{key}", line, path)
        if line is not None:
            lines[f"{sec}.{key}"] = line
    last_line = max([*lines.values(), 0]) or None
    for sec, keys in schema.items():
        for key, spec in keys.items():
            if key in values[sec]:
                continue
            if spec.default is REQUIRED:
                raise ConfigError(f"missing required key {sec}.{key}", line=headers.get(sec, last_line), path=path)
            values[sec][key] = list(spec.default) if isinstance(spec.default, list) else spec.default
    base = base_dir if base_dir is not None else (Path(path).parent if path else Path.cwd())
    return ParsedConfig(subcommand, values, lines, path, base)


def load_config(path: str | Path, subcommand: str) -> ParsedConfig:
    p = Path(path)
    try:
        text = p.read_text(encoding="utf-8")
    except OSError as exc:
        raise ConfigError(f"cannot read configuration: {exc}", path=str(p)) from None
    return parse_text(text, subcommand, path=str(p), json_format=p.suffix.lower() == ".json")


# ---------------------------------------------------------------------------
# typed job descriptions


def _guard(parsed: ParsedConfig, section: str, build: Callable[[], Any]) -> Any:
    try:
        return build()
    except ConfigError as exc:
        if exc.line is not None:
            raise
        raise parsed.error(str(exc), section) from None


def market_config(parsed: ParsedConfig, seed_override: int | None = None) -> MarketConfig:
    v = parsed.values
    topo = _guard(parsed, "topology", lambda: TopologySpec(**v["topology"]))
    impact = _guard(parsed, "impact", lambda: ImpactFunction(kind=v["impact"]["kind"], lam=v["impact"]["lambda"]))
    noise = _guard(parsed, "noise", lambda: NoiseSpec(**v["noise"]))
    c = dict(v["coupling"])
    c["value"] = c.pop("constant")
    coupling = _guard(parsed, "coupling", lambda: CouplingSchedule(**c))
    fld = _guard(parsed, "field", lambda: FieldSchedule(**v["field"]))
    m = dict(v["market"])
    if seed_override is not None:
        m["seed"] = seed_override
    return _guard(parsed, "market", lambda: MarketConfig(
        topology=topo, impact=impact, noise=noise, coupling=coupling, field=fld, **m))


@dataclass(frozen=True)
class SweepJob:
    market: MarketConfig
    lambda_grid: tuple[float, ...]
    burn_in: int
    measure_steps: int


@dataclass(frozen=True)
class NivolJob:
    market: MarketConfig
    field_amplitude: float
    field_period: float
    field_kind: str
    n_seeds: int
    burn_in: int | None


@dataclass(frozen=True)
class StylizedJob:
    input: Path
    column: str
    mode: str
    max_lag: int
    hill_fraction: float


@dataclass(frozen=True)
class ChoiceJob:
    utilities: tuple[float, ...]
    gamma: float
    n_samples: int
    seed: int


@dataclass(frozen=True)
class QdtJob:
    prospects: ProspectSet
    counts: tuple[int, ...] | None


def build_job(parsed: ParsedConfig, seed_override: int | None = None) -> Any:
    """Turn a parsed file into the typed configuration of its subcommand."""
    sub = parsed.subcommand
    v = parsed.values
    if sub == "simulate":
        return market_config(parsed, seed_override)
    if sub == "sweep":
        mc = market_config(parsed, seed_override)
        grid = v["sweep"]["lambda_grid"]
        if not grid:
            raise parsed.error("sweep.lambda_grid is empty", "sweep", "lambda_grid")
        if any(b < a for a, b in zip(grid, grid[1:])):
            raise parsed.error("sweep.lambda_grid must be sorted ascending", "sweep", "lambda_grid")
        if any(x < 0 for x in grid):
            raise parsed.error("sweep.lambda_grid values must be >= 0", "sweep", "lambda_grid")
        burn = v["sweep"]["burn_in"]
        burn = int(0.2 * mc.horizon) if burn is None else burn
        measure = v["sweep"]["measure_steps"]
        measure = mc.horizon - burn if measure is None else measure
        if burn + measure > mc.horizon:
            raise parsed.error(
                f"sweep.burn_in + sweep.measure_steps = {burn + measure} exceeds market.horizon = {mc.horizon}",
                "sweep", "measure_steps")
        if measure < 2:
            raise parsed.error("sweep needs at least 2 measured steps", "sweep", "measure_steps")
        return SweepJob(mc, tuple(grid), burn, measure)
    if sub == "nivol":
        mc = market_config(parsed, seed_override)
        n = v["nivol"]
        if n["field_kind"] not in ("square_wave", "sinusoid"):
            raise parsed.error("nivol.field_kind must be square_wave or sinusoid", "nivol", "field_kind")
        if n["burn_in"] is not None and n["burn_in"] >= mc.horizon - 1:
            raise parsed.error("nivol.burn_in must leave at least 2 measured steps", "nivol", "burn_in")
        return NivolJob(mc, n["field_amplitude"], n["field_period"], n["field_kind"], n["n_seeds"], n["burn_in"])
    if sub == "stylized":
        s = v["stylized"]
        if s["mode"] not in ("log", "simple"):
            raise parsed.error("stylized.mode must be log or simple", "stylized", "mode")
        path = Path(s["input"])
        if not path.is_absolute():
            path = parsed.base_dir / path
        return StylizedJob(path, s["column"], s["mode"], s["max_lag"], s["hill_fraction"])
    if sub == "choice":
        c = v["choice"]
        if len(c["utilities"]) < 2:
            raise parsed.error("choice.utilities needs at least 2 values", "choice", "utilities")
        seed = c["seed"] if seed_override is None else seed_override
        return ChoiceJob(tuple(c["utilities"]), c["gamma"], c["n_samples"], seed)
    if sub == "qdt":
        q = v["qdt"]
        if (q["q"] is None) == (q["ranking"] is None):
            raise parsed.error("give exactly one of qdt.q or qdt.ranking", "qdt")
        if len(q["labels"]) != len(q["utilities"]):
            raise parsed.error("qdt.labels and qdt.utilities differ in length", "qdt", "utilities")
        # constraint violations inside build are model errors (exit 2), not config errors
        prospects = ProspectSet.build(q["labels"], q["utilities"], q=q["q"], ranking=q["ranking"])
        counts = tuple(q["counts"]) if q["counts"] is not None else None
        if counts is not None and len(counts) != len(q["labels"]):
            raise parsed.error("qdt.counts must have one entry per prospect", "qdt", "counts")
        return QdtJob(prospects, counts)
    raise ConfigError(f"unknown subcommand {sub!r}")


def parse_config(path: str | Path, subcommand: str, seed_override: int | None = None) -> Any:
    """Read, validate and type the configuration of ``subcommand``."""
    return build_job(load_config(path, subcommand), seed_override)
