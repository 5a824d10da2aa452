"""Run configuration: strict JSON parsing with line/field diagnostics, and
serialization that re-parses to an identical object.

Complex values are written as [re, im]; plain numbers are accepted on input.
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass, field

from .dynlab import ScanGrid
from .symbolcore import ExpPoly, OperatorParams

DEFAULT_N_DIM = 128
DEFAULT_N_MAX = 50
DEFAULT_SEED = 20240001

FORMATS = ("json", "csv")
SCAN_KINDS = ("ritt", "kreiss")


class ConfigError(ValueError):
    """Malformed config; the message names the line or the offending field."""


class InvalidParamsError(ValueError):
    """Well-formed config whose operator parameters are not admissible (u0 = 0, p < 1, ...)."""


@dataclass(frozen=True)
class ProbeSpec:
    f: ExpPoly | None = None
    targets: tuple | None = None
    n_targets: int = 3


@dataclass(frozen=True)
class RunConfig:
    params: OperatorParams
    n_dim: int = DEFAULT_N_DIM
    n_max: int = DEFAULT_N_MAX
    seed: int = DEFAULT_SEED
    grid: ScanGrid | None = None
    output: str | None = None
    format: str | None = None
    scan_kind: str = "ritt"
    probe: ProbeSpec = field(default_factory=ProbeSpec)

    def to_dict(self):
        P = self.params
        d = {
            "params": {k: _cx_out(getattr(P, k)) for k in ("a", "b", "c", "u0")} | {"p": P.p},
            "n_dim": self.n_dim,
            "n_max": self.n_max,
            "seed": self.seed,
            "scan_kind": self.scan_kind,
        }
        if self.grid is not None:
            d["grid"] = {"rho_values": list(self.grid.rho_values), "theta_values": list(self.grid.theta_values)}
        if self.output is not None:
            d["output"] = self.output
        if self.format is not None:
            d["format"] = self.format
        probe = {}
        if self.probe.f is not None:
            probe["f"] = _expoly_out(self.probe.f)
        if self.probe.targets is not None:
            probe["targets"] = [_expoly_out(g) for g in self.probe.targets]
        if self.probe.n_targets != 3:
            probe["n_targets"] = self.probe.n_targets
        if probe:
            d["probe"] = probe
        return d

    def to_json(self):
        return json.dumps(self.to_dict(), indent=2) + "\n"


def _cx_out(z):
    return [z.real, z.imag]


def _expoly_out(f):
    return {"alpha": _cx_out(f.alpha), "coeffs": [_cx_out(q) for q in f.coeffs]}


def _number(x, where):
    if isinstance(x, bool) or not isinstance(x, (int, float)):
        raise ConfigError(f"field '{where}': expected a number, got {json.dumps(x)}")
    if not math.isfinite(x):
        raise ConfigError(f"field '{where}': must be finite")
    return float(x)


def _complex(x, where):
    if isinstance(x, list):
        if len(x) != 2:
            raise ConfigError(f"field '{where}': complex values are [re, im], got {len(x)} elements")
        return complex(_number(x[0], f"{where}[0]"), _number(x[1], f"{where}[1]"))
    return complex(_number(x, where))


def _int(x, where, lo=None):
    if isinstance(x, bool) or not isinstance(x, int):
        raise ConfigError(f"field '{where}': expected an integer, got {json.dumps(x)}")
    if lo is not None and x < lo:
        raise ConfigError(f"field '{where}': must be >= {lo}, got {x}")
    return x


def _obj(x, where, allowed):
    if not isinstance(x, dict):
        raise ConfigError(f"field '{where}': expected an object")
    extra = sorted(set(x) - set(allowed))
    if extra:
        raise ConfigError(f"field '{where}.{extra[0]}': unknown key (allowed: {', '.join(allowed)})")
    return x


def _expoly(x, where):
    x = _obj(x, where, ("alpha", "coeffs"))
    alpha = _complex(x.get("alpha", 0), f"{where}.alpha")
    coeffs = x.get("coeffs", [1])
    if not isinstance(coeffs, list) or not coeffs:
        raise ConfigError(f"field '{where}.coeffs': expected a nonempty list")
    return ExpPoly(alpha, tuple(_complex(q, f"{where}.coeffs[{i}]") for i, q in enumerate(coeffs)))


def _params(x):
    x = _obj(x, "params", ("a", "b", "c", "u0", "p"))
    if "a" not in x:
        raise ConfigError("field 'params.a': required")
    vals = {k: _complex(x[k], f"params.{k}") for k in ("a", "b", "c", "u0") if k in x}
    if "p" in x:
        vals["p"] = _number(x["p"], "params.p")
    try:
        return OperatorParams(**vals)
    except ValueError as e:
        raise InvalidParamsError(str(e)) from None


def _grid(x):
    x = _obj(x, "grid", ("rho_values", "theta_values"))
    out = {}
    for k in ("rho_values", "theta_values"):
        v = x.get(k)
        if not isinstance(v, list) or not v:
            raise ConfigError(f"field 'grid.{k}': expected a nonempty list of numbers")
        out[k] = [_number(t, f"grid.{k}[{i}]") for i, t in enumerate(v)]
    try:
        return ScanGrid(tuple(out["rho_values"]), tuple(out["theta_values"]))
    except ValueError as e:
        raise ConfigError(f"field 'grid': {e}") from None


TOP_KEYS = ("params", "n_dim", "n_max", "seed", "grid", "output", "format", "scan_kind", "probe")


def parse_config(text: str) -> RunConfig:
    try:
        raw = json.loads(text)
    except json.JSONDecodeError as e:
        raise ConfigError(f"line {e.lineno}, column {e.colno}: {e.msg}") from None
    raw = _obj(raw, "<root>", TOP_KEYS)
    if "params" not in raw:
        raise ConfigError("field 'params': required")
    kw = {}
    if "n_dim" in raw:
        kw["n_dim"] = _int(raw["n_dim"], "n_dim", 2)
    if "n_max" in raw:
        kw["n_max"] = _int(raw["n_max"], "n_max", 1)
    if "seed" in raw:
        kw["seed"] = _int(raw["seed"], "seed", 0)
    if "grid" in raw:
        kw["grid"] = _grid(raw["grid"])
    if "output" in raw:
        if not isinstance(raw["output"], str):
            raise ConfigError("field 'output': expected a path string")
        kw["output"] = raw["output"]
    if "format" in raw:
        if raw["format"] not in FORMATS:
            raise ConfigError(f"field 'format': expected one of {FORMATS}, got {json.dumps(raw['format'])}")
        kw["format"] = raw["format"]
    if "scan_kind" in raw:
        if raw["scan_kind"] not in SCAN_KINDS:
            raise ConfigError(f"field 'scan_kind': expected one of {SCAN_KINDS}")
        kw["scan_kind"] = raw["scan_kind"]
    if "probe" in raw:
        pr = _obj(raw["probe"], "probe", ("f", "targets", "n_targets"))
        f = _expoly(pr["f"], "probe.f") if "f" in pr else None
        targets = None
        if "targets" in pr:
            if not isinstance(pr["targets"], list) or not pr["targets"]:
                raise ConfigError("field 'probe.targets': expected a nonempty list")
            targets = tuple(_expoly(g, f"probe.targets[{i}]") for i, g in enumerate(pr["targets"]))
        n_targets = _int(pr.get("n_targets", 3), "probe.n_targets", 1)
        kw["probe"] = ProbeSpec(f, targets, n_targets)
    # params last: a config that is both malformed and inadmissible reports the parse error
    return RunConfig(params=_params(raw["params"]), **kw)
