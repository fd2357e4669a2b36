"""Strict INI scenario configuration.

Sections and keys::

    [gas]       gamma, K, c_v
    [grid]      x_min, x_max, n, boundary
    [init]      kind = profiles | table | stationary | critical, plus
                profiles:   tau, u, S (profile specs)
                table:      file, time
                stationary: S, K_tauS
                critical:   slope, offset, K_tauS, entropy_scale
    [solver]    T, cfl, snapshot_cadence, blowup_factor, dt_min, interpolation
    [analysis]  mode, alpha, beta, rel_tol, tolerance, pressure
    [output]    directory, formats
    [sweep]     <section>.<key> = v1, v2, ...

A profile spec is a number (constant) or ``name k=v ...`` with ``name`` one
of the entries in :data:`eulerlab.fields.PROFILES`.
"""

from __future__ import annotations

import configparser
import copy
import itertools
import math
import re
from dataclasses import dataclass, field

from .fields import CONSTANT, PERIODIC, PROFILES
from .evolution import LINEAR, MONOTONE_CUBIC

INIT_KINDS = ("profiles", "table", "stationary", "critical")
MODES = ("auto", "isentropic", "global", "local")
FORMATS = ("snapshots", "monitors", "paths", "certificate", "report")


class ConfigError(ValueError):
    """Invalid configuration; the message names the key and line when known."""


def _num(lo=None, hi=None, lo_open=False, hi_open=False, integer=False):
    def conv(text):
        v = int(text) if integer else float(text)
        if not integer and not math.isfinite(v):
            raise ValueError("must be finite")
        if lo is not None and (v <= lo if lo_open else v < lo):
            raise ValueError(f"must be {'>' if lo_open else '>='} {lo}")
        if hi is not None and (v >= hi if hi_open else v > hi):
            raise ValueError(f"must be {'<' if hi_open else '<='} {hi}")
        return v

    return conv


def _choice(*options):
    def conv(text):
        if text not in options:
            raise ValueError(f"must be one of {', '.join(options)}")
        return text

    return conv


def _text(text):
    return text


def _bool(text):
    low = text.lower()
    if low in ("1", "true", "yes", "on"):
        return True
    if low in ("0", "false", "no", "off"):
        return False
    raise ValueError("must be a boolean")


def _profile(text):
    parse_profile(text)
    return text


def _formats(text):
    items = [s.strip() for s in text.split(",") if s.strip()]
    for it in items:
        if it not in FORMATS:
            raise ValueError(f"unknown format {it!r} (known: {', '.join(FORMATS)})")
    return tuple(items)


def _pressure(text):
    parse_pressure(text)
    return text


# key -> (converter, default); default ... marks a required key
REQUIRED = ...
SCHEMA = {
    "gas": {
        "gamma": (_num(1.0, lo_open=True), REQUIRED),
        "K": (_num(0.0, lo_open=True), 1.0),
        "c_v": (_num(0.0, lo_open=True), 1.0),
    },
    "grid": {
        "x_min": (_num(), REQUIRED),
        "x_max": (_num(), REQUIRED),
        "n": (_num(16, integer=True), REQUIRED),
        "boundary": (_choice(PERIODIC, CONSTANT), PERIODIC),
    },
    "init": {
        "kind": (_choice(*INIT_KINDS), REQUIRED),
        "tau": (_profile, None),
        "u": (_profile, None),
        "S": (_profile, None),
        "file": (_text, None),
        "time": (_num(), None),
        "K_tauS": (_num(0.0, lo_open=True), 1.0),
        "slope": (_num(), None),
        "offset": (_num(), None),
        "entropy_scale": (_num(0.0, lo_open=True), 1.0),
    },
    "solver": {
        "T": (_num(0.0, lo_open=True), REQUIRED),
        "cfl": (_num(0.0, 1.0, lo_open=True), 0.5),
        "snapshot_cadence": (_num(0, integer=True), 0),
        "blowup_factor": (_num(10.0, lo_open=True), 1e4),
        "dt_min": (_num(0.0, lo_open=True), None),
        "interpolation": (_choice(MONOTONE_CUBIC, LINEAR), MONOTONE_CUBIC),
    },
    "analysis": {
        "mode": (_choice(*MODES), "auto"),
        "alpha": (_num(), None),
        "beta": (_num(), None),
        "rel_tol": (_num(0.0), 0.02),
        "tolerance": (_num(0.0), 1e-6),
        "pressure": (_pressure, None),
    },
    "output": {
        "directory": (_text, "out"),
        "formats": (_formats, FORMATS),
    },
}


@dataclass
class ScenarioConfig:
    """Validated configuration; ``sections`` maps section -> key -> value."""

    sections: dict
    sweep: dict = field(default_factory=dict)
    source: str = "<string>"

    def __getitem__(self, section) -> dict:
        return self.sections[section]

    def has(self, section) -> bool:
        return section in self.sections

    def require(self, *sections):
        for s in sections:
            if s not in self.sections:
                raise ConfigError(f"{self.source}: missing section [{s}]")

    def with_values(self, assignments: dict) -> "ScenarioConfig":
        """Copy with ``{"section.key": value}`` overrides applied and validated."""
        secs = copy.deepcopy(self.sections)
        for dotted, raw in assignments.items():
            sec, key = dotted.split(".", 1)
            conv, default = SCHEMA[sec][key]
            try:
                secs.setdefault(sec, _defaults(sec))[key] = conv(str(raw))
            except ValueError as exc:
                raise ConfigError(f"sweep value for {dotted}: {exc}") from None
        out = ScenarioConfig(secs, {}, self.source)
        _cross_check(out, {})
        return out

    def sweep_points(self):
        """Cartesian product of the sweep lists, as ordered override dicts."""
        if not self.sweep:
            return [{}]
        keys = list(self.sweep)
        return [dict(zip(keys, combo)) for combo in itertools.product(*(self.sweep[k] for k in keys))]


def _defaults(section):
    return {k: d for k, (_, d) in SCHEMA[section].items() if d is not REQUIRED}


_SECTION_RE = re.compile(r"^\s*\[([^\]]+)\]")
_KEY_RE = re.compile(r"^\s*([^=:#;\s][^=:]*?)\s*[=:]")


def _line_map(text):
    where = {}
    sec = None
    for no, line in enumerate(text.splitlines(), 1):
        m = _SECTION_RE.match(line)
        if m:
            sec = m.group(1).strip()
            where.setdefault((sec, None), no)
            continue
        m = _KEY_RE.match(line)
        if m and sec is not None:
            where.setdefault((sec, m.group(1).strip()), no)
    return where


def parse_config_text(text: str, source: str = "<string>") -> ScenarioConfig:
    cp = configparser.ConfigParser(interpolation=None, inline_comment_prefixes=("#", ";"))
    cp.optionxform = str  # keys are case-sensitive (K vs k)
    try:
        cp.read_string(text, source=source)
    except configparser.Error as exc:
        raise ConfigError(f"{source}: {exc}") from None
    lines = _line_map(text)

    def loc(sec, key=None):
        no = lines.get((sec, key))
        return f"{source}:{no}" if no else source

    sections = {}
    sweep = {}
    for sec in cp.sections():
        if sec == "sweep":
            for key, raw in cp.items(sec):
                if "." not in key:
                    raise ConfigError(f"{loc(sec, key)}: sweep key {key!r} must be <section>.<key>")
                s2, k2 = key.split(".", 1)
                if s2 not in SCHEMA or k2 not in SCHEMA[s2]:
                    raise ConfigError(f"{loc(sec, key)}: unknown sweep parameter {key!r}")
                conv = SCHEMA[s2][k2][0]
                vals = [v.strip() for v in raw.split(",") if v.strip()]
                if not vals:
                    raise ConfigError(f"{loc(sec, key)}: sweep.{key} has no values")
                for v in vals:
                    try:
                        conv(v)
                    except ValueError as exc:
                        raise ConfigError(f"{loc(sec, key)}: {key} value {v!r}: {exc}") from None
                sweep[key] = vals
            continue
        if sec not in SCHEMA:
            raise ConfigError(f"{loc(sec)}: unknown section [{sec}]")
        schema = SCHEMA[sec]
        vals = _defaults(sec)
        for key, raw in cp.items(sec):
            if key not in schema:
                raise ConfigError(f"{loc(sec, key)}: unknown key {sec}.{key}")
            conv = schema[key][0]
            try:
                vals[key] = conv(raw.strip())
            except ValueError as exc:
                raise ConfigError(f"{loc(sec, key)}: {sec}.{key} = {raw.strip()!r}: {exc}") from None
        for key, (_, default) in schema.items():
            if default is REQUIRED and key not in vals:
                raise ConfigError(f"{loc(sec)}: missing key {sec}.{key}")
        sections[sec] = vals
    if "gas" not in sections:
        raise ConfigError(f"{source}: missing section [gas]")
    cfg = ScenarioConfig(sections, sweep, source)
    _cross_check(cfg, lines, loc)
    return cfg


def _cross_check(cfg, lines, loc=None):
    loc = loc or (lambda sec, key=None: cfg.source)
    s = cfg.sections
    if "grid" in s and not s["grid"]["x_min"] < s["grid"]["x_max"]:
        raise ConfigError(f"{loc('grid', 'x_max')}: grid.x_max must exceed grid.x_min")
    if "init" in s:
        init = s["init"]
        kind = init["kind"]
        need = {
            "profiles": ("tau", "u"),
            "table": ("file",),
            "stationary": ("S",),
            "critical": ("slope", "offset"),
        }[kind]
        for key in need:
            if init.get(key) is None:
                raise ConfigError(f"{loc('init')}: init.kind = {kind} needs init.{key}")
    if "analysis" in s:
        a = s["analysis"]
        if (a["alpha"] is None) != (a["beta"] is None):
            raise ConfigError(f"{loc('analysis')}: analysis.alpha and analysis.beta go together")
        if a["alpha"] is not None and not a["alpha"] < a["beta"]:
            raise ConfigError(f"{loc('analysis', 'beta')}: analysis.beta must exceed analysis.alpha")
        if a["mode"] == "local" and a["alpha"] is None:
            raise ConfigError(f"{loc('analysis', 'mode')}: analysis.mode = local needs alpha and beta")


def parse_config(path) -> ScenarioConfig:
    try:
        with open(path, encoding="utf-8") as fh:
            text = fh.read()
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc.strerror}") from None
    return parse_config_text(text, str(path))


def parse_profile(spec: str):
    """Turn ``"1.5"`` or ``"sine amplitude=-1 wavenumber=2"`` into a profile callable."""
    spec = spec.strip()
    try:
        return PROFILES["constant"](float(spec))
    except ValueError:
        pass
    name, *args = spec.split()
    if name not in PROFILES:
        raise ValueError(f"unknown profile {name!r} (known: {', '.join(PROFILES)})")
    kw = {}
    for a in args:
        if "=" not in a:
            raise ValueError(f"profile argument {a!r} is not key=value")
        k, v = a.split("=", 1)
        kw[k] = float(v)
    try:
        return PROFILES[name](**kw)
    except TypeError:
        raise ValueError(f"bad arguments for profile {name!r}: {', '.join(kw)}") from None


def parse_pressure(spec: str):
    """``"coef:exponent, ..."`` for ``p = sum coef * tau**(-exponent)``."""
    terms = []
    for item in spec.split(","):
        item = item.strip()
        if not item:
            continue
        try:
            c, e = (float(v) for v in item.split(":"))
        except ValueError:
            raise ValueError(f"pressure term {item!r} is not coef:exponent") from None
        if not (c > 0 and e > 0):
            raise ValueError(f"pressure term {item!r} needs positive coefficient and exponent")
        terms.append((c, e))
    if not terms:
        raise ValueError("pressure needs at least one term")
    return terms
