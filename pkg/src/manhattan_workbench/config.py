"""JSON run configuration: schema, parsing, canonical form and hashing.

A pair is given either by fixture name or explicitly::

    {"pair": {"fixture": "F1F3"}}
    {"pair": {"rho1": {"generators": [{"label": "A", "kind": "hyperbolic",
                                        "matrix": [a, b, c, d]}, ...],
                       "arcs": {"A": [start, end], "A^-1": [...], ...},
                       "basepoint": [0.0, 1.0]},
              "rho2": {...}}}

Matrices are row-major; arc endpoints are disk angles in radians, running
counterclockwise from start to end.  Missing arcs are built from isometric
circles.
"""
from __future__ import annotations

import copy
import hashlib
import json
import math
from dataclasses import dataclass, field
from pathlib import Path

import jsonschema

from . import fixtures
from .coding import TruncationParams
from .errors import ConfigError, UnknownLabel
from .moebius import TWO_PI, BoundaryArc, Isometry
from .schottky import (KINDS, GeneratorSpec, GroupWord, RepPair, SchottkyRep, arc_key_name, auto_arcs,
                       parse_arc_key)

SCHEMA_VERSION = 1

_NUM = {"type": "number"}
_REP = {
    "type": "object",
    "required": ["generators"],
    "additionalProperties": False,
    "properties": {
        "generators": {
            "type": "array", "minItems": 2,
            "items": {
                "type": "object",
                "required": ["label", "kind", "matrix"],
                "additionalProperties": False,
                "properties": {
                    "label": {"type": "string", "pattern": r"^[A-Za-z][A-Za-z0-9_]*$"},
                    "kind": {"enum": list(KINDS)},
                    "matrix": {"type": "array", "items": _NUM, "minItems": 4, "maxItems": 4},
                },
            },
        },
        "arcs": {"type": "object",
                 "additionalProperties": {"type": "array", "items": _NUM, "minItems": 2, "maxItems": 2}},
        "basepoint": {"type": "array", "items": _NUM, "minItems": 2, "maxItems": 2},
    },
}

SCHEMA = {
    "$schema": "https://json-schema.org/draft/2020-12/schema",
    "type": "object",
    "required": ["pair"],
    "additionalProperties": False,
    "properties": {
        "version": {"const": SCHEMA_VERSION},
        "pair": {
            "oneOf": [
                {"type": "object", "required": ["fixture"], "additionalProperties": False,
                 "properties": {"fixture": {"enum": sorted(fixtures.PAIRS)}}},
                {"type": "object", "required": ["rho1", "rho2"], "additionalProperties": False,
                 "properties": {"rho1": _REP, "rho2": _REP}},
            ],
        },
        "words": {"type": "array",
                  "items": {"type": "array",
                            "items": {"type": "array", "prefixItems": [{"type": "string"}, {"type": "integer"}],
                                      "minItems": 2, "maxItems": 2}}},
        "truncation": {"type": "object", "additionalProperties": False,
                       "properties": {"n_max": {"type": "integer", "minimum": 2},
                                      "max_power": {"type": "integer", "minimum": 1}}},
        "solver": {"type": "object", "additionalProperties": False,
                   "properties": {"tol_root": {"type": "number", "exclusiveMinimum": 0},
                                  "rays": {"type": "integer", "minimum": 3},
                                  "line_tol": {"type": "number", "exclusiveMinimum": 0},
                                  "rigidity_tol": {"type": "number", "exclusiveMinimum": 0}}},
        "oracle": {"type": "object", "additionalProperties": False,
                   "properties": {"max_blocks": {"type": "integer", "minimum": 1},
                                  "max_power": {"type": "integer", "minimum": 1},
                                  "weights": {"type": "array",
                                              "items": {"type": "array", "items": _NUM,
                                                        "minItems": 2, "maxItems": 2}},
                                  "thurston_length": {"type": "number", "exclusiveMinimum": 0}}},
        "pressure": {"type": "object", "additionalProperties": False,
                     "properties": {"a": _NUM, "b": _NUM, "t": _NUM}},
        "output": {"type": "object", "additionalProperties": False,
                   "properties": {"dir": {"type": "string"}}},
        "seed": {"type": "integer", "minimum": 0},
    },
}

DEFAULTS = {
    "version": SCHEMA_VERSION,
    "words": [],
    "truncation": {"n_max": 64, "max_power": 8},
    "solver": {"tol_root": 1e-4, "rays": 33, "line_tol": 1e-3, "rigidity_tol": 1e-3},
    "oracle": {"max_blocks": 8, "max_power": 20,
               "weights": [[1.0, 0.0], [0.0, 1.0], [1.0, 1.0], [2.0, 1.0]],
               "thurston_length": 12.0},
    "pressure": {"a": 1.0, "b": 0.0, "t": 1.0},
    "output": {"dir": "out"},
    "seed": 0,
}


def _merge(base: dict, over: dict) -> dict:
    out = copy.deepcopy(base)
    for k, v in over.items():
        out[k] = _merge(out[k], v) if isinstance(v, dict) and isinstance(out.get(k), dict) else copy.deepcopy(v)
    return out


_INTEGER_KEYS = {"version", "n_max", "max_power", "rays", "max_blocks", "seed", "words"}


def _floatify(x, key=None):
    # 1 and 1.0 in float-valued slots must hash alike
    if key in _INTEGER_KEYS:
        return x
    if isinstance(x, dict):
        return {k: _floatify(v, k) for k, v in x.items()}
    if isinstance(x, list):
        return [_floatify(v) for v in x]
    if isinstance(x, int) and not isinstance(x, bool):
        return float(x)
    return x


def _rep_from_dict(d: dict) -> SchottkyRep:
    gens = []
    for g in d["generators"]:
        try:
            gens.append(GeneratorSpec(g["label"], g["kind"], Isometry(*g["matrix"])))
        except ValueError as exc:
            raise ConfigError(f"generator {g['label']!r}: {exc}") from exc
    bp = d.get("basepoint", [0.0, 1.0])
    if not bp[1] > 0:
        raise ConfigError("basepoint must lie in the upper half-plane")
    arcs = None
    if "arcs" in d:
        arcs = {}
        for name, (start, end) in d["arcs"].items():
            length = (end - start) % TWO_PI
            try:
                arcs[parse_arc_key(name, gens)] = BoundaryArc(start, length)
            except ValueError as exc:
                raise ConfigError(f"arc {name!r}: {exc}") from exc
    rep = SchottkyRep(tuple(gens), arcs, complex(bp[0], bp[1]))
    return rep if arcs is not None else auto_arcs(rep)


def rep_to_dict(rep: SchottkyRep) -> dict:
    out = {"generators": [{"label": g.label, "kind": g.kind, "matrix": [float(x) for x in g.matrix.matrix.ravel()]}
                          for g in rep.generators],
           "basepoint": [rep.basepoint.real, rep.basepoint.imag]}
    if rep.arcs is not None:
        out["arcs"] = {arc_key_name(k): [arc.start, arc.end] for k, arc in rep.arcs.items()}
    return out


@dataclass(frozen=True)
class RunConfig:
    """Validated configuration; ``raw`` is the canonical dict with defaults filled in."""

    raw: dict = field(repr=False)

    @classmethod
    def from_dict(cls, data: dict) -> "RunConfig":
        try:
            jsonschema.validate(data, SCHEMA)
        except jsonschema.ValidationError as exc:
            path = "/".join(str(p) for p in exc.absolute_path) or "<root>"
            raise ConfigError(f"{path}: {exc.message}") from exc
        cfg = cls(_floatify(_merge(DEFAULTS, data)))
        cfg.pair  # resolve labels and matrices now
        cfg.words
        cfg.params
        return cfg

    @classmethod
    def from_json(cls, text: str) -> "RunConfig":
        try:
            data = json.loads(text)
        except json.JSONDecodeError as exc:
            raise ConfigError(f"invalid JSON: {exc}") from exc
        if not isinstance(data, dict):
            raise ConfigError("config must be a JSON object")
        return cls.from_dict(data)

    @classmethod
    def load(cls, path) -> "RunConfig":
        try:
            text = Path(path).read_text()
        except OSError as exc:
            raise ConfigError(f"cannot read config {path}: {exc}") from exc
        return cls.from_json(text)

    @classmethod
    def for_pair(cls, pair: RepPair, **sections) -> "RunConfig":
        return cls.from_dict({"pair": {"rho1": rep_to_dict(pair.rho1), "rho2": rep_to_dict(pair.rho2)}, **sections})

    def to_dict(self) -> dict:
        return copy.deepcopy(self.raw)

    def to_json(self) -> str:
        return json.dumps(self.raw, sort_keys=True, indent=2) + "\n"

    def save(self, path) -> None:
        Path(path).write_text(self.to_json())

    def __eq__(self, other):
        return isinstance(other, RunConfig) and self.canonical() == other.canonical()

    def __hash__(self):
        return hash(self.canonical())

    def canonical(self) -> str:
        return json.dumps(self.raw, sort_keys=True, separators=(",", ":"), allow_nan=False)

    @property
    def config_hash(self) -> str:
        """Digest of the canonical form without the output location."""
        body = {k: v for k, v in self.raw.items() if k != "output"}
        text = json.dumps(body, sort_keys=True, separators=(",", ":"), allow_nan=False)
        return hashlib.sha256(text.encode()).hexdigest()[:16]

    def replace(self, **sections) -> "RunConfig":
        return RunConfig.from_dict(_merge(self.raw, sections))

    @property
    def pair(self) -> RepPair:
        spec = self.raw["pair"]
        if "fixture" in spec:
            return fixtures.pair(spec["fixture"])
        return RepPair(_rep_from_dict(spec["rho1"]), _rep_from_dict(spec["rho2"]))

    @property
    def words(self) -> list[GroupWord]:
        labels = set(self.pair.labels)
        out = []
        for w in self.raw["words"]:
            for label, _ in w:
                if label not in labels:
                    raise UnknownLabel(f"word {w} uses undefined label {label!r}")
            out.append(GroupWord.reduce([(l, m) for l, m in w]))
        return out

    @property
    def params(self) -> TruncationParams:
        t = self.raw["truncation"]
        try:
            return TruncationParams(n_max=t["n_max"], max_power=t["max_power"])
        except ValueError as exc:
            raise ConfigError(str(exc)) from exc

    @property
    def tol_root(self) -> float:
        return self.raw["solver"]["tol_root"]

    @property
    def rays(self) -> int:
        return self.raw["solver"]["rays"]

    @property
    def seed(self) -> int:
        return self.raw["seed"]

    @property
    def out_dir(self) -> Path:
        return Path(self.raw["output"]["dir"])

    def section(self, name: str) -> dict:
        return copy.deepcopy(self.raw[name])


def fixture_config(name: str, **sections) -> RunConfig:
    return RunConfig.from_dict({"pair": {"fixture": name}, **sections})


def finite(x: float):
    """JSON-safe float: infinities and NaN become strings."""
    if isinstance(x, float) and not math.isfinite(x):
        return "Infinite" if x > 0 else ("-Infinite" if x < 0 else "NaN")
    return x
