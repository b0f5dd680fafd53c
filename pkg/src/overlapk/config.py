"""Study configuration documents (JSON) and distribution specifiers.

A configuration looks like::

    {
      "cases": [
        {"id": "1",
         "distributions": [{"family": "normal", "location": 0, "variance": 1}, ...],
         "support": "auto",
         "exact": 0.86}
      ],
      "sizes": [[50, 50, 50]],
      "replicates": 1000,
      "seed": 42,
      "estimators": [[1], [1, 2, 3]]
    }

``support`` is ``"auto"`` (each family's natural support), ``"real"``,
``"nonneg"`` or a per-distribution list of those.  ``exact`` is an optional
reference value compared against quadrature.  Unknown keys are rejected.
"""

from __future__ import annotations

import json
from importlib import resources
from pathlib import Path
from typing import Any

import jsonschema

from .distributions import DistributionSpec, Support
from .errors import ConfigError, OverlapError
from .simulation import StudyCase, StudyConfig

__all__ = ["CONFIG_SCHEMA", "load_config", "parse_config", "paper_study_config", "parse_dist", "dist_from_dict"]

_NUMBER = {"type": "number"}
_SUPPORT = {"enum": ["real", "nonneg"]}

_DIST_SCHEMA = {
    "oneOf": [
        {
            "type": "object",
            "properties": {"family": {"const": "normal"}, "location": _NUMBER, "variance": _NUMBER},
            "required": ["family", "location", "variance"],
            "additionalProperties": False,
        },
        {
            "type": "object",
            "properties": {"family": {"const": "normal"}, "location": _NUMBER, "sd": _NUMBER},
            "required": ["family", "location", "sd"],
            "additionalProperties": False,
        },
        {
            "type": "object",
            "properties": {"family": {"const": "extreme"}, "location": _NUMBER, "scale": _NUMBER},
            "required": ["family", "location", "scale"],
            "additionalProperties": False,
        },
        {
            "type": "object",
            "properties": {"family": {"const": "weibull"}, "shape": _NUMBER, "scale": _NUMBER},
            "required": ["family", "shape", "scale"],
            "additionalProperties": False,
        },
    ]
}

CONFIG_SCHEMA: dict[str, Any] = {
    "$schema": "https://json-schema.org/draft/2020-12/schema",
    "type": "object",
    "properties": {
        "cases": {
            "type": "array",
            "minItems": 1,
            "items": {
                "type": "object",
                "properties": {
                    "id": {"type": ["string", "integer"]},
                    "distributions": {"type": "array", "minItems": 2, "items": _DIST_SCHEMA},
                    "support": {
                        "oneOf": [
                            {"enum": ["auto", "real", "nonneg"]},
                            {"type": "array", "items": _SUPPORT},
                        ]
                    },
                    "exact": {"type": "number", "minimum": 0, "maximum": 1},
                },
                "required": ["id", "distributions"],
                "additionalProperties": False,
            },
        },
        "sizes": {
            "type": "array",
            "minItems": 1,
            "items": {"type": "array", "minItems": 2, "items": {"type": "integer", "minimum": 2}},
        },
        "replicates": {"type": "integer", "minimum": 1},
        "seed": {"type": "integer", "minimum": 0, "maximum": 2**64 - 1},
        "estimators": {
            "type": "array",
            "minItems": 1,
            "items": {"type": "array", "minItems": 1, "items": {"type": "integer", "minimum": 1}},
        },
    },
    "required": ["cases", "sizes", "replicates", "seed", "estimators"],
    "additionalProperties": False,
}

_VALIDATOR = jsonschema.Draft202012Validator(CONFIG_SCHEMA)


def _pointer(path) -> str:
    return "/" + "/".join(str(p) for p in path) if path else "/"


def dist_from_dict(d: dict[str, Any]) -> DistributionSpec:
    family = d["family"]
    if family == "normal":
        if "sd" in d:
            return DistributionSpec.normal(d["location"], sd=d["sd"])
        return DistributionSpec.normal(d["location"], d["variance"])
    if family == "extreme":
        return DistributionSpec.extreme_value(d["location"], d["scale"])
    if family == "weibull":
        return DistributionSpec.weibull(d["shape"], d["scale"])
    raise ConfigError(f"unknown family {family!r}")


def dist_to_dict(spec: DistributionSpec) -> dict[str, Any]:
    if spec.family.value == "normal":
        return {"family": "normal", "location": spec.p1, "variance": spec.p2}
    if spec.family.value == "extreme":
        return {"family": "extreme", "location": spec.p1, "scale": spec.p2}
    return {"family": "weibull", "shape": spec.p1, "scale": spec.p2}


def parse_dist(text: str) -> DistributionSpec:
    """Parse a command-line specifier such as ``weibull:shape=1.2,scale=5``."""
    family, sep, rest = text.partition(":")
    if not sep:
        raise ConfigError(f"expected family:key=value,..., got {text!r}")
    d: dict[str, Any] = {"family": family.strip().lower()}
    for item in filter(None, (p.strip() for p in rest.split(","))):
        key, eq, val = item.partition("=")
        if not eq:
            raise ConfigError(f"expected key=value in {text!r}, got {item!r}")
        try:
            d[key.strip()] = float(val)
        except ValueError:
            raise ConfigError(f"parameter {key.strip()!r} in {text!r} is not a number") from None
    errors = sorted(jsonschema.Draft202012Validator(_DIST_SCHEMA).iter_errors(d), key=str)
    if errors:
        raise ConfigError(
            f"bad distribution {text!r}: use normal:location=,variance= (or sd=), "
            "extreme:location=,scale=, or weibull:shape=,scale="
        )
    try:
        return dist_from_dict(d)
    except OverlapError as exc:
        raise ConfigError(f"bad distribution {text!r}: {exc}") from None


def parse_config(doc: Any) -> StudyConfig:
    """Validate a decoded JSON document and build a :class:`StudyConfig`."""
    errors = sorted(_VALIDATOR.iter_errors(doc), key=lambda e: list(e.absolute_path))
    if errors:
        # report the most specific failure
        err = max(errors, key=lambda e: len(e.absolute_path))
        best = jsonschema.exceptions.best_match([err]) or err
        raise ConfigError(best.message, _pointer(best.absolute_path))

    cases = []
    for ci, c in enumerate(doc["cases"]):
        base = f"/cases/{ci}"
        specs = []
        for di, d in enumerate(c["distributions"]):
            try:
                specs.append(dist_from_dict(d))
            except OverlapError as exc:
                raise ConfigError(str(exc), f"{base}/distributions/{di}") from None
        support = c.get("support", "auto")
        if support == "auto":
            supports = None
        elif isinstance(support, str):
            supports = tuple(Support(support) for _ in specs)
        else:
            supports = tuple(Support(s) for s in support)
        try:
            cases.append(StudyCase(str(c["id"]), tuple(specs), c.get("exact"), supports))
        except OverlapError as exc:
            raise ConfigError(str(exc), base) from None
    try:
        return StudyConfig(
            cases=tuple(cases),
            size_tuples=tuple(tuple(s) for s in doc["sizes"]),
            replicates=doc["replicates"],
            seed=doc["seed"],
            estimators=tuple(tuple(e) for e in doc["estimators"]),
        )
    except OverlapError as exc:
        raise ConfigError(str(exc), "/") from None


def load_config(path: str | Path) -> StudyConfig:
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc.strerror}") from None
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path} is not valid JSON: {exc}") from None
    return parse_config(doc)


def paper_study_document() -> dict[str, Any]:
    """The bundled twelve-case design (three populations per case)."""
    text = resources.files("overlapk").joinpath("data/paper_study.json").read_text("utf-8")
    return json.loads(text)


def paper_study_config() -> StudyConfig:
    return parse_config(paper_study_document())
