"""Scenario files: scripted heat sources in front of the sensor.

A scenario is a JSON object::

    {
      "ambient": 1.0,
      "horizon": 60,
      "objects": [
        {"id": "walker", "strength": 1.0,
         "waypoints": [{"t": 4.0, "x": 4.0, "y": 8.0}, {"t": 7.0, "x": 4.0, "y": -8.0}]}
      ]
    }

Coordinates are meters with the sensor at the origin looking along +x;
``t`` is simulation seconds.  ``ambient`` defaults to 1.0 and ``horizon``
(how long to simulate) to 60 seconds.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from pathlib import Path

from .pir import HeatSource, Scene

DEFAULT_HORIZON_S = 60.0


class ScenarioError(ValueError):
    pass


@dataclass(frozen=True)
class Scenario:
    scene: Scene
    horizon_s: float = DEFAULT_HORIZON_S


def _number(obj: dict, key: str, where: str, default=None) -> float:
    if key not in obj:
        if default is None:
            raise ScenarioError(f"{where}: '{key}' missing")
        return default
    value = obj[key]
    if isinstance(value, bool) or not isinstance(value, (int, float)) or not math.isfinite(value):
        raise ScenarioError(f"{where}: '{key}' must be a finite number")
    return float(value)


def parse_scenario(text: str) -> Scenario:
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ScenarioError(f"line {exc.lineno}: {exc.msg}") from None
    if not isinstance(doc, dict):
        raise ScenarioError("scenario must be a JSON object")
    unknown = set(doc) - {"ambient", "horizon", "objects"}
    if unknown:
        raise ScenarioError(f"unknown scenario keys: {', '.join(sorted(unknown))}")
    ambient = _number(doc, "ambient", "scenario", 1.0)
    horizon = _number(doc, "horizon", "scenario", DEFAULT_HORIZON_S)
    if horizon <= 0:
        raise ScenarioError("scenario: 'horizon' must be positive")
    objects = doc.get("objects", [])
    if not isinstance(objects, list):
        raise ScenarioError("scenario: 'objects' must be a list")
    sources = []
    for n, obj in enumerate(objects):
        where = f"objects[{n}]"
        if not isinstance(obj, dict):
            raise ScenarioError(f"{where}: must be an object")
        ident = str(obj.get("id", f"object{n}"))
        wps = obj.get("waypoints")
        if not isinstance(wps, list) or not wps:
            raise ScenarioError(f"{where}: 'waypoints' must be a non-empty list")
        points = []
        for k, wp in enumerate(wps):
            if not isinstance(wp, dict):
                raise ScenarioError(f"{where}.waypoints[{k}]: must be an object")
            w = f"{where}.waypoints[{k}]"
            points.append((_number(wp, "t", w), _number(wp, "x", w), _number(wp, "y", w)))
        try:
            sources.append(HeatSource(ident, _number(obj, "strength", where, 1.0), tuple(points)))
        except ValueError as exc:
            raise ScenarioError(str(exc)) from None
    try:
        scene = Scene(ambient, tuple(sources))
    except ValueError as exc:
        raise ScenarioError(str(exc)) from None
    return Scenario(scene, horizon)


def load_scenario(path: str | Path) -> Scenario:
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise ScenarioError(f"cannot read {path}: {exc.strerror}") from None
    return parse_scenario(text)


def render_scenario(scenario: Scenario) -> str:
    doc = {
        "ambient": scenario.scene.ambient,
        "horizon": scenario.horizon_s,
        "objects": [
            {
                "id": o.id,
                "strength": o.strength,
                "waypoints": [{"t": t, "x": x, "y": y} for t, x, y in o.waypoints],
            }
            for o in scenario.scene.objects
        ],
    }
    return json.dumps(doc, indent=2) + "\n"


def crossing(ident: str, t0: float, *, x: float = 4.0, half_width: float = 8.0, duration: float = 3.0,
             strength: float = 1.0) -> HeatSource:
    """A straight walk across the field of view at distance ``x``."""
    return HeatSource(ident, strength, ((t0, x, half_width), (t0 + duration, x, -half_width)))
