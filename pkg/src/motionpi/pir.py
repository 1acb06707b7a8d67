"""Two-slot pyroelectric PIR sensor.

Geometry is a 2-D plane centred on the sensor with the boresight along +x.
Bearings are measured in degrees from +x, positive towards +y.  Slot A sees
the half-field ``[0, +view/2]`` and slot B sees ``[-view/2, 0)``; the sensor
output follows the difference A - B.

Irradiance from a heat source falls off with the inverse square of its
distance, clamped at ``MIN_DISTANCE_M`` so a source at the lens does not
diverge.  A source emits at wavelengths around 12 microns for a human body;
that is a spectral fact and plays no part in the amplitude model.
"""

from __future__ import annotations

import bisect
import enum
import math
from dataclasses import dataclass, field, replace

from .hal import Level

MIN_DISTANCE_M = 0.5
TIME_EPS = 1e-9

# Knob limits of the board actually used (delay and sensitivity potentiometers).
DELAY_RANGE_S = (3.0, 300.0)
RANGE_LIMITS_M = (3.0, 7.0)
DEFAULT_VIEW_ANGLE_DEG = 110.0

# Typical data-sheet figures for HC-SR501 style modules.  Kept for reference;
# ``DATASHEET_PRESET`` turns the usable ones into a PirConfig.
SPEC_SHEET = {
    "operating_voltage": "DC 5 - 12V",
    "static_power_consumption": "65 mA",
    "output_signal": "3V TTL",
    "detection_distance": "up to 6 m (adjustable)",
    "sensing_range": "less than 120 degree angle, 6 m",
    "delay_time": "5 - 200 s (adjustable)",
    "trigger": "L: non repeatable, H: repeatable",
    "operating_temperature": "-15 to +70 C",
    "dimensions": "32 x 24 mm, screw hole distance 28 mm",
}


class TriggerMode(str, enum.Enum):
    L_NON_REPEATABLE = "L"
    H_REPEATABLE = "H"


class Slot(str, enum.Enum):
    A = "A"
    B = "B"


def default_threshold() -> float:
    # half the signal of a unit-strength source at 4 m
    return 0.5 * (1.0 / 4.0**2)


@dataclass(frozen=True)
class PirConfig:
    delay_time_s: float = 5.0
    sensitivity_range_m: float = 7.0
    view_angle_deg: float = DEFAULT_VIEW_ANGLE_DEG
    trigger_mode: TriggerMode = TriggerMode.L_NON_REPEATABLE
    threshold: float = field(default_factory=default_threshold)
    n_zones: int = 1
    zone_gains: tuple[float, ...] | None = None
    output_high_v: float = 3.0

    def __post_init__(self):
        lo, hi = DELAY_RANGE_S
        if not lo <= self.delay_time_s <= hi:
            raise ValueError(f"delay_time_s must be within [{lo:g}, {hi:g}] s, got {self.delay_time_s}")
        lo, hi = RANGE_LIMITS_M
        if not lo <= self.sensitivity_range_m <= hi:
            raise ValueError(
                f"sensitivity_range_m must be within [{lo:g}, {hi:g}] m, got {self.sensitivity_range_m}"
            )
        if not 0 < self.view_angle_deg < 180:
            raise ValueError(f"view_angle_deg must be in (0, 180), got {self.view_angle_deg}")
        if not self.threshold > 0:
            raise ValueError("threshold must be positive")
        if self.n_zones < 1:
            raise ValueError("n_zones must be at least 1")
        if self.zone_gains is not None and len(self.zone_gains) != self.n_zones:
            raise ValueError("zone_gains needs one gain per zone")
        object.__setattr__(self, "trigger_mode", TriggerMode(self.trigger_mode))
        if self.output_high_v != 3.0:
            raise ValueError("output_high_v is fixed at 3 V")


# Data-sheet values where they fit the knob ranges: 6 m detection distance,
# a 5 s minimum delay and the repeatable trigger jumper position.
DATASHEET_PRESET = PirConfig(
    delay_time_s=5.0,
    sensitivity_range_m=6.0,
    view_angle_deg=DEFAULT_VIEW_ANGLE_DEG,
    trigger_mode=TriggerMode.H_REPEATABLE,
)


@dataclass(frozen=True)
class HeatSource:
    id: str
    strength: float
    waypoints: tuple[tuple[float, float, float], ...]

    def __post_init__(self):
        if not self.strength > 0:
            raise ValueError(f"heat source {self.id!r}: strength must be positive")
        if not self.waypoints:
            raise ValueError(f"heat source {self.id!r}: needs at least one waypoint")
        times = [w[0] for w in self.waypoints]
        if any(b < a for a, b in zip(times, times[1:])):
            raise ValueError(f"heat source {self.id!r}: waypoint times must be non-decreasing")
        object.__setattr__(self, "_times", times)

    def position(self, t: float) -> tuple[float, float]:
        """Piecewise-linear position, clamped to the scripted span.

        At a repeated timestamp the later waypoint wins, which lets a script
        move a source instantaneously.
        """
        wps = self.waypoints
        i = bisect.bisect_right(self._times, t)
        if i == 0:
            return wps[0][1], wps[0][2]
        if i == len(wps):
            return wps[-1][1], wps[-1][2]
        t0, x0, y0 = wps[i - 1]
        t1, x1, y1 = wps[i]
        u = (t - t0) / (t1 - t0)
        return x0 + u * (x1 - x0), y0 + u * (y1 - y0)


@dataclass(frozen=True)
class Scene:
    ambient: float = 1.0
    objects: tuple[HeatSource, ...] = ()

    def __post_init__(self):
        if self.ambient < 0:
            raise ValueError("ambient irradiance must be non-negative")
        object.__setattr__(self, "objects", tuple(self.objects))

    def mirrored(self) -> "Scene":
        """Reflection about the boresight axis (y -> -y)."""
        return Scene(
            self.ambient,
            tuple(
                replace(o, waypoints=tuple((t, x, -y) for t, x, y in o.waypoints))
                for o in self.objects
            ),
        )


@dataclass(frozen=True)
class Zone:
    lo_deg: float
    hi_deg: float
    slot: Slot
    index: int


def fresnel_zones(view_angle_deg: float, n_zones: int) -> list[Zone]:
    """Split each half-field into ``n_zones`` equal sectors.

    Sectors alternate between the two slots moving outward from the
    boresight, so the k-th sector on the +y side and its mirror image always
    feed opposite slots.  With one zone this is the plain two-slot field.
    """
    if n_zones < 1:
        raise ValueError("n_zones must be at least 1")
    w = view_angle_deg / 2 / n_zones
    zones = []
    for k in range(n_zones):
        pos = Slot.A if k % 2 == 0 else Slot.B
        neg = Slot.B if pos is Slot.A else Slot.A
        zones.append(Zone(k * w, (k + 1) * w, pos, k))
        zones.append(Zone(-(k + 1) * w, -k * w, neg, k))
    return sorted(zones, key=lambda z: z.lo_deg)


def _zone_of(bearing: float, config: PirConfig) -> tuple[Slot, int] | None:
    half = config.view_angle_deg / 2
    if bearing > half or bearing < -half:
        return None
    w = half / config.n_zones
    k = min(int(abs(bearing) // w), config.n_zones - 1)
    positive_slot = Slot.A if k % 2 == 0 else Slot.B
    if bearing >= 0:
        return positive_slot, k
    return (Slot.B if positive_slot is Slot.A else Slot.A), k


def contribution(strength: float, distance: float) -> float:
    return strength / max(distance * distance, MIN_DISTANCE_M * MIN_DISTANCE_M)


def slot_irradiance(scene: Scene, t: float, slot: Slot | str, config: PirConfig | None = None) -> float:
    config = config or PirConfig()
    slot = Slot(slot)
    total = scene.ambient
    for obj in scene.objects:
        x, y = obj.position(t)
        d = math.hypot(x, y)
        if d > config.sensitivity_range_m:
            continue
        bearing = math.degrees(math.atan2(y, x))
        zone = _zone_of(bearing, config)
        if zone is None:
            continue
        gain = 1.0 if config.zone_gains is None else config.zone_gains[zone[1]]
        if bearing == 0.0:
            # on the boresight the source straddles both slots equally
            total += 0.5 * gain * contribution(obj.strength, d)
        elif zone[0] is slot:
            total += gain * contribution(obj.strength, d)
    return total


def differential(scene: Scene, t: float, config: PirConfig | None = None) -> float:
    config = config or PirConfig()
    return slot_irradiance(scene, t, Slot.A, config) - slot_irradiance(scene, t, Slot.B, config)


@dataclass(frozen=True)
class PirState:
    output: Level = Level.LOW
    high_until: float | None = None
    last_differential: float = 0.0


def step(state: PirState, config: PirConfig, scene: Scene, t: float, dt: float) -> tuple[PirState, Level]:
    """Advance the sensor to time ``t``.

    In L (non-repeatable) mode a trigger only starts a new hold period when the
    output is low; in H (repeatable) mode every trigger restarts the hold.
    """
    if not dt > 0:
        raise ValueError("dt must be positive")
    diff = differential(scene, t, config)
    high_until = state.high_until
    if abs(diff) > config.threshold and (
        state.output is Level.LOW or config.trigger_mode is TriggerMode.H_REPEATABLE
    ):
        high_until = t + config.delay_time_s
    high = high_until is not None and t < high_until - TIME_EPS
    out = Level.HIGH if high else Level.LOW
    return PirState(out, high_until, diff), out


class PirSensor:
    """Stateful sensor stepped on a fixed time grid ``k * dt``.

    Calling the sensor with a time advances it through every grid point up to
    that time and returns the digital output, so it can be bound directly to
    a GPIO input.
    """

    def __init__(self, config: PirConfig, scene: Scene, dt: float = 0.1):
        if not dt > 0:
            raise ValueError("dt must be positive")
        self.config = config
        self.scene = scene
        self.dt = dt
        self.state = PirState()
        self._k = 0
        self.pulses: list[tuple[float, float | None]] = []

    def advance_to(self, t: float) -> Level:
        while self._k * self.dt <= t + TIME_EPS:
            tk = round(self._k * self.dt, 9)
            prev = self.state.output
            self.state, out = step(self.state, self.config, self.scene, tk, self.dt)
            if out is Level.HIGH and prev is Level.LOW:
                self.pulses.append((tk, None))
            elif out is Level.LOW and prev is Level.HIGH:
                self.pulses[-1] = (self.pulses[-1][0], tk)
            self._k += 1
        return self.state.output

    __call__ = advance_to


def pulse_windows(config: PirConfig, scene: Scene, *, until: float, dt: float = 0.1) -> list[tuple[float, float | None]]:
    """High intervals ``[start, end)`` of the output over ``[0, until]``."""
    sensor = PirSensor(config, scene, dt)
    sensor.advance_to(until)
    return list(sensor.pulses)
