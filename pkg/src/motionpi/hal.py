"""Simulated Raspberry Pi 3 GPIO header.

The pin table is the 40-pin header of the Pi 3 (Model B+).  Pins are
addressed either by physical plug position (BOARD) or by Broadcom SoC
channel (BCM).  Levels are digital only: LOW is 0 V, HIGH is 3 V.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field
from typing import Callable, Iterator, Mapping


class HalError(Exception):
    """Base class for simulated GPIO errors."""


class NoSuchPinError(HalError):
    pass


class NotGpioError(HalError):
    pass


class FixedPullError(HalError):
    pass


class PinModeError(HalError):
    pass


class PinFunction(str, enum.Enum):
    POWER_5V = "power_5v"
    POWER_3V3 = "power_3v3"
    GROUND = "ground"
    GPIO = "gpio"
    ID_EEPROM = "id_eeprom"


class NumberingMode(str, enum.Enum):
    BOARD = "BOARD"
    BCM = "BCM"


class Mode(str, enum.Enum):
    UNCONFIGURED = "unconfigured"
    INPUT = "input"
    OUTPUT = "output"


class Pull(str, enum.Enum):
    NONE = "none"
    UP = "up"
    DOWN = "down"
    FIXED_UP = "fixed_up"


class Level(enum.IntEnum):
    LOW = 0
    HIGH = 1

    @property
    def volts(self) -> float:
        return 3.0 if self is Level.HIGH else 0.0


@dataclass(frozen=True)
class PinIdentity:
    board_number: int
    function: PinFunction
    name: str
    label: str = ""
    bcm_number: int | None = None

    @property
    def is_gpio(self) -> bool:
        return self.function is PinFunction.GPIO


# (board, function, printed name, label, bcm)
_HEADER = [
    (1, PinFunction.POWER_3V3, "3.3v DC Power", "", None),
    (2, PinFunction.POWER_5V, "DC Power 5v", "", None),
    (3, PinFunction.GPIO, "GPIO02 (SDA1, I2C)", "SDA1", 2),
    (4, PinFunction.POWER_5V, "DC Power 5v", "", None),
    (5, PinFunction.GPIO, "GPIO03 (SCL1, I2C)", "SCL1", 3),
    (6, PinFunction.GROUND, "Ground", "", None),
    (7, PinFunction.GPIO, "GPIO04 (GPIO_GCLK)", "GPIO_GCLK", 4),
    (8, PinFunction.GPIO, "GPIO14 (TXD0)", "TXD0", 14),
    (9, PinFunction.GROUND, "Ground", "", None),
    (10, PinFunction.GPIO, "GPIO15 (RXD0)", "RXD0", 15),
    (11, PinFunction.GPIO, "GPIO17 (GPIO_GEN0)", "GPIO_GEN0", 17),
    (12, PinFunction.GPIO, "GPIO18 (GPIO_GEN1)", "GPIO_GEN1", 18),
    (13, PinFunction.GPIO, "GPIO27 (GPIO_GEN2)", "GPIO_GEN2", 27),
    (14, PinFunction.GROUND, "Ground", "", None),
    (15, PinFunction.GPIO, "GPIO22 (GPIO_GEN3)", "GPIO_GEN3", 22),
    (16, PinFunction.GPIO, "GPIO23 (GPIO_GEN4)", "GPIO_GEN4", 23),
    (17, PinFunction.POWER_3V3, "3.3v DC Power", "", None),
    (18, PinFunction.GPIO, "GPIO24 (GPIO_GEN5)", "GPIO_GEN5", 24),
    (19, PinFunction.GPIO, "GPIO10 (SPI_MOSI)", "SPI_MOSI", 10),
    (20, PinFunction.GROUND, "Ground", "", None),
    (21, PinFunction.GPIO, "GPIO09 (SPI_MISO)", "SPI_MISO", 9),
    (22, PinFunction.GPIO, "GPIO25 (GPIO_GEN6)", "GPIO_GEN6", 25),
    (23, PinFunction.GPIO, "GPIO11 (SPI_CLK)", "SPI_CLK", 11),
    (24, PinFunction.GPIO, "GPIO08 (SPI_CE0_N)", "SPI_CE0_N", 8),
    (25, PinFunction.GROUND, "Ground", "", None),
    (26, PinFunction.GPIO, "GPIO07 (SPI_CE1_N)", "SPI_CE1_N", 7),
    (27, PinFunction.ID_EEPROM, "ID_SD (I2C ID EEPROM)", "ID_SD", 0),
    (28, PinFunction.ID_EEPROM, "ID_SC (I2C ID EEPROM)", "ID_SC", 1),
    (29, PinFunction.GPIO, "GPIO05", "", 5),
    (30, PinFunction.GROUND, "Ground", "", None),
    (31, PinFunction.GPIO, "GPIO06", "", 6),
    (32, PinFunction.GPIO, "GPIO12", "", 12),
    (33, PinFunction.GPIO, "GPIO13", "", 13),
    (34, PinFunction.GROUND, "Ground", "", None),
    (35, PinFunction.GPIO, "GPIO19", "", 19),
    (36, PinFunction.GPIO, "GPIO16", "", 16),
    (37, PinFunction.GPIO, "GPIO26", "", 26),
    (38, PinFunction.GPIO, "GPIO20", "", 20),
    (39, PinFunction.GROUND, "Ground", "", None),
    (40, PinFunction.GPIO, "GPIO21", "", 21),
]

# GPIO2/GPIO3 carry on-board 1.8k pull-ups for I2C.
FIXED_PULL_UP_CHANNELS = frozenset({2, 3})


class PinMap(Mapping[int, PinIdentity]):
    """Immutable BOARD-keyed view of the header with a BCM index."""

    def __init__(self, pins: list[PinIdentity]):
        self._by_board = {p.board_number: p for p in pins}
        self._by_bcm = {p.bcm_number: p for p in pins if p.bcm_number is not None}
        if len(self._by_board) != len(pins):
            raise ValueError("duplicate board numbers in pin map")
        if len(self._by_bcm) != sum(p.bcm_number is not None for p in pins):
            raise ValueError("duplicate BCM channels in pin map")

    def __getitem__(self, board_number: int) -> PinIdentity:
        return self._by_board[board_number]

    def __iter__(self) -> Iterator[int]:
        return iter(sorted(self._by_board))

    def __len__(self) -> int:
        return len(self._by_board)

    def channels(self) -> list[PinIdentity]:
        """Pins that carry a BCM channel, in channel order."""
        return [self._by_bcm[c] for c in sorted(self._by_bcm)]

    def resolve(self, mode: NumberingMode | str, number: int) -> PinIdentity:
        mode = NumberingMode(mode)
        if mode is NumberingMode.BOARD:
            try:
                return self._by_board[number]
            except KeyError:
                raise NoSuchPinError(f"no such board pin: {number}") from None
        try:
            return self._by_bcm[number]
        except KeyError:
            raise NoSuchPinError(f"no such channel: BCM {number}") from None


def build_pin_map() -> PinMap:
    return PinMap([PinIdentity(b, f, n, lab, bcm) for b, f, n, lab, bcm in _HEADER])


def resolve(mode: NumberingMode | str, number: int, pin_map: PinMap | None = None) -> PinIdentity:
    return (pin_map or build_pin_map()).resolve(mode, number)


def parse_pin_ref(text: str, pin_map: PinMap | None = None) -> PinIdentity:
    """Resolve a textual reference such as ``board:11`` or ``BCM:18``."""
    mode, sep, number = text.strip().partition(":")
    if not sep:
        raise NoSuchPinError(f"pin reference must look like 'board:11' or 'bcm:18', got {text!r}")
    try:
        return resolve(mode.strip().upper(), int(number), pin_map)
    except ValueError:
        raise NoSuchPinError(f"bad pin reference {text!r}") from None


def render_pinout(pin_map: PinMap | None = None) -> str:
    pin_map = pin_map or build_pin_map()
    lines = ["Raspberry Pi 3 GPIO Header", f"{'Pin#':>4}  {'NAME':<24}  BCM"]
    for board in pin_map:
        pin = pin_map[board]
        bcm = "-" if pin.bcm_number is None else str(pin.bcm_number)
        lines.append(f"{board:>4}  {pin.name:<24}  {bcm}")
    return "\n".join(lines) + "\n"


Source = Callable[[float], Level]


@dataclass
class PinState:
    mode: Mode = Mode.UNCONFIGURED
    pull: Pull = Pull.NONE
    level: Level = Level.LOW
    bound_source: Source | None = None


def _pull_level(pull: Pull) -> Level:
    return Level.HIGH if pull in (Pull.UP, Pull.FIXED_UP) else Level.LOW


@dataclass
class Gpio:
    """Live pin state for one simulation loop.

    ``clock`` returns the current simulation time; bound sources are sampled
    at that time on every read.
    """

    pin_map: PinMap = field(default_factory=build_pin_map)
    clock: Callable[[], float] = lambda: 0.0

    def __post_init__(self):
        self._states: dict[int, PinState] = {}
        for board, pin in self.pin_map.items():
            st = PinState()
            if pin.bcm_number in FIXED_PULL_UP_CHANNELS and pin.is_gpio:
                st.pull, st.level = Pull.FIXED_UP, Level.HIGH
            self._states[board] = st
        self._listeners: dict[int, list[Callable[[float, Level], None]]] = {}

    def state(self, pin: PinIdentity) -> PinState:
        return self._states[pin.board_number]

    def _gpio_state(self, pin: PinIdentity) -> PinState:
        if not pin.is_gpio:
            raise NotGpioError(f"board pin {pin.board_number} ({pin.name}) is not a GPIO pin")
        return self._states[pin.board_number]

    def set_mode(self, pin: PinIdentity, mode: Mode | str, pull: Pull | str = Pull.NONE) -> None:
        st = self._gpio_state(pin)
        mode, pull = Mode(mode), Pull(pull)
        if st.pull is Pull.FIXED_UP:
            if pull not in (Pull.NONE, Pull.FIXED_UP):
                raise FixedPullError(
                    f"GPIO{pin.bcm_number} has a fixed pull-up resistor; cannot set pull {pull.value}"
                )
            pull = Pull.FIXED_UP
        elif pull is Pull.FIXED_UP:
            raise FixedPullError(f"GPIO{pin.bcm_number} has no fixed pull-up resistor")
        st.mode, st.pull = mode, pull
        st.bound_source = None
        if mode is not Mode.OUTPUT:
            st.level = _pull_level(pull)

    def write(self, pin: PinIdentity, level: Level | int) -> None:
        st = self._gpio_state(pin)
        if st.mode is not Mode.OUTPUT:
            raise PinModeError(f"cannot write board pin {pin.board_number}: mode is {st.mode.value}")
        st.level = Level(level)
        for cb in self._listeners.get(pin.board_number, ()):
            cb(self.clock(), st.level)

    def read(self, pin: PinIdentity) -> Level:
        st = self._gpio_state(pin)
        if st.mode is Mode.UNCONFIGURED:
            raise PinModeError(f"cannot read board pin {pin.board_number}: pin is unconfigured")
        if st.mode is Mode.INPUT and st.bound_source is not None:
            return Level(st.bound_source(self.clock()))
        return st.level

    def bind(self, pin: PinIdentity, source: Source) -> None:
        st = self._gpio_state(pin)
        if st.mode is not Mode.INPUT:
            raise PinModeError(f"can only bind a source to an input pin (board {pin.board_number})")
        st.bound_source = source

    def watch(self, pin: PinIdentity, callback: Callable[[float, Level], None]) -> None:
        """Call ``callback(t, level)`` after every write to ``pin``."""
        self._listeners.setdefault(pin.board_number, []).append(callback)


def constant(level: Level) -> Source:
    return lambda _t: level


class Led:
    """An LED wired (through its resistor) between an output pin and ground."""

    def __init__(self, gpio: Gpio, pin: PinIdentity):
        self.gpio = gpio
        self.pin = pin
        self.trace: list[tuple[float, Level]] = []
        gpio.watch(pin, self._on_write)

    def _on_write(self, t: float, level: Level) -> None:
        self.trace.append((t, level))

    @property
    def lit(self) -> bool:
        st = self.gpio.state(self.pin)
        return st.mode is Mode.OUTPUT and st.level is Level.HIGH
