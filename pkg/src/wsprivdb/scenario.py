"""Line-based key=value scenario configuration, losslessly round-trippable."""

from __future__ import annotations

from dataclasses import dataclass, fields

PROTOCOLS = ("lpdb", "lpdb-leak", "lpdbqs")


@dataclass
class Scenario:
    side: int = 64
    n_ch: int = 31
    rho: float = 0.068
    seed: int = 0
    epsilon: float = 0.01
    beta: int = 4
    alpha: float = 0.95
    protocol: str = "lpdb"
    leakage: str = "x"  # coordinate axis revealed by lpdb-leak
    sensing_accuracy: float = 1.0
    trials: int = 10

    def __post_init__(self):
        if self.side < 1 or self.n_ch < 1 or self.trials < 1:
            raise ValueError("side, n_ch and trials must be >= 1")
        if self.protocol not in PROTOCOLS:
            raise ValueError(f"protocol must be one of {PROTOCOLS}, got {self.protocol!r}")
        if self.leakage not in ("x", "y"):
            raise ValueError(f"leakage axis must be 'x' or 'y', got {self.leakage!r}")
        if not 0.0 <= self.sensing_accuracy <= 1.0:
            raise ValueError("sensing_accuracy must be in [0, 1]")
        if not 0.0 <= self.rho <= 1.0:
            raise ValueError("rho must be in [0, 1]")
        if not 0.0 < self.epsilon < 1.0:
            raise ValueError("epsilon must be in (0, 1)")
        if not 0.0 < self.alpha <= 1.0:
            raise ValueError("alpha must be in (0, 1]")
        if self.beta < 1:
            raise ValueError("beta must be >= 1")

    def serialize(self) -> str:
        lines = []
        for f in fields(self):
            value = getattr(self, f.name)
            lines.append(f"{f.name}={value!r}" if isinstance(value, str)
                         else f"{f.name}={value}")
        return "\n".join(lines) + "\n"


def parse_scenario(text: str) -> Scenario:
    """Parse key=value lines; blank lines and #-comments are skipped."""
    typed = {f.name: f.type for f in fields(Scenario)}
    casts = {"int": int, "float": float, "str": _unquote}
    values = {}
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        if "=" not in line:
            raise ValueError(f"line {lineno}: expected key=value, got {raw!r}")
        key, _, value = line.partition("=")
        key = key.strip()
        if key not in typed:
            raise ValueError(f"line {lineno}: unknown scenario key {key!r}")
        try:
            values[key] = casts[typed[key]](value.strip())
        except ValueError as e:
            raise ValueError(f"line {lineno}: bad value for {key}: {e}") from e
    return Scenario(**values)


def _unquote(value: str) -> str:
    if len(value) >= 2 and value[0] == value[-1] and value[0] in "'\"":
        return value[1:-1]
    return value
