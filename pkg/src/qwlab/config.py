"""Run configuration: built-in defaults, overridden by a JSON file, overridden by CLI flags."""

import dataclasses
import json
import math
from dataclasses import dataclass
from typing import Optional, Tuple

from ._validation import InvalidArgumentError

_INV_SQRT2 = 1.0 / math.sqrt(2.0)


@dataclass
class RunConfig:
    command: str = "simulate"
    g0: float = math.pi
    epsilon: Optional[float] = None
    steps: Optional[int] = None  # None: command default (500 ensemble, 200 noiseless/profile)
    samples: int = 2000
    seed: int = 0
    coin: Tuple[float, float, float, float] = (_INV_SQRT2, 0.0, 0.0, _INV_SQRT2)
    method: str = "closed"
    k_grid: int = 1024
    g_nodes: int = 129
    out: str = "."
    eps_min: float = 0.1
    eps_max: float = math.pi
    eps_points: int = 60
    fit_window: float = 0.5
    exclusion: int = 2
    floor: float = 0.1
    margin: float = 0.02
    mode: str = "quick"
    threads: Optional[int] = None

    def to_dict(self):
        d = dataclasses.asdict(self)
        d["coin"] = list(self.coin)
        return d

    def to_json(self):
        return json.dumps(self.to_dict(), indent=2, sort_keys=True)

    def save(self, path):
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(self.to_json() + "\n")

    @classmethod
    def from_dict(cls, data):
        return cls().updated(data)

    @classmethod
    def from_json(cls, text):
        return cls.from_dict(json.loads(text))

    @classmethod
    def load(cls, path):
        with open(path, encoding="utf-8") as fh:
            return cls.from_json(fh.read())

    def updated(self, data):
        """Copy with the keys of ``data`` replaced; unknown keys are an error."""
        names = {f.name for f in dataclasses.fields(self)}
        unknown = set(data) - names
        if unknown:
            raise InvalidArgumentError(f"unknown config keys: {sorted(unknown)}")
        data = dict(data)
        if "coin" in data and data["coin"] is not None:
            coin = tuple(float(c) for c in data["coin"])
            if len(coin) != 4:
                raise InvalidArgumentError("coin must hold four reals: re_up, im_up, re_down, im_down")
            data["coin"] = coin
        return dataclasses.replace(self, **data)


def resolve(flags, config_path=None):
    """defaults < JSON file < flags (only the flags actually given)."""
    cfg = RunConfig()
    if config_path:
        try:
            cfg = RunConfig.load(config_path)
        except (OSError, json.JSONDecodeError) as exc:
            raise InvalidArgumentError(f"cannot read config {config_path}: {exc}") from None
    return cfg.updated(flags)
