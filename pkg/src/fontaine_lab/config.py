"""Run configuration: defaults, an optional JSON file, then command-line flags."""

from __future__ import annotations

import json
import os
from dataclasses import asdict, dataclass, replace

from .errors import MalformedInput
from .padic_core import _is_prime
from .series_rings import Truncation

ENV_VAR = "FONTAINE_LAB_CONFIG"


@dataclass(frozen=True)
class Config:
    p: int = 3
    n: int = 4
    N: int = 80
    pole_cap: int = 40
    level_cap: int = 3
    seed: int = 20240601

    def __post_init__(self):
        if not _is_prime(self.p):
            raise MalformedInput(f"p = {self.p} is not prime")
        for name in ("n", "N", "pole_cap", "level_cap"):
            if getattr(self, name) <= 0:
                raise MalformedInput(f"{name} must be positive")

    @property
    def truncation(self) -> Truncation:
        return Truncation(self.p, self.n, self.N, self.pole_cap)

    def precision(self) -> dict:
        return {"p": self.p, "n": self.n, "N": self.N}

    def to_json(self) -> dict:
        return asdict(self)


def load(path: str | None = None, **overrides) -> Config:
    """Defaults, then the file named by ``path`` or $FONTAINE_LAB_CONFIG, then overrides."""
    cfg = Config()
    path = path or os.environ.get(ENV_VAR)
    if path:
        try:
            with open(path) as fh:
                data = json.load(fh)
            cfg = replace(cfg, **{k: int(v) for k, v in data.items()})
        except (OSError, json.JSONDecodeError, TypeError, ValueError) as exc:
            raise MalformedInput(f"bad config file {path}: {exc}") from exc
    given = {k: v for k, v in overrides.items() if v is not None}
    return replace(cfg, **given) if given else cfg
