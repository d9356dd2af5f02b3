"""Flat ``key = value`` run configuration shared by config files and CLI flags.

Config files hold one ``key = value`` per line; ``#`` starts a comment.  Keys
are the snake_case names in :data:`KEYS` (plus the aliases ``Q`` and ``A``);
CLI flags are the same names with dashes.  Unknown keys are fatal.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from pathlib import Path

from .experiments import ConfigError, ExperimentConfig


def _floats(text: str) -> tuple[float, ...]:
    return tuple(float(v) for v in text.replace(",", " ").split())


def _bool(text: str) -> bool:
    low = text.strip().lower()
    if low in ("1", "true", "yes", "on"):
        return True
    if low in ("0", "false", "no", "off"):
        return False
    raise ValueError(f"not a boolean: {text!r}")


def _number(text: str) -> float:
    return float(text)


def _integer(text: str) -> int:
    value = float(text)
    if not value.is_integer():
        raise ValueError(f"not an integer: {text!r}")
    return int(value)


# key -> (parser, default, help)
KEYS: dict[str, tuple] = {
    "x": (_number, None, "range parameter x"),
    "theta": (_number, None, "interval exponent, h = x^theta"),
    "h": (_number, None, "interval length"),
    "q_max": (_integer, 10, "largest modulus Q"),
    "a_exp": (_number, 1.0, "log-power saving exponent A"),
    "epsilon": (_number, 0.05, "hypothesis slack epsilon"),
    "samples": (_integer, 200, "random samples"),
    "strata": (_integer, 256, "sampling strata"),
    "seed": (_integer, 0, "RNG seed"),
    "theorem": (_integer, 2, "which modulus-range hypothesis to check (1, 2 or 3)"),
    "kind": (str, "E", "error term: E, Eprime or Elambda"),
    "exact": (_bool, False, "integrate exactly instead of sampling"),
    "y": (_number, 10000.0, "window start y"),
    "q": (_integer, 1, "modulus"),
    "a": (_integer, 0, "residue class"),
    "eta": (_number, None, "relative block length"),
    "trials": (_integer, 100, "randomized trials"),
    "nmax": (_integer, 10000, "largest n"),
    "k0": (_integer, 3, "Heath-Brown order"),
    "points": (_integer, 10000, "sample points"),
    "x_max": (_number, 1e6, "largest x"),
    "bump": (str, "standard", "bump kind: standard or wide"),
    "n_len": (_number, 100.0, "polynomial or sum length N"),
    "t": (_floats, (0.0, 2.0, 5.0), "ordinates"),
    "r": (_floats, (0.0, 1.0), "log powers"),
    "t_max": (_number, 10.0, "largest |t|"),
    "t_step": (_number, 0.5, "ordinate step"),
    "t_height": (_number, 30.0, "height T"),
    "u": (_floats, (1.0,), "large-value thresholds U_j"),
    "sigma": (_number, 0.5, "real-part cutoff"),
    "character": (str, "1.0", "character key q.label"),
    "density_c": (_number, 12 / 5, "density exponent c"),
    "m_exp": (_integer, 14, "density log power M"),
    "t0": (_floats, (30.0, 50.0, 100.0), "truncation heights"),
    "c": (_floats, (0.1,), "pair thresholds c"),
    "mode": (str, "exhaustive", "pair scan: exhaustive or sampled"),
    "m_max": (_integer, 40, "largest m"),
    "k_max": (_integer, 2000, "largest k"),
    "verify": (_bool, True, "cross-check against the brute-force oracle"),
    "zeros_file": (str, None, "zero dataset path (default: bundled zeta zeros)"),
    "format": (str, "json", "output format: json or csv"),
    "out": (str, None, "output path (default: stdout)"),
    "cache_dir": (str, None, "sieve segment cache directory"),
    "threads": (_integer, 1, "worker threads (accepted; runs are single-threaded)"),
}

ALIASES = {"Q": "q_max", "A": "a_exp"}


def canonical(key: str) -> str:
    key = key.strip()
    return ALIASES.get(key, key.replace("-", "_"))


@dataclass
class RunConfig:
    """Resolved parameters: explicitly set values over the defaults."""

    values: dict = field(default_factory=dict)

    def __getitem__(self, key: str):
        key = canonical(key)
        if key in self.values:
            return self.values[key]
        return KEYS[key][1]

    def __contains__(self, key: str) -> bool:
        return canonical(key) in self.values

    def set(self, key: str, raw) -> None:
        key = canonical(key)
        if key not in KEYS:
            raise ConfigError(f"unknown key: {key}")
        parser = KEYS[key][0]
        if isinstance(raw, str):
            try:
                raw = parser(raw)
            except ValueError as exc:
                raise ConfigError(f"bad value for {key}: {exc}") from None
        self.values[key] = raw

    def merged(self, other: "RunConfig") -> "RunConfig":
        return RunConfig({**self.values, **other.values})

    def resolved(self, keys) -> dict:
        """The effective values of ``keys`` plus derived quantities, in a stable order."""
        out = {k: _plain(self[k]) for k in keys}
        if "x" in out and self["x"] is not None and (self["h"] is not None or self["theta"] is not None):
            cfg = self.experiment()
            out.update(length=cfg.length, eta=cfg.eta, alpha=cfg.alpha)
        return out

    def experiment(self) -> ExperimentConfig:
        if self["x"] is None:
            raise ConfigError("missing required key: x")
        return ExperimentConfig(
            x=self["x"],
            theta=self["theta"],
            h=self["h"],
            Q=self["q_max"],
            A=self["a_exp"],
            epsilon=self["epsilon"],
            samples=self["samples"],
            seed=self["seed"],
            strata=self["strata"],
            theorem=self["theorem"],
            density_c=self["density_c"],
        )


def _plain(v):
    return list(v) if isinstance(v, tuple) else v


def parse_config(text: str) -> RunConfig:
    """Parse ``key = value`` lines.

    Raises:
        ConfigError: malformed lines, unknown keys (all listed), type
            mismatches, or both ``h`` and ``theta`` present.
    """
    cfg = RunConfig()
    unknown = []
    for lineno, line in enumerate(text.splitlines(), start=1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"line {lineno}: expected 'key = value', got {line!r}")
        key, value = (part.strip() for part in line.split("=", 1))
        if canonical(key) not in KEYS:
            unknown.append(key)
            continue
        cfg.set(key, value)
    if unknown:
        raise ConfigError(f"unknown keys: {', '.join(unknown)}")
    check_consistent(cfg)
    return cfg


def check_consistent(cfg: RunConfig) -> None:
    if "h" in cfg and "theta" in cfg and cfg["h"] is not None and cfg["theta"] is not None:
        raise ConfigError("conflicting keys 'h' and 'theta': give exactly one")
    x = cfg["x"]
    if x is not None and not math.isfinite(x):
        raise ConfigError(f"x must be finite, got {x}")


def load_config(path: str | Path) -> RunConfig:
    """Read a config file; η and α are derived when x with h or theta is present."""
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from None
    cfg = parse_config(text)
    if cfg["x"] is not None and (cfg["h"] is not None or cfg["theta"] is not None):
        cfg.experiment()
    return cfg
