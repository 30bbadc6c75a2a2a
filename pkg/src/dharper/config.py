"""Flat key-value config files and parameter resolution.

Config lines are `key = value` (or `key: value`); `#` starts a comment.
Command-line flags override config values.  Model parameters are quoted
the way the experiments are: total frequency `omega` plus either a
rational ratio (`beta_r`, `beta_q`) or `beta_irrational` (the name
"golden" or an explicit value).
"""

from __future__ import annotations

from .model import BetaClass, ModelParams, frequency_split


class ConfigError(Exception):
    """Invalid or missing configuration; carries the offending key."""

    def __init__(self, key: str, message: str):
        super().__init__(f"config key '{key}': {message}")
        self.key = key


def parse_config_file(path: str) -> dict:
    values: dict = {}
    with open(path, "r", encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, 1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            for sep in ("=", ":"):
                if sep in line:
                    key, _, val = line.partition(sep)
                    break
            else:
                raise ConfigError(line.split()[0],
                                  f"line {lineno}: expected 'key = value'")
            key = key.strip()
            val = val.strip()
            if not key or not val:
                raise ConfigError(key or f"line {lineno}", "empty key or value")
            values[key] = _coerce(val)
    return values


def _coerce(text: str):
    for cast in (int, float):
        try:
            return cast(text)
        except ValueError:
            continue
    return text


def require(cfg: dict, key: str):
    if key not in cfg or cfg[key] is None:
        raise ConfigError(key, "required but not provided")
    return cfg[key]


def positive(cfg: dict, key: str) -> float:
    v = require(cfg, key)
    try:
        v = float(v)
    except (TypeError, ValueError):
        raise ConfigError(key, f"not a number: {v!r}")
    if not v > 0:
        raise ConfigError(key, f"must be > 0, got {v}")
    return v


def resolve_beta(cfg: dict) -> BetaClass:
    has_rational = cfg.get("beta_r") is not None or cfg.get("beta_q") is not None
    has_irrational = cfg.get("beta_irrational") is not None
    if has_rational and has_irrational:
        raise ConfigError("beta_irrational",
                          "give either beta_r/beta_q or beta_irrational, not both")
    if has_rational:
        r = cfg.get("beta_r")
        q = cfg.get("beta_q")
        if r is None or q is None:
            raise ConfigError("beta_r" if r is None else "beta_q",
                              "beta_r and beta_q must be given together")
        try:
            return BetaClass.rational(int(r), int(q))
        except (TypeError, ValueError) as exc:
            raise ConfigError("beta_r", str(exc))
    if has_irrational:
        v = cfg["beta_irrational"]
        if isinstance(v, str):
            if v.lower() == "golden":
                return BetaClass.golden()
            raise ConfigError("beta_irrational",
                              f"unknown name {v!r} (use 'golden' or a number)")
        try:
            return BetaClass.irrational(float(v))
        except ValueError as exc:
            raise ConfigError("beta_irrational", str(exc))
    raise ConfigError("beta_r", "beta_r/beta_q or beta_irrational is required")


def resolve_model(cfg: dict) -> tuple[ModelParams, BetaClass]:
    """ModelParams from (omega, beta) plus hoppings and alpha."""
    beta = resolve_beta(cfg)
    omega = positive(cfg, "omega")
    j_x = float(cfg.get("j_x", 1.0))
    j_y = float(cfg.get("j_y", 1.0))
    alpha = float(cfg.get("alpha", 0.1545))
    omega_x, omega_y = frequency_split(omega, beta)
    try:
        params = ModelParams(j_x=j_x, j_y=j_y, alpha=alpha,
                             omega_x=omega_x, omega_y=omega_y)
    except ValueError as exc:
        msg = str(exc)
        key = "alpha" if "alpha" in msg else ("j_x" if "j_x" in msg else
                                              "j_y" if "j_y" in msg else "omega")
        raise ConfigError(key, msg)
    return params, beta
