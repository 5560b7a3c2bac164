"""Run configuration: flat key=value files plus command-line overrides.

A config file is plain text, one `key = value` per line, `#` comments.
Every key can also arrive as a CLI flag; flags win over the file.  The
gamma key is informational: benchmark problems pin their own adiabatic
index, so a conflicting value is a configuration error rather than a
silent reinterpretation of the initial data.
"""

from __future__ import annotations

from dataclasses import dataclass, fields, replace

VARIANTS = ("standard", "locally_df_pp")
CFL_MODES = ("practical", "theory")


class ConfigError(ValueError):
    """Bad configuration; drivers turn this into exit code 3."""


@dataclass
class RunConfig:
    problem: str = "vortex"
    nx: int | None = None
    ny: int | None = None
    k: int = 2
    variant: str = "locally_df_pp"
    limiter: bool = True
    source: bool | None = None
    cfl: float = 0.25
    cfl_mode: str = "practical"
    theta: float = 1.0
    t_end: float | None = None
    gamma: float | None = None
    out: str = "out"
    snapshot_every: int = 0
    diag_every: int = 1
    oversample: bool = False
    seed: int = 20260816
    max_steps: int = 1_000_000
    resume: str | None = None
    checkpoint_every: int = 0
    debug_pp: bool = False


_BOOL_KEYS = {"limiter", "oversample", "debug_pp"}
_OPT_BOOL_KEYS = {"source"}
_INT_KEYS = {"k", "snapshot_every", "diag_every", "seed", "max_steps", "checkpoint_every"}
_OPT_INT_KEYS = {"nx", "ny"}
_FLOAT_KEYS = {"cfl", "theta"}
_OPT_FLOAT_KEYS = {"t_end", "gamma"}
_STR_KEYS = {"problem", "variant", "cfl_mode", "out"}
_OPT_STR_KEYS = {"resume"}


def _parse_bool(key: str, raw: str) -> bool:
    low = raw.strip().lower()
    if low in ("1", "true", "on", "yes"):
        return True
    if low in ("0", "false", "off", "no"):
        return False
    raise ConfigError(f"{key} must be on/off, got {raw!r}")


def parse_value(key: str, raw: str):
    raw = raw.strip()
    if raw.lower() == "none" and key in (
        _OPT_BOOL_KEYS | _OPT_INT_KEYS | _OPT_FLOAT_KEYS | _OPT_STR_KEYS
    ):
        return None
    try:
        if key in _BOOL_KEYS or key in _OPT_BOOL_KEYS:
            return _parse_bool(key, raw)
        if key in _INT_KEYS or key in _OPT_INT_KEYS:
            return int(raw)
        if key in _FLOAT_KEYS or key in _OPT_FLOAT_KEYS:
            return float(raw)
        if key in _STR_KEYS or key in _OPT_STR_KEYS:
            return raw
    except ValueError as err:
        raise ConfigError(f"bad value for {key}: {raw!r} ({err})") from None
    raise ConfigError(f"unknown config key {key!r}")


def load_config_file(path: str) -> dict:
    values: dict = {}
    try:
        with open(path, encoding="utf-8") as fh:
            for lineno, line in enumerate(fh, 1):
                body = line.split("#", 1)[0].strip()
                if not body:
                    continue
                if "=" not in body:
                    raise ConfigError(f"{path}:{lineno}: expected key = value")
                key, raw = body.split("=", 1)
                key = key.strip().replace("-", "_")
                values[key] = parse_value(key, raw)
    except OSError as err:
        raise ConfigError(f"cannot read config file {path}: {err}") from None
    return values


def make_config(file_values: dict | None = None, overrides: dict | None = None) -> "RunConfig":
    cfg = RunConfig()
    known = {f.name for f in fields(RunConfig)}
    for source in (file_values or {}, overrides or {}):
        unknown = set(source) - known
        if unknown:
            raise ConfigError(f"unknown config keys: {sorted(unknown)}")
        cfg = replace(cfg, **source)
    return cfg


def validate_config(cfg: RunConfig) -> None:
    from .problems import PROBLEM_NAMES, build_problem

    if cfg.problem not in PROBLEM_NAMES:
        raise ConfigError(
            f"unknown problem {cfg.problem!r}; choose from {', '.join(PROBLEM_NAMES)}"
        )
    setup = build_problem(cfg.problem)
    if cfg.variant not in VARIANTS:
        raise ConfigError(f"variant must be one of {VARIANTS}")
    if cfg.cfl_mode not in CFL_MODES:
        raise ConfigError(f"cfl_mode must be one of {CFL_MODES}")
    if not 0 <= cfg.k <= 4:
        raise ConfigError("k must be between 0 and 4")
    if cfg.cfl <= 0.0:
        raise ConfigError("cfl must be positive")
    if not 0.0 < cfg.theta <= 1.0:
        raise ConfigError("theta must lie in (0, 1]")
    if cfg.t_end is not None and cfg.t_end < 0.0:
        raise ConfigError("t_end must be nonnegative")
    if setup.dim == 1 and cfg.ny is not None:
        raise ConfigError(f"{cfg.problem} is one-dimensional; ny does not apply")
    for key in ("nx", "ny"):
        val = getattr(cfg, key)
        if val is not None and val < 1:
            raise ConfigError(f"{key} must be at least 1")
    if cfg.gamma is not None and abs(cfg.gamma - setup.eos.gamma) > 1e-12:
        raise ConfigError(
            f"{cfg.problem} pins gamma = {setup.eos.gamma:.6g}; "
            "benchmark data is not defined for other values"
        )
    if cfg.snapshot_every < 0 or cfg.diag_every < 1 or cfg.checkpoint_every < 0:
        raise ConfigError("cadence values must be nonnegative (diag_every >= 1)")
    if cfg.max_steps < 1:
        raise ConfigError("max_steps must be positive")
