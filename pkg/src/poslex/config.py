"""Runtime configuration: defaults, key=value config file, environment.

Precedence, lowest to highest: built-in defaults, config file, environment
(POSLEX_* variables, mainly for backend credentials), explicit overrides
from command-line flags.
"""

from __future__ import annotations

import os
from dataclasses import dataclass, fields

ENV_PREFIX = "POSLEX_"


@dataclass
class PipelineConfig:
    project_dir: str = "project"
    corpus: str | None = None
    delimiter: str = "auto"
    comment_prefix: str = "#"
    tagset: str | None = None
    backend: str = "stub"  # stub | http
    backend_url: str | None = None
    backend_key: str | None = None
    dictionary: str | None = None
    miss_policy: str = "echo"
    batch_size: int = 50
    max_in_flight: int = 1
    retries: int = 2
    rate_per_sec: float = 5.0
    src_lang: str = "fa"
    dst_lang: str = "ckb"
    strip_pronouns: str = "من,تۆ"
    actor: str = "cli"
    token: str | None = None
    host: str = "127.0.0.1"
    port: int = 8571

    def pronoun_list(self) -> list[str]:
        return [p.strip() for p in self.strip_pronouns.split(",") if p.strip()]


def parse_config_file(text: str) -> dict[str, str]:
    """key = value lines; blank lines and # comments are ignored."""
    values: dict[str, str] = {}
    for line_no, raw in enumerate(text.split("\n"), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        if "=" not in line:
            raise ValueError(f"config line {line_no}: expected key = value, got {raw!r}")
        key, _, value = line.partition("=")
        values[key.strip()] = value.strip()
    return values


def _coerce(name: str, kind, raw: str):
    if kind in (int, "int"):
        return int(raw)
    if kind in (float, "float"):
        return float(raw)
    return raw


_FIELD_TYPES = {
    "batch_size": int,
    "max_in_flight": int,
    "retries": int,
    "port": int,
    "rate_per_sec": float,
}


def load_config(path=None, env: dict | None = None, overrides: dict | None = None) -> PipelineConfig:
    cfg = PipelineConfig()
    known = {f.name for f in fields(PipelineConfig)}

    def apply(values: dict, source: str):
        for key, value in values.items():
            if key not in known:
                raise ValueError(f"unknown config key {key!r} (from {source})")
            if value is None:
                continue
            if isinstance(value, str):
                value = _coerce(key, _FIELD_TYPES.get(key, str), value)
            setattr(cfg, key, value)

    if path is not None:
        with open(path, encoding="utf-8") as f:
            apply(parse_config_file(f.read()), str(path))

    env = os.environ if env is None else env
    env_values = {}
    for key in known:
        raw = env.get(ENV_PREFIX + key.upper())
        if raw is not None:
            env_values[key] = raw
    apply(env_values, "environment")

    if overrides:
        apply({k: v for k, v in overrides.items() if v is not None}, "command line")
    return cfg
