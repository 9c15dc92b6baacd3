"""Pipeline configuration: flat key=value text file, overridable by CLI
flags; ``PHRASECAP_CONFIG`` names a default config path."""

import os
from dataclasses import dataclass, fields, replace

ENV_VAR = "PHRASECAP_CONFIG"


class ConfigError(ValueError):
    pass


@dataclass(frozen=True)
class PipelineConfig:
    embed_dim: int = 50
    context_vocab: int = 1000
    window: int = 10
    phrase_min_count: int = 10
    negatives: int = 15
    learning_rate: float = 0.00025
    epochs: int = 10
    top_np: int = 20
    top_vp: int = 10
    top_pp: int = 5
    np_counts: frozenset = frozenset({2, 3, 4})
    transition_threshold: float = 0.01
    max_candidates: int = 1000
    rng_seed: int = 42
    noise_distribution: str = "uniform"

    def validate(self):
        counts = {
            "embed_dim": self.embed_dim,
            "context_vocab": self.context_vocab,
            "window": self.window,
            "phrase_min_count": self.phrase_min_count,
            "negatives": self.negatives,
            "epochs": self.epochs,
            "top_np": self.top_np,
            "top_vp": self.top_vp,
            "top_pp": self.top_pp,
            "max_candidates": self.max_candidates,
        }
        for name, value in counts.items():
            if value < 1:
                raise ConfigError(f"{name} must be >= 1, got {value}")
        if self.learning_rate <= 0:
            raise ConfigError(f"learning_rate must be > 0, got {self.learning_rate}")
        if not 0.0 < self.transition_threshold < 1.0:
            raise ConfigError(
                f"transition_threshold must be in (0, 1), got {self.transition_threshold}"
            )
        if not self.np_counts or min(self.np_counts) < 1:
            raise ConfigError("np_counts must be non-empty positive counts")
        if self.noise_distribution not in ("uniform", "unigram"):
            raise ConfigError(
                f"noise_distribution must be uniform or unigram, got {self.noise_distribution!r}"
            )
        return self


_FIELD_TYPES = {f.name: f.type for f in fields(PipelineConfig)}


def _parse_value(key, text):
    if key == "np_counts":
        try:
            return frozenset(int(v) for v in text.replace(",", " ").split())
        except ValueError as exc:
            raise ConfigError(f"bad np_counts value {text!r}") from exc
    if key == "noise_distribution":
        return text.strip()
    kind = _FIELD_TYPES[key]
    is_float = kind is float or kind == "float"
    try:
        return float(text) if is_float else int(text)
    except ValueError as exc:
        raise ConfigError(f"bad value for {key}: {text!r}") from exc


def parse_config_text(text, base=None):
    cfg = base or PipelineConfig()
    overrides = {}
    for lineno, line in enumerate(text.splitlines(), 1):
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        if "=" not in line:
            raise ConfigError(f"line {lineno}: expected key=value, got {line!r}")
        key, value = (part.strip() for part in line.split("=", 1))
        if key not in _FIELD_TYPES:
            raise ConfigError(f"line {lineno}: unknown key {key!r}")
        overrides[key] = _parse_value(key, value)
    return replace(cfg, **overrides)


def load_config(path=None, overrides=None):
    """Resolve config: defaults <- file (arg or $PHRASECAP_CONFIG) <- overrides."""
    cfg = PipelineConfig()
    path = path or os.environ.get(ENV_VAR)
    if path:
        with open(path, encoding="utf-8") as fh:
            cfg = parse_config_text(fh.read(), cfg)
    if overrides:
        parsed = {k: _parse_value(k, str(v)) for k, v in overrides.items()}
        cfg = replace(cfg, **parsed)
    return cfg.validate()
