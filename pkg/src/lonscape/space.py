"""Discrete configuration spaces, neighborhoods and canonical keys."""

from __future__ import annotations

import hashlib
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Iterator, Sequence

import numpy as np

from .errors import ValidationError

#: A configuration is a tuple of domain indices, one per option.
Configuration = tuple[int, ...]

KEY_SEPARATOR = "|"
_FORBIDDEN = (KEY_SEPARATOR, ",", "=", "\n", "\r")


@dataclass(frozen=True)
class OptionSpec:
    name: str
    domain: tuple[str, ...]

    def __post_init__(self) -> None:
        name = self.name.strip()
        if not name or any(c in name for c in _FORBIDDEN) or "{" in name or "}" in name:
            raise ValidationError(f"invalid option name {self.name!r}")
        if not self.domain:
            raise ValidationError(f"option {name!r} has an empty domain")
        domain = tuple(str(v) for v in self.domain)
        for token in domain:
            if not token or any(c in token for c in _FORBIDDEN):
                raise ValidationError(f"option {name!r}: invalid value token {token!r}")
        if len(set(domain)) != len(domain):
            raise ValidationError(f"option {name!r} has duplicate values")
        object.__setattr__(self, "name", name)
        object.__setattr__(self, "domain", domain)


@dataclass(frozen=True)
class ConfigurationSpace:
    """Ordered options; the order fixes the canonical key layout."""

    options: tuple[OptionSpec, ...]

    def __post_init__(self) -> None:
        options = tuple(self.options)
        if not options:
            raise ValidationError("a configuration space needs at least one option")
        names = [o.name for o in options]
        if len(set(names)) != len(names):
            raise ValidationError("option names must be unique")
        object.__setattr__(self, "options", options)

    @classmethod
    def binary(cls, n: int, prefix: str = "x") -> ConfigurationSpace:
        return cls(tuple(OptionSpec(f"{prefix}{i}", ("0", "1")) for i in range(n)))

    @property
    def n_options(self) -> int:
        return len(self.options)

    @property
    def names(self) -> tuple[str, ...]:
        return tuple(o.name for o in self.options)

    @property
    def sizes(self) -> tuple[int, ...]:
        return tuple(len(o.domain) for o in self.options)

    @property
    def size(self) -> int:
        return math.prod(self.sizes)

    def validate(self, x: Sequence[int]) -> Configuration:
        x = tuple(x)
        if len(x) != self.n_options:
            raise ValidationError(
                f"configuration has {len(x)} values, space has {self.n_options} options"
            )
        for i, (v, size) in enumerate(zip(x, self.sizes)):
            if not isinstance(v, (int, np.integer)) or not 0 <= v < size:
                raise ValidationError(
                    f"value {v!r} out of range for option {self.options[i].name!r}"
                )
        return tuple(int(v) for v in x)

    def tokens(self, x: Configuration) -> tuple[str, ...]:
        return tuple(o.domain[v] for o, v in zip(self.options, x))

    def from_tokens(self, tokens: Sequence[str]) -> Configuration:
        if len(tokens) != self.n_options:
            raise ValidationError(f"expected {self.n_options} tokens, got {len(tokens)}")
        out = []
        for opt, tok in zip(self.options, tokens):
            try:
                out.append(opt.domain.index(tok.strip()))
            except ValueError:
                raise ValidationError(f"{tok!r} is not in the domain of {opt.name!r}") from None
        return tuple(out)

    def enumerate(self) -> Iterator[Configuration]:
        """All configurations in lexicographic index order."""
        return (tuple(int(v) for v in idx) for idx in np.ndindex(*self.sizes))

    def to_text(self) -> str:
        return "".join(f"{o.name}={','.join(o.domain)}\n" for o in self.options)

    @property
    def space_hash(self) -> str:
        return hashlib.sha256(self.to_text().encode("utf-8")).hexdigest()[:16]


def neighborhood(space: ConfigurationSpace, x: Sequence[int]) -> list[Configuration]:
    """Every configuration that differs from ``x`` in exactly one option.

    Order is option index ascending, then domain index ascending.
    """
    x = space.validate(x)
    return _neighbors(space.sizes, x)


def _neighbors(sizes: Sequence[int], x: Configuration) -> list[Configuration]:
    out = []
    for i, size in enumerate(sizes):
        for v in range(size):
            if v != x[i]:
                out.append(x[:i] + (v,) + x[i + 1 :])
    return out


def random_sample(space: ConfigurationSpace, rng: np.random.Generator) -> Configuration:
    return tuple(int(rng.integers(size)) for size in space.sizes)


def canonical_key(space: ConfigurationSpace, x: Sequence[int]) -> str:
    return KEY_SEPARATOR.join(space.tokens(space.validate(x)))


def parse_key(space: ConfigurationSpace, key: str) -> Configuration:
    return space.from_tokens(key.split(KEY_SEPARATOR))


def hamming_distance(x: Sequence[int], y: Sequence[int]) -> int:
    """Number of options on which two configurations differ (diagnostic only)."""
    if len(x) != len(y):
        raise ValidationError("configurations of different length")
    return sum(a != b for a, b in zip(x, y))


def parse_space(text: str) -> ConfigurationSpace:
    options = []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        name, sep, values = line.partition("=")
        if not sep:
            raise ValidationError(f"line {lineno}: expected 'name=v1,v2,...'")
        try:
            options.append(OptionSpec(name, tuple(v.strip() for v in values.split(","))))
        except ValidationError as exc:
            raise ValidationError(f"line {lineno}: {exc}") from None
    return ConfigurationSpace(tuple(options))


def load_space(path: str | Path) -> ConfigurationSpace:
    return parse_space(Path(path).read_text(encoding="utf-8"))
