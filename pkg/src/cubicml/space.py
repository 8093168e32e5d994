"""Search spaces of co-design hyperparameters.

A space is an ordered list of finite dimensions. Dimension order fixes the
layout of every encoding, so a space must not be mutated after parsing.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from decimal import Decimal, InvalidOperation
from pathlib import Path
from typing import Any, Iterator, Mapping, Sequence

import numpy as np
import yaml

KINDS = ("categorical", "int", "decimal", "bool")
ROLES = ("architecture", "parallelism", "infra", "other")


class SpaceError(ValueError):
    """Raised for malformed space documents or invalid configurations."""


def _as_decimal(x: Any, what: str) -> Decimal:
    try:
        return Decimal(str(x))
    except InvalidOperation as exc:
        raise SpaceError(f"{what}: not a number: {x!r}") from exc


@dataclass(frozen=True)
class Dimension:
    """One tunable knob with a finite, canonically ordered value set.

    Stepped kinds keep ``min``/``max``/``step`` as exact decimals; the k-th
    value is ``min + k * step`` computed in decimal arithmetic, so decimal
    steps such as 0.01 never accumulate float error.
    """

    name: str
    kind: str
    labels: tuple[str, ...] = ()
    min: Decimal | None = None
    max: Decimal | None = None
    step: Decimal | None = None
    role: str = "other"
    values: tuple = field(init=False, repr=False, compare=False)

    def __post_init__(self) -> None:
        if not self.name or not isinstance(self.name, str):
            raise SpaceError("dimension name must be a non-empty string")
        if self.kind not in KINDS:
            raise SpaceError(f"dimension {self.name!r}: unknown kind {self.kind!r}")
        if self.role not in ROLES:
            raise SpaceError(f"dimension {self.name!r}: unknown role {self.role!r}")
        if self.kind == "categorical":
            if len(self.labels) < 2:
                raise SpaceError(f"dimension {self.name!r}: categorical needs >= 2 labels")
            if len(set(self.labels)) != len(self.labels):
                raise SpaceError(f"dimension {self.name!r}: duplicate categorical labels")
            values: tuple = tuple(self.labels)
        elif self.kind == "bool":
            values = (False, True)
        else:
            lo, hi, st = self.min, self.max, self.step
            if lo is None or hi is None or st is None:
                raise SpaceError(f"dimension {self.name!r}: stepped kinds need min, max and step")
            if st <= 0:
                raise SpaceError(f"dimension {self.name!r}: step must be > 0")
            if lo > hi:
                raise SpaceError(f"dimension {self.name!r}: min > max")
            if (hi - lo) % st != 0:
                raise SpaceError(f"dimension {self.name!r}: (max - min) not divisible by step")
            n = int((hi - lo) / st) + 1
            if self.kind == "int":
                if lo != lo.to_integral_value() or st != st.to_integral_value():
                    raise SpaceError(f"dimension {self.name!r}: int kind needs integral bounds")
                values = tuple(int(lo) + k * int(st) for k in range(n))
            else:
                values = tuple(float(lo + k * st) for k in range(n))
        object.__setattr__(self, "values", values)

    @property
    def size(self) -> int:
        return len(self.values)

    def index(self, value: Any) -> int:
        """Position of ``value`` in the canonical order."""
        if self.kind == "categorical":
            try:
                return self.labels.index(value)
            except ValueError:
                pass
        elif self.kind == "bool":
            if isinstance(value, (bool, np.bool_)):
                return int(bool(value))
        elif isinstance(value, (int, float, np.integer, np.floating)) and not isinstance(value, bool):
            if self.kind == "int" and float(value) != int(value):
                raise SpaceError(f"{self.name}: {value!r} is not an integer")
            k, rem = divmod(_as_decimal(value, self.name) - self.min, self.step)
            if rem == 0 and 0 <= k < self.size:
                return int(k)
        raise SpaceError(f"{self.name}: value {value!r} not in dimension")

    def to_doc(self) -> dict:
        doc: dict[str, Any] = {"name": self.name, "kind": self.kind}
        if self.kind == "categorical":
            doc["values"] = list(self.labels)
        elif self.kind in ("int", "decimal"):
            conv = int if self.kind == "int" else str
            doc.update(min=conv(self.min), max=conv(self.max), step=conv(self.step))
        if self.role != "other":
            doc["role"] = self.role
        return doc

    @classmethod
    def from_doc(cls, doc: Mapping[str, Any]) -> "Dimension":
        if not isinstance(doc, Mapping):
            raise SpaceError(f"dimension entry must be a mapping, got {doc!r}")
        name = doc.get("name")
        kind = doc.get("kind")
        role = doc.get("role", "other")
        if kind == "categorical":
            labels = doc.get("values") or []
            return cls(name, kind, labels=tuple(str(v) for v in labels), role=role)
        if kind in ("int", "decimal"):
            for key in ("min", "max", "step"):
                if key not in doc:
                    raise SpaceError(f"dimension {name!r}: missing {key!r}")
            return cls(
                name,
                kind,
                min=_as_decimal(doc["min"], f"{name}.min"),
                max=_as_decimal(doc["max"], f"{name}.max"),
                step=_as_decimal(doc["step"], f"{name}.step"),
                role=role,
            )
        return cls(name, kind, role=role)


@dataclass(frozen=True)
class ConfigPoint:
    """A full assignment of values, in dimension order.

    Hashable, so it can be deduplicated and looked up in history sets.
    """

    items: tuple[tuple[str, Any], ...]
    space_name: str | None = None
    space_version: int | None = None

    @classmethod
    def from_mapping(cls, mapping: Mapping[str, Any], space_name=None, space_version=None) -> "ConfigPoint":
        return cls(tuple(mapping.items()), space_name, space_version)

    def __getitem__(self, name: str) -> Any:
        for key, value in self.items:
            if key == name:
                return value
        raise KeyError(name)

    def as_dict(self) -> dict[str, Any]:
        return dict(self.items)

    def key(self) -> tuple:
        """Identity independent of the space back-reference."""
        return tuple(sorted(self.items, key=lambda kv: kv[0]))


@dataclass(frozen=True)
class MixedLayout:
    names: tuple[str, ...]
    categorical: tuple[bool, ...]

    def __len__(self) -> int:
        return len(self.names)


@dataclass(frozen=True)
class SearchSpace:
    name: str
    version: int
    dimensions: tuple[Dimension, ...]

    def __post_init__(self) -> None:
        names = [d.name for d in self.dimensions]
        dupes = sorted({n for n in names if names.count(n) > 1})
        if dupes:
            raise SpaceError(f"space {self.name!r}: duplicate dimension name(s) {dupes}")

    def __len__(self) -> int:
        return len(self.dimensions)

    def __iter__(self) -> Iterator[Dimension]:
        return iter(self.dimensions)

    @property
    def names(self) -> tuple[str, ...]:
        return tuple(d.name for d in self.dimensions)

    @property
    def sizes(self) -> tuple[int, ...]:
        return tuple(d.size for d in self.dimensions)

    def dimension(self, name: str) -> Dimension:
        for d in self.dimensions:
            if d.name == name:
                return d
        raise KeyError(name)

    def cardinality(self) -> int:
        return math.prod(self.sizes)

    # -- conversion between configs and value indices ---------------------

    def indices(self, config: ConfigPoint | Mapping[str, Any]) -> np.ndarray:
        mapping = config.as_dict() if isinstance(config, ConfigPoint) else dict(config)
        if set(mapping) != set(self.names):
            missing = sorted(set(self.names) - set(mapping))
            extra = sorted(set(mapping) - set(self.names))
            raise SpaceError(f"config does not match space {self.name!r}: missing={missing} extra={extra}")
        return np.array([d.index(mapping[d.name]) for d in self.dimensions], dtype=np.int64)

    def from_indices(self, idx: Sequence[int]) -> ConfigPoint:
        return ConfigPoint(
            tuple((d.name, d.values[int(i)]) for d, i in zip(self.dimensions, idx)),
            self.name,
            self.version,
        )

    def validate(self, config: ConfigPoint | Mapping[str, Any]) -> ConfigPoint:
        """Return ``config`` re-expressed in canonical order; raise if invalid."""
        return self.from_indices(self.indices(config))

    def enumerate(self) -> Iterator[ConfigPoint]:
        """All configurations in lexicographic index order."""
        for idx in np.ndindex(*self.sizes):
            yield self.from_indices(idx)

    # -- sampling ----------------------------------------------------------

    def sample_indices(self, rng: np.random.Generator, n: int) -> np.ndarray:
        cols = [rng.integers(0, s, size=n) for s in self.sizes]
        if not cols:
            return np.zeros((n, 0), dtype=np.int64)
        return np.stack(cols, axis=1).astype(np.int64)

    def sample_uniform(self, seed: int) -> ConfigPoint:
        rng = np.random.default_rng(seed)
        return self.from_indices(self.sample_indices(rng, 1)[0])

    # -- encodings ---------------------------------------------------------

    @property
    def onehot_width(self) -> int:
        return sum(self.sizes)

    def onehot_from_indices(self, idx: np.ndarray) -> np.ndarray:
        idx = np.atleast_2d(np.asarray(idx, dtype=np.int64))
        offsets = np.concatenate([[0], np.cumsum(self.sizes)[:-1]]).astype(np.int64)
        out = np.zeros((idx.shape[0], self.onehot_width))
        if len(self.dimensions):
            rows = np.repeat(np.arange(idx.shape[0]), idx.shape[1])
            out[rows, (idx + offsets).ravel()] = 1.0
        return out

    def encode_onehot(self, config: ConfigPoint | Mapping[str, Any]) -> np.ndarray:
        return self.onehot_from_indices(self.indices(config))[0]

    def decode_onehot(self, vector: Sequence[float]) -> ConfigPoint:
        vector = np.asarray(vector)
        if vector.shape != (self.onehot_width,):
            raise SpaceError(f"one-hot vector has length {vector.shape}, expected {self.onehot_width}")
        idx, start = [], 0
        for size in self.sizes:
            block = vector[start : start + size]
            if block.sum() != 1 or not np.isin(block, (0, 1)).all():
                raise SpaceError("one-hot block does not contain exactly one 1")
            idx.append(int(np.argmax(block)))
            start += size
        return self.from_indices(idx)

    @property
    def mixed_layout(self) -> MixedLayout:
        return MixedLayout(
            self.names,
            tuple(d.kind in ("categorical", "bool") for d in self.dimensions),
        )

    def mixed_from_indices(self, idx: np.ndarray) -> np.ndarray:
        """Numeric dims carry their raw value, categorical dims their index."""
        idx = np.atleast_2d(np.asarray(idx, dtype=np.int64))
        out = np.empty(idx.shape, dtype=float)
        for j, d in enumerate(self.dimensions):
            if d.kind in ("categorical", "bool"):
                out[:, j] = idx[:, j]
            else:
                out[:, j] = np.asarray(d.values, dtype=float)[idx[:, j]]
        return out

    def encode_mixed(self, config: ConfigPoint | Mapping[str, Any]) -> tuple[np.ndarray, MixedLayout]:
        return self.mixed_from_indices(self.indices(config))[0], self.mixed_layout

    def decode_mixed(self, vector: Sequence[float]) -> ConfigPoint:
        vector = np.asarray(vector, dtype=float)
        if vector.shape != (len(self),):
            raise SpaceError(f"mixed vector has length {vector.shape}, expected {len(self)}")
        idx = []
        for d, x in zip(self.dimensions, vector):
            if d.kind in ("categorical", "bool"):
                if x != int(x) or not 0 <= x < d.size:
                    raise SpaceError(f"{d.name}: bad category index {x}")
                idx.append(int(x))
            else:
                idx.append(d.index(int(x) if d.kind == "int" else float(x)))
        return self.from_indices(idx)

    # -- documents ---------------------------------------------------------

    def to_doc(self) -> dict:
        return {
            "name": self.name,
            "version": self.version,
            "dimensions": [d.to_doc() for d in self.dimensions],
        }


def parse_space(text: str | Mapping[str, Any]) -> SearchSpace:
    """Build a validated space from a YAML/JSON document or an already-parsed mapping."""
    if isinstance(text, str):
        try:
            doc = yaml.safe_load(text)
        except yaml.YAMLError as exc:
            raise SpaceError(f"cannot parse space document: {exc}") from exc
    else:
        doc = text
    if not isinstance(doc, Mapping):
        raise SpaceError("space document must be a mapping")
    dims = doc.get("dimensions")
    if dims is None:
        dims = []
    if not isinstance(dims, list):
        raise SpaceError("'dimensions' must be a list")
    return SearchSpace(
        name=str(doc.get("name", "unnamed")),
        version=int(doc.get("version", 1)),
        dimensions=tuple(Dimension.from_doc(d) for d in dims),
    )


def load_space(path: str | Path) -> SearchSpace:
    return parse_space(Path(path).read_text())


def cardinality(space: SearchSpace) -> int:
    return space.cardinality()


def sample_uniform(space: SearchSpace, seed: int) -> ConfigPoint:
    return space.sample_uniform(seed)


def encode_onehot(space: SearchSpace, config) -> np.ndarray:
    return space.encode_onehot(config)


def encode_mixed(space: SearchSpace, config) -> tuple[np.ndarray, MixedLayout]:
    return space.encode_mixed(config)
