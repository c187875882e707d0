"""Characteristic labels and the data dictionary that scopes them.

A :class:`DataDictionary` declares every label type and its values up
front; all labels attached to nodes or data during an analysis must come
from that closed vocabulary.  Internally each (type, value) pair is
assigned a bit position in declaration order, so a set of labels is a
single integer mask and the propagation hot path works on plain ints.
:class:`LabelSet` wraps such a mask and decodes it back to
:class:`Label` objects lazily.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from typing import Iterable, Iterator

from .errors import DictionaryError

__all__ = [
    "IDENTIFIER_RE",
    "is_identifier",
    "Label",
    "LabelType",
    "DataDictionary",
    "LabelSet",
    "validate_dictionary",
]

IDENTIFIER_RE = re.compile(r"[A-Za-z_][A-Za-z0-9_]*\Z")


def is_identifier(name: object) -> bool:
    return isinstance(name, str) and IDENTIFIER_RE.match(name) is not None


@dataclass(frozen=True, slots=True)
class Label:
    """One (type, value) characteristic, e.g. ``Encryption.Encrypted``."""

    type: str
    value: str

    def __str__(self) -> str:
        return f"{self.type}.{self.value}"


@dataclass(frozen=True, slots=True)
class LabelType:
    """A named label type together with its closed set of values."""

    name: str
    values: tuple[str, ...]

    def __init__(self, name: str, values: Iterable[str]):
        object.__setattr__(self, "name", name)
        object.__setattr__(self, "values", tuple(values))


class DataDictionary:
    """The closed vocabulary of label types and values for one analysis.

    Equality is structural (same types with the same values in the same
    order).  The dictionary also owns the bit layout used by mask-based
    label sets and a small cache for lowered assignment programs, so a
    freshly loaded model starts with cold caches.
    """

    __slots__ = (
        "label_types",
        "_bit_of",
        "_label_at",
        "_values_of",
        "_type_masks",
        "_universe",
        "_hash",
        "lower_cache",
    )

    def __init__(self, label_types: Iterable[LabelType]):
        self.label_types = tuple(label_types)
        bit_of: dict[tuple[str, str], int] = {}
        label_at: list[Label] = []
        values_of: dict[str, tuple[str, ...]] = {}
        type_masks: dict[str, int] = {}
        for lt in self.label_types:
            if lt.name in values_of:
                # duplicate type name; validate_dictionary reports it
                continue
            mask = 0
            values_of[lt.name] = lt.values
            for value in lt.values:
                key = (lt.name, value)
                if key in bit_of:
                    continue
                bit = len(label_at)
                bit_of[key] = bit
                label_at.append(Label(lt.name, value))
                mask |= 1 << bit
            type_masks[lt.name] = mask
        self._bit_of = bit_of
        self._label_at = tuple(label_at)
        self._values_of = values_of
        self._type_masks = type_masks
        self._universe = (1 << len(label_at)) - 1
        self._hash = hash(self.label_types)
        self.lower_cache: dict = {}

    # -- vocabulary lookups -------------------------------------------------

    def has_type(self, type_name: str) -> bool:
        return type_name in self._values_of

    def has_label(self, type_name: str, value: str) -> bool:
        return (type_name, value) in self._bit_of

    def values_of(self, type_name: str) -> tuple[str, ...]:
        try:
            return self._values_of[type_name]
        except KeyError:
            raise DictionaryError(f"unknown label type '{type_name}'") from None

    def label(self, type_name: str, value: str) -> Label:
        bit = self._bit_of.get((type_name, value))
        if bit is None:
            if type_name not in self._values_of:
                raise DictionaryError(f"unknown label type '{type_name}'")
            raise DictionaryError(f"unknown value '{value}' for label type '{type_name}'")
        return self._label_at[bit]

    def bit(self, type_name: str, value: str) -> int:
        """Bit position of a (type, value) pair; raises for unknown pairs."""
        bit = self._bit_of.get((type_name, value))
        if bit is None:
            self.label(type_name, value)  # raises with the precise message
        return bit

    @property
    def size(self) -> int:
        """Number of distinct (type, value) pairs."""
        return len(self._label_at)

    @property
    def universe_mask(self) -> int:
        return self._universe

    def type_mask(self, type_name: str) -> int:
        try:
            return self._type_masks[type_name]
        except KeyError:
            raise DictionaryError(f"unknown label type '{type_name}'") from None

    def iter_labels(self) -> Iterator[Label]:
        return iter(self._label_at)

    # -- label sets ---------------------------------------------------------

    def label_set(self, labels: Iterable[Label] = ()) -> LabelSet:
        mask = 0
        for label in labels:
            mask |= 1 << self.bit(label.type, label.value)
        return LabelSet(self, mask)

    def empty_set(self) -> LabelSet:
        return LabelSet(self, 0)

    def set_from_mask(self, mask: int) -> LabelSet:
        return LabelSet(self, mask)

    def __eq__(self, other) -> bool:
        if self is other:
            return True
        if not isinstance(other, DataDictionary):
            return NotImplemented
        return self.label_types == other.label_types

    def __hash__(self) -> int:
        return self._hash

    def __repr__(self) -> str:
        return f"DataDictionary({len(self.label_types)} types, {self.size} labels)"


class LabelSet:
    """An immutable set of labels bound to one :class:`DataDictionary`.

    Backed by a bit mask; decoding to :class:`Label` objects happens on
    first iteration and is cached.  Operations across two different
    dictionaries are rejected rather than silently mixed.
    """

    __slots__ = ("_dictionary", "_mask", "_decoded")

    def __init__(self, dictionary: DataDictionary, mask: int = 0):
        self._dictionary = dictionary
        self._mask = mask
        self._decoded = None

    @property
    def dictionary(self) -> DataDictionary:
        return self._dictionary

    @property
    def mask(self) -> int:
        return self._mask

    def _check_same(self, other: "LabelSet") -> None:
        if self._dictionary is not other._dictionary and self._dictionary != other._dictionary:
            raise DictionaryError("label sets belong to different data dictionaries")

    def union(self, other: "LabelSet") -> "LabelSet":
        self._check_same(other)
        return LabelSet(self._dictionary, self._mask | other._mask)

    def intersection(self, other: "LabelSet") -> "LabelSet":
        self._check_same(other)
        return LabelSet(self._dictionary, self._mask & other._mask)

    def contains(self, label: Label) -> bool:
        """Membership test; the label must exist in the dictionary."""
        return bool(self._mask >> self._dictionary.bit(label.type, label.value) & 1)

    def has(self, type_name: str, value: str) -> bool:
        return bool(self._mask >> self._dictionary.bit(type_name, value) & 1)

    def __contains__(self, label: Label) -> bool:
        return self.contains(label)

    def _decode(self) -> tuple[Label, ...]:
        if self._decoded is None:
            label_at = self._dictionary._label_at
            mask = self._mask
            out = []
            bit = 0
            while mask:
                if mask & 1:
                    out.append(label_at[bit])
                mask >>= 1
                bit += 1
            self._decoded = tuple(out)
        return self._decoded

    def __iter__(self) -> Iterator[Label]:
        return iter(self._decode())

    def __len__(self) -> int:
        return self._mask.bit_count()

    def __bool__(self) -> bool:
        return self._mask != 0

    def names(self) -> list[str]:
        """``Type.Value`` strings sorted by type then value."""
        return sorted(str(label) for label in self._decode())

    def __eq__(self, other) -> bool:
        if not isinstance(other, LabelSet):
            return NotImplemented
        return self._mask == other._mask and self._dictionary == other._dictionary

    def __hash__(self) -> int:
        return hash((self._mask, self._dictionary))

    def __repr__(self) -> str:
        inner = ", ".join(self.names())
        return "{" + inner + "}"


def validate_dictionary(dictionary: DataDictionary) -> list[str]:
    """Check well-formedness and return one message per defect found.

    Valid means: unique type names, at least one value per type, unique
    values within a type, and every name a plain identifier.
    """
    defects: list[str] = []
    seen_types: set[str] = set()
    for lt in dictionary.label_types:
        if not is_identifier(lt.name):
            defects.append(f"label type name {lt.name!r} is not a valid identifier")
            continue
        if lt.name in seen_types:
            defects.append(f"duplicate label type name '{lt.name}'")
            continue
        seen_types.add(lt.name)
        if not lt.values:
            defects.append(f"label type '{lt.name}' declares no values")
        seen_values: set[str] = set()
        for value in lt.values:
            if not is_identifier(value):
                defects.append(
                    f"label type '{lt.name}': value {value!r} is not a valid identifier"
                )
            elif value in seen_values:
                defects.append(f"label type '{lt.name}': duplicate value '{value}'")
            else:
                seen_values.add(value)
    return defects
