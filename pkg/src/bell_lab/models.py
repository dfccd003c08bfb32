"""Core data structures for contextual local-hidden-variable models.

A :class:`ContextualModel` couples a shared source distribution over pairs
of hidden values with, per side and per measurement setting, a local noise
distribution and a deterministic +/-1 response table.  Alice's response for
setting ``x`` reads the source value sent to her side plus her local value
for ``x``; Bob's side is symmetric.  Each side declares exactly two
settings; the first declared label plays the unprimed role everywhere.

All probabilities are exact rationals (:class:`fractions.Fraction`).
Floats are rejected at construction so that every downstream expectation
is computed without rounding; floats only ever appear in Monte Carlo
estimates and report rendering.
"""

from __future__ import annotations

import hashlib
import json
import re
from dataclasses import dataclass
from decimal import Decimal, localcontext
from fractions import Fraction
from typing import Iterable, Mapping

RATIONAL_PATTERN = re.compile(r"-?[0-9]+(/[1-9][0-9]*)?")

DEFAULT_ALICE_LABELS = ("x", "x'")
DEFAULT_BOB_LABELS = ("y", "y'")


class ModelFormatError(ValueError):
    """A model document is structurally malformed.

    Raised for bad JSON shape, unknown fields, wrong value types, or
    rational strings that do not match ``-?[0-9]+(/[1-9][0-9]*)?``.
    Semantic problems (weights not summing to one, outcomes outside
    {-1,+1}, dimension mismatches) are not format errors; they are
    reported by :func:`validate_model`.
    """


class InvalidModelError(ValueError):
    """A structurally well-formed model violates a semantic invariant."""

    def __init__(self, violations: Iterable[str]):
        self.violations = list(violations)
        super().__init__("invalid model: " + "; ".join(self.violations))


class UnknownSettingError(ValueError):
    """A context names a setting label the model does not declare."""


def parse_rational(text: str) -> Fraction:
    """Parse a canonical rational string like ``"-3"`` or ``"5/12"``."""
    if not isinstance(text, str) or RATIONAL_PATTERN.fullmatch(text) is None:
        raise ModelFormatError(f"invalid rational string {text!r}")
    return Fraction(text)


def format_rational(value: Fraction) -> str:
    """Render a Fraction canonically: ``"a/b"``, or ``"a"`` when b == 1."""
    if value.denominator == 1:
        return str(value.numerator)
    return f"{value.numerator}/{value.denominator}"


def decimal_str(value: Fraction, digits: int = 12) -> str:
    """Decimal rendering of a rational to `digits` significant digits.

    Convenience only; verdicts never depend on this rounding.
    """
    with localcontext() as ctx:
        ctx.prec = digits
        quotient = Decimal(value.numerator) / Decimal(value.denominator)
    return str(quotient)


def _as_fraction(value, where: str) -> Fraction:
    if isinstance(value, bool) or isinstance(value, float):
        raise TypeError(f"{where}: exact rational required, got {value!r}")
    if isinstance(value, int):
        return Fraction(value)
    if isinstance(value, Fraction):
        return value
    raise TypeError(f"{where}: expected Fraction or int, got {type(value).__name__}")


@dataclass(frozen=True)
class Pmf:
    """Weights over a finite, index-identified support.

    Weight values are stored as given; whether they form a probability
    distribution (non-negative, summing to exactly one) is checked by
    :func:`validate_model`, not at construction.
    """

    weights: tuple[Fraction, ...]

    def __post_init__(self):
        coerced = tuple(_as_fraction(w, "pmf weight") for w in self.weights)
        object.__setattr__(self, "weights", coerced)

    @property
    def size(self) -> int:
        return len(self.weights)

    def mass(self) -> Fraction:
        return sum(self.weights, Fraction(0))


@dataclass(frozen=True)
class JointPmf:
    """Source distribution, indexed by (alice share, bob share)."""

    weights: tuple[tuple[Fraction, ...], ...]

    def __post_init__(self):
        coerced = tuple(
            tuple(_as_fraction(w, "source weight") for w in row) for row in self.weights
        )
        object.__setattr__(self, "weights", coerced)

    @property
    def rows(self) -> int:
        return len(self.weights)

    @property
    def cols(self) -> int:
        return len(self.weights[0]) if self.weights else 0

    def mass(self) -> Fraction:
        return sum((w for row in self.weights for w in row), Fraction(0))

    def flattened(self) -> tuple[Fraction, ...]:
        """Row-major flattening; cell (i, j) lands at index i * cols + j."""
        return tuple(w for row in self.weights for w in row)


@dataclass(frozen=True)
class ResponseTable:
    """Deterministic outcomes, indexed by (source share index, local index)."""

    side: str
    setting: str
    values: tuple[tuple[int, ...], ...]

    def __post_init__(self):
        coerced = tuple(tuple(int(v) for v in row) for row in self.values)
        object.__setattr__(self, "values", coerced)

    @property
    def rows(self) -> int:
        return len(self.values)

    @property
    def cols(self) -> int:
        return len(self.values[0]) if self.values else 0


@dataclass(frozen=True)
class LocalSetting:
    """One setting's measurement channel: local noise pmf plus response table."""

    pmf: Pmf
    table: ResponseTable


@dataclass(frozen=True)
class Context:
    """One run configuration: one setting label per side."""

    alice: str
    bob: str


@dataclass(frozen=True)
class ContextualModel:
    source: JointPmf
    alice: dict[str, LocalSetting]
    bob: dict[str, LocalSetting]

    def __post_init__(self):
        # Defensive copies; treat instances as immutable after construction.
        object.__setattr__(self, "alice", dict(self.alice))
        object.__setattr__(self, "bob", dict(self.bob))

    @property
    def alice_labels(self) -> tuple[str, ...]:
        return tuple(self.alice)

    @property
    def bob_labels(self) -> tuple[str, ...]:
        return tuple(self.bob)

    def contexts(self) -> tuple[Context, Context, Context, Context]:
        """The four contexts in canonical order: (x,y), (x,y'), (x',y), (x',y')."""
        a, b = self.alice_labels, self.bob_labels
        if len(a) != 2 or len(b) != 2:
            raise InvalidModelError(
                [f"expected exactly 2 settings per side, found {len(a)} alice / {len(b)} bob"]
            )
        return (
            Context(a[0], b[0]),
            Context(a[0], b[1]),
            Context(a[1], b[0]),
            Context(a[1], b[1]),
        )

    def local(self, side: str, label: str) -> LocalSetting:
        settings = self.alice if side == "alice" else self.bob
        try:
            return settings[label]
        except KeyError:
            raise UnknownSettingError(f"{side} has no setting {label!r}") from None


def _check_pmf(weights: tuple[Fraction, ...], where: str, problems: list[str]) -> None:
    if not weights:
        problems.append(f"{where}: empty support")
        return
    for k, w in enumerate(weights):
        if w < 0:
            problems.append(f"{where}[{k}]: negative weight {format_rational(w)}")
    total = sum(weights, Fraction(0))
    if total != 1:
        problems.append(f"{where}: weights sum to {format_rational(total)}, expected 1")


def validate_model(model: ContextualModel) -> list[str]:
    """Collect every invariant violation; an empty list means the model is valid.

    Total by design: diagnostics are the return value and malformed input
    never raises.  Each malformed field yields one entry with a locator.
    """
    problems: list[str] = []

    src = model.source
    if src.rows == 0 or src.cols == 0:
        problems.append("source: empty support")
    else:
        width = src.cols
        ragged = False
        for i, row in enumerate(src.weights):
            if len(row) != width:
                problems.append(f"source: row {i} has {len(row)} entries, expected {width}")
                ragged = True
        for i, row in enumerate(src.weights):
            for j, w in enumerate(row):
                if w < 0:
                    problems.append(f"source[{i}][{j}]: negative weight {format_rational(w)}")
        if not ragged:
            total = src.mass()
            if total != 1:
                problems.append(f"source: weights sum to {format_rational(total)}, expected 1")

    for side, settings, source_dim in (
        ("alice", model.alice, src.rows),
        ("bob", model.bob, src.cols),
    ):
        if len(settings) != 2:
            problems.append(f"{side}: expected exactly 2 settings, found {len(settings)}")
        for label, local in settings.items():
            where = f"{side}[{label!r}]"
            _check_pmf(local.pmf.weights, f"{where}.pmf", problems)
            table = local.table
            if table.side != side or table.setting != label:
                problems.append(
                    f"{where}.table: labeled {table.side}/{table.setting!r}, "
                    f"expected {side}/{label!r}"
                )
            if table.rows != source_dim:
                problems.append(
                    f"{where}.table: {table.rows} rows, expected source support {source_dim}"
                )
            for i, row in enumerate(table.values):
                if len(row) != local.pmf.size:
                    problems.append(
                        f"{where}.table: row {i} has {len(row)} entries, "
                        f"expected local support {local.pmf.size}"
                    )
            for i, row in enumerate(table.values):
                for j, v in enumerate(row):
                    if v not in (-1, 1):
                        problems.append(f"{where}.table[{i}][{j}]: outcome {v} not in {{-1,+1}}")

    return problems


def require_valid(model: ContextualModel) -> None:
    problems = validate_model(model)
    if problems:
        raise InvalidModelError(problems)


@dataclass(frozen=True)
class Dimensions:
    source_alice: int
    source_bob: int
    alice_locals: dict[str, int]
    bob_locals: dict[str, int]
    unified_size: int


def model_dimensions(model: ContextualModel) -> Dimensions:
    """Exact cardinalities of all six hidden-variable spaces.

    The unified size, their product, is the number of cells in the single
    product sample space on which all four contexts coexist.
    """
    require_valid(model)
    alice_locals = {label: s.pmf.size for label, s in model.alice.items()}
    bob_locals = {label: s.pmf.size for label, s in model.bob.items()}
    size = model.source.rows * model.source.cols
    for n in alice_locals.values():
        size *= n
    for n in bob_locals.values():
        size *= n
    return Dimensions(
        source_alice=model.source.rows,
        source_bob=model.source.cols,
        alice_locals=alice_locals,
        bob_locals=bob_locals,
        unified_size=size,
    )


# ---------------------------------------------------------------------------
# Model documents.
#
# UTF-8 JSON with exactly these fields (unknown fields are rejected):
#
#   {
#     "alice":  {"<label>": {"pmf": ["3/4", "1/4"], "table": [[1, -1], [-1, 1]]},
#                "<label'>": {...}},
#     "bob":    {...},
#     "source": [["1/2", "0"], ["0", "1/2"]]
#   }
#
# source rows index Alice's share, columns Bob's share.  Table rows index
# the source share, columns the local value.  Declaration order of the two
# labels per side fixes which is the unprimed setting.
# ---------------------------------------------------------------------------


def model_to_dict(model: ContextualModel) -> dict:
    def side_dict(settings: Mapping[str, LocalSetting]) -> dict:
        return {
            label: {
                "pmf": [format_rational(w) for w in local.pmf.weights],
                "table": [list(row) for row in local.table.values],
            }
            for label, local in settings.items()
        }

    return {
        "alice": side_dict(model.alice),
        "bob": side_dict(model.bob),
        "source": [[format_rational(w) for w in row] for row in model.source.weights],
    }


def canonical_json(model: ContextualModel) -> str:
    """Canonical serialization: compact, fixed key order, declared label order."""
    return json.dumps(model_to_dict(model), separators=(",", ":"))


def model_hash(model: ContextualModel) -> str:
    return hashlib.sha256(canonical_json(model).encode("utf-8")).hexdigest()


def _expect_mapping(value, where: str) -> dict:
    if not isinstance(value, dict):
        raise ModelFormatError(f"{where}: expected an object")
    return value


def _expect_keys(doc: dict, required: tuple[str, ...], where: str) -> None:
    unknown = sorted(set(doc) - set(required))
    if unknown:
        raise ModelFormatError(f"{where}: unknown field(s) {unknown}")
    missing = sorted(set(required) - set(doc))
    if missing:
        raise ModelFormatError(f"{where}: missing field(s) {missing}")


def _parse_side(side: str, doc, source_dim_hint: int) -> dict[str, LocalSetting]:
    _expect_mapping(doc, side)
    settings: dict[str, LocalSetting] = {}
    for label, entry in doc.items():
        if not isinstance(label, str):
            raise ModelFormatError(f"{side}: setting labels must be strings")
        where = f"{side}[{label!r}]"
        _expect_mapping(entry, where)
        _expect_keys(entry, ("pmf", "table"), where)
        pmf_doc = entry["pmf"]
        if not isinstance(pmf_doc, list):
            raise ModelFormatError(f"{where}.pmf: expected an array")
        weights = tuple(parse_rational(w) for w in pmf_doc)
        table_doc = entry["table"]
        if not isinstance(table_doc, list) or not all(isinstance(r, list) for r in table_doc):
            raise ModelFormatError(f"{where}.table: expected an array of arrays")
        for row in table_doc:
            for v in row:
                if isinstance(v, bool) or not isinstance(v, int):
                    raise ModelFormatError(f"{where}.table: entries must be integers")
        table = ResponseTable(
            side=side, setting=label, values=tuple(tuple(r) for r in table_doc)
        )
        settings[label] = LocalSetting(pmf=Pmf(weights), table=table)
    return settings


def model_from_dict(doc) -> ContextualModel:
    """Strict parse of a model document; see the schema comment above.

    Raises :class:`ModelFormatError` on any structural problem.  The result
    may still fail :func:`validate_model`; parsing and validation are
    separate so that diagnostics can name semantic violations precisely.
    """
    _expect_mapping(doc, "model")
    _expect_keys(doc, ("alice", "bob", "source"), "model")
    source_doc = doc["source"]
    if not isinstance(source_doc, list) or not all(isinstance(r, list) for r in source_doc):
        raise ModelFormatError("source: expected an array of arrays")
    source = JointPmf(tuple(tuple(parse_rational(w) for w in row) for row in source_doc))
    alice = _parse_side("alice", doc["alice"], source.rows)
    bob = _parse_side("bob", doc["bob"], source.cols)
    return ContextualModel(source=source, alice=alice, bob=bob)


def load_model(path) -> ContextualModel:
    with open(path, "r", encoding="utf-8") as fh:
        try:
            doc = json.load(fh)
        except json.JSONDecodeError as exc:
            raise ModelFormatError(f"{path}: invalid JSON ({exc})") from exc
    return model_from_dict(doc)


def save_model(model: ContextualModel, path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(model_to_dict(model), fh, indent=2)
        fh.write("\n")
