"""Strategy-space search: exhaustive, random sampling, and hill climbing.

Every mode evaluates candidate models through the real exact pipeline
(correlations, then the eight-pattern report), so large campaigns double
as adversarial tests of the bound certificate: any model scoring above 2
would be an engine bug, surfaced loudly.

Exhaustive enumeration fixes all pmfs to uniform and sweeps every
assignment of +/-1 response tables.  A mean of a response table under
uniform weights is just its entry sum over its entry count, and a uniform
joint source factorizes, so per-assignment correlations come from bit
counts; the eight-sum report still runs unshortcut on each one.
"""

from __future__ import annotations

import enum
import os
import random
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, replace
from fractions import Fraction

from .chsh import BoundViolationError, ChshReport, chsh_from_correlations
from .exact import CorrelationSet, correlation_set
from .models import (
    DEFAULT_ALICE_LABELS,
    DEFAULT_BOB_LABELS,
    ContextualModel,
    JointPmf,
    LocalSetting,
    Pmf,
    ResponseTable,
    format_rational,
    require_valid,
)

RNG_ALGORITHM = "python-random-mt19937"

DEFAULT_ASSIGNMENT_LIMIT = 2**24
DEFAULT_MAX_DENOMINATOR = 64

# Serial below this many assignments; process startup would dominate.
_SHARD_THRESHOLD = 2**14


class SearchLimitError(RuntimeError):
    """Exhaustive enumeration would exceed the assignment limit."""

    def __init__(self, count: int, limit: int):
        self.count = count
        self.limit = limit
        super().__init__(f"{count} table assignments exceed the limit of {limit}")


class SearchMode(enum.Enum):
    EXHAUSTIVE = "exhaustive"
    RANDOM = "random"
    HILL_CLIMB = "hill-climb"


@dataclass(frozen=True)
class SearchSpec:
    """Cardinalities order: source Alice, source Bob, then the four locals
    (Alice's two settings in declared order, then Bob's)."""

    cardinalities: tuple[int, int, int, int, int, int]
    mode: SearchMode
    seed: int = 0
    budget: int = 1
    max_denominator: int = DEFAULT_MAX_DENOMINATOR
    assignment_limit: int = DEFAULT_ASSIGNMENT_LIMIT

    def __post_init__(self):
        if len(self.cardinalities) != 6 or any(c < 1 for c in self.cardinalities):
            raise ValueError(f"cardinalities must be six counts >= 1, got {self.cardinalities}")
        if self.budget < 1:
            raise ValueError(f"budget must be >= 1, got {self.budget}")


@dataclass(frozen=True)
class SearchResult:
    best_model: ContextualModel
    best_s_max: Fraction
    evaluated: int
    improvements: tuple[tuple[int, Fraction], ...]
    rng_algorithm: str | None


def worker_count() -> int:
    raw = os.environ.get("BELL_LAB_THREADS")
    if raw is not None:
        try:
            n = int(raw)
        except ValueError:
            raise ValueError(f"BELL_LAB_THREADS must be an integer, got {raw!r}") from None
        if n < 1:
            raise ValueError(f"BELL_LAB_THREADS must be >= 1, got {n}")
        return n
    return os.cpu_count() or 1


def _table_shapes(cardinalities) -> tuple[tuple[str, str, int, int], ...]:
    s1, s2, la0, la1, lb0, lb1 = cardinalities
    return (
        ("alice", DEFAULT_ALICE_LABELS[0], s1, la0),
        ("alice", DEFAULT_ALICE_LABELS[1], s1, la1),
        ("bob", DEFAULT_BOB_LABELS[0], s2, lb0),
        ("bob", DEFAULT_BOB_LABELS[1], s2, lb1),
    )


def assignment_count(cardinalities) -> int:
    bits = sum(rows * cols for _, _, rows, cols in _table_shapes(cardinalities))
    return 1 << bits


def decode_assignment(cardinalities, assignment: int) -> ContextualModel:
    """Model for one enumeration index: uniform pmfs, tables from the bits.

    Bit k (ascending) drives flat entry k, in table order Alice first
    setting, Alice second, Bob first, Bob second, each row-major; a set
    bit means -1.
    """
    s1, s2 = cardinalities[0], cardinalities[1]
    source = JointPmf(tuple(tuple(Fraction(1, s1 * s2) for _ in range(s2)) for _ in range(s1)))
    sides: dict[str, dict[str, LocalSetting]] = {"alice": {}, "bob": {}}
    offset = 0
    for side, label, rows, cols in _table_shapes(cardinalities):
        values = tuple(
            tuple(
                -1 if assignment >> (offset + r * cols + c) & 1 else 1
                for c in range(cols)
            )
            for r in range(rows)
        )
        offset += rows * cols
        sides[side][label] = LocalSetting(
            pmf=Pmf(tuple(Fraction(1, cols) for _ in range(cols))),
            table=ResponseTable(side=side, setting=label, values=values),
        )
    return ContextualModel(source=source, alice=sides["alice"], bob=sides["bob"])


def _assignment_report(cardinalities, assignment: int) -> ChshReport:
    """Report for one assignment without materializing the model.

    Under uniform pmfs each correlation is the product of the two tables'
    entry means; entry sums come from bit counts over each table's slice.
    """
    shapes = _table_shapes(cardinalities)
    means = []
    offset = 0
    for _, _, rows, cols in shapes:
        bits = rows * cols
        ones = (assignment >> offset & ((1 << bits) - 1)).bit_count()
        means.append(Fraction(bits - 2 * ones, bits))
        offset += bits
    ma0, ma1, mb0, mb1 = means
    return chsh_from_correlations(
        CorrelationSet(ma0 * mb0, ma0 * mb1, ma1 * mb0, ma1 * mb1)
    )


def _lex_key(assignment: int, bits: int) -> int:
    """Orders assignments by their canonical model serialization.

    Serializations share structure and differ only at table entries, in
    flat-bit order; at the first differing entry "-1" sorts before "1".
    So the lexicographically smallest serialization is the assignment
    whose lowest differing bit is set: compare bit-reversed integers,
    larger key = smaller serialization.
    """
    result = 0
    for k in range(bits):
        result = result << 1 | (assignment >> k & 1)
    return result


def _enumerate_shard(args):
    cardinalities, start, stop = args
    bits = assignment_count(cardinalities).bit_length() - 1
    best_s = None
    best_key = -1
    best_assignment = start
    improvements = []
    for m in range(start, stop):
        s = _assignment_report(cardinalities, m).s_max
        if best_s is None or s > best_s:
            best_s = s
            best_key = _lex_key(m, bits)
            best_assignment = m
            improvements.append((m, s))
        elif s == best_s:
            key = _lex_key(m, bits)
            if key > best_key:
                best_key = key
                best_assignment = m
    return best_s, best_key, best_assignment, improvements, stop - start


def enumerate_deterministic(spec: SearchSpec) -> SearchResult:
    """Sweep every table assignment; exact maximum with a deterministic winner.

    The returned model is independent of worker count: shards merge by
    maximum score, ties broken toward the smallest canonical
    serialization, the same rule the serial scan applies.
    """
    if spec.mode is not SearchMode.EXHAUSTIVE:
        raise ValueError(f"mode {spec.mode.value} is not exhaustive")
    total = assignment_count(spec.cardinalities)
    if total > spec.assignment_limit:
        raise SearchLimitError(total, spec.assignment_limit)

    workers = min(worker_count(), 8)
    if total < _SHARD_THRESHOLD or workers == 1:
        shards = [_enumerate_shard((spec.cardinalities, 0, total))]
    else:
        bounds = [total * i // workers for i in range(workers + 1)]
        args = [
            (spec.cardinalities, lo, hi)
            for lo, hi in zip(bounds, bounds[1:])
            if hi > lo
        ]
        with ProcessPoolExecutor(max_workers=workers) as pool:
            shards = list(pool.map(_enumerate_shard, args))

    best_s = None
    best_key = -1
    best_assignment = 0
    improvements: list[tuple[int, Fraction]] = []
    running = None
    evaluated = 0
    for shard_s, shard_key, shard_assignment, shard_improvements, count in shards:
        evaluated += count
        for m, s in shard_improvements:
            if running is None or s > running:
                improvements.append((m, s))
                running = s
        if best_s is None or shard_s > best_s:
            best_s, best_key, best_assignment = shard_s, shard_key, shard_assignment
        elif shard_s == best_s and shard_key > best_key:
            best_key, best_assignment = shard_key, shard_assignment
    if best_s > 2:
        raise BoundViolationError(
            f"enumeration reached s_max = {format_rational(best_s)} > 2"
        )
    return SearchResult(
        best_model=decode_assignment(spec.cardinalities, best_assignment),
        best_s_max=best_s,
        evaluated=evaluated,
        improvements=tuple(improvements),
        rng_algorithm=None,
    )


def _random_pmf(size: int, denominator: int, rng: random.Random) -> tuple[Fraction, ...]:
    """Uniformly cut [0, D] at size-1 integer points; widths are the weights.

    Zero weights are possible and legal (zero-width support points).
    """
    cuts = sorted(rng.randint(0, denominator) for _ in range(size - 1))
    bounds = [0, *cuts, denominator]
    return tuple(Fraction(hi - lo, denominator) for lo, hi in zip(bounds, bounds[1:]))


def random_model(spec: SearchSpec, rng: random.Random) -> ContextualModel:
    """Draw a valid model: cut-point pmfs with bounded denominators, coin tables.

    Draw order is part of the reproducibility contract: source weights
    first, then per Alice setting its pmf then its table entries
    row-major, then Bob the same way.
    """
    s1, s2 = spec.cardinalities[0], spec.cardinalities[1]
    flat = _random_pmf(s1 * s2, spec.max_denominator, rng)
    source = JointPmf(tuple(flat[r * s2:(r + 1) * s2] for r in range(s1)))
    sides: dict[str, dict[str, LocalSetting]] = {"alice": {}, "bob": {}}
    for side, label, rows, cols in _table_shapes(spec.cardinalities):
        weights = _random_pmf(cols, spec.max_denominator, rng)
        values = tuple(
            tuple(1 - 2 * rng.getrandbits(1) for _ in range(cols)) for _ in range(rows)
        )
        sides[side][label] = LocalSetting(
            pmf=Pmf(weights),
            table=ResponseTable(side=side, setting=label, values=values),
        )
    return ContextualModel(source=source, alice=sides["alice"], bob=sides["bob"])


def _score(model: ContextualModel) -> Fraction:
    return chsh_from_correlations(correlation_set(model)).s_max


def _with_table_entry(model: ContextualModel, side: str, label: str, r: int, c: int):
    local = model.local(side, label)
    values = [list(row) for row in local.table.values]
    values[r][c] = -values[r][c]
    new_local = LocalSetting(
        pmf=local.pmf,
        table=ResponseTable(side=side, setting=label, values=tuple(map(tuple, values))),
    )
    settings = dict(model.alice if side == "alice" else model.bob)
    settings[label] = new_local
    if side == "alice":
        return replace(model, alice=settings)
    return replace(model, bob=settings)


def _moved(weights, i: int, j: int, step: Fraction):
    if weights[i] < step:
        return None
    out = list(weights)
    out[i] -= step
    out[j] += step
    return tuple(out)


def _pmf_neighbors(model: ContextualModel, step: Fraction):
    flat = model.source.flattened()
    cols = model.source.cols
    for i in range(len(flat)):
        for j in range(len(flat)):
            if i == j:
                continue
            moved = _moved(flat, i, j, step)
            if moved is None:
                continue
            rows = tuple(moved[r * cols:(r + 1) * cols] for r in range(model.source.rows))
            yield replace(model, source=JointPmf(rows))
    for side in ("alice", "bob"):
        settings = model.alice if side == "alice" else model.bob
        for label, local in settings.items():
            weights = local.pmf.weights
            for i in range(len(weights)):
                for j in range(len(weights)):
                    if i == j:
                        continue
                    moved = _moved(weights, i, j, step)
                    if moved is None:
                        continue
                    updated = dict(settings)
                    updated[label] = LocalSetting(pmf=Pmf(moved), table=local.table)
                    if side == "alice":
                        yield replace(model, alice=updated)
                    else:
                        yield replace(model, bob=updated)


def _neighbors(model: ContextualModel, step: Fraction):
    """Fixed scan order: single table flips (Alice's settings in declared
    order then Bob's, row-major), then single-step pmf mass moves
    (source flat, then each local pmf, ordered index pairs)."""
    for side in ("alice", "bob"):
        settings = model.alice if side == "alice" else model.bob
        for label, local in settings.items():
            for r in range(local.table.rows):
                for c in range(local.table.cols):
                    yield _with_table_entry(model, side, label, r, c)
    yield from _pmf_neighbors(model, step)


def hill_climb(spec: SearchSpec, start: ContextualModel | None = None) -> SearchResult:
    """First-improvement local search with random restarts within budget.

    Moves: one table entry flipped, or one 1/max_denominator mass step
    between two pmf weights.  Only strict score increases are accepted;
    at a local maximum the walk restarts from a fresh random model.  The
    budget counts score evaluations, including starts and restarts.
    """
    if spec.mode is not SearchMode.HILL_CLIMB:
        raise ValueError(f"mode {spec.mode.value} is not hill-climb")
    rng = random.Random(spec.seed)
    step = Fraction(1, spec.max_denominator)
    current = start if start is not None else random_model(spec, rng)
    require_valid(current)
    current_score = _score(current)
    evaluated = 1
    best_model, best_score = current, current_score
    improvements = [(1, current_score)]

    while evaluated < spec.budget:
        advanced = False
        for candidate in _neighbors(current, step):
            score = _score(candidate)
            evaluated += 1
            if score > current_score:
                current, current_score = candidate, score
                if score > best_score:
                    best_model, best_score = candidate, score
                    improvements.append((evaluated, score))
                advanced = True
                break
            if evaluated >= spec.budget:
                break
        if not advanced and evaluated < spec.budget:
            current = random_model(spec, rng)
            current_score = _score(current)
            evaluated += 1
            if current_score > best_score:
                best_model, best_score = current, current_score
                improvements.append((evaluated, current_score))
    return SearchResult(
        best_model=best_model,
        best_s_max=best_score,
        evaluated=evaluated,
        improvements=tuple(improvements),
        rng_algorithm=RNG_ALGORITHM,
    )


def random_sampling(spec: SearchSpec) -> SearchResult:
    """Independent draws from the model generator; best score wins, first
    achiever kept on ties."""
    if spec.mode is not SearchMode.RANDOM:
        raise ValueError(f"mode {spec.mode.value} is not random")
    rng = random.Random(spec.seed)
    best_model = None
    best_score = None
    improvements = []
    for k in range(1, spec.budget + 1):
        model = random_model(spec, rng)
        score = _score(model)
        if best_score is None or score > best_score:
            best_model, best_score = model, score
            improvements.append((k, score))
    return SearchResult(
        best_model=best_model,
        best_s_max=best_score,
        evaluated=spec.budget,
        improvements=tuple(improvements),
        rng_algorithm=RNG_ALGORITHM,
    )


def run_search(spec: SearchSpec) -> SearchResult:
    if spec.mode is SearchMode.EXHAUSTIVE:
        return enumerate_deterministic(spec)
    if spec.mode is SearchMode.RANDOM:
        return random_sampling(spec)
    return hill_climb(spec)
