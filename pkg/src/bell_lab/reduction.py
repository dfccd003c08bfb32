"""Two-uniform form of a model: local randomness from shared uniforms.

Each side's two local variables become deterministic functions of one
uniform variable on [0,1) through inverse-transform interval partitions.
The two partitions of a side are overlaid into one refinement whose
intervals each carry a pair of local values, one per setting.  The random
inputs of the reduced form (source pair, U1, U2) carry no setting label;
every setting dependence lives in the deterministic interval maps and the
response tables.

Everything here is exact interval algebra on rationals.  Nothing is ever
sampled in this module; the sampling path lives in the simulator.
"""

from __future__ import annotations

from bisect import bisect_left
from dataclasses import dataclass
from fractions import Fraction

from .exact import expectation_in_context
from .models import (
    Context,
    ContextualModel,
    Pmf,
    format_rational,
    model_to_dict,
    require_valid,
)


@dataclass(frozen=True)
class IntervalPartition:
    """Partition of [0,1) into consecutive intervals, one per support point.

    breakpoints are strictly increasing from 0 to 1; interval i spans
    (breakpoints[i], breakpoints[i+1]], except the first which includes 0.
    labels[i] is the support index the interval maps to.  Zero-weight
    support points yield zero-width intervals, which are dropped; their
    indices simply never appear in labels.
    """

    breakpoints: tuple[Fraction, ...]
    labels: tuple[int, ...]

    def __post_init__(self):
        if len(self.breakpoints) != len(self.labels) + 1:
            raise ValueError("breakpoint/label count mismatch")

    def locate(self, u: Fraction) -> int:
        """Support index for a point of [0,1); boundaries go to the lower interval."""
        if not 0 <= u < 1:
            raise ValueError(f"point {format_rational(Fraction(u))} outside [0, 1)")
        idx = bisect_left(self.breakpoints, u) - 1
        return self.labels[max(idx, 0)]


def inverse_transform_partition(pmf: Pmf) -> IntervalPartition:
    """Cumulative-sum partition: interval widths equal the weights in order."""
    breakpoints = [Fraction(0)]
    labels = []
    cum = Fraction(0)
    for index, w in enumerate(pmf.weights):
        if w == 0:
            continue
        cum += w
        breakpoints.append(cum)
        labels.append(index)
    if cum != 1:
        raise ValueError(f"weights sum to {format_rational(cum)}, expected 1")
    return IntervalPartition(breakpoints=tuple(breakpoints), labels=tuple(labels))


def couple_settings(p_a: Pmf, p_b: Pmf) -> dict[tuple[int, int], Fraction]:
    """Joint law of two discrete variables driven by one shared uniform.

    Weight of (i, j) is the length of the intersection of support point
    i's interval under p_a with support point j's under p_b.  Marginals
    recover p_a and p_b exactly for any inputs.
    """
    pa = inverse_transform_partition(p_a)
    pb = inverse_transform_partition(p_b)
    joint: dict[tuple[int, int], Fraction] = {}
    ia = ib = 0
    lo = Fraction(0)
    while ia < len(pa.labels) and ib < len(pb.labels):
        hi = min(pa.breakpoints[ia + 1], pb.breakpoints[ib + 1])
        if hi > lo:
            key = (pa.labels[ia], pb.labels[ib])
            joint[key] = joint.get(key, Fraction(0)) + (hi - lo)
        if pa.breakpoints[ia + 1] == hi:
            ia += 1
        if pb.breakpoints[ib + 1] == hi:
            ib += 1
        lo = hi
    return joint


@dataclass(frozen=True)
class UniformMap:
    """One side's refined partition: each interval fixes both local values.

    pairs[i] gives (first-setting value index, second-setting value index)
    for refined interval i, in the side's declared setting order.
    """

    breakpoints: tuple[Fraction, ...]
    pairs: tuple[tuple[int, int], ...]

    def locate(self, u: Fraction) -> tuple[int, int]:
        idx = bisect_left(self.breakpoints, u) - 1
        return self.pairs[max(idx, 0)]

    def widths(self) -> tuple[Fraction, ...]:
        return tuple(
            hi - lo for lo, hi in zip(self.breakpoints, self.breakpoints[1:])
        )


def _overlay(first: IntervalPartition, second: IntervalPartition) -> UniformMap:
    breakpoints = [Fraction(0)]
    pairs = []
    ia = ib = 0
    lo = Fraction(0)
    while ia < len(first.labels) and ib < len(second.labels):
        hi = min(first.breakpoints[ia + 1], second.breakpoints[ib + 1])
        if hi > lo:
            breakpoints.append(hi)
            pairs.append((first.labels[ia], second.labels[ib]))
        if first.breakpoints[ia + 1] == hi:
            ia += 1
        if second.breakpoints[ib + 1] == hi:
            ib += 1
        lo = hi
    return UniformMap(breakpoints=tuple(breakpoints), pairs=tuple(pairs))


@dataclass(frozen=True)
class ReducedModel:
    """Original source and tables; local randomness replaced by two uniforms."""

    base: ContextualModel
    alice_map: UniformMap
    bob_map: UniformMap


def reduce_model(model: ContextualModel) -> ReducedModel:
    require_valid(model)
    a0, a1 = model.alice_labels
    b0, b1 = model.bob_labels
    alice_map = _overlay(
        inverse_transform_partition(model.alice[a0].pmf),
        inverse_transform_partition(model.alice[a1].pmf),
    )
    bob_map = _overlay(
        inverse_transform_partition(model.bob[b0].pmf),
        inverse_transform_partition(model.bob[b1].pmf),
    )
    return ReducedModel(base=model, alice_map=alice_map, bob_map=bob_map)


def _reduced_expectation(reduced: ReducedModel, ctx: Context) -> Fraction:
    """Context correlation under the reduced form, by exact quadrature.

    Integrates over refined intervals times source pairs; each interval
    contributes its width times the response value its pair selects.
    """
    model = reduced.base
    a_slot = model.alice_labels.index(ctx.alice)
    b_slot = model.bob_labels.index(ctx.bob)
    a_table = model.alice[ctx.alice].table.values
    b_table = model.bob[ctx.bob].table.values

    a_widths = reduced.alice_map.widths()
    b_widths = reduced.bob_map.widths()
    total = Fraction(0)
    for l1, row in enumerate(model.source.weights):
        a_mean = sum(
            (
                w * a_table[l1][pair[a_slot]]
                for w, pair in zip(a_widths, reduced.alice_map.pairs)
            ),
            Fraction(0),
        )
        for l2, w_src in enumerate(row):
            if w_src == 0:
                continue
            b_mean = sum(
                (
                    w * b_table[l2][pair[b_slot]]
                    for w, pair in zip(b_widths, reduced.bob_map.pairs)
                ),
                Fraction(0),
            )
            total += w_src * a_mean * b_mean
    return total


@dataclass(frozen=True)
class ReductionReport:
    contexts: tuple[Context, ...]
    original: tuple[Fraction, ...]
    reduced: tuple[Fraction, ...]
    equal: bool


def verify_reduction(model: ContextualModel) -> ReductionReport:
    """Compare all four correlations before and after reduction, exactly."""
    require_valid(model)
    reduced = reduce_model(model)
    contexts = model.contexts()
    original = tuple(expectation_in_context(model, ctx) for ctx in contexts)
    values = tuple(_reduced_expectation(reduced, ctx) for ctx in contexts)
    return ReductionReport(
        contexts=contexts, original=original, reduced=values, equal=original == values
    )


def reduced_to_dict(reduced: ReducedModel) -> dict:
    """Model document extended with per-side partition data.

    Not parseable by the strict model loader (which rejects unknown
    fields); this is an export format for inspection and downstream use.
    """
    doc = model_to_dict(reduced.base)
    doc["partition"] = {
        "alice": {
            "breakpoints": [format_rational(b) for b in reduced.alice_map.breakpoints],
            "pairs": [list(p) for p in reduced.alice_map.pairs],
        },
        "bob": {
            "breakpoints": [format_rational(b) for b in reduced.bob_map.breakpoints],
            "pairs": [list(p) for p in reduced.bob_map.pairs],
        },
    }
    return doc
