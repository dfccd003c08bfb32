"""Exact context correlations by direct four-fold summation.

Each context's correlation is a sum over the two source indices and the
two local indices the context actually uses, weighted by the source joint
pmf and the two local pmfs.  Everything stays rational.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

from .models import Context, ContextualModel, require_valid


@dataclass(frozen=True)
class CorrelationSet:
    """The four context correlations, canonical order (x,y), (x,y'), (x',y), (x',y')."""

    e_xy: Fraction
    e_xyp: Fraction
    e_xpy: Fraction
    e_xpyp: Fraction

    def as_tuple(self) -> tuple[Fraction, Fraction, Fraction, Fraction]:
        return (self.e_xy, self.e_xyp, self.e_xpy, self.e_xpyp)


def expectation_in_context(model: ContextualModel, ctx: Context) -> Fraction:
    """E over one context: sum A(l1,lx) * B(l2,ly) * p_x(lx) * p_y(ly) * p(l1,l2).

    Loop order fixed as (l1, l2, lx, ly) for reproducible traces; only
    zero-probability source pairs are skipped.
    """
    a_local = model.local("alice", ctx.alice)
    b_local = model.local("bob", ctx.bob)
    a_table = a_local.table.values
    b_table = b_local.table.values
    a_pmf = a_local.pmf.weights
    b_pmf = b_local.pmf.weights

    total = Fraction(0)
    for l1, source_row in enumerate(model.source.weights):
        for l2, w_source in enumerate(source_row):
            if w_source == 0:
                continue
            for lx, w_a in enumerate(a_pmf):
                for ly, w_b in enumerate(b_pmf):
                    total += a_table[l1][lx] * b_table[l2][ly] * w_a * w_b * w_source
    return total


def correlation_set(model: ContextualModel) -> CorrelationSet:
    require_valid(model)
    values = tuple(expectation_in_context(model, ctx) for ctx in model.contexts())
    return CorrelationSet(*values)
