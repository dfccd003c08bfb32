"""CHSH combination evaluation and the local bound certificate.

The eight sign patterns are the four with exactly one term negated plus
their negations (three terms negated); these are precisely the sign
vectors in {-1,+1}^4 with an odd number of minus signs, the family for
which the local bound |s| <= 2 holds.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

from .exact import CorrelationSet, correlation_set
from .models import ContextualModel, decimal_str, format_rational, model_hash, require_valid

# Canonical order: one negated term sweeping left to right, then the negations.
CHSH_PATTERNS: tuple[tuple[int, int, int, int], ...] = (
    (-1, 1, 1, 1),
    (1, -1, 1, 1),
    (1, 1, -1, 1),
    (1, 1, 1, -1),
    (1, -1, -1, -1),
    (-1, 1, -1, -1),
    (-1, -1, 1, -1),
    (-1, -1, -1, 1),
)

LHV_BOUND = Fraction(2)


class BoundViolationError(AssertionError):
    """A valid model produced s_max > 2.

    This cannot happen for any well-formed model; raising (rather than
    reporting) makes an implementation bug impossible to overlook.
    """


@dataclass(frozen=True)
class ChshReport:
    sums: tuple[Fraction, ...]
    s_max: Fraction
    bound_satisfied: bool


def chsh_from_correlations(c: CorrelationSet) -> ChshReport:
    """Evaluate all eight signed sums exactly and take the maximum magnitude."""
    values = c.as_tuple()
    for v in values:
        if not -1 <= v <= 1:
            raise ValueError(f"correlation {format_rational(v)} outside [-1, 1]")
    sums = tuple(
        sum((s * v for s, v in zip(pattern, values)), Fraction(0))
        for pattern in CHSH_PATTERNS
    )
    s_max = max(abs(s) for s in sums)
    return ChshReport(sums=sums, s_max=s_max, bound_satisfied=s_max <= LHV_BOUND)


@dataclass(frozen=True)
class LhvCertificate:
    model_sha256: str
    correlations: CorrelationSet
    report: ChshReport

    def to_dict(self) -> dict:
        e = self.correlations
        return {
            "model_sha256": self.model_sha256,
            "correlations": {
                "e_xy": format_rational(e.e_xy),
                "e_xy'": format_rational(e.e_xyp),
                "e_x'y": format_rational(e.e_xpy),
                "e_x'y'": format_rational(e.e_xpyp),
            },
            "chsh_sums": [format_rational(s) for s in self.report.sums],
            "s_max": format_rational(self.report.s_max),
            "s_max_decimal": decimal_str(self.report.s_max),
            "bound_satisfied": self.report.bound_satisfied,
        }


def certify_lhv_bound(model: ContextualModel) -> LhvCertificate:
    """Correlations, all eight sums, and the verdict, bound to the model hash.

    For every valid model the verdict must be satisfied; a violation is a
    bug in this engine, not a property of the model, and raises.
    """
    require_valid(model)
    correlations = correlation_set(model)
    report = chsh_from_correlations(correlations)
    if not report.bound_satisfied:
        raise BoundViolationError(
            f"valid model reached s_max = {format_rational(report.s_max)} > 2"
        )
    return LhvCertificate(
        model_sha256=model_hash(model), correlations=correlations, report=report
    )
