"""Seeded Monte Carlo simulation and empirical statistics.

Trials are driven through the two-uniform reduced form, so the sampling
path itself exercises the partition maps: per trial the stream provides
five 53-bit dyadic uniforms, consumed in the fixed column order (Alice
setting, Bob setting, source pair, U1, U2).  A dyadic draw k/2^53 is
compared against integer thresholds floor(c * 2^53) of the exact rational
cumulative breakpoints c; a draw landing exactly on a threshold goes to
the lower interval.  Thresholds beyond 53-bit resolution would collapse;
each interval is then under-weighted by at most 2^-53, which is far below
anything the statistics here can resolve.

Floats appear in this module's estimates and z-scores only; the
no-signalling marginal check at the bottom is exact rational arithmetic.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .chsh import CHSH_PATTERNS
from .models import ContextualModel, require_valid
from .reduction import reduce_model

U_BITS = 53
U_SCALE = 1 << U_BITS

DEFAULT_BIAS = (Fraction(1, 2),) * 4

QUANTUM_ALICE_LABELS = ("a0", "a1")
QUANTUM_BOB_LABELS = ("b0", "b1")


def _thresholds(breakpoints) -> np.ndarray:
    """Integer thresholds for the cumulative endpoints past the leading 0."""
    return np.array(
        [(b.numerator << U_BITS) // b.denominator for b in breakpoints[1:]],
        dtype=np.int64,
    )


def _cumulative(weights) -> list[Fraction]:
    cum = [Fraction(0)]
    for w in weights:
        cum.append(cum[-1] + w)
    return cum


@dataclass(frozen=True)
class TrialLedger:
    """Per-trial settings and outcomes, plus the seed that produced them.

    Settings are stored as indices into the label tuples; outcomes are
    +/-1.  Counts are derived from the arrays on demand, so they cannot
    drift out of step with the records.
    """

    seed: int
    alice_labels: tuple[str, str]
    bob_labels: tuple[str, str]
    alice_settings: np.ndarray
    bob_settings: np.ndarray
    a: np.ndarray
    b: np.ndarray

    @property
    def n(self) -> int:
        return len(self.a)

    def _codes(self) -> np.ndarray:
        context = self.alice_settings.astype(np.int64) * 2 + self.bob_settings
        outcome = (self.a > 0).astype(np.int64) * 2 + (self.b > 0)
        return context * 4 + outcome

    def context_counts(self) -> dict:
        """counts[(alice_label, bob_label)][(a, b)] over the four contexts."""
        bins = np.bincount(self._codes(), minlength=16)
        out = {}
        for i, alice_label in enumerate(self.alice_labels):
            for j, bob_label in enumerate(self.bob_labels):
                ctx = i * 2 + j
                out[(alice_label, bob_label)] = {
                    (1, 1): int(bins[ctx * 4 + 3]),
                    (1, -1): int(bins[ctx * 4 + 2]),
                    (-1, 1): int(bins[ctx * 4 + 1]),
                    (-1, -1): int(bins[ctx * 4 + 0]),
                }
        return out

    def to_csv(self, path) -> None:
        with open(path, "w", encoding="utf-8", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(["trial", "alice_setting", "bob_setting", "a", "b"])
            alice_names = [self.alice_labels[k] for k in self.alice_settings]
            bob_names = [self.bob_labels[k] for k in self.bob_settings]
            signs = {1: "+1", -1: "-1"}
            for t, (sa, sb, va, vb) in enumerate(
                zip(alice_names, bob_names, self.a, self.b)
            ):
                writer.writerow([t, sa, sb, signs[int(va)], signs[int(vb)]])


def _check_bias(bias) -> tuple[Fraction, ...]:
    if len(bias) != 4:
        raise ValueError(f"setting bias needs 4 probabilities, got {len(bias)}")
    out = []
    for p in bias:
        if isinstance(p, float):
            raise ValueError("setting bias must be exact rationals, not floats")
        p = Fraction(p)
        if p <= 0:
            raise ValueError("setting bias probabilities must be positive")
        out.append(p)
    if out[0] + out[1] != 1 or out[2] + out[3] != 1:
        raise ValueError("setting bias must sum to 1 per side")
    return tuple(out)


def simulate_trials(model: ContextualModel, n: int, bias=None, seed: int = 0) -> TrialLedger:
    """Run n trials of the four-context protocol; reproducible from seed.

    Each trial draws both settings, one source pair, and the two shared
    uniforms, then reads the outcomes off the response tables through the
    reduced form's interval maps.
    """
    require_valid(model)
    if n < 1:
        raise ValueError(f"need at least one trial, got n={n}")
    bias = _check_bias(DEFAULT_BIAS if bias is None else bias)
    reduced = reduce_model(model)

    alice_setting_k = _thresholds(_cumulative(bias[:2]))
    bob_setting_k = _thresholds(_cumulative(bias[2:]))
    source_k = _thresholds(_cumulative(model.source.flattened()))
    alice_map_k = _thresholds(reduced.alice_map.breakpoints)
    bob_map_k = _thresholds(reduced.bob_map.breakpoints)
    alice_pairs = np.array(reduced.alice_map.pairs, dtype=np.int64)
    bob_pairs = np.array(reduced.bob_map.pairs, dtype=np.int64)

    def table_stack(settings, labels):
        depth = max(s.pmf.size for s in settings.values())
        rows = max(s.table.rows for s in settings.values())
        stack = np.zeros((2, rows, depth), dtype=np.int8)
        for t, label in enumerate(labels):
            values = settings[label].table.values
            for r, row in enumerate(values):
                stack[t, r, : len(row)] = row
        return stack

    alice_tables = table_stack(model.alice, model.alice_labels)
    bob_tables = table_stack(model.bob, model.bob_labels)

    rng = np.random.default_rng(seed)
    draws = rng.integers(0, U_SCALE, size=(n, 5), dtype=np.int64)

    a_set = np.searchsorted(alice_setting_k, draws[:, 0], side="left")
    b_set = np.searchsorted(bob_setting_k, draws[:, 1], side="left")
    src = np.searchsorted(source_k, draws[:, 2], side="left")
    l1 = src // model.source.cols
    l2 = src % model.source.cols
    local_a = alice_pairs[np.searchsorted(alice_map_k, draws[:, 3], side="left"), a_set]
    local_b = bob_pairs[np.searchsorted(bob_map_k, draws[:, 4], side="left"), b_set]

    return TrialLedger(
        seed=seed,
        alice_labels=model.alice_labels,
        bob_labels=model.bob_labels,
        alice_settings=a_set.astype(np.int8),
        bob_settings=b_set.astype(np.int8),
        a=alice_tables[a_set, l1, local_a],
        b=bob_tables[b_set, l2, local_b],
    )


def quantum_reference(angles, n: int, seed: int = 0) -> TrialLedger:
    """Singlet-statistics trial generator: the positive control.

    Outcomes follow P(a, b | alpha, beta) = (1 - a*b*cos(alpha - beta))/4
    with uniform random settings.  No model in this package can produce
    these statistics; the empirical pipeline must be able to say so.
    """
    if n < 1:
        raise ValueError(f"need at least one trial, got n={n}")
    alice_angles = (float(angles[0]), float(angles[1]))
    bob_angles = (float(angles[2]), float(angles[3]))

    # Context rows hold cumulative integer thresholds over the outcome
    # cells ordered (+1,+1), (+1,-1), (-1,+1), (-1,-1).
    grid = np.empty((4, 4), dtype=np.int64)
    for i, alpha in enumerate(alice_angles):
        for j, beta in enumerate(bob_angles):
            c = math.cos(alpha - beta)
            probs = [(1 - a * b * c) / 4 for a, b in ((1, 1), (1, -1), (-1, 1), (-1, -1))]
            cum = 0.0
            row = []
            for p in probs:
                cum += p
                row.append(min(int(cum * U_SCALE), U_SCALE))
            row[-1] = U_SCALE
            grid[i * 2 + j] = row

    rng = np.random.default_rng(seed)
    draws = rng.integers(0, U_SCALE, size=(n, 3), dtype=np.int64)
    a_set = (draws[:, 0] >= U_SCALE // 2).astype(np.int64)
    b_set = (draws[:, 1] >= U_SCALE // 2).astype(np.int64)
    context = a_set * 2 + b_set
    code = np.empty(n, dtype=np.int64)
    for ctx in range(4):
        mask = context == ctx
        code[mask] = np.searchsorted(grid[ctx], draws[mask, 2], side="left")
    return TrialLedger(
        seed=seed,
        alice_labels=QUANTUM_ALICE_LABELS,
        bob_labels=QUANTUM_BOB_LABELS,
        alice_settings=a_set.astype(np.int8),
        bob_settings=b_set.astype(np.int8),
        a=(1 - 2 * (code // 2)).astype(np.int8),
        b=(1 - 2 * (code % 2)).astype(np.int8),
    )


@dataclass(frozen=True)
class EmpiricalChsh:
    """Float analog of the exact eight-sum report, with standard errors."""

    contexts: tuple[tuple[str, str], ...]
    n_per_context: tuple[int, ...]
    correlations: tuple[float, ...]
    standard_errors: tuple[float, ...]
    sums: tuple[float, ...]
    sum_standard_error: float
    s_max: float


def empirical_chsh(ledger: TrialLedger) -> EmpiricalChsh:
    """Per-context empirical correlations and the eight signed sums.

    A context correlation's standard error is sqrt((1 - e^2)/n_ctx); the
    sums share one error, the four context errors combined in quadrature.
    """
    counts = ledger.context_counts()
    contexts = tuple(
        (a, b) for a in ledger.alice_labels for b in ledger.bob_labels
    )
    ns = []
    correlations = []
    errors = []
    for ctx in contexts:
        cell = counts[ctx]
        n_ctx = sum(cell.values())
        if n_ctx == 0:
            raise ValueError(f"context {ctx} has no trials")
        e = (cell[(1, 1)] + cell[(-1, -1)] - cell[(1, -1)] - cell[(-1, 1)]) / n_ctx
        ns.append(n_ctx)
        correlations.append(e)
        errors.append(math.sqrt(max(1 - e * e, 0.0) / n_ctx))
    sums = tuple(
        sum(s * e for s, e in zip(pattern, correlations)) for pattern in CHSH_PATTERNS
    )
    return EmpiricalChsh(
        contexts=contexts,
        n_per_context=tuple(ns),
        correlations=tuple(correlations),
        standard_errors=tuple(errors),
        sums=sums,
        sum_standard_error=math.sqrt(sum(se * se for se in errors)),
        s_max=max(abs(s) for s in sums),
    )


@dataclass(frozen=True)
class NoSignallingRow:
    """One side/setting/outcome frequency compared across the remote setting."""

    side: str
    setting: str
    outcome: int
    remote_labels: tuple[str, str]
    frequencies: tuple[float, float]
    difference: float
    standard_error: float
    z: float


@dataclass(frozen=True)
class NoSignallingReport:
    rows: tuple[NoSignallingRow, ...]
    max_abs_z: float


def no_signalling_report(ledger: TrialLedger) -> NoSignallingReport:
    """Frequency-difference z-tests across the remote setting, all 8 rows.

    z uses the pooled two-sample standard error; a zero error with a zero
    difference scores z = 0, a zero error with a nonzero difference is
    reported as infinite.
    """
    counts = ledger.context_counts()
    rows = []
    for side, labels, remote_labels in (
        ("alice", ledger.alice_labels, ledger.bob_labels),
        ("bob", ledger.bob_labels, ledger.alice_labels),
    ):
        for setting in labels:
            for outcome in (1, -1):
                hits = []
                totals = []
                for remote in remote_labels:
                    key = (setting, remote) if side == "alice" else (remote, setting)
                    cell = counts[key]
                    if side == "alice":
                        x = cell[(outcome, 1)] + cell[(outcome, -1)]
                    else:
                        x = cell[(1, outcome)] + cell[(-1, outcome)]
                    n_ctx = sum(cell.values())
                    if n_ctx == 0:
                        raise ValueError(f"context {key} has no trials")
                    hits.append(x)
                    totals.append(n_ctx)
                f1, f2 = hits[0] / totals[0], hits[1] / totals[1]
                diff = f1 - f2
                pooled = (hits[0] + hits[1]) / (totals[0] + totals[1])
                se = math.sqrt(
                    pooled * (1 - pooled) * (1 / totals[0] + 1 / totals[1])
                )
                if se == 0:
                    z = 0.0 if diff == 0 else math.copysign(math.inf, diff)
                else:
                    z = diff / se
                rows.append(
                    NoSignallingRow(
                        side=side,
                        setting=setting,
                        outcome=outcome,
                        remote_labels=tuple(remote_labels),
                        frequencies=(f1, f2),
                        difference=diff,
                        standard_error=se,
                        z=z,
                    )
                )
    return NoSignallingReport(
        rows=tuple(rows), max_abs_z=max(abs(r.z) for r in rows)
    )


def outcome_distribution(
    model: ContextualModel, side: str, setting: str, remote: str
) -> tuple[Fraction, Fraction]:
    """Exact (P(+1), P(-1)) for one side's outcome in a full context.

    The remote side's local pmf is summed explicitly rather than being
    marginalized away, so the result could in principle depend on the
    remote setting; the point of the check below is that it never does.
    """
    local = model.local(side, setting)
    remote_local = model.local("bob" if side == "alice" else "alice", remote)
    p_plus = Fraction(0)
    total_mass = Fraction(0)
    for l1, row in enumerate(model.source.weights):
        for l2, w_src in enumerate(row):
            own_index = l1 if side == "alice" else l2
            for k, w_loc in enumerate(local.pmf.weights):
                for _, w_rem in enumerate(remote_local.pmf.weights):
                    w = w_src * w_loc * w_rem
                    total_mass += w
                    if local.table.values[own_index][k] == 1:
                        p_plus += w
    return (p_plus, total_mass - p_plus)


@dataclass(frozen=True)
class ExactMarginalRow:
    side: str
    setting: str
    remote_labels: tuple[str, str]
    distributions: tuple[tuple[Fraction, Fraction], tuple[Fraction, Fraction]]
    equal: bool


@dataclass(frozen=True)
class ExactNoSignallingReport:
    rows: tuple[ExactMarginalRow, ...]
    equal: bool


def verify_no_signalling(model: ContextualModel) -> ExactNoSignallingReport:
    """Exact check: each side's outcome law is identical across the remote
    setting, as rationals, for all four side/setting combinations."""
    require_valid(model)
    rows = []
    for side, labels, remote_labels in (
        ("alice", model.alice_labels, model.bob_labels),
        ("bob", model.bob_labels, model.alice_labels),
    ):
        for setting in labels:
            dists = tuple(
                outcome_distribution(model, side, setting, remote)
                for remote in remote_labels
            )
            rows.append(
                ExactMarginalRow(
                    side=side,
                    setting=setting,
                    remote_labels=tuple(remote_labels),
                    distributions=dists,
                    equal=dists[0] == dists[1],
                )
            )
    return ExactNoSignallingReport(
        rows=tuple(rows), equal=all(r.equal for r in rows)
    )
