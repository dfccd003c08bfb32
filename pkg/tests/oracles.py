"""Independent reference computations used to cross-check the engine.

Everything here is deliberately naive: full product-space enumeration with
no factorization, no skipping, no shared code with the package beyond the
model data structures.  Slow is fine; these run on small campaigns.
"""

from __future__ import annotations

import itertools
from bisect import bisect_right
from fractions import Fraction
from math import lcm

from bell_lab.models import ContextualModel


def product_mean(model: ContextualModel, selected) -> Fraction:
    """Mean of a product of response functions over the full product space.

    `selected` is a sequence of (side, label) pairs naming which response
    functions to multiply.  Enumerates every cell of the six-axis product
    space, multiplying all six factor weights, no shortcuts.
    """
    alabels = tuple(model.alice)
    blabels = tuple(model.bob)
    a_pmfs = [model.alice[t].pmf.weights for t in alabels]
    b_pmfs = [model.bob[t].pmf.weights for t in blabels]
    total = Fraction(0)
    for i in range(model.source.rows):
        for j in range(model.source.cols):
            base = model.source.weights[i][j]
            for la in itertools.product(*[range(len(p)) for p in a_pmfs]):
                for lb in itertools.product(*[range(len(p)) for p in b_pmfs]):
                    w = base
                    for pmf, k in zip(a_pmfs, la):
                        w = w * pmf[k]
                    for pmf, k in zip(b_pmfs, lb):
                        w = w * pmf[k]
                    v = 1
                    for side, label in selected:
                        if side == "alice":
                            t = alabels.index(label)
                            v *= model.alice[label].table.values[i][la[t]]
                        else:
                            t = blabels.index(label)
                            v *= model.bob[label].table.values[j][lb[t]]
                    total += w * v
    return total


def correlation_quadruple(model: ContextualModel):
    """The four context correlations, canonical order, by brute force."""
    a0, a1 = tuple(model.alice)
    b0, b1 = tuple(model.bob)
    return tuple(
        product_mean(model, [("alice", a), ("bob", b)])
        for a, b in ((a0, b0), (a0, b1), (a1, b0), (a1, b1))
    )


def chsh_sums(correlations):
    """All eight one-side-of-the-inequality sums, as a multiset.

    A sign pattern belongs to the family iff it negates an odd number of
    the four terms.
    """
    sums = []
    for signs in itertools.product((1, -1), repeat=4):
        if signs.count(-1) % 2 == 1:
            sums.append(sum(s * c for s, c in zip(signs, correlations)))
    return sorted(sums)


def s_max(correlations) -> Fraction:
    return max(abs(s) for s in chsh_sums(correlations))


def atom_denominator(*weight_lists) -> int:
    d = 1
    for weights in weight_lists:
        for w in weights:
            d = lcm(d, w.denominator)
    return d


def couple_by_atoms(p_weights, q_weights) -> dict:
    """Comonotone coupling of two pmfs, computed by slicing [0,1) into
    equal atoms of a common denominator and assigning each atom to the
    pair of cumulative-interval indices it falls in.
    """
    d = atom_denominator(p_weights, q_weights)

    def thresholds(weights):
        cum = [0]
        for w in weights:
            cum.append(cum[-1] + int(w * d))
        return cum

    cp = thresholds(p_weights)
    cq = thresholds(q_weights)
    out: dict = {}
    for t in range(d):
        i = bisect_right(cp, t) - 1
        j = bisect_right(cq, t) - 1
        key = (i, j)
        out[key] = out.get(key, Fraction(0)) + Fraction(1, d)
    return out


def reduced_context_mean(model: ContextualModel, alice_label: str, bob_label: str) -> Fraction:
    """Context correlation of the two-uniform form of `model`, computed by
    atomized quadrature over (u1, u2) without any partition machinery.

    Each side's uniform is sliced into atoms of the common denominator of
    that side's two local pmfs; an atom at position t selects local value
    index k for setting s where t falls in the k-th cumulative interval of
    that setting's pmf.
    """
    alabels = tuple(model.alice)
    blabels = tuple(model.bob)

    def side_atoms(settings, labels):
        d = atom_denominator(*[settings[t].pmf.weights for t in labels])
        cums = {}
        for t in labels:
            cum = [0]
            for w in settings[t].pmf.weights:
                cum.append(cum[-1] + int(w * d))
            cums[t] = cum
        return d, cums

    da, acums = side_atoms(model.alice, alabels)
    db, bcums = side_atoms(model.bob, blabels)
    atab = model.alice[alice_label].table.values
    btab = model.bob[bob_label].table.values
    acum = acums[alice_label]
    bcum = bcums[bob_label]

    total = Fraction(0)
    for i in range(model.source.rows):
        for j in range(model.source.cols):
            w0 = model.source.weights[i][j]
            if w0 == 0:
                continue
            asum = 0
            for t in range(da):
                asum += atab[i][bisect_right(acum, t) - 1]
            bsum = 0
            for t in range(db):
                bsum += btab[j][bisect_right(bcum, t) - 1]
            total += w0 * Fraction(asum, da) * Fraction(bsum, db)
    return total
