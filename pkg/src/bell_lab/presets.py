"""Bundled example models: executable documentation for the file format.

Four hand-built models exercising the main structural features, plus one
generator-drawn model frozen by its seed.  The JSON files shipped in the
repository's presets/ directory are generated from these builders; a test
pins the files to the builders byte for byte.
"""

from __future__ import annotations

import random
from fractions import Fraction
from pathlib import Path

from .models import (
    ContextualModel,
    JointPmf,
    LocalSetting,
    Pmf,
    ResponseTable,
    save_model,
)
from .search import SearchMode, SearchSpec, random_model

_ONE = Fraction(1)
_HALF = Fraction(1, 2)


def _setting(side: str, label: str, weights, values) -> LocalSetting:
    return LocalSetting(
        pmf=Pmf(tuple(weights)),
        table=ResponseTable(side=side, setting=label, values=tuple(map(tuple, values))),
    )


def singleton_model() -> ContextualModel:
    """Every space a single point, every outcome +1; correlations all 1."""
    return ContextualModel(
        source=JointPmf(((_ONE,),)),
        alice={
            "x": _setting("alice", "x", (_ONE,), ((1,),)),
            "x'": _setting("alice", "x'", (_ONE,), ((1,),)),
        },
        bob={
            "y": _setting("bob", "y", (_ONE,), ((1,),)),
            "y'": _setting("bob", "y'", (_ONE,), ((1,),)),
        },
    )


def singleton_flip_model() -> ContextualModel:
    """Singleton model with Alice's second setting answering -1 instead."""
    base = singleton_model()
    alice = dict(base.alice)
    alice["x'"] = _setting("alice", "x'", (_ONE,), ((-1,),))
    return ContextualModel(source=base.source, alice=alice, bob=base.bob)


def perfect_correlation_model() -> ContextualModel:
    """Two perfectly correlated source values, read out directly.

    Both sides' first settings report the sign of their source share, so
    the first context correlates perfectly; Bob's second setting reports
    the opposite sign, anti-correlating the second context.
    """
    source = JointPmf(((_HALF, Fraction(0)), (Fraction(0), _HALF)))
    one = (_ONE,)
    return ContextualModel(
        source=source,
        alice={
            "x": _setting("alice", "x", one, ((1,), (-1,))),
            "x'": _setting("alice", "x'", one, ((1,), (1,))),
        },
        bob={
            "y": _setting("bob", "y", one, ((1,), (-1,))),
            "y'": _setting("bob", "y'", one, ((-1,), (1,))),
        },
    )


def noisy_readout_model() -> ContextualModel:
    """Correlated source with a noisy channel on Alice's first setting.

    Her first setting reads the source sign but flips it with local
    probability 1/4; every space has two points, so the product space has
    64 cells.  First-context correlation drops from 1 to 1/2.
    """
    source = JointPmf(((_HALF, Fraction(0)), (Fraction(0), _HALF)))
    uniform = (_HALF, _HALF)
    return ContextualModel(
        source=source,
        alice={
            "x": _setting("alice", "x", (Fraction(3, 4), Fraction(1, 4)), ((1, -1), (-1, 1))),
            "x'": _setting("alice", "x'", uniform, ((1, 1), (1, 1))),
        },
        bob={
            "y": _setting("bob", "y", uniform, ((1, 1), (-1, -1))),
            "y'": _setting("bob", "y'", uniform, ((-1, -1), (1, 1))),
        },
    )


FROZEN_SEED = 7


def frozen_random_model() -> ContextualModel:
    """Generator output at a pinned seed; guards generator reproducibility."""
    spec = SearchSpec(
        cardinalities=(2, 2, 2, 2, 2, 2), mode=SearchMode.RANDOM, seed=FROZEN_SEED
    )
    return random_model(spec, random.Random(FROZEN_SEED))


PRESETS = {
    "singleton": singleton_model,
    "singleton_flip": singleton_flip_model,
    "perfect_correlation": perfect_correlation_model,
    "noisy_readout": noisy_readout_model,
    "random_seed7": frozen_random_model,
}


def write_preset_files(directory) -> list[Path]:
    """Write every preset as <name>.json under `directory`."""
    out = Path(directory)
    out.mkdir(parents=True, exist_ok=True)
    written = []
    for name, build in PRESETS.items():
        path = out / f"{name}.json"
        save_model(build(), path)
        written.append(path)
    return written
