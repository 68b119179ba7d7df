"""Meyer's Hadamard-sandwich protocol for the Newcomb game.

Player 1 (the human) starts from an intended mixed strategy: female ``|0>``
with probability ``v``, male ``|1>`` otherwise. Omega's register starts in
the same basis state as the human's intention. The protocol then runs

1. ``F (x) I``  (Omega's device couples the boxes),
2. ``N (x) I`` with probability ``w``, ``I (x) I`` otherwise (the human may
   change their mind),
3. ``F (x) I``  again, after which the game is settled.

Because ``F N F`` is diagonal, step 2 cannot move the human off the intended
strategy and the final state equals the initial one.
"""

from __future__ import annotations

import logging
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass

import numpy as np

from qnewcomb import linalg
from qnewcomb.errors import ValidationError
from qnewcomb.game import (
    GameState,
    MixedTactic,
    PayoffMatrix,
    apply_pure_tactic,
    build_payoff_observable,
    embed,
    expected_payoff,
)

log = logging.getLogger(__name__)

STEP_LABELS = ("initial", "step1_hadamard", "step2_mixed_negation", "step3_hadamard")

FEMALE_PAYOFF = 1000.0
MALE_PAYOFF = 1000000.0


def _check_prob(name: str, x: float) -> float:
    x = float(x)
    if not (0.0 <= x <= 1.0):
        raise ValidationError(f"{name} must lie in [0, 1], got {x}")
    return x


@dataclass(frozen=True)
class ProtocolParams:
    v: float
    w: float

    def __post_init__(self):
        object.__setattr__(self, "v", _check_prob("v", self.v))
        object.__setattr__(self, "w", _check_prob("w", self.w))


@dataclass(frozen=True)
class TraceEntry:
    label: str
    state: GameState
    human_reduced: np.ndarray


@dataclass(frozen=True)
class ProtocolTrace:
    entries: tuple[TraceEntry, ...]

    def __post_init__(self):
        if len(self.entries) != 4:
            raise ValidationError(f"protocol trace needs 4 entries, got {len(self.entries)}")

    def __getitem__(self, i: int) -> TraceEntry:
        return self.entries[i]

    def __iter__(self):
        return iter(self.entries)

    def __len__(self) -> int:
        return len(self.entries)

    @property
    def initial(self) -> GameState:
        return self.entries[0].state

    @property
    def final(self) -> GameState:
        return self.entries[-1].state


def newcomb_payoff_matrix() -> PayoffMatrix:
    return PayoffMatrix([[1000.0, 1001000.0], [0.0, 1000000.0]])


_NEWCOMB_OBS = build_payoff_observable(newcomb_payoff_matrix())


def newcomb_observable():
    return _NEWCOMB_OBS


def initial_state(v: float) -> GameState:
    """Omega's register copies the human's intention: ``v|00><00| + (1-v)|11><11|``."""
    v = _check_prob("v", v)
    return GameState.mixture(2, 2, [(v, 0, 0), (1.0 - v, 1, 1)])


def step2_tactic(w: float) -> MixedTactic:
    w = _check_prob("w", w)
    return MixedTactic(1, ((w, linalg.negation()), (1.0 - w, linalg.identity(2))))


# joint-space operators of the protocol, checked once at import
_F1 = embed(1, linalg.hadamard(), 2, 2)
_N1 = embed(1, linalg.negation(), 2, 2)
assert linalg.is_unitary(_F1) and linalg.is_unitary(_N1)


def _evolve(state: GameState, rho: np.ndarray) -> GameState:
    return GameState(state.m1, state.m2, rho)


def run_meyer_protocol(p: ProtocolParams) -> tuple[ProtocolTrace, float]:
    s0 = initial_state(p.v)
    s1 = _evolve(s0, _F1 @ s0.rho @ _F1)
    # same channel as apply_mixed_tactic(s1, step2_tactic(p.w)), without re-checking N and I
    s2 = _evolve(s1, p.w * (_N1 @ s1.rho @ _N1) + (1.0 - p.w) * s1.rho)
    s3 = _evolve(s2, _F1 @ s2.rho @ _F1)
    trace = ProtocolTrace(
        tuple(TraceEntry(label, s, s.reduced(1)) for label, s in zip(STEP_LABELS, (s0, s1, s2, s3)))
    )
    return trace, expected_payoff(_NEWCOMB_OBS, s3)


def sample_meyer_protocol(p: ProtocolParams, n_samples: int, seed: int | None = None) -> tuple[GameState, float]:
    """Monte Carlo variant: each run draws a single step-2 branch.

    Returns the empirical average of the final states and its payoff; as
    ``n_samples`` grows this converges to the channel result of
    :func:`run_meyer_protocol`.
    """
    if n_samples < 1:
        raise ValidationError(f"n_samples must be >= 1, got {n_samples}")
    rng = np.random.default_rng(seed)
    F = linalg.hadamard()
    s1 = apply_pure_tactic(initial_state(p.v), 1, F)
    finals = {
        True: apply_pure_tactic(apply_pure_tactic(s1, 1, linalg.negation()), 1, F).rho,
        False: apply_pure_tactic(s1, 1, F).rho,
    }
    n_neg = int(np.sum(rng.random(n_samples) < p.w))
    rho = (n_neg * finals[True] + (n_samples - n_neg) * finals[False]) / n_samples
    state = GameState(2, 2, rho)
    return state, expected_payoff(_NEWCOMB_OBS, state)


def payoff_formula(v: float) -> float:
    v = _check_prob("v", v)
    return FEMALE_PAYOFF * v + MALE_PAYOFF * (1.0 - v)


@dataclass(frozen=True)
class RestorationReport:
    grid_n: int
    tol: float
    max_deviation: float
    worst_point: tuple[float, float]
    max_payoff_spread: float
    max_formula_error: float

    @property
    def passed(self) -> bool:
        return self.max_deviation <= self.tol


def _grid_column(args: tuple[int, np.ndarray]) -> tuple[int, list[tuple[float, float, float]]]:
    # one v value, all w values: (deviation, payoff, w) per point
    i, ws = args
    v = float(np.linspace(0.0, 1.0, len(ws))[i])
    out = []
    for w in ws:
        trace, pay = run_meyer_protocol(ProtocolParams(v, float(w)))
        out.append((trace.final.max_deviation(trace.initial), pay, float(w)))
    return i, out


def verify_restoration(grid_n: int = 51, tol: float = 1e-12, workers: int = 1) -> RestorationReport:
    """Run the protocol on a ``grid_n x grid_n`` grid over ``(v, w)`` in ``[0, 1]^2``.

    Besides the restoration deviation the report carries the largest payoff
    spread across ``w`` for fixed ``v`` and the largest gap to
    :func:`payoff_formula`. Results are merged by grid index, so they do not
    depend on ``workers``.
    """
    if grid_n < 2:
        raise ValidationError(f"grid_n must be >= 2, got {grid_n}")
    if tol < 0:
        raise ValidationError(f"tol must be >= 0, got {tol}")
    if workers < 1:
        raise ValidationError(f"workers must be >= 1, got {workers}")
    grid = np.linspace(0.0, 1.0, grid_n)
    jobs = [(i, grid) for i in range(grid_n)]
    if workers == 1:
        cols = [_grid_column(j) for j in jobs]
    else:
        with ProcessPoolExecutor(max_workers=workers) as ex:
            cols = list(ex.map(_grid_column, jobs))
    cols.sort(key=lambda c: c[0])

    max_dev, worst, spread, formula_err = 0.0, (0.0, 0.0), 0.0, 0.0
    for i, col in cols:
        v = float(grid[i])
        pays = [pay for _, pay, _ in col]
        spread = max(spread, max(pays) - min(pays))
        expect = payoff_formula(v)
        for dev, pay, w in col:
            formula_err = max(formula_err, abs(pay - expect))
            if dev > max_dev:
                max_dev, worst = dev, (v, w)
    report = RestorationReport(grid_n, tol, max_dev, worst, spread, formula_err)
    log.debug("restoration grid %d: max deviation %.3e at %s", grid_n, max_dev, worst)
    return report


def pure_case_table() -> list[dict]:
    """The four pure (strategy, tactic) runs."""
    rows = []
    for strategy, v in (("female", 1.0), ("male", 0.0)):
        for tactic, w in (("female", 1.0), ("male", 0.0)):
            trace, pay = run_meyer_protocol(ProtocolParams(v, w))
            rows.append(
                {
                    "strategy": strategy,
                    "tactic": tactic,
                    "v": v,
                    "w": w,
                    "final_diagonal": trace.final.diagonal().tolist(),
                    "payoff_usd": pay,
                }
            )
    return rows
