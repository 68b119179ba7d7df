"""Declarative game specs: JSON documents describing an initial state and a move list.

Example::

    {
      "dims": [2, 2],
      "payoff": [[1000, 1001000], [0, 1000000]],
      "initial": {"kind": "mixture", "terms": [{"weight": 1.0, "basis": [0, 0]}]},
      "moves": [
        {"player": 1, "tactic": "hadamard"},
        {"player": 1, "tactic": {"mixture": [
            {"probability": 0.0, "tactic": "negation"},
            {"probability": 1.0, "tactic": "identity"}]}},
        {"player": 1, "tactic": "hadamard"}
      ]
    }

Amplitudes are either a real number or a ``[re, im]`` pair.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from importlib import resources
from typing import Annotated, Literal, Union

import numpy as np
import pydantic
from pydantic import BaseModel, ConfigDict, Field

from qnewcomb import linalg
from qnewcomb.errors import SpecSchemaError, SpecSemanticError, SpecSyntaxError
from qnewcomb.game import (
    GameState,
    MixedTactic,
    PayoffMatrix,
    apply_mixed_tactic,
    build_payoff_observable,
    expected_payoff,
)

SPEC_TOL = 1e-9

Amplitude = Union[float, Annotated[list[float], Field(min_length=2, max_length=2)]]
NamedTactic = Literal["hadamard", "negation", "identity", "dft"]


class _Model(BaseModel):
    model_config = ConfigDict(strict=True, extra="forbid", allow_inf_nan=False, frozen=True)


class MixtureTerm(_Model):
    weight: float
    basis: Annotated[list[int], Field(min_length=2, max_length=2)]


class MixtureInitial(_Model):
    kind: Literal["mixture"]
    terms: Annotated[list[MixtureTerm], Field(min_length=1)]


class ProductInitial(_Model):
    kind: Literal["product"]
    kets: Annotated[list[list[Amplitude]], Field(min_length=2, max_length=2)]


class MatrixTactic(_Model):
    matrix: list[list[Amplitude]]


class MixtureBranch(_Model):
    probability: float
    tactic: Union[NamedTactic, MatrixTactic]


class MixtureTactic(_Model):
    mixture: Annotated[list[MixtureBranch], Field(min_length=1)]


class Move(_Model):
    player: Literal[1, 2]
    tactic: Union[NamedTactic, MatrixTactic, MixtureTactic]


class GameSpecDoc(_Model):
    dims: Annotated[list[int], Field(min_length=2, max_length=2)]
    payoff: list[list[float]]
    initial: Annotated[Union[MixtureInitial, ProductInitial], Field(discriminator="kind")]
    moves: list[Move] = []


def _amp(x: Amplitude) -> complex:
    return complex(x[0], x[1]) if isinstance(x, list) else complex(x)


def _loc(err: dict) -> str:
    # drop pydantic's union-member tags, keep field names, indices and the unknown key
    loc = err["loc"]
    parts = [str(p) for p in loc[:-1] if isinstance(p, int) or p in _FIELD_NAMES]
    if loc and (isinstance(loc[-1], int) or loc[-1] in _FIELD_NAMES or err["type"] == "extra_forbidden"):
        parts.append(str(loc[-1]))
    return ".".join(parts) or "<root>"


def _most_specific(errors: list[dict]) -> dict:
    # union members each report a failure; unknown keys are the most telling, then the deepest path
    return max(errors, key=lambda e: (e["type"] == "extra_forbidden", len(e["loc"])))


_FIELD_NAMES = {
    name
    for model in (MixtureTerm, MixtureInitial, ProductInitial, MatrixTactic, MixtureBranch, MixtureTactic, Move, GameSpecDoc)
    for name in model.model_fields
}


def parse_game_spec(text: str) -> GameSpecDoc:
    """Parse and fully validate a game-spec document.

    Raises ``SpecSyntaxError`` for malformed JSON, ``SpecSchemaError`` for
    shape/type problems (missing or unknown keys, wrong types), and
    ``SpecSemanticError`` for well-typed documents that describe an invalid
    game.
    """
    try:
        raw = json.loads(text)
    except json.JSONDecodeError as e:
        raise SpecSyntaxError(e.msg, e.lineno, e.colno) from None
    try:
        doc = GameSpecDoc.model_validate(raw)
    except pydantic.ValidationError as e:
        err = _most_specific(e.errors())
        raise SpecSchemaError(_loc(err), err["msg"]) from None
    check_semantics(doc)
    return doc


def serialize_game_spec(doc: GameSpecDoc) -> str:
    return json.dumps(doc.model_dump(mode="json"), indent=2) + "\n"


def _tactic_matrix(t: Union[str, MatrixTactic], dim: int, where: str) -> np.ndarray:
    if isinstance(t, MatrixTactic):
        rows = t.matrix
        if len(rows) != dim or any(len(r) != dim for r in rows):
            raise SpecSemanticError(f"{where}: tactic matrix must be {dim}x{dim}")
        u = np.array([[_amp(x) for x in r] for r in rows], dtype=complex)
        if not linalg.is_unitary(u, SPEC_TOL):
            raise SpecSemanticError(f"{where}: non-unitary tactic")
        return u
    if t == "identity":
        return linalg.identity(dim)
    if t == "dft":
        return linalg.dft_matrix(dim)
    if dim != 2:
        raise SpecSemanticError(f"{where}: tactic {t!r} is only defined for a 2-dimensional player space")
    return linalg.hadamard() if t == "hadamard" else linalg.negation()


def _check_probabilities(ps: list[float], where: str) -> None:
    for p in ps:
        if not 0.0 <= p <= 1.0:
            raise SpecSemanticError(f"{where}: probability {p} outside [0, 1]")
    if abs(math.fsum(ps) - 1.0) > SPEC_TOL:
        raise SpecSemanticError(f"{where}: probabilities sum to {math.fsum(ps)}, expected 1")


def check_semantics(doc: GameSpecDoc) -> None:
    m1, m2 = doc.dims
    if m1 < 2 or m2 < 2:
        raise SpecSemanticError(f"dims: each player needs at least 2 strategies, got {doc.dims}")
    if m1 * m2 > 64:
        raise SpecSemanticError(f"dims: joint dimension {m1 * m2} exceeds the supported 64")
    if len(doc.payoff) != m1 or any(len(r) != m2 for r in doc.payoff):
        raise SpecSemanticError(f"payoff: expected a {m1}x{m2} matrix")
    init = doc.initial
    if isinstance(init, MixtureInitial):
        _check_probabilities([t.weight for t in init.terms], "initial.terms")
        for k, t in enumerate(init.terms):
            r, s = t.basis
            if not (0 <= r < m1 and 0 <= s < m2):
                raise SpecSemanticError(f"initial.terms.{k}.basis: index {t.basis} out of range")
    else:
        for k, (ket, dim) in enumerate(zip(init.kets, (m1, m2))):
            if len(ket) != dim:
                raise SpecSemanticError(f"initial.kets.{k}: expected {dim} amplitudes, got {len(ket)}")
            if not np.linalg.norm([_amp(x) for x in ket]) > 1e-100:
                raise SpecSemanticError(f"initial.kets.{k}: zero (or vanishing) ket")
    for k, mv in enumerate(doc.moves):
        dim = m1 if mv.player == 1 else m2
        where = f"moves.{k}.tactic"
        if isinstance(mv.tactic, MixtureTactic):
            _check_probabilities([b.probability for b in mv.tactic.mixture], f"{where}.mixture")
            for j, br in enumerate(mv.tactic.mixture):
                _tactic_matrix(br.tactic, dim, f"{where}.mixture.{j}")
        else:
            _tactic_matrix(mv.tactic, dim, where)


def _nearest_unitary(u: np.ndarray) -> np.ndarray:
    # polar factor; moves a 1e-9-unitary literal onto the 1e-12 tolerance used by the engine.
    # Exact inputs (named tactics) pass through untouched so they add no rounding.
    if linalg.is_unitary(u, linalg.STRUCT_TOL):
        return u
    w, _, vh = np.linalg.svd(u)
    return w @ vh


def move_tactic(doc: GameSpecDoc, k: int) -> MixedTactic:
    mv = doc.moves[k]
    dim = doc.dims[0] if mv.player == 1 else doc.dims[1]
    where = f"moves.{k}.tactic"
    if isinstance(mv.tactic, MixtureTactic):
        total = math.fsum(b.probability for b in mv.tactic.mixture)
        branches = tuple(
            (b.probability / total, _nearest_unitary(_tactic_matrix(b.tactic, dim, where)))
            for b in mv.tactic.mixture
        )
        return MixedTactic(mv.player, branches)
    return MixedTactic.pure(mv.player, _nearest_unitary(_tactic_matrix(mv.tactic, dim, where)))


def initial_game_state(doc: GameSpecDoc) -> GameState:
    m1, m2 = doc.dims
    init = doc.initial
    if isinstance(init, MixtureInitial):
        total = math.fsum(t.weight for t in init.terms)
        return GameState.mixture(m1, m2, [(t.weight / total, t.basis[0], t.basis[1]) for t in init.terms])
    k1, k2 = ([_amp(x) for x in ket] for ket in init.kets)
    return GameState.product(k1, k2)


@dataclass
class StepSummary:
    label: str
    trace: float
    purity: float
    diagonal: list[float]
    min_eigenvalue: float
    state: GameState = field(repr=False)


@dataclass
class RunReport:
    spec: GameSpecDoc
    steps: list[StepSummary]
    payoff_usd: float
    checks: dict

    @property
    def final_state(self) -> GameState:
        return self.steps[-1].state


def _summarize(label: str, state: GameState) -> StepSummary:
    return StepSummary(
        label=label,
        trace=float(linalg.trace(state.rho).real),
        purity=state.purity(),
        diagonal=state.diagonal().tolist(),
        min_eigenvalue=linalg.min_eigenvalue(state.rho),
        state=state,
    )


def execute_spec(doc: GameSpecDoc) -> RunReport:
    """Apply the moves in order and price the final state against ``doc.payoff``.

    Every intermediate state goes through ``GameState`` validation, so a
    broken invariant surfaces as ``ConsistencyError`` at the offending move.
    """
    state = initial_game_state(doc)
    steps = [_summarize("initial", state)]
    for k, mv in enumerate(doc.moves):
        state = apply_mixed_tactic(state, move_tactic(doc, k))
        steps.append(_summarize(f"move{k + 1}_player{mv.player}", state))
    payoff = expected_payoff(build_payoff_observable(PayoffMatrix(doc.payoff)), state)
    checks = {
        "density_invariants": True,
        "max_trace_error": max(abs(s.trace - 1.0) for s in steps),
        "min_eigenvalue": min(s.min_eigenvalue for s in steps),
        "max_hermitian_error": max(float(np.max(np.abs(s.state.rho - s.state.rho.conj().T))) for s in steps),
    }
    return RunReport(doc, steps, payoff, checks)


def newcomb_spec_text() -> str:
    """The bundled Newcomb game spec (female intention, male tactic)."""
    return resources.files("qnewcomb").joinpath("data/newcomb.json").read_text(encoding="utf-8")


def newcomb_spec(v: float, w: float) -> GameSpecDoc:
    """Bundled Newcomb spec with its intention weight and step-2 mixture set to ``(v, w)``."""
    raw = json.loads(newcomb_spec_text())
    raw["initial"]["terms"] = [
        {"weight": v, "basis": [0, 0]},
        {"weight": 1.0 - v, "basis": [1, 1]},
    ]
    raw["moves"][1]["tactic"]["mixture"][0]["probability"] = w
    raw["moves"][1]["tactic"]["mixture"][1]["probability"] = 1.0 - w
    return parse_game_spec(json.dumps(raw))
