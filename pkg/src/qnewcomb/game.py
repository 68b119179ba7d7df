"""Two-player quantum games in the density-operator picture.

A game state is a density operator on ``H1 (x) H2``; the payoff observable is
diagonal in the joint basis with eigenvalue ``M[r, s]`` on ``|r>_1 |s>_2``.
Players act only on their own factor, either with a single unitary or with a
probabilistic mixture of unitaries.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from qnewcomb import linalg
from qnewcomb.errors import ConsistencyError, ValidationError

HERMITIAN_TOL = 1e-12
TRACE_TOL = 1e-12
PSD_TOL = 1e-10
IMAG_PAYOFF_TOL = 1e-10


def _frozen(a: np.ndarray) -> np.ndarray:
    a = np.array(a, dtype=complex)
    a.flags.writeable = False
    return a


@dataclass(frozen=True)
class PayoffMatrix:
    """Dollar payoffs of player 1; rows are player 1's strategies."""

    entries: np.ndarray

    def __post_init__(self):
        e = np.array(self.entries, dtype=float)
        if e.ndim != 2 or e.shape[0] < 1 or e.shape[1] < 1:
            raise ValidationError(f"payoff matrix must be 2-D, got shape {e.shape}")
        if not np.all(np.isfinite(e)):
            raise ValidationError("payoff matrix has non-finite entries")
        e.flags.writeable = False
        object.__setattr__(self, "entries", e)

    @property
    def m1(self) -> int:
        return self.entries.shape[0]

    @property
    def m2(self) -> int:
        return self.entries.shape[1]

    def __getitem__(self, rs: tuple[int, int]) -> float:
        return float(self.entries[rs])


@dataclass(frozen=True)
class PayoffObservable:
    m1: int
    m2: int
    diag: np.ndarray

    @property
    def dim(self) -> int:
        return self.m1 * self.m2

    def matrix(self) -> np.ndarray:
        return np.diag(self.diag).astype(complex)


@dataclass(frozen=True, eq=False)
class GameState:
    """Density operator on the joint space, validated on construction."""

    m1: int
    m2: int
    rho: np.ndarray = field(repr=False)

    def __post_init__(self):
        rho = _frozen(self.rho)
        d = self.m1 * self.m2
        if rho.shape != (d, d):
            raise ValidationError(f"state for dims ({self.m1}, {self.m2}) must be {d}x{d}, got {rho.shape}")
        if not np.all(np.isfinite(rho)):
            raise ConsistencyError("density operator has non-finite entries")
        if not linalg.is_hermitian(rho, HERMITIAN_TOL):
            raise ConsistencyError("density operator is not Hermitian")
        tr = linalg.trace(rho)
        if abs(tr - 1.0) > TRACE_TOL:
            raise ConsistencyError(f"density operator has trace {tr}, expected 1")
        if not linalg.is_psd(rho, PSD_TOL):
            raise ConsistencyError("density operator has a negative eigenvalue")
        object.__setattr__(self, "rho", rho)

    @classmethod
    def from_ket(cls, m1: int, m2: int, psi) -> "GameState":
        psi = linalg.normalized(psi)
        return cls(m1, m2, linalg.outer(psi, psi))

    @classmethod
    def product(cls, k1, k2) -> "GameState":
        k1, k2 = linalg.normalized(k1), linalg.normalized(k2)
        return cls.from_ket(len(k1), len(k2), np.kron(k1, k2))

    @classmethod
    def mixture(cls, m1: int, m2: int, terms: Sequence[tuple[float, int, int]]) -> "GameState":
        """Diagonal state ``sum_k weight_k |r_k s_k><r_k s_k|``."""
        rho = np.zeros((m1 * m2, m1 * m2), dtype=complex)
        for weight, r, s in terms:
            if not (0 <= r < m1 and 0 <= s < m2):
                raise ValidationError(f"basis ({r}, {s}) out of range for dims ({m1}, {m2})")
            rho[r * m2 + s, r * m2 + s] += weight
        return cls(m1, m2, rho)

    @property
    def dim(self) -> int:
        return self.m1 * self.m2

    def purity(self) -> float:
        return float(np.real(np.trace(self.rho @ self.rho)))

    def diagonal(self) -> np.ndarray:
        return self.rho.diagonal().real.copy()

    def reduced(self, player: int) -> np.ndarray:
        if player == 1:
            return linalg.partial_trace_second(self.rho, self.m1, self.m2)
        if player == 2:
            return linalg.partial_trace_first(self.rho, self.m1, self.m2)
        raise ValidationError(f"player must be 1 or 2, got {player}")

    def max_deviation(self, other: "GameState") -> float:
        return float(np.max(np.abs(self.rho - other.rho)))


@dataclass(frozen=True)
class MixedTactic:
    """Mixed-unitary action of one player: unitary ``U_k`` with probability ``p_k``."""

    player: int
    branches: tuple[tuple[float, np.ndarray], ...]

    def __post_init__(self):
        if self.player not in (1, 2):
            raise ValidationError(f"player must be 1 or 2, got {self.player}")
        if not self.branches:
            raise ValidationError("mixed tactic needs at least one branch")
        clean = []
        for p, u in self.branches:
            p = float(p)
            if not (0.0 <= p <= 1.0):
                raise ValidationError(f"branch probability {p} outside [0, 1]")
            u = linalg.as_matrix(u)
            if u.shape[0] != u.shape[1] or not linalg.is_unitary(u, linalg.STRUCT_TOL):
                raise ValidationError("non-unitary tactic")
            u.flags.writeable = False
            clean.append((p, u))
        total = sum(p for p, _ in clean)
        if abs(total - 1.0) > 1e-12:
            raise ValidationError(f"branch probabilities sum to {total}, expected 1")
        object.__setattr__(self, "branches", tuple(clean))

    @classmethod
    def pure(cls, player: int, u) -> "MixedTactic":
        return cls(player, ((1.0, u),))


def build_payoff_observable(m: PayoffMatrix) -> PayoffObservable:
    # row-major flattening is exactly the r*m2+s joint ordering
    diag = np.array(m.entries, dtype=float).reshape(-1)
    diag.flags.writeable = False
    return PayoffObservable(m.m1, m.m2, diag)


def expected_payoff(obs: PayoffObservable, state: GameState) -> float:
    """``Tr(M W)`` in dollars."""
    if (obs.m1, obs.m2) != (state.m1, state.m2):
        raise ValidationError(
            f"observable dims ({obs.m1}, {obs.m2}) do not match state dims ({state.m1}, {state.m2})"
        )
    # M is diagonal, so Tr(M W) only touches the diagonal of W
    tr = complex(np.sum(obs.diag * state.rho.diagonal()))
    # relative to the payoff scale: a 1e-16 residue times $1e6 is already 1e-10
    if abs(tr.imag) > IMAG_PAYOFF_TOL * max(1.0, float(np.max(np.abs(obs.diag)))):
        raise ConsistencyError(f"expected payoff has imaginary part {tr.imag}")
    return tr.real


def embed(player: int, u: np.ndarray, m1: int, m2: int) -> np.ndarray:
    """Lift a single-player operator to the joint space."""
    if player == 1:
        if u.shape != (m1, m1):
            raise ValidationError(f"player 1 tactic must be {m1}x{m1}, got {u.shape}")
        return linalg.kron(u, linalg.identity(m2))
    if player == 2:
        if u.shape != (m2, m2):
            raise ValidationError(f"player 2 tactic must be {m2}x{m2}, got {u.shape}")
        return linalg.kron(linalg.identity(m1), u)
    raise ValidationError(f"player must be 1 or 2, got {player}")


def _conjugate_by(rho: np.ndarray, U: np.ndarray) -> np.ndarray:
    return U @ rho @ linalg.adjoint(U)


def apply_pure_tactic(state: GameState, player: int, u) -> GameState:
    u = linalg.as_matrix(u)
    if u.shape[0] != u.shape[1] or not linalg.is_unitary(u, linalg.STRUCT_TOL):
        raise ValidationError("non-unitary tactic")
    U = embed(player, u, state.m1, state.m2)
    return GameState(state.m1, state.m2, _conjugate_by(state.rho, U))


def apply_channel(rho: np.ndarray, t: MixedTactic, m1: int, m2: int) -> np.ndarray:
    """Unvalidated channel action on a raw operator; used for affinity checks."""
    out = np.zeros_like(rho, dtype=complex)
    for p, u in t.branches:
        if p == 0.0:
            continue
        out += p * _conjugate_by(rho, embed(t.player, u, m1, m2))
    return out


def apply_mixed_tactic(state: GameState, t: MixedTactic) -> GameState:
    return GameState(state.m1, state.m2, apply_channel(state.rho, t, state.m1, state.m2))


def classical_outcome_distribution(state: GameState) -> list[tuple[tuple[int, int], float]]:
    """Joint-basis readout probabilities ``((r, s), p)``, including zeros."""
    diag = state.rho.diagonal().real
    total = float(np.sum(diag))
    if abs(total - 1.0) > 1e-10:
        raise ConsistencyError(f"outcome probabilities sum to {total}")
    return [((r, s), float(diag[r * state.m2 + s])) for r in range(state.m1) for s in range(state.m2)]
