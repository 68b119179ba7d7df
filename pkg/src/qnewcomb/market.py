"""Market version of the Newcomb game.

The human's qubit strategy is ``|0> + z|1>`` for ``z`` on the Riemann sphere.
Omega answers with the supply (Fourier) representation of that strategy,
``F(|0> + z|1>)``, i.e. ``z -> (1 - z)/(1 + z)``. Points are kept in
homogeneous coordinates ``(a, b)`` with ``z = b/a`` so ``z = -1`` and
``z = inf`` need no special cases.
"""

from __future__ import annotations

import cmath
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from qnewcomb import linalg
from qnewcomb.errors import ValidationError
from qnewcomb.game import GameState, expected_payoff
from qnewcomb.newcomb import newcomb_observable

CHART_Z = "z"
CHART_U = "u"

_REFINE_POINTS = 21


@dataclass(frozen=True)
class ProjectivePoint:
    a: complex
    b: complex

    def __post_init__(self):
        a, b = complex(self.a), complex(self.b)
        if not (cmath.isfinite(a) and cmath.isfinite(b)):
            raise ValidationError("projective coordinates must be finite")
        if a == 0 and b == 0:
            raise ValidationError("(0, 0) is not a projective point")
        object.__setattr__(self, "a", a)
        object.__setattr__(self, "b", b)

    @classmethod
    def from_z(cls, z: complex | float) -> "ProjectivePoint":
        z = complex(z)
        if cmath.isinf(z):
            return cls(0.0, 1.0)
        return cls(1.0, z)

    @classmethod
    def infinity(cls) -> "ProjectivePoint":
        return cls(0.0, 1.0)

    @property
    def is_infinity(self) -> bool:
        return self.a == 0

    @property
    def z(self) -> complex:
        """Nonhomogeneous coordinate; ``complex(inf)`` at the point at infinity."""
        if self.a == 0:
            return complex(math.inf, 0.0)
        return self.b / self.a

    def canonical(self) -> "ProjectivePoint":
        """Unit norm, largest-modulus component real and positive (``a`` wins ties)."""
        n = math.hypot(abs(self.a), abs(self.b))
        a, b = self.a / n, self.b / n
        if abs(a) >= abs(b):
            ph = a.conjugate() / abs(a)
            return ProjectivePoint(abs(a), b * ph)
        ph = b.conjugate() / abs(b)
        return ProjectivePoint(a * ph, abs(b))

    def ket(self) -> np.ndarray:
        c = self.canonical()
        return np.array([c.a, c.b], dtype=complex)

    def distance(self, other: "ProjectivePoint") -> float:
        """Fubini-Study angle between the two rays, in ``[0, pi/2]``.

        Computed from ``|a1 b2 - b1 a2|`` (the sine of the angle) so it stays
        accurate for nearby points.
        """
        p, q = self.ket(), other.ket()
        s = abs(p[0] * q[1] - p[1] * q[0])
        return math.asin(min(1.0, s))

    def __str__(self) -> str:
        if self.is_infinity:
            return "z=inf"
        z = self.z
        return f"z={z.real:+.9g}{z.imag:+.9g}i"


def demand_to_supply(psi) -> np.ndarray:
    psi = linalg.as_ket(psi)
    return linalg.dft_matrix(len(psi)) @ psi


def strategy_from_projective(p: ProjectivePoint) -> np.ndarray:
    return p.ket()


def omega_response(p: ProjectivePoint) -> ProjectivePoint:
    """Hadamard on homogeneous coordinates: ``(a, b) -> (a + b, a - b)``."""
    return ProjectivePoint(p.a + p.b, p.a - p.b).canonical()


def build_market_state(p: ProjectivePoint) -> GameState:
    return GameState.product(strategy_from_projective(p), strategy_from_projective(omega_response(p)))


def market_payoff(p: ProjectivePoint) -> float:
    return expected_payoff(newcomb_observable(), build_market_state(p))


def market_payoff_batch(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Vectorized ``<psi| M |psi>`` for many homogeneous points at once.

    Same computation as :func:`market_payoff` (product ket, diagonal
    observable) but on arrays of ``a`` and ``b``; no validation.
    """
    a = np.asarray(a, dtype=complex)
    b = np.asarray(b, dtype=complex)
    hn = np.sqrt(np.abs(a) ** 2 + np.abs(b) ** 2)
    h0, h1 = a / hn, b / hn
    oa, ob = a + b, a - b
    on = np.sqrt(np.abs(oa) ** 2 + np.abs(ob) ** 2)
    o0, o1 = oa / on, ob / on
    diag = newcomb_observable().diag
    joint = (h0 * o0, h0 * o1, h1 * o0, h1 * o1)
    out = np.zeros(a.shape, dtype=float)
    for d, amp in zip(diag, joint):
        out += d * (amp.real**2 + amp.imag**2)
    return out


@dataclass(frozen=True)
class ScanConfig:
    grid_n: int = 401
    radius: float = 4.0
    inverse_chart: bool = True
    refine: int = 12
    workers: int = 1

    def __post_init__(self):
        if int(self.grid_n) != self.grid_n or self.grid_n < 3:
            raise ValidationError(f"grid_n must be an integer >= 3, got {self.grid_n}")
        if not (math.isfinite(self.radius) and self.radius > 0):
            raise ValidationError(f"radius must be positive and finite, got {self.radius}")
        if int(self.refine) != self.refine or self.refine < 0:
            raise ValidationError(f"refine must be an integer >= 0, got {self.refine}")
        if int(self.workers) != self.workers or self.workers < 1:
            raise ValidationError(f"workers must be an integer >= 1, got {self.workers}")

    @property
    def charts(self) -> tuple[str, ...]:
        return (CHART_Z, CHART_U) if self.inverse_chart else (CHART_Z,)


@dataclass(frozen=True)
class LandscapeSample:
    chart: str
    re: float
    im: float
    payoff: float
    row: int = 0
    col: int = 0

    def point(self) -> ProjectivePoint:
        return chart_point(self.chart, complex(self.re, self.im))


def chart_point(chart: str, w: complex) -> ProjectivePoint:
    if chart == CHART_Z:
        return ProjectivePoint(1.0, w)
    if chart == CHART_U:
        return ProjectivePoint(w, 1.0)
    raise ValidationError(f"unknown chart {chart!r}")


def _chart_ab(chart: str, w: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    one = np.ones_like(w)
    return (one, w) if chart == CHART_Z else (w, one)


def grid_axis(cfg: ScanConfig) -> np.ndarray:
    return np.linspace(-cfg.radius, cfg.radius, cfg.grid_n)


def scan_arrays(cfg: ScanConfig) -> dict[str, np.ndarray]:
    """Payoff grids per chart; entry ``[row, col]`` is at ``re = axis[col], im = axis[row]``.

    Rows are split across ``cfg.workers`` threads and reassembled in order;
    each payoff is computed elementwise, so the result is bit-identical for
    any worker count.
    """
    axis = grid_axis(cfg)
    out = {}
    for chart in cfg.charts:
        w = axis[None, :] + 1j * axis[:, None]
        if cfg.workers == 1:
            out[chart] = market_payoff_batch(*_chart_ab(chart, w))
            continue
        blocks = np.array_split(np.arange(cfg.grid_n), cfg.workers)
        with ThreadPoolExecutor(max_workers=cfg.workers) as ex:
            parts = list(ex.map(lambda rows: market_payoff_batch(*_chart_ab(chart, w[rows])), blocks))
        out[chart] = np.concatenate(parts, axis=0)
    return out


def scan_landscape(cfg: ScanConfig) -> list[LandscapeSample]:
    axis = grid_axis(cfg)
    samples = []
    for chart, pay in scan_arrays(cfg).items():
        for i in range(cfg.grid_n):
            for j in range(cfg.grid_n):
                samples.append(LandscapeSample(chart, float(axis[j]), float(axis[i]), float(pay[i, j]), i, j))
    return samples


class Extrema(NamedTuple):
    argmax: ProjectivePoint
    max: float
    argmin: ProjectivePoint
    min: float


def _refine(chart: str, center: complex, half: float, iterations: int, sign: float) -> tuple[complex, float]:
    # shrinking-window search; sign=+1 maximizes, -1 minimizes
    best_w = center
    a, b = _chart_ab(chart, np.array([center]))
    best = float(market_payoff_batch(a, b)[0])
    for _ in range(iterations):
        ax = np.linspace(-half, half, _REFINE_POINTS)
        w = best_w + ax[None, :] + 1j * ax[:, None]
        pay = market_payoff_batch(*_chart_ab(chart, w))
        k = int(np.argmax(sign * pay))
        if sign * pay.flat[k] > sign * best:
            best, best_w = float(pay.flat[k]), complex(w.flat[k])
        half *= 4.0 / (_REFINE_POINTS - 1)
    return best_w, best


def find_extrema(cfg: ScanConfig | None = None) -> Extrema:
    """Coarse scan over the configured charts, then shrinking-grid refinement.

    The window starts at two coarse cells around the best sample and
    shrinks by a factor of five per iteration, keeping a two-cell margin
    around the incumbent.
    """
    cfg = cfg or ScanConfig()
    grids = scan_arrays(cfg)
    axis = grid_axis(cfg)
    step = float(axis[1] - axis[0])
    found = []
    for sign in (1.0, -1.0):
        best = None
        for chart in cfg.charts:
            pay = grids[chart]
            k = int(np.argmax(sign * pay))
            val = float(pay.flat[k])
            if best is None or sign * val > sign * best[2]:
                i, j = divmod(k, cfg.grid_n)
                best = (chart, complex(axis[j], axis[i]), val)
        chart, w, _ = best
        w, val = _refine(chart, w, 2.0 * step, cfg.refine, sign)
        found.append((chart_point(chart, w).canonical(), val))
    (pmax, vmax), (pmin, vmin) = found
    return Extrema(pmax, vmax, pmin, vmin)


def real_axis_extrema(n: int = 200001, radius: float = 4.0) -> Extrema:
    """Brute-force extrema restricted to real ``z`` (and real ``u = 1/z``)."""
    x = np.linspace(-radius, radius, n)
    results = []
    for sign in (1.0, -1.0):
        best = None
        for chart in (CHART_Z, CHART_U):
            pay = market_payoff_batch(*_chart_ab(chart, x.astype(complex)))
            k = int(np.argmax(sign * pay))
            if best is None or sign * pay[k] > sign * best[1]:
                best = (chart_point(chart, complex(x[k])).canonical(), float(pay[k]))
        results.append(best)
    return Extrema(results[0][0], results[0][1], results[1][0], results[1][1])
