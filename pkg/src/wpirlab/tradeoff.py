"""Closed-form rate-privacy trade-offs, curve sweeps, and a simplex search.

For a leakage budget rho the wrapper time-shares the clean phase (M'=0) and
the full-set base scheme (M'=M-1) with the two-point distribution

    MIL:  P(M'=0) = min(1, rho*N / (r*log M)),
    MaxL: P(M'=0) = min(1, N*(2^rho - 1) / (r*(M-1))),

which meets the budget with equality below saturation and achieves

    rate = (1 + (1 - c)_+ * (r/N + ... + (r/N)^(M-1)))^-1,

where c is the clean-phase mass above (the (x)_+ clamp applied before any
exponentiation).  Beyond the saturation budget (r*log M/N bits for MIL,
log(1 + r(M-1)/N) for MaxL) the clean phase runs alone and the rate is 1.

The MDS and T-collusion variants share one curve with K and T playing the
same role, so curves coincide whenever K = T.

numeric_dist_search ignores the closed forms and scans the whole
probability simplex over [0:M-1] on a grid, maximizing the protocol rate
subject to the analytic metric staying within budget; two-point optima are
an observed (not proven) outcome, and any strictly better grid point is
returned as a counterexample.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterator

from .core import PirSetting
from .leakage import analytic_maxl, analytic_mil
from .wpir import MPrimeDistribution, two_point, wpir_rate

METRICS = ("MIL", "MaxL")


def _check_metric(metric: str):
    if metric not in METRICS:
        raise ValueError(f"metric must be one of {METRICS}")


def _check_setting(setting: PirSetting):
    if setting.M < 2:
        raise ValueError("trade-offs need M >= 2 files")


def _log2_exact(M: int):
    """log2(M) as an int when M is a power of two, else a float."""
    if M & (M - 1) == 0:
        return M.bit_length() - 1
    return math.log2(M)


def saturation(setting: PirSetting, metric: str) -> float:
    """Budget beyond which rate 1 is achievable."""
    _check_metric(metric)
    _check_setting(setting)
    r, N, M = setting.r, setting.N, setting.M
    if metric == "MIL":
        return r * math.log2(M) / N
    return math.log2(1 + r * (M - 1) / N)


def _clean_mass(setting: PirSetting, metric: str, rho):
    """P(M'=0) for the budget; exact at the endpoints and when inputs allow."""
    if rho < 0:
        raise ValueError("leakage budget must be nonnegative")
    r, N, M = setting.r, setting.N, setting.M
    if rho == 0:
        return Fraction(0)
    if metric == "MIL":
        log_m = _log2_exact(M)
        if isinstance(rho, Fraction) and isinstance(log_m, int):
            p0 = rho * N / (r * log_m)
        else:
            p0 = float(rho) * N / (r * float(log_m))
    else:
        p0 = N * (2.0 ** float(rho) - 1.0) / (r * (M - 1))
    return Fraction(1) if p0 >= 1 else p0


def optimal_dist_for_budget(setting: PirSetting, metric: str, rho) -> MPrimeDistribution:
    """The two-point distribution on {0, M-1} used to meet the budget."""
    _check_metric(metric)
    _check_setting(setting)
    return two_point(setting.M, _clean_mass(setting, metric, rho))


@dataclass(frozen=True)
class TradeoffPoint:
    rho_budget: float
    rho_achieved: float
    rho_normalized: float
    rate: float

    def __post_init__(self):
        if not 0 < self.rate <= 1:
            raise ValueError("rate must lie in (0, 1]")


def theorem_tradeoff(setting: PirSetting, metric: str, rho) -> TradeoffPoint:
    """Closed-form (achieved leakage, rate) at budget rho."""
    _check_metric(metric)
    _check_setting(setting)
    r, N, M = setting.r, setting.N, setting.M
    sat = saturation(setting, metric)
    achieved = min(float(rho), sat)
    c = _clean_mass(setting, metric, rho)
    x = Fraction(r, N)
    geo = sum(x ** i for i in range(1, M))
    rate = 1 / (1 + (1 - c) * geo)
    return TradeoffPoint(rho_budget=float(rho), rho_achieved=achieved,
                         rho_normalized=achieved / math.log2(M),
                         rate=rate if isinstance(rate, Fraction) else float(rate))


def sweep_curve(setting: PirSetting, metric: str, grid_points: int) -> list[TradeoffPoint]:
    """Uniform budget grid from 0 to 10% past saturation."""
    if grid_points < 2:
        raise ValueError("need at least two grid points")
    sat = saturation(setting, metric)
    top = 1.1 * sat
    return [theorem_tradeoff(setting, metric, top * i / (grid_points - 1))
            for i in range(grid_points)]


def write_curve_csv(points: list[TradeoffPoint], path: str):
    with open(path, "w", newline="\n") as fh:
        fh.write(curve_csv_text(points))


def curve_csv_text(points: list[TradeoffPoint]) -> str:
    lines = ["rho_budget,rho_achieved,rho_normalized,rate"]
    for p in points:
        lines.append(",".join(f"{float(v):.14g}" for v in
                              (p.rho_budget, p.rho_achieved, p.rho_normalized, p.rate)))
    return "\n".join(lines) + "\n"


def _simplex_grid(M: int, steps: int) -> Iterator[tuple[float, ...]]:
    def rec(parts_left: int, remaining: int, prefix: tuple):
        if parts_left == 1:
            yield prefix + (remaining,)
            return
        for v in range(remaining + 1):
            yield from rec(parts_left - 1, remaining - v, prefix + (v,))

    for parts in rec(M, steps, ()):
        yield tuple(p / steps for p in parts)


def numeric_dist_search(setting: PirSetting, metric: str, rho,
                        grid_resolution: float = 1e-2):
    """Grid-search the whole M'-simplex for the best feasible rate.

    Returns (distribution, rate, achieved leakage).  Ties prefer
    distributions supported on {0, M-1}; a strictly better interior point
    would be returned instead, surfacing a counterexample to the two-point
    observation.
    """
    _check_metric(metric)
    _check_setting(setting)
    if rho < 0:
        raise ValueError("infeasible budget: rho must be nonnegative")
    M = setting.M
    if M > 5:
        raise ValueError("full-simplex search limited to M <= 5")
    steps = round(1 / grid_resolution)
    measure = analytic_mil if metric == "MIL" else analytic_maxl
    budget = float(rho) + 1e-12
    best = None
    for pmf in _simplex_grid(M, steps):
        dist = MPrimeDistribution(pmf)
        leak = measure(setting, dist)
        if leak > budget:
            continue
        rate = float(wpir_rate(setting, dist))
        two_pt = all(p == 0 for p in pmf[1:M - 1])
        key = (rate, two_pt, -leak)
        if best is None or key > best[0]:
            best = (key, dist, rate, leak)
    if best is None:
        raise RuntimeError("no feasible grid point; the zero-leakage point should always qualify")
    return best[1], best[2], best[3]
