"""Named invariant suites behind the `wpir verify` subcommand.

The quick tier re-derives the headline numbers exactly (capacities, the
full randomness enumeration of the replicated base scheme at N=M=2,
closed-form/empirical leakage agreement, trade-off consistency, the K=T
reduction).  The full tier adds the statistical suites: sampled privacy
checks for the MDS and T-collusion schemes, Monte-Carlo leakage, and an
empirical-rate run.
"""

from __future__ import annotations

import math
import time
from fractions import Fraction

import numpy as np

from .core import capacity, generate_library, mds, replicated, tcollusion
from .galois import default_field
from .leakage import (analytic_maxl, analytic_mil, base_privacy_check, empirical_maxl,
                      empirical_mil, mc_threshold, sj_exhaustive_stats)
from .tradeoff import optimal_dist_for_budget, sweep_curve, theorem_tradeoff
from .experiment import ExperimentConfig, run_experiment
from .rng import substream
from .transport import InProcessTransport
from .experiment import run_session
from .wpir import MPrimeDistribution, point_mass, two_point, wpir_rate


def check_capacities():
    cases = [
        (replicated(2, 2), Fraction(2, 3)),
        (replicated(3, 2), Fraction(3, 4)),
        (tcollusion(3, 2, 2), Fraction(3, 5)),
        (mds(5, 3, 2), Fraction(5, 8)),
    ]
    bad = [(s.describe(), str(capacity(s)), str(want))
           for s, want in cases if capacity(s) != want]
    return not bad, f"mismatches: {bad}" if bad else "4/4 exact"


def check_sj_exhaustive():
    tv, h_bits, supports_equal, equiprobable = sj_exhaustive_stats(2, 2)
    ok = tv == 0.0 and supports_equal and equiprobable and all(h == 1.0 for h in h_bits)
    return ok, f"TV={tv}, H(theta|Q)={h_bits}"


def check_round_trips(seeds=range(6)):
    field = default_field()
    settings = [replicated(2, 2), replicated(3, 3), mds(3, 2, 2),
                mds(5, 3, 2), tcollusion(3, 2, 2)]
    count = 0
    for setting in settings:
        lib = generate_library(setting.M, setting.file_length, field, 2024)
        transport = InProcessTransport(setting, lib)
        dist = MPrimeDistribution(tuple(1.0 / setting.M for _ in range(setting.M)))
        for theta in range(1, setting.M + 1):
            for s in seeds:
                run_session(setting, theta, dist, s, transport)  # raises on mismatch
                count += 1
    return True, f"{count} sessions decoded exactly"


def check_lemma_agreement():
    worst = 0.0
    for setting in [replicated(2, 2), replicated(3, 2), mds(3, 2, 2),
                    mds(5, 3, 2), tcollusion(3, 2, 2)]:
        t = setting.T if setting.T else 1
        for dist in [point_mass(setting.M, 0), point_mass(setting.M, setting.M - 1),
                     two_point(setting.M, 0.5)]:
            worst = max(worst, abs(analytic_mil(setting, dist)
                                   - empirical_mil(setting, dist, t, "exhaustive")))
            worst = max(worst, abs(analytic_maxl(setting, dist)
                                   - empirical_maxl(setting, dist, t, "exhaustive")))
    return worst < 1e-10, f"max |analytic - exhaustive empirical| = {worst:.2e}"


def check_tradeoff_consistency():
    worst = 0.0
    for setting in [replicated(3, 2), mds(5, 3, 2), tcollusion(3, 2, 2)]:
        for metric in ("MIL", "MaxL"):
            for frac in (0.0, 0.25, 0.5, 0.75, 1.0, 1.1):
                from .tradeoff import saturation
                rho = saturation(setting, metric) * frac
                pt = theorem_tradeoff(setting, metric, rho)
                dist = optimal_dist_for_budget(setting, metric, rho)
                ana = analytic_mil(setting, dist) if metric == "MIL" else analytic_maxl(setting, dist)
                worst = max(worst, abs(ana - pt.rho_achieved),
                            abs(float(wpir_rate(setting, dist)) - float(pt.rate)))
    return worst < 1e-12, f"max deviation {worst:.2e}"


def check_reduction_identity():
    tc, md = tcollusion(3, 2, 2), mds(3, 2, 2)
    rng = substream(17, "reduction")
    for _ in range(20):
        raw = rng.random(2)
        pmf = tuple(float(x) for x in raw / raw.sum())
        d = MPrimeDistribution(pmf)
        if analytic_mil(tc, d) != analytic_mil(md, d):
            return False, f"MIL differs at pmf {pmf}"
        if analytic_maxl(tc, d) != analytic_maxl(md, d):
            return False, f"MaxL differs at pmf {pmf}"
    for metric in ("MIL", "MaxL"):
        if sweep_curve(tc, metric, 41) != sweep_curve(md, metric, 41):
            return False, f"{metric} curves differ"
    return True, "curves and leakage identical for K = T"


def check_statistical_privacy(samples=10 ** 5):
    field = default_field()
    results = []
    for setting in [tcollusion(3, 2, 2), mds(3, 2, 2)]:
        tv = base_privacy_check(setting, field, samples=samples, seed=41)
        thr = mc_threshold(64, samples)
        results.append((setting.describe(), tv, thr))
    ok = all(tv < thr for _, tv, thr in results)
    return ok, "; ".join(f"{d}: TV={tv:.4f} < {thr:.4f}" for d, tv, thr in results)


def check_mc_leakage(samples=2 * 10 ** 5):
    results = []
    for setting, dist in [(mds(5, 3, 2), point_mass(2, 0)),
                          (tcollusion(3, 2, 2), point_mass(2, 0))]:
        t = setting.T if setting.T else 1
        got = empirical_mil(setting, dist, t, "monte_carlo", samples, seed=5)
        want = analytic_mil(setting, dist)
        thr = mc_threshold(setting.M + 2, samples)
        results.append((setting.describe(), got, want, thr))
    ok = all(abs(g - w) < t for _, g, w, t in results)
    return ok, "; ".join(f"{d}: |{g:.4f}-{w:.4f}| < {t:.4f}" for d, g, w, t in results)


def check_empirical_rate(trials=2000):
    setting = replicated(3, 2)
    cfg = ExperimentConfig(setting=setting, dist=two_point(2, 0.5),
                           trials=trials, seed=3)
    res = run_experiment(cfg)
    want = float(wpir_rate(setting, cfg.dist))
    rel = abs(res.empirical_rate - want) / want
    return rel < 0.02, f"empirical {res.empirical_rate:.4f} vs {want:.4f} (rel {rel:.3%})"


QUICK_CHECKS = [
    ("capacities", check_capacities),
    ("replicated-base-exhaustive-privacy", check_sj_exhaustive),
    ("round-trip-correctness", check_round_trips),
    ("lemma-empirical-agreement", check_lemma_agreement),
    ("tradeoff-consistency", check_tradeoff_consistency),
    ("collusion-mds-reduction", check_reduction_identity),
]

FULL_CHECKS = QUICK_CHECKS + [
    ("statistical-privacy", check_statistical_privacy),
    ("monte-carlo-leakage", check_mc_leakage),
    ("empirical-rate", check_empirical_rate),
]


def run_checks(full: bool = False, out=print) -> bool:
    checks = FULL_CHECKS if full else QUICK_CHECKS
    all_ok = True
    for name, fn in checks:
        t0 = time.perf_counter()
        try:
            ok, detail = fn()
        except Exception as exc:  # a crashed suite is a failed suite
            ok, detail = False, f"raised {type(exc).__name__}: {exc}"
        all_ok &= ok
        out(f"[{'PASS' if ok else 'FAIL'}] {name} ({time.perf_counter() - t0:.1f}s) {detail}")
    return all_ok
