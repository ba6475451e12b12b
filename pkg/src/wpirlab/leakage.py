"""Privacy-leakage metrics: closed forms and independent empirical estimators.

Two metrics are computed, both in bits (all logarithms base 2):

  * MIL: the mutual information I(theta; queries seen), averaged over all
    servers (or over all T-subsets under collusion);
  * MaxL: log of the summed per-query maxima of P(query | theta), maximized
    over servers (or T-subsets).

For the time-sharing wrapper the query seen by a server collapses to its
class: a clean request names the desired index outright, the null query is
uninformative, and a structured query reveals exactly its file set, within
which every file is equally likely to be the desired one.  Class-level and
query-level computations therefore agree, which the test suite checks by
full query enumeration at tiny parameters.

Closed forms for the wrapper, with r = 1, K, or T per variant and
P0 = P(M'=0):

    MIL  = (1 - (1 - r/N) P0) log M - E[log(M'+1)]
    MaxL = log M + log(E[1/(M'+1)] - (1 - 1/M)(1 - r/N) P0)

Empirical estimators never consult these formulas: exhaustive mode
enumerates the session randomness exactly (rational arithmetic); Monte
Carlo mode samples real emitted tokens.  Statistical comparisons use the
acceptance rule deviation < 4*sqrt(cells / samples).
"""

from __future__ import annotations

import hashlib
import itertools
import math
from collections import Counter
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .core import PirSetting, Tag, Variant, query_class_of
from .galois import Field, default_field
from .mdspir import bu_query, bu_randomness
from .rng import substream
from .rounds import build_plan, realize_combos
from .sunjafar import enumerate_randomness, sj_query, sj_randomness
from .tpir import build_tplan, realize_tcombos, sample_trandomness
from .wpir import MPrimeDistribution, wpir_query

BOT = ("null",)


def clean_label(k: int):
    return ("clean", k)


def files_label(files):
    return ("files", frozenset(files))


def token_tuple_label(tokens):
    """Class of the joint view of a server subset (Claim-style reduction)."""
    for t in tokens:
        if t.tag == Tag.CLEAN:
            return clean_label(t.clean_index)
    if all(t.tag == Tag.NULL for t in tokens):
        return BOT
    for t in tokens:
        if t.tag == Tag.STRUCTURED:
            return files_label(query_class_of(t))
    raise ValueError("unclassifiable token tuple")


def mc_threshold(cells: int, samples: int) -> float:
    """Acceptance threshold for Monte-Carlo deviations: 4*sqrt(cells/samples)."""
    return 4.0 * math.sqrt(cells / samples)


def _check_dist(setting: PirSetting, dist: MPrimeDistribution):
    if dist.M != setting.M:
        raise ValueError("distribution support must be [0:M-1]")


def _check_collusion_size(setting: PirSetting, t: int):
    if t == 1:
        return
    if setting.variant == Variant.T_COLLUSION and t == setting.T:
        return
    raise ValueError("collusion size must be 1, or T for the T-collusion variant")


def analytic_mil(setting: PirSetting, dist: MPrimeDistribution) -> float:
    _check_dist(setting, dist)
    M, N, r = setting.M, setting.N, setting.r
    e_log = dist.expect(lambda m: math.log2(m + 1))
    return (1.0 - (1.0 - r / N) * dist.p0) * math.log2(M) - e_log


def analytic_maxl(setting: PirSetting, dist: MPrimeDistribution) -> float:
    _check_dist(setting, dist)
    M, N, r = setting.M, setting.N, setting.r
    inner = dist.expect(lambda m: 1.0 / (m + 1))
    inner -= (1.0 - 1.0 / M) * (1.0 - r / N) * dist.p0
    return math.log2(M) + math.log2(inner)


def _clean_hit_probability(setting: PirSetting, subset: tuple[int, ...]) -> Fraction:
    """P(the clean target intersects the subset) in the M'=0 case."""
    N = setting.N
    if setting.variant == Variant.MDS:
        K = setting.K
        miss = Fraction(math.comb(N - len(subset), K), math.comb(N, K))
        return 1 - miss
    return Fraction(len(subset), N)


def class_pmf_exhaustive(setting: PirSetting, dist: MPrimeDistribution, theta: int,
                         subset: tuple[int, ...]) -> dict:
    """Exact class probabilities for one server subset, conditioned on theta."""
    _check_dist(setting, dist)
    M = setting.M
    out: dict = Counter()
    hit = _clean_hit_probability(setting, subset)
    for m_prime, p in enumerate(dist.pmf):
        if p == 0:
            continue
        mass = Fraction(p)
        if m_prime == 0:
            out[clean_label(theta)] += mass * hit
            out[BOT] += mass * (1 - hit)
        else:
            others = [f for f in range(1, M + 1) if f != theta]
            n_choices = math.comb(M - 1, m_prime)
            for J in itertools.combinations(others, m_prime):
                out[files_label(set(J) | {theta})] += mass / n_choices
    return {k: v for k, v in out.items() if v != 0}


def empirical_class_pmf(setting: PirSetting, dist: MPrimeDistribution, theta: int,
                        collusion_size: int = 1, method: str = "exhaustive",
                        samples: int = 0, seed: int = 0,
                        subset: tuple[int, ...] | None = None,
                        field: Field | None = None) -> dict:
    """Class pmf seen by a server subset (default: the first t servers)."""
    _check_collusion_size(setting, collusion_size)
    if subset is None:
        subset = tuple(range(collusion_size))
    if method == "exhaustive":
        return class_pmf_exhaustive(setting, dist, theta, subset)
    if method != "monte_carlo":
        raise ValueError(f"unknown method {method!r}")
    if samples < 100:
        raise ValueError("insufficient samples for a Monte-Carlo estimate")
    field = field or default_field()
    rng = substream(seed, "classpmf", theta)
    counts = Counter()
    for _ in range(samples):
        tokens, _ = wpir_query(setting, theta, dist, field, rng=rng)
        counts[token_tuple_label([tokens[l] for l in subset])] += 1
    return {k: v / samples for k, v in counts.items()}


def _subsets(setting: PirSetting, t: int):
    return list(itertools.combinations(range(setting.N), t))


def _mi_from_conditionals(cond_by_theta: dict[int, dict]) -> float:
    """I(theta; class) with theta uniform, from per-theta class pmfs."""
    M = len(cond_by_theta)
    marginal = Counter()
    for pmf in cond_by_theta.values():
        for c, p in pmf.items():
            marginal[c] += Fraction(p) if isinstance(p, Fraction) else p
    mi = 0.0
    for theta, pmf in cond_by_theta.items():
        for c, p in pmf.items():
            p = float(p)
            if p > 0:
                mi += (1.0 / M) * p * math.log2(p / (float(marginal[c]) / M))
    return mi


def _maxl_from_conditionals(cond_by_theta: dict[int, dict]) -> float:
    labels = set()
    for pmf in cond_by_theta.values():
        labels.update(pmf)
    total = 0.0
    for c in labels:
        total += max(float(pmf.get(c, 0)) for pmf in cond_by_theta.values())
    return math.log2(total)


def _conditionals(setting, dist, t, method, samples, seed, field):
    """Per-subset, per-theta class pmfs; Monte Carlo shares one sample pass."""
    subsets = _subsets(setting, t)
    M = setting.M
    if method == "exhaustive":
        return {S: {theta: class_pmf_exhaustive(setting, dist, theta, S)
                    for theta in range(1, M + 1)} for S in subsets}
    if samples < 100 * M:
        raise ValueError("insufficient samples for a Monte-Carlo estimate")
    field = field or default_field()
    per_theta = samples // M
    counts = {S: {theta: Counter() for theta in range(1, M + 1)} for S in subsets}
    for theta in range(1, M + 1):
        rng = substream(seed, "leakmc", theta)
        for _ in range(per_theta):
            tokens, _ = wpir_query(setting, theta, dist, field, rng=rng)
            for S in subsets:
                counts[S][theta][token_tuple_label([tokens[l] for l in S])] += 1
    return {S: {theta: {c: n / per_theta for c, n in counter.items()}
                for theta, counter in by_theta.items()}
            for S, by_theta in counts.items()}


def empirical_mil(setting: PirSetting, dist: MPrimeDistribution,
                  collusion_size: int = 1, method: str = "exhaustive",
                  samples: int = 0, seed: int = 0, field: Field | None = None) -> float:
    """I(theta; class) averaged over all subsets of the given size."""
    _check_collusion_size(setting, collusion_size)
    conds = _conditionals(setting, dist, collusion_size, method, samples, seed, field)
    return sum(_mi_from_conditionals(by_theta) for by_theta in conds.values()) / len(conds)


def empirical_maxl(setting: PirSetting, dist: MPrimeDistribution,
                   collusion_size: int = 1, method: str = "exhaustive",
                   samples: int = 0, seed: int = 0, field: Field | None = None) -> float:
    """Maximal leakage, maximized over all subsets of the given size."""
    _check_collusion_size(setting, collusion_size)
    conds = _conditionals(setting, dist, collusion_size, method, samples, seed, field)
    return max(_maxl_from_conditionals(by_theta) for by_theta in conds.values())


def subset_symmetry_gap(setting: PirSetting, dist: MPrimeDistribution,
                        collusion_size: int = 1) -> float:
    """Spread of per-subset MIL values; zero for server-symmetric protocols."""
    conds = _conditionals(setting, dist, collusion_size, "exhaustive", 0, 0, None)
    vals = [_mi_from_conditionals(by_theta) for by_theta in conds.values()]
    return max(vals) - min(vals)


@dataclass(frozen=True)
class LeakageReport:
    metric: str
    analytic_value: float
    empirical_value: float
    method: str
    sample_count: int
    tv_threshold: float
    collusion_size: int

    def __post_init__(self):
        if self.metric not in ("MIL", "MaxL"):
            raise ValueError("metric must be MIL or MaxL")


def leakage_report(setting: PirSetting, dist: MPrimeDistribution, metric: str,
                   method: str = "exhaustive", samples: int = 0, seed: int = 0,
                   collusion_size: int | None = None,
                   field: Field | None = None) -> LeakageReport:
    t = collusion_size if collusion_size is not None else (
        setting.T if setting.variant == Variant.T_COLLUSION else 1)
    if metric == "MIL":
        analytic = analytic_mil(setting, dist)
        empirical = empirical_mil(setting, dist, t, method, samples, seed, field)
    else:
        analytic = analytic_maxl(setting, dist)
        empirical = empirical_maxl(setting, dist, t, method, samples, seed, field)
    cells = setting.M + 2
    threshold = 0.0 if method == "exhaustive" else mc_threshold(cells, samples)
    return LeakageReport(metric=metric, analytic_value=analytic,
                         empirical_value=empirical, method=method,
                         sample_count=samples, tv_threshold=threshold,
                         collusion_size=t)


# -- raw-query distribution checks -------------------------------------------

def _hash_bin(view_bytes: bytes, bins: int) -> int:
    return int.from_bytes(hashlib.blake2b(view_bytes, digest_size=8).digest(), "big") % bins


def _base_tokens(setting: PirSetting, theta: int, field: Field, rng):
    if setting.variant == Variant.REPLICATED:
        return sj_query(setting.N, setting.M, theta,
                        sj_randomness(setting.N, setting.M, rng=rng))
    if setting.variant == Variant.MDS:
        return bu_query(setting.N, setting.K, setting.M, theta,
                        bu_randomness(setting.N, setting.K, setting.M, rng=rng))
    plan = build_tplan(setting.N, setting.T, setting.M, theta - 1)
    rand = sample_trandomness(plan, setting.N ** setting.M, field, rng)
    return [toks for toks, _ in realize_tcombos(plan, rand, tuple(range(1, setting.M + 1)))]


def _tv(counter_a: Counter, counter_b: Counter, total_a: int, total_b: int) -> float:
    keys = set(counter_a) | set(counter_b)
    return sum(abs(counter_a[k] / total_a - counter_b[k] / total_b) for k in keys) / 2


def base_privacy_check(setting: PirSetting, field: Field | None = None,
                       dist: MPrimeDistribution | None = None,
                       method: str = "monte_carlo", samples: int = 10 ** 5,
                       seed: int = 0, bins: int = 64) -> float:
    """Max TV distance between per-subset query distributions across theta.

    With dist=None the base scheme itself is exercised (perfectly private);
    passing a wrapper distribution exposes its deliberate leakage.  Monte
    Carlo mode compares views through a fixed 64-bin hash projection, which
    can only shrink TV distances, with the 4*sqrt(bins/samples) rule.
    Exhaustive mode enumerates the randomness space exactly and is only
    feasible at tiny parameters.
    """
    field = field or default_field()
    t = setting.T if setting.variant == Variant.T_COLLUSION else 1
    subsets = _subsets(setting, t)
    thetas = range(1, setting.M + 1)

    if method == "exhaustive":
        dists = {S: {} for S in subsets}
        if dist is None:
            if setting.variant != Variant.REPLICATED:
                raise ValueError("exhaustive enumeration only at tiny replicated parameters")
            for theta in thetas:
                per = {S: Counter() for S in subsets}
                n = 0
                for rand in enumerate_randomness(setting.N, setting.M):
                    n += 1
                    toks = sj_query(setting.N, setting.M, theta, rand)
                    for S in subsets:
                        per[S][tuple(toks[l].combos for l in S)] += 1
                for S in subsets:
                    dists[S][theta] = (per[S], n)
        else:
            if any(m > 0 and p > 0 for m, p in enumerate(dist.pmf)):
                raise ValueError("exhaustive wrapper enumeration requires support {0}")
            for theta in thetas:
                per = {S: Counter() for S in subsets}
                n = 0
                targets = (itertools.combinations(range(setting.N), setting.K)
                           if setting.variant == Variant.MDS else range(setting.N))
                for tgt in targets:
                    n += 1
                    covered = tgt if isinstance(tgt, tuple) else (tgt,)
                    view = tuple(("clean", theta) if l in covered else ("null",)
                                 for l in range(setting.N))
                    for S in subsets:
                        per[S][tuple(view[l] for l in S)] += 1
                for S in subsets:
                    dists[S][theta] = (per[S], n)
        worst = 0.0
        for S in subsets:
            for ta, tb in itertools.combinations(thetas, 2):
                ca, na = dists[S][ta]
                cb, nb = dists[S][tb]
                worst = max(worst, _tv(ca, cb, na, nb))
        return worst

    if method != "monte_carlo":
        raise ValueError(f"unknown method {method!r}")
    counts = {S: {theta: Counter() for theta in thetas} for S in subsets}
    for theta in thetas:
        rng = substream(seed, "privcheck", theta)
        for _ in range(samples):
            if dist is None:
                toks = _base_tokens(setting, theta, field, rng)
            else:
                toks, _ = wpir_query(setting, theta, dist, field, rng=rng)
            for S in subsets:
                view = repr(tuple(
                    (toks[l].tag, toks[l].clean_index, toks[l].combos) for l in S))
                counts[S][theta][_hash_bin(view.encode(), bins)] += 1
    worst = 0.0
    for S in subsets:
        for ta, tb in itertools.combinations(thetas, 2):
            worst = max(worst, _tv(counts[S][ta], counts[S][tb], samples, samples))
    return worst


def sj_exhaustive_stats(N: int, M: int):
    """Full enumeration of the replicated base scheme at tiny parameters.

    Returns (max TV across theta pairs, per-server H(theta|Q) in bits,
    supports-identical flag, within-support-equiprobable flag).
    """
    thetas = range(1, M + 1)
    per = {theta: [Counter() for _ in range(N)] for theta in thetas}
    n = 0
    for rand in enumerate_randomness(N, M):
        n += 1
        for theta in thetas:
            toks = sj_query(N, M, theta, rand)
            for l in range(N):
                per[theta][l][toks[l].combos] += 1
    max_tv = 0.0
    for l in range(N):
        for ta, tb in itertools.combinations(thetas, 2):
            max_tv = max(max_tv, _tv(per[ta][l], per[tb][l], n, n))
    h_bits = []
    for l in range(N):
        marg = Counter()
        for theta in thetas:
            for q, c in per[theta][l].items():
                marg[q] += c
        # exact when every posterior is uniform over theta (log2 M rational term)
        total = Fraction(n * M)
        uniform_weight = Fraction(0)
        h = 0.0
        for q, mq in marg.items():
            conds = [Fraction(per[theta][l][q], mq) for theta in thetas]
            weight = Fraction(mq) / total
            if all(c == Fraction(1, M) for c in conds):
                uniform_weight += weight
            else:
                h += float(weight) * sum(-float(c) * math.log2(c) for c in conds if c)
        h_bits.append(h + float(uniform_weight) * math.log2(M))
    supports_equal = all(set(per[ta][l]) == set(per[tb][l])
                         for l in range(N)
                         for ta, tb in itertools.combinations(thetas, 2))
    first = per[1][0]
    equiprobable = all(len(set(cnt.values())) == 1
                       for theta in thetas for cnt in per[theta])
    del first
    return max_tv, h_bits, supports_equal, equiprobable


def query_level_metrics_exhaustive(setting: PirSetting, dist: MPrimeDistribution):
    """MIL and MaxL over full query realizations at tiny replicated parameters.

    Enumerates (M', S, J, permutations) exactly; the class-level sufficiency
    reduction is deliberately not used, so this is an independent oracle.
    """
    if setting.variant != Variant.REPLICATED:
        raise ValueError("query-level enumeration implemented for replicated settings")
    _check_dist(setting, dist)
    N, M = setting.N, setting.M
    cond: dict[int, Counter] = {}
    for theta in range(1, M + 1):
        pmf: Counter = Counter()
        for m_prime, p in enumerate(dist.pmf):
            if p == 0:
                continue
            mass = Fraction(p)
            if m_prime == 0:
                for s_target in range(N):
                    for l in range(N):
                        view = ("clean", theta) if l == s_target else ("null",)
                        pmf[(l, view)] += mass / N
            else:
                others = [f for f in range(1, M + 1) if f != theta]
                n_j = math.comb(M - 1, m_prime)
                m = m_prime + 1
                enum = list(_enumerate_level_randomness(N, m))
                for J in itertools.combinations(others, m_prime):
                    files = tuple(sorted(set(J) | {theta}))
                    plan = build_plan(N, 1, m, files.index(theta))
                    for perms in enum:
                        combos, _ = realize_combos(plan, files, perms)
                        for l in range(N):
                            pmf[(l, tuple(combos[l]))] += mass / (n_j * len(enum))
        cond[theta] = pmf
    mil_per_server, maxl_per_server = [], []
    for l in range(N):
        by_theta = {theta: {q: p for (srv, q), p in pmf.items() if srv == l}
                    for theta, pmf in cond.items()}
        mil_per_server.append(_mi_from_conditionals(by_theta))
        maxl_per_server.append(_maxl_from_conditionals(by_theta))
    return sum(mil_per_server) / N, max(maxl_per_server)


def _enumerate_level_randomness(N: int, m: int):
    """All permutation tuples for an m-file run over N^m slots."""
    L = N ** m
    if math.factorial(L) ** m > 10 ** 6:
        raise ValueError("randomness space too large to enumerate")
    for perms in itertools.product(itertools.permutations(range(L)), repeat=m):
        yield tuple(np.array(p) for p in perms)
