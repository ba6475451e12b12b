"""Time-sharing WPIR wrapper over the three capacity-achieving base schemes.

A session first draws the number of extra decoy files M' from a configured
distribution on [0:M-1]:

  * M' = 0 (clean phase): the desired file is requested outright from one
    uniformly chosen server (or from a uniform K-subset under MDS storage,
    each of which returns its coded column); every other server receives the
    null query and answers nothing.  This leaks the index completely to the
    contacted server(s) but costs exactly one file of download.

  * M' = m' >= 1: a uniform m'-subset J of non-desired files is drawn and
    the base scheme runs on the m'+1 files J u {theta} at (m'+1)-level
    super-segmentation: the N^M segments of each file are grouped into
    N^(m'+1) contiguous blocks of N^(M-m'-1), each block standing in for
    one base-scheme segment and answered element-wise.

Every structured token's class is exactly J u {theta}, so a server's view
collapses to: "clean request for k", "null", or "some (m'+1)-subset of
files containing the desired index somewhere".  Rates follow in closed form:
(1 - r/N) / (1 - E[(r/N)^(M'+1)]) with r = 1, K, or T per variant.

Randomness derivation order within a session stream: the M' draw, then the
clean target (M'=0) or the decoy subset followed by the base-scheme
randomness (M' >= 1).
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .core import (AnswerString, PirSetting, QueryToken, Variant, clean_token,
                   null_token, structured_token)
from .galois import Field
from .rng import substream
from .rounds import build_plan, decode_rows, realize_combos, sample_permutations
from .server import ServerStorage, answer_token
from .sunjafar import SjRandomness
from .tpir import (TsjRandomness, build_tplan, decode_functionals,
                   realize_tcombos, sample_trandomness)


@dataclass(frozen=True)
class MPrimeDistribution:
    """Probability mass function of the decoy count M' on [0:M-1]."""

    pmf: tuple[float, ...]

    def __post_init__(self):
        if len(self.pmf) < 1:
            raise ValueError("pmf must cover m' = 0 at least")
        if any(p < 0 for p in self.pmf):
            raise ValueError("pmf entries must be nonnegative")
        if abs(sum(self.pmf) - 1.0) > 1e-12:
            raise ValueError("pmf must sum to 1 within 1e-12")
        object.__setattr__(self, "pmf", tuple(float(p) for p in self.pmf))

    @property
    def M(self) -> int:
        return len(self.pmf)

    @property
    def p0(self) -> float:
        return self.pmf[0]

    def support(self) -> list[int]:
        return [m for m, p in enumerate(self.pmf) if p > 0]

    def expect(self, fn) -> float:
        return sum(p * fn(m) for m, p in enumerate(self.pmf) if p > 0)

    def expect_exact(self, fn) -> Fraction:
        """Expectation in exact arithmetic (pmf floats are dyadic rationals)."""
        return sum((Fraction(p) * fn(m) for m, p in enumerate(self.pmf) if p > 0),
                   start=Fraction(0))


def point_mass(M: int, m: int) -> MPrimeDistribution:
    if not 0 <= m < M:
        raise ValueError("point mass outside [0:M-1]")
    return MPrimeDistribution(tuple(1.0 if i == m else 0.0 for i in range(M)))


def two_point(M: int, p0) -> MPrimeDistribution:
    """Mass p0 on m'=0 and 1-p0 on m'=M-1."""
    pmf = [0.0] * M
    pmf[0] = float(p0)
    pmf[M - 1] += 1.0 - float(p0)
    return MPrimeDistribution(tuple(pmf))


def sample_m_prime(dist: MPrimeDistribution, rng) -> int:
    u = rng.random()
    acc = 0.0
    for m, p in enumerate(dist.pmf):
        acc += p
        if u < acc:
            return m
    return len(dist.pmf) - 1


@dataclass(frozen=True)
class SuperSegmentation:
    """s-level grouping of the N^M segments into N^s contiguous blocks."""

    N: int
    M: int
    s: int

    @property
    def n_blocks(self) -> int:
        return self.N ** self.s

    @property
    def block_size(self) -> int:
        return self.N ** (self.M - self.s)

    def block(self, j: int) -> tuple[int, ...]:
        """Original 1-based segment indices of super-segment j in [1:N^s]."""
        if not 1 <= j <= self.n_blocks:
            raise IndexError(f"super-segment {j} outside [1:{self.n_blocks}]")
        g = self.block_size
        return tuple(range((j - 1) * g + 1, j * g + 1))


def super_segment_map(N: int, M: int, s: int) -> SuperSegmentation:
    if not 2 <= s <= M:
        raise ValueError(f"super-segmentation level {s} outside [2:{M}]")
    return SuperSegmentation(N=N, M=M, s=s)


@dataclass(frozen=True)
class WpirRandomness:
    """Everything the client drew in one session."""

    m_prime: int
    clean_target: int | tuple[int, ...] | None
    decoys: frozenset
    base: SjRandomness | TsjRandomness | None


def _sample_clean_target(setting: PirSetting, rng):
    if setting.variant == Variant.MDS:
        picks = rng.choice(setting.N, size=setting.K, replace=False)
        return tuple(sorted(int(x) for x in picks))
    return int(rng.integers(setting.N))


def _active_files(theta: int, decoys: frozenset) -> tuple[int, ...]:
    return tuple(sorted(decoys | {theta}))


def wpir_query(setting: PirSetting, theta: int, dist: MPrimeDistribution,
               field: Field, rng=None, seed: int | None = None):
    """Generate the session's N tokens; returns (tokens, WpirRandomness)."""
    if not 1 <= theta <= setting.M:
        raise ValueError(f"theta {theta} outside [1:{setting.M}]")
    if dist.M != setting.M:
        raise ValueError("distribution support must be [0:M-1]")
    if rng is None:
        rng = substream(seed, "session")
    m_prime = sample_m_prime(dist, rng)

    if m_prime == 0:
        target = _sample_clean_target(setting, rng)
        covered = target if isinstance(target, tuple) else (target,)
        tokens = [clean_token(theta) if l in covered else null_token()
                  for l in range(setting.N)]
        return tokens, WpirRandomness(0, target, frozenset(), None)

    others = [f for f in range(1, setting.M + 1) if f != theta]
    picks = rng.choice(len(others), size=m_prime, replace=False)
    decoys = frozenset(others[int(i)] for i in picks)
    files = _active_files(theta, decoys)
    m = m_prime + 1
    theta_pos = files.index(theta)

    if setting.variant == Variant.T_COLLUSION:
        plan = build_tplan(setting.N, setting.T, m, theta_pos)
        base = sample_trandomness(plan, setting.N ** m, field, rng)
        realized = realize_tcombos(plan, base, files)
        tokens = [structured_token(combos) for combos, _ in realized]
    else:
        plan = build_plan(setting.N, setting.r, m, theta_pos)
        base = SjRandomness(sample_permutations(m, setting.N ** m, rng))
        combos, _ = realize_combos(plan, files, base.permutations)
        tokens = [structured_token(c) for c in combos]
    return tokens, WpirRandomness(m_prime, None, decoys, base)


def wpir_answer(token: QueryToken, storage: ServerStorage) -> AnswerString:
    return answer_token(token, storage)


def wpir_decode(theta: int, rand: WpirRandomness, answers, setting: PirSetting,
                field: Field) -> np.ndarray:
    """Recover W_theta exactly in both the clean and the base-scheme case."""
    N, M = setting.N, setting.M
    if rand.m_prime == 0:
        if setting.variant == Variant.MDS:
            pairs = [(l + 1, answers[l].symbols) for l in rand.clean_target]
            vals = np.stack([np.asarray(v, dtype=np.int64) for _, v in pairs])
            pts = tuple(p for p, _ in pairs)
            vinv = field.solve(field.vandermonde(pts, setting.K),
                               np.eye(setting.K, dtype=np.int64))
            coeffs = field.vsum(field.vmul(vinv[:, :, None], vals[None, :, :]), axis=1)
            return coeffs.T.reshape(-1)
        out = answers[rand.clean_target].symbols
        if len(out) != setting.rows:
            raise ValueError("clean answer has wrong length")
        return np.asarray(out, dtype=np.int64)

    files = _active_files(theta, rand.decoys)
    m = rand.m_prime + 1
    theta_pos = files.index(theta)
    g = N ** (M - m)

    if setting.variant == Variant.T_COLLUSION:
        plan = build_tplan(N, setting.T, m, theta_pos)
        realized = realize_tcombos(plan, rand.base, files)
        position_maps = [pos for _, pos in realized]
        blocks = [np.asarray(a.symbols, dtype=np.int64).reshape(plan.per_server, g)
                  for a in answers]
        return decode_functionals(plan, rand.base, position_maps, blocks, field)

    K = setting.r
    plan = build_plan(N, K, m, theta_pos)
    _, position_maps = realize_combos(plan, files, rand.base.permutations)
    blocks = [np.asarray(a.symbols, dtype=np.int64).reshape(plan.per_server, g)
              for a in answers]
    eval_points = tuple(range(1, N + 1)) if field.order > N else tuple([1] * N)
    rows = decode_rows(plan, position_maps, blocks, field, eval_points)
    perm = rand.base.permutations[theta_pos]
    out = np.zeros(setting.file_length, dtype=np.int64)
    for slot, vals in rows.items():
        base_row = int(perm[slot]) * g
        for o in range(g):
            if K == 1:
                out[base_row + o] = vals[o, 0]
            else:
                r = base_row + o
                out[r * K:(r + 1) * K] = vals[o]
    return out


def expected_download_symbols(setting: PirSetting, dist: MPrimeDistribution) -> Fraction:
    """E[D] in symbols, from the per-case download counts."""
    N, r = setting.N, setting.r

    def per_case(m_prime: int) -> Fraction:
        scale = setting.K if setting.variant == Variant.MDS else 1
        mm = m_prime + 1
        total = sum(r ** i * N ** (mm - i) for i in range(mm)) * N ** (setting.M - mm)
        return Fraction(scale * total)

    return dist.expect_exact(per_case)


def wpir_rate(setting: PirSetting, dist: MPrimeDistribution) -> Fraction:
    """(1 - r/N) / (1 - E[(r/N)^(M'+1)]), exact in the pmf entries."""
    if dist.M != setting.M:
        raise ValueError("distribution support must be [0:M-1]")
    x = Fraction(setting.r, setting.N)
    denom = 1 - dist.expect_exact(lambda m: x ** (m + 1))
    return (1 - x) / denom
