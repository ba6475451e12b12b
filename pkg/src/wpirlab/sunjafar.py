"""Sun-Jafar collusion-free base scheme for N replicated servers, M files.

Files carry L = N^M segments.  Each session privately permutes every file's
segment indices, then asks each server for the same fixed pattern of
segment sums (round s contributes C(M,s)*(N-1)^(s-1) s-wise sums per
server).  Side-information sums downloaded at one server are cancelled
against desired-file sums at every other server, recovering all N^M desired
segments from sum_{s=1..M} N^s downloads, i.e. at rate
(1 + 1/N + ... + 1/N^(M-1))^-1.

The per-server query distribution is independent of the desired index: the
combinatorial pattern is fixed and the referenced indices are uniformly
permuted, so enumerating all randomness at small parameters gives exactly
identical query distributions for every theta.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .core import AnswerString, QueryToken, structured_token
from .galois import Field
from .rng import substream
from .rounds import build_plan, decode_rows, realize_combos, sample_permutations
from .server import ServerStorage, answer_token


@dataclass(frozen=True)
class SjRandomness:
    """M independent uniform permutations of the N^M segment indices."""

    permutations: tuple[np.ndarray, ...]


def sj_randomness(N: int, M: int, rng=None, seed: int | None = None) -> SjRandomness:
    if rng is None:
        rng = substream(seed, "sunjafar")
    return SjRandomness(sample_permutations(M, N ** M, rng))


def sj_download_total(N: int, M: int) -> int:
    """Total symbols downloaded across all servers: sum_{s=1..M} N^s."""
    if N < 2 or M < 1:
        raise ValueError("need N >= 2 and M >= 1")
    return sum(N ** s for s in range(1, M + 1))


def sj_rate(N: int, M: int) -> Fraction:
    return Fraction(N ** M, sj_download_total(N, M))


def _check_theta(M: int, theta: int):
    if not 1 <= theta <= M:
        raise ValueError(f"theta {theta} outside [1:{M}]")


def sj_query(N: int, M: int, theta: int, rand: SjRandomness) -> list[QueryToken]:
    _check_theta(M, theta)
    plan = build_plan(N, 1, M, theta - 1)
    combos, _ = realize_combos(plan, tuple(range(1, M + 1)), rand.permutations)
    return [structured_token(c) for c in combos]


def sj_answer(q: QueryToken, storage: ServerStorage) -> AnswerString:
    return answer_token(q, storage)


def sj_decode(theta: int, rand: SjRandomness, answers, N: int, M: int,
              field: Field) -> np.ndarray:
    """Recover W_theta exactly from the N answer strings."""
    _check_theta(M, theta)
    plan = build_plan(N, 1, M, theta - 1)
    _, position_maps = realize_combos(plan, tuple(range(1, M + 1)), rand.permutations)
    per_server = plan.per_server
    blocks = []
    for ans in answers:
        if len(ans.symbols) != per_server:
            raise ValueError("inconsistent answer length")
        blocks.append(np.asarray(ans.symbols, dtype=np.int64).reshape(per_server, 1))
    eval_points = tuple(range(1, N + 1)) if field.order > N else tuple([1] * N)
    rows = decode_rows(plan, position_maps, blocks, field, eval_points)
    perm = rand.permutations[theta - 1]
    out = np.zeros(N ** M, dtype=np.int64)
    for slot, vals in rows.items():
        out[perm[slot]] = vals[0, 0]
    return out


def enumerate_randomness(N: int, M: int, limit: int = 10 ** 6):
    """Yield every permutation tuple; only feasible at tiny parameters."""
    L = N ** M
    total = math.factorial(L) ** M
    if total > limit:
        raise ValueError(f"randomness space {total} exceeds limit {limit}")
    for perms in itertools.product(itertools.permutations(range(L)), repeat=M):
        yield SjRandomness(tuple(np.array(p) for p in perms))
