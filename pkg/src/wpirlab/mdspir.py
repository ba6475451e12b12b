"""(N,K) MDS-coded storage and the Banawan-Ulukus style base scheme.

Each file is viewed as an N^M x K matrix over the field.  Every row is
encoded with a generalized Reed-Solomon code: the row (a_1..a_K) defines
the polynomial p(x) = a_1 + a_2 x + ... + a_K x^(K-1), and server l stores
p(x_l) at the evaluation point x_l = l + 1.  Any K columns determine every
row by Lagrange interpolation.

Queries follow the same round structure as the replicated scheme with the
code dimension K as the redundancy parameter: side-information sums are
downloaded at K servers (pinning their degree-<K column polynomial, hence
their value everywhere), and every desired row is collected at K distinct
servers, enough to interpolate its K information symbols.  The total
download is K * N^M * (1 + K/N + ... + (K/N)^(M-1)) coded symbols for the
L = K * N^M symbol file, matching the MDS-PIR capacity.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .core import AnswerString, FileLibrary, QueryToken, structured_token
from .galois import Field
from .rng import substream
from .rounds import build_plan, decode_rows, download_total, realize_combos, sample_permutations
from .server import ServerStorage, answer_token
from .sunjafar import SjRandomness, _check_theta


@dataclass(frozen=True)
class MdsStorage:
    """Column-wise placement of GRS-encoded files across N servers."""

    N: int
    K: int
    field: Field
    evaluation_points: tuple[int, ...]
    columns: np.ndarray  # shape (N, M, rows)


def mds_encode(lib: FileLibrary, N: int, K: int) -> MdsStorage:
    """Encode each file's rows at the evaluation points 1..N."""
    field = lib.field
    if field.order <= N:
        raise ValueError("field order must exceed N to supply evaluation points")
    if lib.L % K != 0:
        raise ValueError("file length must be divisible by K")
    rows = lib.L // K
    points = tuple(range(1, N + 1))
    coeffs = lib.symbols.reshape(lib.M, rows, K)
    vand = field.vandermonde(points, K)  # (N, K)
    cols = np.zeros((N, lib.M, rows), dtype=np.int64)
    for l in range(N):
        acc = np.zeros((lib.M, rows), dtype=np.int64)
        for j in range(K):
            acc = field.vadd(acc, field.vscale(int(vand[l, j]), coeffs[:, :, j]))
        cols[l] = acc
    cols.setflags(write=False)
    return MdsStorage(N=N, K=K, field=field, evaluation_points=points, columns=cols)


def mds_recover(column_values, evaluation_points, field: Field) -> np.ndarray:
    """Interpolate the K information symbols from K (index, symbol) pairs.

    column_values is a sequence of (evaluation point, symbol) pairs; symbols
    may be scalars or equal-length vectors.
    """
    pts = tuple(int(p) for p, _ in column_values)
    if len(set(pts)) != len(pts):
        raise ValueError("repeated column indices")
    vals = np.stack([np.atleast_1d(np.asarray(v, dtype=np.int64)) for _, v in column_values])
    vinv = field.solve(field.vandermonde(pts, len(pts)), np.eye(len(pts), dtype=np.int64))
    coeffs = field.vsum(field.vmul(vinv[:, :, None], vals[None, :, :]), axis=1)
    return coeffs[:, 0] if coeffs.shape[1] == 1 else coeffs


def bu_download_total(N: int, K: int, M: int) -> int:
    """Total coded symbols downloaded: K*N^M*(1 + K/N + ... + (K/N)^(M-1))."""
    return download_total(N, K, M)


def bu_rate(N: int, K: int, M: int) -> Fraction:
    return Fraction(K * N ** M, bu_download_total(N, K, M))


def bu_randomness(N: int, K: int, M: int, rng=None, seed: int | None = None) -> SjRandomness:
    if rng is None:
        rng = substream(seed, "mdspir")
    return SjRandomness(sample_permutations(M, N ** M, rng))


def bu_query(N: int, K: int, M: int, theta: int, rand: SjRandomness) -> list[QueryToken]:
    _check_theta(M, theta)
    plan = build_plan(N, K, M, theta - 1)
    combos, _ = realize_combos(plan, tuple(range(1, M + 1)), rand.permutations)
    return [structured_token(c) for c in combos]


def bu_answer(q: QueryToken, storage: ServerStorage) -> AnswerString:
    return answer_token(q, storage)


def bu_decode(theta: int, rand: SjRandomness, answers, N: int, K: int, M: int,
              field: Field) -> np.ndarray:
    """Recover the L = K*N^M information symbols of W_theta."""
    _check_theta(M, theta)
    plan = build_plan(N, K, M, theta - 1)
    _, position_maps = realize_combos(plan, tuple(range(1, M + 1)), rand.permutations)
    per_server = plan.per_server
    blocks = []
    for ans in answers:
        if len(ans.symbols) != per_server:
            raise ValueError("inconsistent answer length")
        blocks.append(np.asarray(ans.symbols, dtype=np.int64).reshape(per_server, 1))
    rows = decode_rows(plan, position_maps, blocks, field, tuple(range(1, N + 1)))
    perm = rand.permutations[theta - 1]
    out = np.zeros(K * N ** M, dtype=np.int64)
    for slot, vals in rows.items():
        r = int(perm[slot])
        out[r * K:(r + 1) * K] = vals[0]
    return out
