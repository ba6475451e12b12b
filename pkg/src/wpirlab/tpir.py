"""T-collusion base scheme: privacy against every T-subset of N replicated servers.

Queries are dense coefficient vectors over the N^M segments of each file in
play.  Two kinds of coefficient blocks appear, both indistinguishable from
uniform noise to any coalition of up to T servers:

  * side-information blocks: for each masked file the client draws a private
    vector polynomial m(x) = c_0 + c_1 x + ... + c_{T-1} x^(T-1) with
    uniform vector coefficients and hands server l the evaluation m(x_l).
    Any T evaluations of such a polynomial are jointly uniform, while the
    answers they induce lie on a degree-<T scalar polynomial, so T downloads
    of a masked sum pin its value at every other server;

  * desired blocks: fresh uniform vectors b, one per query row, whose
    answers contribute one new linear functional <b, W_theta> each once the
    predictable mask value is cancelled.

Round s asks every server T^(M-s)*(N-T)^(s-1) such rows per s-subset of
files; masked sums are downloaded at exactly T servers and cancelled once at
each of the other N-T.  The total download is
N^M * (1 + T/N + ... + (T/N)^(M-1)) symbols for the N^M-symbol file.  The
stacked desired vectors are resampled until invertible, so decoding always
succeeds; the conditioning this introduces perturbs any coalition view by
O(q^-(L-Td)) in total variation, far below every statistical test threshold.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from itertools import combinations

import numpy as np

from .core import AnswerString, QueryToken, structured_token
from .galois import Field
from .rng import substream
from .rounds import _predict_weights
from .server import ServerStorage, answer_token

MAX_RESAMPLE_ATTEMPTS = 64


@dataclass(frozen=True)
class TComboPlan:
    files: tuple[int, ...]   # file positions, sorted
    object_id: int           # mask object cancelled here, or -1
    func_index: int          # desired functional index, or -1 for mask holders


@dataclass(frozen=True)
class TObjectPlan:
    files: tuple[int, ...]
    holders: tuple[int, ...]
    holder_combos: tuple[tuple[int, int], ...]


@dataclass(frozen=True)
class TPlan:
    N: int
    T: int
    m: int
    theta_pos: int
    server_combos: tuple[tuple[TComboPlan, ...], ...]
    objects: tuple[TObjectPlan, ...]

    @property
    def per_server(self) -> int:
        return len(self.server_combos[0])


def gamma(N: int, T: int, m: int, s: int) -> int:
    """Combinations per server per s-subset in round s."""
    return T ** (m - s) * (N - T) ** (s - 1)


@lru_cache(maxsize=None)
def build_tplan(N: int, T: int, m: int, theta_pos: int) -> TPlan:
    if not 1 <= T < N:
        raise ValueError("need 1 <= T < N")
    others = [f for f in range(m) if f != theta_pos]
    server_combos: list[list] = [[] for _ in range(N)]
    objects: list[dict] = []
    prev_side: dict[tuple, list[int]] = {}
    func_count = 0

    for s in range(1, m + 1):
        g = gamma(N, T, m, s)
        for G in combinations(others, s - 1):
            if s == 1:
                uses = [[-1] * g for _ in range(N)]
            else:
                side_ids = prev_side[G]
                uses = [[o for o in side_ids if l not in objects[o]["holders"]]
                        for l in range(N)]
            files = tuple(sorted((theta_pos,) + G))
            for l in range(N):
                for obj in uses[l]:
                    server_combos[l].append(
                        TComboPlan(files=files, object_id=obj, func_index=func_count))
                    func_count += 1
        new_side: dict[tuple, list[int]] = {}
        for G in combinations(others, s):
            sigma = N * g // T
            ids = []
            for j in range(sigma):
                servers = sorted((j + k * sigma) // g for k in range(T))
                holder_combos = []
                for l in servers:
                    server_combos[l].append(
                        TComboPlan(files=G, object_id=len(objects), func_index=-1))
                    holder_combos.append((l, len(server_combos[l]) - 1))
                objects.append({"files": G, "holders": frozenset(servers),
                                "holder_combos": tuple(holder_combos)})
                ids.append(len(objects) - 1)
            new_side[G] = ids
        prev_side = new_side

    assert func_count == N ** m
    return TPlan(
        N=N, T=T, m=m, theta_pos=theta_pos,
        server_combos=tuple(tuple(cs) for cs in server_combos),
        objects=tuple(TObjectPlan(files=o["files"], holders=tuple(sorted(o["holders"])),
                                  holder_combos=o["holder_combos"]) for o in objects),
    )


@dataclass(frozen=True)
class TsjRandomness:
    """Private mask polynomials and desired functionals for one session.

    mask_coeffs[i] holds object i's per-file polynomial coefficients with
    shape (len(files), T, dim); functionals is the dim x dim stack of
    desired vectors, resampled until invertible over the field.
    """

    field: Field
    dim: int
    mask_coeffs: tuple[np.ndarray, ...]
    functionals: np.ndarray
    attempts: int


def sample_trandomness(plan: TPlan, dim: int, field: Field, rng) -> TsjRandomness:
    if field.order <= plan.N:
        raise ValueError("field order must exceed N to supply evaluation points")
    mask_coeffs = tuple(
        rng.integers(0, field.order, size=(len(o.files), plan.T, dim), dtype=np.int64)
        for o in plan.objects)
    attempts = 0
    while True:
        attempts += 1
        functionals = rng.integers(0, field.order, size=(dim, dim), dtype=np.int64)
        if field.matrix_rank(functionals) == dim:
            break
        if attempts >= MAX_RESAMPLE_ATTEMPTS:
            raise RuntimeError("could not draw an invertible functional matrix")
    return TsjRandomness(field=field, dim=dim, mask_coeffs=mask_coeffs,
                         functionals=functionals, attempts=attempts)


def realize_tcombos(plan: TPlan, rand: TsjRandomness, files: tuple[int, ...]):
    """Per-server (sorted dense combo term lists, plan-to-sorted position map)."""
    field = rand.field
    dim = rand.dim
    segs = range(1, dim + 1)
    realized = []
    for l in range(plan.N):
        powers = np.array([field.pow(l + 1, t) for t in range(plan.T)], dtype=np.int64)
        combos = []
        for c in plan.server_combos[l]:
            blocks = {}
            if c.object_id >= 0:
                obj = plan.objects[c.object_id]
                evals = field.vsum(
                    field.vmul(powers[None, :, None], rand.mask_coeffs[c.object_id]), axis=1)
                for fpos, vec in zip(obj.files, evals):
                    blocks[fpos] = vec.tolist()
            if c.func_index >= 0:
                blocks[plan.theta_pos] = rand.functionals[c.func_index].tolist()
            terms = []
            for fpos in sorted(blocks):
                fid = files[fpos]
                terms.extend(zip((fid,) * dim, segs, blocks[fpos]))
            combos.append(tuple(terms))
        order = sorted(range(len(combos)), key=lambda i: (len(combos[i]), combos[i]))
        pos = [0] * len(combos)
        for rank, i in enumerate(order):
            pos[i] = rank
        realized.append((tuple(combos[i] for i in order), tuple(pos)))
    return realized


def decode_functionals(plan: TPlan, rand: TsjRandomness, position_maps,
                       answer_blocks, field: Field) -> np.ndarray:
    """Solve for the desired file; returns an (dim * g,) symbol vector."""
    def combo_value(l, idx):
        return answer_blocks[l][position_maps[l][idx]]

    eval_points = tuple(range(1, plan.N + 1))
    predictions: dict[tuple[int, int], np.ndarray] = {}

    def predict(obj_id, l):
        key = (obj_id, l)
        if key not in predictions:
            obj = plan.objects[obj_id]
            pts = tuple(eval_points[h] for h in obj.holders)
            vals = np.stack([combo_value(h, ci) for h, ci in obj.holder_combos])
            w = _predict_weights(field, pts, eval_points[l])
            predictions[key] = field.vsum(field.vmul(w[:, None], vals), axis=0)
        return predictions[key]

    g = answer_blocks[0].shape[1]
    F = np.zeros((rand.dim, g), dtype=np.int64)
    for l in range(plan.N):
        for idx, c in enumerate(plan.server_combos[l]):
            if c.func_index < 0:
                continue
            raw = combo_value(l, idx)
            if c.object_id >= 0:
                raw = field.vsub(raw, predict(c.object_id, l))
            F[c.func_index] = raw
    X = field.solve(rand.functionals, F)  # X[segment, offset]
    return X.reshape(-1)


# -- spec-level operations on the full M-file setting ------------------------

def tsj_download_total(N: int, T: int, M: int) -> int:
    """Total symbols across servers: N^M * (1 + T/N + ... + (T/N)^(M-1))."""
    if not 1 <= T < N:
        raise ValueError("need 1 <= T < N")
    return sum(T ** i * N ** (M - i) for i in range(M))


def tsj_rate(N: int, T: int, M: int) -> Fraction:
    return Fraction(N ** M, tsj_download_total(N, T, M))


def _check_theta(M: int, theta: int):
    if not 1 <= theta <= M:
        raise ValueError(f"theta {theta} outside [1:{M}]")


def tsj_randomness(N: int, T: int, M: int, theta: int, field: Field,
                   rng=None, seed: int | None = None) -> TsjRandomness:
    _check_theta(M, theta)
    if rng is None:
        rng = substream(seed, "tpir")
    plan = build_tplan(N, T, M, theta - 1)
    return sample_trandomness(plan, N ** M, field, rng)


def tsj_query(N: int, T: int, M: int, theta: int, rand: TsjRandomness) -> list[QueryToken]:
    _check_theta(M, theta)
    plan = build_tplan(N, T, M, theta - 1)
    realized = realize_tcombos(plan, rand, tuple(range(1, M + 1)))
    return [structured_token(combos) for combos, _ in realized]


def tsj_answer(q: QueryToken, storage: ServerStorage) -> AnswerString:
    return answer_token(q, storage)


def tsj_decode(theta: int, rand: TsjRandomness, answers, N: int, T: int, M: int,
               field: Field) -> np.ndarray:
    _check_theta(M, theta)
    plan = build_tplan(N, T, M, theta - 1)
    realized = realize_tcombos(plan, rand, tuple(range(1, M + 1)))
    position_maps = [pos for _, pos in realized]
    per_server = plan.per_server
    blocks = []
    for ans in answers:
        if len(ans.symbols) != per_server:
            raise ValueError("inconsistent answer length")
        blocks.append(np.asarray(ans.symbols, dtype=np.int64).reshape(per_server, 1))
    return decode_functionals(plan, rand, position_maps, blocks, field)
