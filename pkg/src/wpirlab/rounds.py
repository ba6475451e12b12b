"""Round-structured query engine shared by the replicated and MDS schemes.

Both capacity-achieving base schemes have the same skeleton: queries are
linear combinations ("sums") of per-file rows, built in rounds s = 1..m over
an m-file set.  In round s every server asks, for every s-subset of files,
the same number of s-wise sums:

    beta_s = K^(m-s+1) * (N-K)^(s-1)    sums per subset per server,

where K = 1 reproduces the classic replicated-storage construction and
K >= 2 the MDS-coded one.  Sums that avoid the desired file ("side
information") use fresh rows and are downloaded at exactly K servers; K
downloads pin the degree-<K column polynomial of the sum, so its value at
every other server is predictable and can be cancelled there.  Sums that
include the desired file pair one fresh desired row with one predictable
side-information sum; each desired row is downloaded (inside such sums, or
as round-1 singletons) at exactly K distinct servers, which is enough to
interpolate its K information symbols.

Rows are addressed through private per-file uniform permutations, so the
per-server view is a fixed combinatorial pattern filled with uniformly
random distinct row indices, independent of which file is desired.

The structural plan (who asks which sum, pairings, holders) is deterministic
for fixed (N, K, m, position-of-desired) and cached; only the permutations
vary per session.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache
from itertools import combinations

import numpy as np

from .galois import Field


@dataclass(frozen=True)
class ObjectPlan:
    """A side-information sum: fresh rows of an undesired file subset."""

    terms: tuple[tuple[int, int], ...]  # (file_pos, row_slot)
    holders: tuple[int, ...]            # the K servers that download it
    holder_combos: tuple[tuple[int, int], ...]  # (server, combo index)


@dataclass(frozen=True)
class RowPlan:
    """One desired row and its K placements."""

    slot: int
    placements: tuple[tuple[int, int, int], ...]  # (server, combo index, object id or -1)


@dataclass(frozen=True)
class ComboPlan:
    terms: tuple[tuple[int, int], ...]  # (file_pos, row_slot), desired term first


@dataclass(frozen=True)
class RoundPlan:
    N: int
    K: int
    m: int
    theta_pos: int
    server_combos: tuple[tuple[ComboPlan, ...], ...]
    objects: tuple[ObjectPlan, ...]
    rows: tuple[RowPlan, ...]

    @property
    def per_server(self) -> int:
        return len(self.server_combos[0])


def beta(N: int, K: int, m: int, s: int) -> int:
    return K ** (m - s + 1) * (N - K) ** (s - 1)


def download_total(N: int, K: int, m: int) -> int:
    """Total sums asked across all servers: K*(N^m - K^m)/(N - K)."""
    return N * sum(beta(N, K, m, s) * _comb(m, s) for s in range(1, m + 1))


def _comb(n, k):
    from math import comb
    return comb(n, k)


@lru_cache(maxsize=None)
def build_plan(N: int, K: int, m: int, theta_pos: int) -> RoundPlan:
    if not 1 <= K < N:
        raise ValueError("need 1 <= K < N")
    if not 0 <= theta_pos < m:
        raise ValueError("theta_pos outside file list")
    others = [f for f in range(m) if f != theta_pos]
    ctr = [0] * m
    server_combos: list[list] = [[] for _ in range(N)]
    objects: list[dict] = []
    rows: list[dict] = []
    prev_side: dict[tuple, list[int]] = {}

    def fresh(f):
        ctr[f] += 1
        return ctr[f] - 1

    for s in range(1, m + 1):
        b = beta(N, K, m, s)
        # desired sums: one fresh desired row plus a predictable side sum
        for G in combinations(others, s - 1):
            if s == 1:
                uses = [[(l, -1)] * b for l in range(N)]
            else:
                side_ids = prev_side[G]
                uses = [[(l, o) for o in side_ids if l not in objects[o]["holders"]]
                        for l in range(N)]
            flat = [uses[l][i] for l in range(N) for i in range(b)]
            n_rows = N * b // K
            for j in range(n_rows):
                slot = fresh(theta_pos)
                placements = []
                for k in range(K):
                    l, obj = flat[j + k * n_rows]
                    terms = ((theta_pos, slot),) + (objects[obj]["terms"] if obj >= 0 else ())
                    server_combos[l].append(ComboPlan(terms=terms))
                    placements.append((l, len(server_combos[l]) - 1, obj))
                rows.append({"slot": slot, "placements": tuple(placements)})
        # side-information sums: fresh rows, downloaded at K servers
        new_side: dict[tuple, list[int]] = {}
        for G in combinations(others, s):
            sigma = N * b // K
            ids = []
            for j in range(sigma):
                terms = tuple((f, fresh(f)) for f in G)
                servers = sorted((j + k * sigma) // b for k in range(K))
                holder_combos = []
                for l in servers:
                    server_combos[l].append(ComboPlan(terms=terms))
                    holder_combos.append((l, len(server_combos[l]) - 1))
                objects.append({"terms": terms, "holders": frozenset(servers),
                                "holder_combos": tuple(holder_combos)})
                ids.append(len(objects) - 1)
            new_side[G] = ids
        prev_side = new_side

    assert ctr[theta_pos] == N ** m
    return RoundPlan(
        N=N, K=K, m=m, theta_pos=theta_pos,
        server_combos=tuple(tuple(cs) for cs in server_combos),
        objects=tuple(ObjectPlan(terms=o["terms"], holders=tuple(sorted(o["holders"])),
                                 holder_combos=o["holder_combos"]) for o in objects),
        rows=tuple(RowPlan(slot=r["slot"], placements=r["placements"]) for r in rows),
    )


def sample_permutations(m: int, domain: int, rng) -> tuple[np.ndarray, ...]:
    """One independent uniform permutation of the row space per file."""
    return tuple(rng.permutation(domain) for _ in range(m))


def realize_combos(plan: RoundPlan, files: tuple[int, ...], perms) -> tuple[list, list]:
    """Instantiate the plan through the permutations.

    Returns (per-server sorted combo term lists, per-server position maps),
    where position_maps[l][plan_index] is the combo's rank in the
    canonically sorted token.  Terms carry 1-based global file and row
    indices and unit coefficients.
    """
    sorted_combos = []
    position_maps = []
    for combos in plan.server_combos:
        realized = []
        for c in combos:
            terms = tuple(sorted((files[f], int(perms[f][slot]) + 1, 1)
                                 for f, slot in c.terms))
            realized.append(terms)
        order = sorted(range(len(realized)), key=lambda i: (len(realized[i]), realized[i]))
        pos = [0] * len(realized)
        for rank, i in enumerate(order):
            pos[i] = rank
        sorted_combos.append([realized[i] for i in order])
        position_maps.append(pos)
    return sorted_combos, position_maps


@lru_cache(maxsize=None)
def _vandermonde_inv(field: Field, points: tuple[int, ...]) -> np.ndarray:
    v = field.vandermonde(points, len(points))
    return field.solve(v, np.eye(len(points), dtype=np.int64))


@lru_cache(maxsize=None)
def _predict_weights(field: Field, points: tuple[int, ...], target: int) -> np.ndarray:
    """Row vector w with poly(target) = w . values(points) for deg < len(points)."""
    vinv = _vandermonde_inv(field, points)
    powers = field.vandermonde((target,), len(points))[0]
    return field.vsum(field.vmul(powers[:, None], vinv), axis=0)


def decode_rows(plan: RoundPlan, position_maps, answer_blocks, field: Field,
                eval_points) -> dict[int, np.ndarray]:
    """Recover the desired rows from per-server answers.

    answer_blocks[l] is an (n_combos, g) array in canonical token order.
    Returns slot -> (g, K) array of information symbols per block offset.
    """
    K = plan.K
    g = answer_blocks[0].shape[1] if plan.per_server else 1

    def combo_value(l, idx):
        return answer_blocks[l][position_maps[l][idx]]

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

    out: dict[int, np.ndarray] = {}
    for row in plan.rows:
        pts, vals = [], []
        for l, idx, obj in row.placements:
            raw = combo_value(l, idx)
            if obj >= 0:
                raw = field.vsub(raw, predict(obj, l))
            pts.append(eval_points[l])
            vals.append(raw)
        if K == 1:
            out[row.slot] = np.asarray(vals[0], dtype=np.int64)[:, None]
        else:
            vinv = _vandermonde_inv(field, tuple(pts))
            coeffs = field.vsum(field.vmul(vinv[:, :, None], np.stack(vals)[None, :, :]), axis=1)
            out[row.slot] = coeffs.T  # (g, K)
    return out
