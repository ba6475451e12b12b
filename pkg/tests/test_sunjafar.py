import math
from collections import Counter
from fractions import Fraction

import numpy as np
import pytest

from wpirlab.core import generate_library, query_class_of, replicated
from wpirlab.galois import default_field
from wpirlab.rng import substream
from wpirlab.server import provision_storage
from wpirlab.sunjafar import (SjRandomness, enumerate_randomness, sj_answer,
                              sj_decode, sj_download_total, sj_query, sj_randomness,
                              sj_rate)

GF256 = default_field()


def run_round_trip(N, M, theta, seed, lib=None):
    lib = lib or generate_library(M, N ** M, GF256, seed=1000 + N + M)
    storage = provision_storage(replicated(N, M), lib)
    rand = sj_randomness(N, M, rng=substream(seed, "sj"))
    tokens = sj_query(N, M, theta, rand)
    answers = [sj_answer(t, storage[l]) for l, t in enumerate(tokens)]
    decoded = sj_decode(theta, rand, answers, N, M, GF256)
    return lib, tokens, answers, decoded


def test_download_totals():
    assert sj_download_total(2, 2) == 6
    assert sj_download_total(3, 2) == 12
    assert sj_download_total(2, 1) == 2
    assert sj_rate(2, 2) == Fraction(2, 3)
    assert sj_rate(3, 2) == Fraction(3, 4)
    assert sj_rate(5, 1) == 1


def test_query_structure_n2_m2():
    rand = sj_randomness(2, 2, seed=0)
    tokens = sj_query(2, 2, 1, rand)
    for tok in tokens:
        assert query_class_of(tok) == frozenset({1, 2})
        sizes = sorted(len(c) for c in tok.combos)
        assert sizes == [1, 1, 2]  # two singletons (one per file), one pairwise sum
        single_files = sorted(c[0][0] for c in tok.combos if len(c) == 1)
        assert single_files == [1, 2]
    assert sum(len(t.combos) for t in tokens) == 6


@pytest.mark.parametrize("N,M", [(2, 2), (3, 2), (2, 3), (4, 2), (3, 3)])
def test_per_round_combination_counts(N, M):
    rand = sj_randomness(N, M, seed=9)
    tokens = sj_query(N, M, 1, rand)
    per_server = sj_download_total(N, M) // N
    for tok in tokens:
        assert len(tok.combos) == per_server
        by_size = Counter(len(c) for c in tok.combos)
        for s in range(1, M + 1):
            assert by_size[s] == math.comb(M, s) * (N - 1) ** (s - 1)


def test_answer_semantics():
    lib = generate_library(2, 4, GF256, seed=3)
    storage = provision_storage(replicated(2, 2), lib)
    rand = sj_randomness(2, 2, seed=4)
    tokens = sj_query(2, 2, 1, rand)
    ans = sj_answer(tokens[0], storage[0])
    assert len(ans.symbols) == 3
    for combo, value in zip(tokens[0].combos, ans.symbols.tolist()):
        want = 0
        for file_idx, seg, coeff in combo:
            want ^= lib.file(file_idx)[seg - 1]
        assert value == want


@pytest.mark.parametrize("theta", [1, 2])
def test_round_trip_exact(theta):
    lib, _, _, decoded = run_round_trip(2, 2, theta, seed=17)
    assert np.array_equal(decoded, lib.file(theta))


def test_round_trip_regression_100_seeds():
    N, M = 3, 2
    lib = generate_library(M, N ** M, GF256, seed=8)
    storage = provision_storage(replicated(N, M), lib)
    exact = 0
    for seed in range(100):
        theta = 1 + seed % M
        rand = sj_randomness(N, M, rng=substream(seed, "reg"))
        tokens = sj_query(N, M, theta, rand)
        answers = [sj_answer(t, storage[l]) for l, t in enumerate(tokens)]
        if np.array_equal(sj_decode(theta, rand, answers, N, M, GF256), lib.file(theta)):
            exact += 1
    assert exact == 100


def test_tamper_sensitivity():
    lib, tokens, answers, _ = run_round_trip(2, 2, 1, seed=5)
    rand = sj_randomness(2, 2, rng=substream(5, "sj"))
    bad = [a for a in answers]
    sym = bad[0].symbols.copy()
    sym[0] ^= 1
    from wpirlab.core import AnswerString
    bad[0] = AnswerString(sym, GF256)
    decoded = sj_decode(1, rand, bad, 2, 2, GF256)
    assert not np.array_equal(decoded, lib.file(1))


def test_theta_out_of_range():
    rand = sj_randomness(2, 2, seed=0)
    with pytest.raises(ValueError):
        sj_query(2, 2, 3, rand)
    with pytest.raises(ValueError):
        sj_query(2, 2, 0, rand)


def test_exhaustive_perfect_privacy():
    # all (4!)^2 randomness realizations, both theta: per-server distributions equal
    N, M = 2, 2
    per = {theta: [Counter() for _ in range(N)] for theta in (1, 2)}
    n = 0
    for rand in enumerate_randomness(N, M):
        n += 1
        for theta in (1, 2):
            for l, tok in enumerate(sj_query(N, M, theta, rand)):
                per[theta][l][tok.combos] += 1
    assert n == 576
    for l in range(N):
        assert per[1][l] == per[2][l]  # TV distance exactly zero
        # equiprobable within the support
        assert len(set(per[1][l].values())) == 1


def test_query_count_symmetry_over_seeds():
    for seed in range(20):
        rand = sj_randomness(3, 2, rng=substream(seed, "sym"))
        tokens = sj_query(3, 2, 1 + seed % 2, rand)
        counts = {len(t.combos) for t in tokens}
        assert counts == {sj_download_total(3, 2) // 3}


def test_enumerate_randomness_guard():
    with pytest.raises(ValueError):
        list(enumerate_randomness(3, 2))
