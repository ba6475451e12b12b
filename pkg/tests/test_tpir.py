from fractions import Fraction

import numpy as np
import pytest

from wpirlab.core import generate_library, query_class_of, tcollusion
from wpirlab.galois import default_field
from wpirlab.rng import substream
from wpirlab.server import provision_storage
from wpirlab.sunjafar import sj_download_total
from wpirlab.tpir import (build_tplan, tsj_answer, tsj_decode, tsj_download_total,
                          tsj_query, tsj_randomness, tsj_rate)

GF256 = default_field()


def test_download_totals_and_rates():
    assert tsj_download_total(3, 2, 2) == 15
    assert tsj_rate(3, 2, 2) == Fraction(3, 5)
    assert tsj_download_total(3, 2, 1) == 3  # one file: download it, rate 1
    assert tsj_rate(3, 2, 1) == 1
    assert tsj_download_total(4, 3, 2) == 28
    # T = 1 total coincides with the collusion-free scheme
    for N, M in [(2, 2), (3, 2), (3, 3)]:
        assert tsj_download_total(N, 1, M) == sj_download_total(N, M)


def test_parameter_validation():
    with pytest.raises(ValueError):
        tsj_download_total(3, 3, 2)
    with pytest.raises(ValueError):
        build_tplan(3, 0, 2, 0)
    rand = tsj_randomness(3, 2, 2, 1, GF256, seed=0)
    with pytest.raises(ValueError):
        tsj_query(3, 2, 2, 5, rand)


@pytest.mark.parametrize("N,T,M,seeds", [(3, 2, 2, 100), (4, 3, 2, 20), (2, 1, 2, 20)])
def test_round_trip_regression(N, T, M, seeds):
    setting = tcollusion(N, T, M)
    lib = generate_library(M, setting.file_length, GF256, seed=55)
    storage = provision_storage(setting, lib)
    exact = 0
    for seed in range(seeds):
        theta = 1 + seed % M
        rand = tsj_randomness(N, T, M, theta, GF256, rng=substream(seed, "tp"))
        tokens = tsj_query(N, T, M, theta, rand)
        assert all(query_class_of(t) == frozenset(range(1, M + 1)) for t in tokens)
        answers = [tsj_answer(t, storage[l]) for l, t in enumerate(tokens)]
        assert len({len(a.symbols) for a in answers}) == 1
        assert sum(len(a.symbols) for a in answers) == tsj_download_total(N, T, M)
        if np.array_equal(tsj_decode(theta, rand, answers, N, T, M, GF256),
                          lib.file(theta)):
            exact += 1
    assert exact == seeds


def test_single_file_round_trip():
    setting = tcollusion(3, 2, 1)
    lib = generate_library(1, 3, GF256, seed=4)
    storage = provision_storage(setting, lib)
    rand = tsj_randomness(3, 2, 1, 1, GF256, seed=9)
    tokens = tsj_query(3, 2, 1, 1, rand)
    answers = [tsj_answer(t, storage[l]) for l, t in enumerate(tokens)]
    assert sum(len(a.symbols) for a in answers) == 3
    assert np.array_equal(tsj_decode(1, rand, answers, 3, 2, 1, GF256), lib.file(1))


def test_zero_coefficient_combo_answers_zero():
    from wpirlab.core import structured_token
    setting = tcollusion(3, 2, 2)
    lib = generate_library(2, 9, GF256, seed=3)
    storage = provision_storage(setting, lib)
    tok = structured_token([tuple((f, seg, 0) for f in (1, 2) for seg in range(1, 10))])
    ans = tsj_answer(tok, storage[0])
    assert ans.symbols.tolist() == [0]


def test_per_server_counts_across_seeds():
    N, T, M = 3, 2, 2
    per = tsj_download_total(N, T, M) // N
    for seed in range(10):
        rand = tsj_randomness(N, T, M, 1, GF256, rng=substream(seed, "cnt"))
        tokens = tsj_query(N, T, M, 1, rand)
        assert all(len(t.combos) == per for t in tokens)


def test_dense_blocks_cover_active_files():
    rand = tsj_randomness(3, 2, 2, 1, GF256, seed=2)
    tokens = tsj_query(3, 2, 2, 1, rand)
    for tok in tokens:
        for combo in tok.combos:
            files = {f for f, _, _ in combo}
            segs = {(f, s) for f, s, _ in combo}
            assert len(segs) == len(files) * 9  # dense over every referenced file


def test_functional_matrix_is_invertible():
    rand = tsj_randomness(3, 2, 2, 1, GF256, seed=1)
    assert GF256.matrix_rank(rand.functionals) == rand.dim
    assert rand.attempts >= 1
