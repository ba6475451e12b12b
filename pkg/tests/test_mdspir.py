from fractions import Fraction
from itertools import combinations

import numpy as np
import pytest

from wpirlab.core import FileLibrary, generate_library, mds, query_class_of
from wpirlab.galois import binary_field, default_field, prime_field
from wpirlab.mdspir import (MdsStorage, bu_answer, bu_decode, bu_download_total,
                            bu_query, bu_randomness, bu_rate, mds_encode, mds_recover)
from wpirlab.rng import substream
from wpirlab.server import provision_storage
from wpirlab.sunjafar import sj_query, sj_randomness

GF256 = default_field()
GF7 = prime_field(7)


def test_encode_repetition_k1():
    lib = FileLibrary(M=1, L=3, field=GF7, symbols=np.array([[4, 5, 6]]), seed=0)
    ms = mds_encode(lib, 3, 1)
    for l in range(3):
        assert ms.columns[l, 0].tolist() == [4, 5, 6]


def test_encode_reference_row():
    # row (2, 3) encodes to evaluations of 2 + 3x at x = 1, 2, 3 over GF(7)
    lib = FileLibrary(M=1, L=2, field=GF7, symbols=np.array([[2, 3]]), seed=0)
    ms = mds_encode(lib, 3, 2)
    assert ms.columns[:, 0, 0].tolist() == [5, 1, 4]


def test_recover_reference_row():
    assert mds_recover([(1, 5), (2, 1)], (1, 2), GF7).tolist() == [2, 3]
    assert mds_recover([(2, 1), (3, 4)], (2, 3), GF7).tolist() == [2, 3]


def test_recover_k1_and_zero():
    assert mds_recover([(2, 6)], (2,), GF7).tolist() == [6]
    assert mds_recover([(1, 0), (2, 0)], (1, 2), GF7).tolist() == [0, 0]


def test_recover_repeated_indices():
    with pytest.raises(ValueError):
        mds_recover([(1, 5), (1, 1)], (1, 1), GF7)


@pytest.mark.parametrize("field", [GF7, GF256], ids=str)
@pytest.mark.parametrize("N,K", [(3, 2), (4, 3), (5, 3), (3, 1)])
def test_recover_encode_identity_all_subsets(field, N, K):
    if field.order <= N:
        pytest.skip("needs q > N")
    rows = 6
    rng = substream(2, "enc", N, K)
    lib = FileLibrary(M=1, L=rows * K, field=field,
                      symbols=rng.integers(0, field.order, size=(1, rows * K)),
                      seed=0)
    ms = mds_encode(lib, N, K)
    coeffs = lib.symbols.reshape(rows, K)
    for subset in combinations(range(N), K):
        for r in range(rows):
            pairs = [(l + 1, int(ms.columns[l, 0, r])) for l in subset]
            got = mds_recover(pairs, tuple(l + 1 for l in subset), field)
            assert got.tolist() == coeffs[r].tolist()


def test_encode_errors():
    lib = FileLibrary(M=1, L=4, field=GF7, symbols=np.zeros((1, 4), dtype=np.int64), seed=0)
    with pytest.raises(ValueError):
        mds_encode(lib, 8, 2)  # q = 7 <= N
    with pytest.raises(ValueError):
        mds_encode(lib, 3, 3)  # L not divisible by K


def test_download_totals_and_rates():
    assert bu_download_total(5, 3, 2) == 120
    assert bu_rate(5, 3, 2) == Fraction(5, 8)
    assert bu_rate(3, 2, 2) == Fraction(3, 5)
    assert bu_download_total(4, 2, 1) == 8  # M = 1 downloads the K*N coded symbols
    assert bu_rate(4, 2, 1) == 1


@pytest.mark.parametrize("N,K,M,seeds", [(3, 2, 2, 100), (5, 3, 2, 20)])
def test_round_trip_regression(N, K, M, seeds):
    setting = mds(N, K, M)
    lib = generate_library(M, setting.file_length, GF256, seed=77)
    storage = provision_storage(setting, lib)
    exact = 0
    for seed in range(seeds):
        theta = 1 + seed % M
        rand = bu_randomness(N, K, M, rng=substream(seed, "bu"))
        tokens = bu_query(N, K, M, theta, rand)
        assert all(query_class_of(t) == frozenset(range(1, M + 1)) for t in tokens)
        answers = [bu_answer(t, storage[l]) for l, t in enumerate(tokens)]
        assert len({len(a.symbols) for a in answers}) == 1
        assert sum(len(a.symbols) for a in answers) == bu_download_total(N, K, M)
        if np.array_equal(bu_decode(theta, rand, answers, N, K, M, GF256),
                          lib.file(theta)):
            exact += 1
    assert exact == seeds


def test_k1_reduces_to_replicated_scheme():
    # identical tokens for identical permutations: K=1 is the replicated scheme
    N, M = 3, 2
    rand = sj_randomness(N, M, rng=substream(6, "red"))
    bu_tokens = bu_query(N, 1, M, 2, rand)
    sj_tokens = sj_query(N, M, 2, rand)
    assert bu_tokens == sj_tokens


def test_answer_on_coded_column():
    setting = mds(3, 2, 2)
    lib = generate_library(2, 18, GF256, seed=5)
    storage = provision_storage(setting, lib)
    rand = bu_randomness(3, 2, 2, seed=8)
    tok = bu_query(3, 2, 2, 1, rand)[0]
    ans = bu_answer(tok, storage[0])
    for combo, value in zip(tok.combos, ans.symbols.tolist()):
        want = 0
        for file_idx, seg, _ in combo:
            want ^= int(storage[0].columns[file_idx - 1, seg - 1])
        assert value == want
