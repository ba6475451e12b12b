import numpy as np
import pytest

from wpirlab.core import (NULL_CLASS, AnswerString, PirSetting, QueryToken,
                          RetrievalTranscript, Tag, Variant, capacity, clean_token,
                          empty_answer, generate_library, mds, null_token,
                          query_class_of, replicated, structured_token, tcollusion,
                          transcript_download_bits)
from wpirlab.galois import binary_field, prime_field

GF256 = binary_field(8)


def test_generate_library_deterministic():
    a = generate_library(2, 4, GF256, seed=7)
    b = generate_library(2, 4, GF256, seed=7)
    assert np.array_equal(a.symbols, b.symbols)
    c = generate_library(2, 4, GF256, seed=8)
    assert not np.array_equal(a.symbols, c.symbols)


def test_generate_library_smallest():
    lib = generate_library(1, 1, prime_field(2), seed=123)
    assert lib.symbols.shape == (1, 1)
    assert lib.file(1)[0] in (0, 1)


def test_generate_library_uniformity():
    # chi-square against uniform: 256 cells, 2x10^5 symbols, 5 sigma
    lib = generate_library(2, 10 ** 5, GF256, seed=42)
    counts = np.bincount(lib.symbols.reshape(-1), minlength=256)
    n, cells = lib.symbols.size, 256
    expected = n / cells
    chi2 = float(((counts - expected) ** 2 / expected).sum())
    dof = cells - 1
    sigma = (2 * dof) ** 0.5
    assert abs(chi2 - dof) < 5 * sigma


def test_generate_library_errors():
    with pytest.raises(ValueError):
        generate_library(0, 4, GF256, seed=1)
    with pytest.raises(ValueError):
        generate_library(2, 0, GF256, seed=1)


def test_library_indexing():
    lib = generate_library(3, 4, GF256, seed=5)
    with pytest.raises(IndexError):
        lib.file(0)
    with pytest.raises(IndexError):
        lib.file(4)


def test_query_classes():
    assert query_class_of(clean_token(2)) == frozenset({2})
    assert query_class_of(null_token()) == NULL_CLASS
    tok = structured_token([((1, 2, 1), (3, 4, 1))])
    assert query_class_of(tok) == frozenset({1, 3})


def test_token_validation():
    with pytest.raises(ValueError):
        QueryToken(Tag.NULL, clean_index=1)
    with pytest.raises(ValueError):
        QueryToken(Tag.CLEAN)
    with pytest.raises(ValueError):
        QueryToken(Tag.STRUCTURED)
    # stored class must agree with the payload
    with pytest.raises(ValueError):
        QueryToken(Tag.STRUCTURED, combos=(((1, 2, 1),),), query_class=frozenset({2}))
    ok = QueryToken(Tag.STRUCTURED, combos=(((1, 2, 1),),), query_class=frozenset({1}))
    assert ok.query_class == frozenset({1})


def test_transcript_download_bits():
    six = AnswerString(np.arange(6), GF256)
    assert six.bit_length == 48
    t = RetrievalTranscript(theta=1, queries=(null_token(),),
                            answers=(six,), download_bits=48, seed=0)
    assert transcript_download_bits(t) == 48

    nulls = RetrievalTranscript(theta=1, queries=(null_token(), null_token()),
                                answers=(empty_answer(GF256), empty_answer(GF256)),
                                download_bits=0, seed=0)
    assert transcript_download_bits(nulls) == 0

    clean = AnswerString(np.zeros(9, dtype=np.int64), GF256)
    assert clean.bit_length == 72

    with pytest.raises(ValueError):
        RetrievalTranscript(theta=1, queries=(null_token(),), answers=(six,),
                            download_bits=47, seed=0)


def test_answer_bits_narrow_field():
    # GF(7) symbols occupy 3 bits each in the download accounting
    a = AnswerString(np.arange(4), prime_field(7))
    assert a.bit_length == 12


def test_setting_validation():
    with pytest.raises(ValueError):
        PirSetting(Variant.REPLICATED, 1, 2)
    with pytest.raises(ValueError):
        PirSetting(Variant.REPLICATED, 2, 0)
    with pytest.raises(ValueError):
        mds(3, 3, 2)  # K = N leaves no redundancy
    with pytest.raises(ValueError):
        tcollusion(3, 3, 2)  # T = N undefined in the closed forms
    with pytest.raises(ValueError):
        PirSetting(Variant.REPLICATED, 3, 2, K=2)
    with pytest.raises(ValueError):
        PirSetting(Variant.MDS, 3, 2)
    s = tcollusion(4, 3, 2)
    assert s.r == 3 and s.rows == 16 and s.file_length == 16
    assert mds(5, 3, 2).file_length == 75


def test_capacity_values():
    from fractions import Fraction
    assert capacity(replicated(2, 2)) == Fraction(2, 3)
    assert capacity(replicated(3, 2)) == Fraction(3, 4)
    assert capacity(tcollusion(3, 2, 2)) == Fraction(3, 5)
    assert capacity(mds(5, 3, 2)) == Fraction(5, 8)
    assert capacity(replicated(4, 1)) == 1
