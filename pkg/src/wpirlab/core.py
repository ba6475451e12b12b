"""Shared domain types: file libraries, query tokens, answers, transcripts.

Conventions used throughout: file indices are 1-based [1:M], server indices
are 0-based [0:N-1].  A query token is the entire request sent to one server
in one session; its *class* is the set of file indices the request touches,
which is exactly what the receiving server can infer from the wire payload.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field as dc_field
from fractions import Fraction

import numpy as np

from .galois import Field
from .rng import substream


class Variant(str, enum.Enum):
    REPLICATED = "replicated"
    MDS = "mds"
    T_COLLUSION = "tcollusion"


@dataclass(frozen=True)
class PirSetting:
    """A retrieval scenario: variant, server count N, file count M.

    K (MDS code dimension) is required for the MDS variant, T (collusion
    threshold) for the T-collusion variant.  The redundancy parameter r
    (1, K, or T) appears identically in every closed-form rate and leakage
    expression, so the three variants share most downstream code.
    """

    variant: Variant
    N: int
    M: int
    K: int | None = None
    T: int | None = None

    def __post_init__(self):
        if self.N < 2:
            raise ValueError("need at least N=2 servers")
        if self.M < 1:
            raise ValueError("need at least M=1 files")
        if self.variant == Variant.MDS:
            if self.K is None:
                raise ValueError("MDS variant requires K")
        elif self.K is not None:
            raise ValueError("K only applies to the MDS variant")
        if self.variant == Variant.T_COLLUSION:
            if self.T is None:
                raise ValueError("T-collusion variant requires T")
        elif self.T is not None:
            raise ValueError("T only applies to the T-collusion variant")
        if not 1 <= self.r < self.N:
            raise ValueError("redundancy parameter must satisfy 1 <= r < N")

    @property
    def r(self) -> int:
        if self.variant == Variant.MDS:
            return self.K
        if self.variant == Variant.T_COLLUSION:
            return self.T
        return 1

    @property
    def rows(self) -> int:
        """Per-file stored rows (segments) on each server: N^M."""
        return self.N ** self.M

    @property
    def file_length(self) -> int:
        """Symbols per file: N^M, or K*N^M under MDS coding."""
        return self.K * self.rows if self.variant == Variant.MDS else self.rows

    def describe(self) -> str:
        if self.variant == Variant.MDS:
            return f"mds(N={self.N},K={self.K},M={self.M})"
        if self.variant == Variant.T_COLLUSION:
            return f"tcollusion(N={self.N},T={self.T},M={self.M})"
        return f"replicated(N={self.N},M={self.M})"


def replicated(N: int, M: int) -> PirSetting:
    return PirSetting(Variant.REPLICATED, N, M)


def mds(N: int, K: int, M: int) -> PirSetting:
    return PirSetting(Variant.MDS, N, M, K=K)


def tcollusion(N: int, T: int, M: int) -> PirSetting:
    return PirSetting(Variant.T_COLLUSION, N, M, T=T)


def capacity(setting: PirSetting) -> Fraction:
    """Zero-leakage capacity (1 + r/N + ... + (r/N)^(M-1))^-1."""
    x = Fraction(setting.r, setting.N)
    return 1 / sum(x ** i for i in range(setting.M))


@dataclass(frozen=True)
class FileLibrary:
    """M files of L symbols each, i.i.d. uniform over the field."""

    M: int
    L: int
    field: Field
    symbols: np.ndarray  # shape (M, L), values in [0, q)
    seed: int

    def file(self, index: int) -> np.ndarray:
        """1-based file access."""
        if not 1 <= index <= self.M:
            raise IndexError(f"file index {index} outside [1:{self.M}]")
        return self.symbols[index - 1]


def generate_library(M: int, L: int, field: Field, seed: int) -> FileLibrary:
    """Draw an M x L library from the seeded generator; same seed, same bits."""
    if M < 1 or L < 1:
        raise ValueError("library needs M >= 1 files of L >= 1 symbols")
    rng = substream(seed, "library")
    symbols = rng.integers(0, field.order, size=(M, L), dtype=np.int64)
    symbols.setflags(write=False)
    return FileLibrary(M=M, L=L, field=field, symbols=symbols, seed=seed)


class Tag(enum.IntEnum):
    NULL = 0
    CLEAN = 1
    STRUCTURED = 2


# A structured payload is a tuple of combinations; each combination is a
# tuple of (file_index, segment_index, coefficient) terms, 1-based indices.
Combo = tuple[tuple[int, int, int], ...]

NULL_CLASS = frozenset()  # the distinguished "no file referenced" label


def _class_of_combos(combos: tuple[Combo, ...]) -> frozenset:
    return frozenset(term[0] for combo in combos for term in combo)


@dataclass(frozen=True)
class QueryToken:
    """One server's request: null, a clean download, or combination lists.

    The class is stored redundantly next to the payload and re-derived from
    the payload on deserialization, so servers always reason from what they
    can actually observe.
    """

    tag: Tag
    clean_index: int | None = None
    combos: tuple[Combo, ...] | None = None
    query_class: frozenset = dc_field(default=NULL_CLASS)

    def __post_init__(self):
        if self.tag == Tag.NULL:
            if self.clean_index is not None or self.combos is not None:
                raise ValueError("null token carries no payload")
            expected = NULL_CLASS
        elif self.tag == Tag.CLEAN:
            if self.clean_index is None or self.combos is not None:
                raise ValueError("clean token carries exactly one file index")
            expected = frozenset({self.clean_index})
        else:
            if self.combos is None or self.clean_index is not None:
                raise ValueError("structured token carries combinations")
            expected = _class_of_combos(self.combos)
        if self.query_class == NULL_CLASS and self.tag != Tag.NULL:
            object.__setattr__(self, "query_class", expected)
        elif self.query_class != expected:
            raise ValueError("stored class disagrees with payload")


def null_token() -> QueryToken:
    return QueryToken(Tag.NULL)


def clean_token(k: int) -> QueryToken:
    return QueryToken(Tag.CLEAN, clean_index=k)


def structured_token(combos) -> QueryToken:
    combos = tuple(tuple(tuple(term) for term in combo) for combo in combos)
    return QueryToken(Tag.STRUCTURED, combos=combos)


def query_class_of(q: QueryToken) -> frozenset:
    """Sufficient statistic of a token: NULL_CLASS, {k}, or the file set."""
    if q.tag == Tag.NULL:
        return NULL_CLASS
    if q.tag == Tag.CLEAN:
        return frozenset({q.clean_index})
    return _class_of_combos(q.combos)


@dataclass(frozen=True)
class AnswerString:
    """Symbols returned by one server; empty for null queries."""

    symbols: np.ndarray
    field: Field

    @property
    def bit_length(self) -> int:
        return len(self.symbols) * self.field.bits_per_symbol


def empty_answer(field: Field) -> AnswerString:
    return AnswerString(np.zeros(0, dtype=np.int64), field)


@dataclass(frozen=True)
class RetrievalTranscript:
    theta: int
    queries: tuple[QueryToken, ...]
    answers: tuple[AnswerString, ...]
    download_bits: int
    seed: int

    def __post_init__(self):
        if self.download_bits != sum(a.bit_length for a in self.answers):
            raise ValueError("download_bits must equal the summed answer lengths")


def transcript_download_bits(t: RetrievalTranscript) -> int:
    return sum(a.bit_length for a in t.answers)


def entropy_bits(probs) -> float:
    """Shannon entropy in bits with the 0*log(0) = 0 convention."""
    total = 0.0
    for p in probs:
        p = float(p)
        if p > 0.0:
            total -= p * math.log2(p)
    return total
