"""Server-side behavior: storage views and deterministic token answering.

Every server, regardless of variant, holds one column vector of N^M stored
symbols per file (the file itself under replication, a Reed-Solomon coded
column under MDS storage) and answers deterministically from the token
alone:

  * null token        -> empty answer;
  * clean token for k -> the server's entire stored vector for file k;
  * structured token  -> one block of symbols per requested combination.

A structured combination references super-rows: with s = |class| files in
play, each referenced index names a block of g = N^(M-s) consecutive stored
rows, and the combination is answered element-wise across the block.  The
block size is derived from the token's class, never from client hints.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .core import AnswerString, FileLibrary, PirSetting, QueryToken, Tag, Variant, empty_answer
from .galois import Field


@dataclass(frozen=True)
class ServerStorage:
    """One server's stored data for a given setting."""

    server_index: int
    setting: PirSetting
    field: Field
    columns: np.ndarray  # shape (M, N^M)

    def __post_init__(self):
        if self.columns.shape != (self.setting.M, self.setting.rows):
            raise ValueError("storage shape does not match the setting")


def evaluate_structured(token: QueryToken, columns: np.ndarray, field: Field,
                        N: int, M: int) -> AnswerString:
    s = len(token.query_class)
    rows = N ** M
    g = rows // (N ** s)
    out = np.empty(len(token.combos) * g, dtype=np.int64)
    for i, combo in enumerate(token.combos):
        acc = np.zeros(g, dtype=np.int64)
        for file_idx, seg, coeff in combo:
            if not 1 <= file_idx <= M:
                raise ValueError(f"file index {file_idx} out of range")
            base = (seg - 1) * g
            if not 0 <= base < rows:
                raise ValueError(f"segment index {seg} out of range")
            block = columns[file_idx - 1, base:base + g]
            if coeff == 1:
                acc = field.vadd(acc, block)
            elif coeff != 0:
                acc = field.vadd(acc, field.vscale(coeff, block))
        out[i * g:(i + 1) * g] = acc
    return AnswerString(out, field)


def answer_token(token: QueryToken, storage: ServerStorage) -> AnswerString:
    if token.tag == Tag.NULL:
        return empty_answer(storage.field)
    if token.tag == Tag.CLEAN:
        k = token.clean_index
        if not 1 <= k <= storage.setting.M:
            raise ValueError(f"clean index {k} out of range")
        return AnswerString(storage.columns[k - 1].copy(), storage.field)
    return evaluate_structured(token, storage.columns, storage.field,
                               storage.setting.N, storage.setting.M)


def provision_storage(setting: PirSetting, library: FileLibrary) -> list[ServerStorage]:
    """Build every server's storage from the library."""
    if setting.variant == Variant.MDS:
        from .mdspir import mds_encode
        ms = mds_encode(library, setting.N, setting.K)
        return [ServerStorage(l, setting, library.field, ms.columns[l])
                for l in range(setting.N)]
    if library.L != setting.rows:
        raise ValueError(f"library files must have L = N^M = {setting.rows} symbols")
    return [ServerStorage(l, setting, library.field, library.symbols)
            for l in range(setting.N)]
