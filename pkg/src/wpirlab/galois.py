"""Finite-field arithmetic over GF(p) and GF(2^w).

Symbols of the file alphabet live in one of these fields.  Prime fields use
modular arithmetic with 64-bit intermediates; binary fields GF(2^w), w <= 16,
use carry-less multiplication reduced by a configured irreducible polynomial,
with exp/log tables (built over a discovered generator) accelerating the
vectorized paths.  Addition in GF(2^w) is bitwise XOR.

The default symbol alphabet is GF(2^8) with reduction polynomial
x^8 + x^4 + x^3 + x + 1 (bitmask 0x11B): byte-aligned on the wire and large
enough to supply distinct evaluation points for every desk-scale server count.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np

DEFAULT_GF256_POLY = 0x11B  # x^8 + x^4 + x^3 + x + 1

# Default irreducible polynomials per extension degree (low-weight choices).
_BINARY_POLYS = {
    1: 0b11,
    2: 0b111,
    3: 0b1011,
    4: 0b10011,
    5: 0b100101,
    6: 0b1000011,
    7: 0b10000011,
    8: DEFAULT_GF256_POLY,
    9: 0b1000010001,
    10: 0b10000001001,
    11: 0b100000000101,
    12: 0b1000001010011,
    13: 0b10000000011011,
    14: 0b100010101000011,
    15: 0b1000000000000011,
    16: 0b10001000000001011,
}


def _is_prime(p: int) -> bool:
    if p < 2:
        return False
    d = 2
    while d * d <= p:
        if p % d == 0:
            return False
        d += 1
    return True


def _gf2_polymod(a: int, m: int) -> int:
    """Reduce polynomial a modulo m over GF(2)."""
    dm = m.bit_length() - 1
    while a.bit_length() - 1 >= dm:
        a ^= m << (a.bit_length() - 1 - dm)
    return a


def _gf2_polymul(a: int, b: int) -> int:
    """Carry-less product of two GF(2) polynomials (no reduction)."""
    out = 0
    while b:
        if b & 1:
            out ^= a
        a <<= 1
        b >>= 1
    return out


def _gf2_is_irreducible(m: int) -> bool:
    """Exhaustive factor search; adequate for degree <= 16."""
    deg = m.bit_length() - 1
    if deg < 1:
        return False
    for d in range(2, 1 << (deg // 2 + 1)):
        if d.bit_length() - 1 < 1:
            continue
        if _gf2_polymod(m, d) == 0:
            return False
    return True


def _prime_factors(n: int) -> list[int]:
    out = []
    d = 2
    while d * d <= n:
        if n % d == 0:
            out.append(d)
            while n % d == 0:
                n //= d
        d += 1
    if n > 1:
        out.append(n)
    return out


class Field:
    """A field specification plus its arithmetic.

    kind is 'prime' or 'binary'; modulus is the prime p or the irreducible
    polynomial bitmask; order is the element count q.  Instances are
    immutable after construction and safe to share between threads.
    """

    __slots__ = (
        "kind", "modulus", "order", "width", "bits_per_symbol",
        "_exp", "_log", "generator",
    )

    def __init__(self, kind: str, modulus: int):
        if kind == "prime":
            if not _is_prime(modulus):
                raise ValueError(f"{modulus} is not prime")
            if modulus >= 1 << 16:
                raise ValueError("prime fields limited to p < 2^16")
            order = modulus
            width = 0
        elif kind == "binary":
            width = modulus.bit_length() - 1
            if not 1 <= width <= 16:
                raise ValueError("binary fields limited to 1 <= w <= 16")
            if not _gf2_is_irreducible(modulus):
                raise ValueError(f"polynomial {modulus:#x} is not irreducible")
            order = 1 << width
        else:
            raise ValueError(f"unknown field kind {kind!r}")
        object.__setattr__(self, "kind", kind)
        object.__setattr__(self, "modulus", modulus)
        object.__setattr__(self, "order", order)
        object.__setattr__(self, "width", width)
        object.__setattr__(self, "bits_per_symbol", max(1, (order - 1).bit_length()))
        self._build_tables()

    def __setattr__(self, name, value):
        raise AttributeError("Field is immutable")

    def __repr__(self):
        if self.kind == "prime":
            return f"GF({self.order})"
        return f"GF(2^{self.width}, poly={self.modulus:#x})"

    def __eq__(self, other):
        return (isinstance(other, Field)
                and self.kind == other.kind and self.modulus == other.modulus)

    def __hash__(self):
        return hash((self.kind, self.modulus))

    # internal: exp/log tables over a generator of the multiplicative group
    def _build_tables(self):
        q = self.order
        if self.kind == "prime":
            mul = lambda a, b: (a * b) % q
        else:
            mul = lambda a, b: _gf2_polymod(_gf2_polymul(a, b), self.modulus)
        factors = _prime_factors(q - 1) if q > 2 else []

        def _order_ok(g):
            for p in factors:
                e, acc = (q - 1) // p, 1
                x = g
                while e:
                    if e & 1:
                        acc = mul(acc, x)
                    x = mul(x, x)
                    e >>= 1
                if acc == 1:
                    return False
            return True

        gen = next(g for g in range(1, q) if q == 2 or (g > 1 and _order_ok(g)))
        exp = np.zeros(2 * (q - 1) if q > 2 else 2, dtype=np.int64)
        log = np.zeros(q, dtype=np.int64)
        x = 1
        for i in range(q - 1):
            exp[i] = x
            log[x] = i
            x = mul(x, gen)
        if q > 2:
            exp[q - 1:2 * (q - 1)] = exp[:q - 1]
        else:
            exp[0] = exp[1] = 1
        object.__setattr__(self, "_exp", exp)
        object.__setattr__(self, "_log", log)
        object.__setattr__(self, "generator", gen)

    # scalar ops ------------------------------------------------------------
    def add(self, a: int, b: int) -> int:
        return (a + b) % self.order if self.kind == "prime" else a ^ b

    def sub(self, a: int, b: int) -> int:
        return (a - b) % self.order if self.kind == "prime" else a ^ b

    def neg(self, a: int) -> int:
        return (-a) % self.order if self.kind == "prime" else a

    def mul(self, a: int, b: int) -> int:
        if a == 0 or b == 0:
            return 0
        return int(self._exp[self._log[a] + self._log[b]])

    def inv(self, a: int) -> int:
        if a == 0:
            raise ZeroDivisionError("0 has no multiplicative inverse")
        return int(self._exp[(self.order - 1 - self._log[a]) % (self.order - 1)])

    def pow(self, a: int, e: int) -> int:
        if a == 0:
            return 0 if e else 1
        return int(self._exp[(int(self._log[a]) * e) % (self.order - 1)])

    # vector ops (numpy int64 arrays of element values) ----------------------
    def vadd(self, a, b):
        if self.kind == "prime":
            return (a + b) % self.order
        return np.bitwise_xor(a, b)

    def vsub(self, a, b):
        if self.kind == "prime":
            return (a - b) % self.order
        return np.bitwise_xor(a, b)

    def vmul(self, a, b):
        a = np.asarray(a, dtype=np.int64)
        b = np.asarray(b, dtype=np.int64)
        if self.kind == "prime":
            return (a * b) % self.order
        out = self._exp[self._log[a] + self._log[b]]
        return np.where((a == 0) | (b == 0), 0, out)

    def vscale(self, c: int, a):
        if c == 0:
            return np.zeros_like(np.asarray(a, dtype=np.int64))
        if self.kind == "prime":
            return (np.asarray(a, dtype=np.int64) * c) % self.order
        return self.vmul(np.asarray(a, dtype=np.int64), np.int64(c))

    def vsum(self, a, axis=None):
        if self.kind == "prime":
            return np.sum(np.asarray(a, dtype=np.int64), axis=axis) % self.order
        return np.bitwise_xor.reduce(np.asarray(a, dtype=np.int64), axis=axis)

    def dot(self, a, b):
        """Inner product of two equal-length vectors."""
        return self.vsum(self.vmul(a, b))

    # linear algebra ---------------------------------------------------------
    def solve(self, a, b):
        """Solve A X = B by Gauss-Jordan elimination; raises if A is singular."""
        a = np.array(a, dtype=np.int64)
        b = np.array(b, dtype=np.int64)
        n = a.shape[0]
        if b.ndim == 1:
            b = b[:, None]
            squeeze = True
        else:
            squeeze = False
        aug = np.concatenate([a, b], axis=1)
        for col in range(n):
            piv = next((r for r in range(col, n) if aug[r, col] != 0), None)
            if piv is None:
                raise np.linalg.LinAlgError("singular matrix over finite field")
            if piv != col:
                aug[[col, piv]] = aug[[piv, col]]
            aug[col] = self.vscale(self.inv(int(aug[col, col])), aug[col])
            mask = aug[:, col] != 0
            mask[col] = False
            if mask.any():
                factors = aug[mask, col]
                aug[mask] = self.vsub(aug[mask], self.vmul(factors[:, None], aug[col][None, :]))
        x = aug[:, n:]
        return x[:, 0] if squeeze else x

    def matrix_rank(self, a) -> int:
        rows = [list(map(int, r)) for r in np.asarray(a, dtype=np.int64)]
        if not rows:
            return 0
        ncols = len(rows[0])
        exp, log = self._exp.tolist(), self._log.tolist()
        qm1 = self.order - 1
        prime = self.kind == "prime"
        p = self.order
        rank = 0
        for col in range(ncols):
            piv = next((r for r in range(rank, len(rows)) if rows[r][col] != 0), None)
            if piv is None:
                continue
            rows[rank], rows[piv] = rows[piv], rows[rank]
            prow = rows[rank]
            pinv_log = (qm1 - log[prow[col]]) % qm1
            for r in range(rank + 1, len(rows)):
                row = rows[r]
                if row[col] == 0:
                    continue
                flog = (log[row[col]] + pinv_log) % qm1
                if prime:
                    for j in range(col, ncols):
                        e = prow[j]
                        if e:
                            row[j] = (row[j] - exp[flog + log[e]]) % p
                else:
                    for j in range(col, ncols):
                        e = prow[j]
                        if e:
                            row[j] ^= exp[flog + log[e]]
            rank += 1
            if rank == len(rows):
                break
        return rank

    def vandermonde(self, points, ncols: int):
        """Matrix V[i, j] = points[i]^j, used for polynomial evaluation."""
        v = np.zeros((len(points), ncols), dtype=np.int64)
        for i, x in enumerate(points):
            acc = 1
            for j in range(ncols):
                v[i, j] = acc
                acc = self.mul(acc, x)
        return v

    def poly_eval_matrix(self, points, ncols: int):
        return self.vandermonde(points, ncols)


def prime_field(p: int) -> Field:
    return _field_cache("prime", p)


def binary_field(w: int, modulus: int | None = None) -> Field:
    if modulus is None:
        modulus = _BINARY_POLYS[w]
    if modulus.bit_length() - 1 != w:
        raise ValueError("modulus degree does not match w")
    return _field_cache("binary", modulus)


@lru_cache(maxsize=None)
def _field_cache(kind: str, modulus: int) -> Field:
    return Field(kind, modulus)


def default_field() -> Field:
    return binary_field(8)


def field_from_spec(kind: str, modulus: int) -> Field:
    return _field_cache(kind, modulus)


@dataclass(frozen=True)
class FieldElement:
    """A single symbol: an integer value tied to its field."""

    value: int
    field: Field

    def __post_init__(self):
        if not 0 <= self.value < self.field.order:
            raise ValueError("element value outside field")

    def _check(self, other: "FieldElement"):
        if self.field != other.field:
            raise ValueError("mismatched field specs")

    def __add__(self, other):
        self._check(other)
        return FieldElement(self.field.add(self.value, other.value), self.field)

    def __sub__(self, other):
        self._check(other)
        return FieldElement(self.field.sub(self.value, other.value), self.field)

    def __mul__(self, other):
        self._check(other)
        return FieldElement(self.field.mul(self.value, other.value), self.field)

    def inverse(self) -> "FieldElement":
        return FieldElement(self.field.inv(self.value), self.field)


def ff_mul(a: FieldElement, b: FieldElement) -> FieldElement:
    return a * b


def ff_inv(a: FieldElement) -> FieldElement:
    return a.inverse()
