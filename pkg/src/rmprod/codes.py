"""Component codes built from the binary Hadamard kernel, plus CRC codes
and exact weight enumerators.

The kernel is K = [[1, 0], [1, 1]].  Its m-fold Kronecker power is a
lower-triangular n x n matrix (n = 2**m) whose row i has weight
2**popcount(i).  Keeping the rows of weight >= 2**(m-r) gives the
Reed-Muller code RM(r, m); the kept positions are recorded in a frozen
vector f with f[i] = 1 on information positions, matching the successive
cancellation view of the same construction.

Weight enumerators are exact (Python integers throughout).  Codes whose
dimension is too large to enumerate directly are handled through the
dual code and the MacWilliams transform.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from . import gf2

__all__ = [
    "KERNEL",
    "MAX_KERNEL_LOG_SIZE",
    "hadamard_matrix",
    "rm_frozen_vector",
    "generator_from_frozen",
    "kernel_transform",
    "ComponentCode",
    "rm_code",
    "crc_code",
    "WeightEnumerator",
    "weight_enumerator_bruteforce",
    "macwilliams_transform",
    "component_weight_enumerator",
    "format_bits",
    "parse_bits",
]

KERNEL = np.array([[1, 0], [1, 1]], dtype=np.uint8)

# Kronecker powers are materialised as dense n x n arrays, so cap the
# size; 2**12 x 2**12 is 16 MiB and well past every code used here.
MAX_KERNEL_LOG_SIZE = 12

BRUTE_FORCE_MAX_K = 28


def hadamard_matrix(m: int) -> np.ndarray:
    """m-fold Kronecker power of the kernel, an n x n uint8 array.

    Entry (i, j) is 1 iff the binary expansion of j is a submask of i,
    so the matrix is lower triangular with a unit diagonal.
    """
    if not 0 <= m <= MAX_KERNEL_LOG_SIZE:
        raise ValueError(f"m must be in 0..{MAX_KERNEL_LOG_SIZE}, got {m}")
    out = np.array([[1]], dtype=np.uint8)
    for _ in range(m):
        out = np.kron(KERNEL, out)
    return out


def rm_frozen_vector(r: int, m: int) -> np.ndarray:
    """Frozen vector of RM(r, m): f[i] = 1 iff popcount(i) >= m - r.

    Equivalent to keeping the rows of the Kronecker power with weight
    at least 2**(m-r).  sum(f) = sum_{i<=r} C(m, i).
    """
    if not 0 <= r <= m:
        raise ValueError(f"need 0 <= r <= m, got r={r}, m={m}")
    n = 1 << m
    pop = np.array([bin(i).count("1") for i in range(n)])
    return (pop >= m - r).astype(np.uint8)


def generator_from_frozen(frozen) -> np.ndarray:
    """Rows of the Kronecker power selected by the frozen vector.

    ``frozen`` must have power-of-two length; the returned matrix has
    one row per index with frozen[i] = 1, in ascending index order.
    """
    f = gf2.as_bits(frozen)
    n = f.shape[0]
    if n == 0 or n & (n - 1):
        raise ValueError("frozen vector length must be a power of two")
    m = n.bit_length() - 1
    had = hadamard_matrix(m)
    return had[f == 1].copy()


def kernel_transform(u) -> np.ndarray:
    """x = u @ K^{(m)} over GF(2), along the last axis, via the butterfly.

    Accepts any leading batch shape.  One vectorised XOR per stage, so a
    whole batch of vectors is transformed in m array operations.
    """
    x = np.ascontiguousarray(u, dtype=np.uint8).copy()
    n = x.shape[-1]
    if n == 0 or n & (n - 1):
        raise ValueError("length must be a power of two")
    h = 1
    while h < n:
        v = x.reshape(x.shape[:-1] + (n // (2 * h), 2 * h))
        v[..., :h] ^= v[..., h:]
        h *= 2
    return x


@dataclass(eq=False)
class ComponentCode:
    """A linear block code used as a product-code factor or outer code.

    kind "rm": built from the Hadamard kernel, carries the frozen vector
    and (r, m).  kind "crc": systematic [I | P] code from a CRC
    polynomial, carries the polynomial.  ``generator`` is (k, n) uint8.
    """

    kind: str
    n: int
    k: int
    generator: np.ndarray
    frozen: np.ndarray | None = None
    r: int | None = None
    m: int | None = None
    poly: int | None = None
    name: str = ""
    _we: "WeightEnumerator | None" = field(default=None, repr=False)

    @property
    def rate(self) -> float:
        return self.k / self.n

    @property
    def info_positions(self) -> np.ndarray:
        """Indices carrying information bits under systematic encoding.

        For kernel codes these are the frozen-vector-one positions; the
        corresponding column submatrix of the generator is triangular
        with unit diagonal, hence always an information set.  CRC codes
        are systematic on the first k positions.
        """
        if self.kind == "rm":
            return np.nonzero(self.frozen)[0]
        return np.arange(self.k)

    @property
    def d(self) -> int:
        """Minimum distance; 2**(m-r) for kernel codes, else from the
        exact weight enumerator."""
        if self.kind == "rm":
            return 1 << (self.m - self.r)
        return self.weight_enumerator().min_distance

    def weight_enumerator(self) -> "WeightEnumerator":
        if self._we is None:
            self._we = component_weight_enumerator(self)
        return self._we

    def min_weight_multiplicity(self) -> int:
        we = self.weight_enumerator()
        return we.coeffs[self.d]

    def __repr__(self) -> str:  # pragma: no cover
        label = self.name or self.kind
        return f"ComponentCode({label}, n={self.n}, k={self.k})"


def rm_code(r: int, m: int, name: str = "") -> ComponentCode:
    """RM(r, m) as rows of the Kronecker power, with its frozen vector."""
    frozen = rm_frozen_vector(r, m)
    gen = generator_from_frozen(frozen)
    n = 1 << m
    k = int(frozen.sum())
    assert k == sum(math.comb(m, i) for i in range(r + 1))
    return ComponentCode(
        kind="rm", n=n, k=k, generator=gen, frozen=frozen, r=r, m=m,
        name=name or f"RM({r},{m})",
    )


def crc_code(poly: int, k: int, name: str = "") -> ComponentCode:
    """Systematic (k + deg g, k) code from CRC polynomial g.

    ``poly`` is the full polynomial, MSB first, including the x**deg
    term (0x89 = x^7 + x^3 + 1).  Division is MSB-first with zero
    initial state and no final XOR; the parity (remainder of
    m(x) * x^deg mod g) is appended after the message, remainder
    coefficients high power first.  Read MSB-first, every codeword is a
    polynomial divisible by g.
    """
    if poly < 2:
        raise ValueError("polynomial must have degree >= 1")
    if k < 1:
        raise ValueError("k must be positive")
    deg = poly.bit_length() - 1
    n = k + deg
    mask = (1 << deg) - 1
    # powers[p] = x**p mod g as an integer with bit j = coeff of x**j
    powers = []
    rem = 1
    for _ in range(n):
        powers.append(rem)
        rem <<= 1
        if rem >> deg:
            rem ^= poly
        rem &= mask
    gen = np.zeros((k, n), dtype=np.uint8)
    for i in range(k):
        gen[i, i] = 1
        par = powers[deg + k - 1 - i]
        for j in range(deg):
            gen[i, k + j] = (par >> (deg - 1 - j)) & 1
    return ComponentCode(
        kind="crc", n=n, k=k, generator=gen, poly=poly,
        name=name or f"CRC({n},{k})",
    )


@dataclass
class WeightEnumerator:
    """Exact weight distribution: coeffs[w] = number of weight-w words.

    Coefficients are Python integers, so nothing overflows regardless of
    code size.
    """

    coeffs: list[int]

    @property
    def n(self) -> int:
        return len(self.coeffs) - 1

    @property
    def total(self) -> int:
        return sum(self.coeffs)

    @property
    def min_distance(self) -> int:
        for w in range(1, self.n + 1):
            if self.coeffs[w]:
                return w
        raise ValueError("code has no nonzero word")

    def validate(self, k: int) -> None:
        if self.coeffs[0] != 1:
            raise ValueError("A_0 must be 1")
        if any(c < 0 for c in self.coeffs):
            raise ValueError("negative coefficient")
        if self.total != 1 << k:
            raise ValueError(f"coefficients sum to {self.total}, expected 2**{k}")

    def to_csv(self) -> str:
        lines = ["w,A_w"]
        lines += [f"{w},{c}" for w, c in enumerate(self.coeffs) if c]
        return "\n".join(lines) + "\n"

    @classmethod
    def from_csv(cls, text: str, n: int) -> "WeightEnumerator":
        coeffs = [0] * (n + 1)
        rows = [ln for ln in text.strip().splitlines() if ln]
        if rows and rows[0].lower().startswith("w,"):
            rows = rows[1:]
        for ln in rows:
            w, c = ln.split(",")
            coeffs[int(w)] = int(c)
        return cls(coeffs)


def _packed_span(rows: np.ndarray) -> np.ndarray:
    """All 2**k XOR combinations of packed uint64 rows, shape (2**k, W)."""
    span = np.zeros((1, rows.shape[1]), dtype=np.uint64)
    for row in rows:
        span = np.concatenate([span, span ^ row])
    return span


def _pack_rows(gen: np.ndarray) -> np.ndarray:
    k, n = gen.shape
    nbytes = (n + 7) // 8
    width = (nbytes + 7) // 8 * 8
    padded = np.zeros((k, width * 8), dtype=np.uint8)
    padded[:, :n] = gen
    return np.packbits(padded, axis=1, bitorder="little").view(np.uint64)


def weight_enumerator_bruteforce(generator, max_k: int = BRUTE_FORCE_MAX_K) -> WeightEnumerator:
    """Exact weight enumerator by enumerating all 2**k codewords.

    Codewords are packed into uint64 words; the message space is split
    in half so one half lives in memory and the other is streamed, which
    keeps k = 28 to a few seconds.  Refuses k > ``max_k``.
    """
    gen = gf2.as_bits(np.atleast_2d(generator))
    k, n = gen.shape
    if k > max_k:
        raise ValueError(f"k={k} exceeds brute-force limit {max_k}")
    if gf2.rank(gen) != k:
        raise ValueError("generator rows are linearly dependent")
    packed = _pack_rows(gen)
    k_lo = min(k, 14)
    lo = _packed_span(packed[:k_lo])
    hi = _packed_span(packed[k_lo:])
    counts = np.zeros(n + 1, dtype=np.int64)
    chunk = max(1, 1 << 22 >> k_lo)
    for start in range(0, hi.shape[0], chunk):
        block = hi[start:start + chunk, None, :] ^ lo[None, :, :]
        w = np.bitwise_count(block).sum(axis=2, dtype=np.int64)
        counts += np.bincount(w.ravel(), minlength=n + 1)[: n + 1]
    return WeightEnumerator([int(c) for c in counts])


def macwilliams_transform(dual_we: WeightEnumerator, n: int, k: int) -> WeightEnumerator:
    """Weight enumerator of a code from that of its dual.

    A_w = 2**(k-n) * sum_j B_j K_w(j) with binary Krawtchouk
    coefficients K_w(j) = sum_l (-1)**l C(j,l) C(n-j,w-l), evaluated by
    the three-term recurrence in w.  All arithmetic is exact; the final
    division is checked to be exact, which catches inconsistent input.
    """
    if dual_we.n != n:
        raise ValueError(f"dual enumerator has n={dual_we.n}, expected {n}")
    dual_we.validate(n - k)
    acc = [0] * (n + 1)
    for j, bj in enumerate(dual_we.coeffs):
        if bj == 0:
            continue
        k_prev, k_cur = 0, 1
        acc[0] += bj
        for w in range(n):
            # (w+1) K_{w+1}(j) = (n-2j) K_w(j) - (n-w+1) K_{w-1}(j)
            num = (n - 2 * j) * k_cur - (n - w + 1) * k_prev
            k_next, rem = divmod(num, w + 1)
            assert rem == 0
            acc[w + 1] += bj * k_next
            k_prev, k_cur = k_cur, k_next
    scale = 1 << (n - k)
    coeffs = []
    for w, total in enumerate(acc):
        q, rem = divmod(total, scale)
        if rem or q < 0:
            raise ValueError("MacWilliams transform produced a non-integer; "
                             "inconsistent (n, k) or dual enumerator")
        coeffs.append(q)
    out = WeightEnumerator(coeffs)
    out.validate(k)
    return out


def component_weight_enumerator(code: ComponentCode) -> WeightEnumerator:
    """Exact enumerator, brute force over whichever of the code and its
    dual is smaller, via MacWilliams in the dual case."""
    if code.k <= BRUTE_FORCE_MAX_K:
        return weight_enumerator_bruteforce(code.generator)
    if code.n - code.k > BRUTE_FORCE_MAX_K:
        raise ValueError(f"neither {code.k} nor {code.n - code.k} is enumerable")
    dual = gf2.nullspace(code.generator)
    dual_we = weight_enumerator_bruteforce(dual)
    return macwilliams_transform(dual_we, code.n, code.k)


def format_bits(bits) -> str:
    """Render a 0/1 vector or matrix as rows of '0'/'1' characters."""
    arr = gf2.as_bits(bits)
    if arr.ndim == 1:
        arr = arr.reshape(1, -1)
    return "\n".join("".join(str(int(b)) for b in row) for row in arr) + "\n"


def parse_bits(text: str) -> np.ndarray:
    """Inverse of :func:`format_bits`; one row gives a 1-D vector."""
    rows = [ln.strip() for ln in text.strip().splitlines() if ln.strip()]
    if not rows:
        raise ValueError("no bits found")
    if any(set(r) - {"0", "1"} for r in rows):
        raise ValueError("bit rows may contain only '0' and '1'")
    mat = np.array([[int(c) for c in r] for r in rows], dtype=np.uint8)
    return mat[0] if mat.shape[0] == 1 else mat
