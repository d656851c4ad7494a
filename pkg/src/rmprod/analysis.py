"""Distance analysis and analytic error-rate estimates.

Covers exhaustive minimum-distance search for small codes, the
min-weight input-output weight enumerator of a product code, the
uniform-interleaver ensemble average for a serial concatenation, and the
truncated union bound in two flavours (Bhattacharyya and Q-function).
All combinatorial quantities are exact; only the final bound values are
floats.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from . import gf2
from .codes import ComponentCode, WeightEnumerator, _pack_rows, _packed_span
from .product import ProductCode

__all__ = [
    "min_distance_bruteforce",
    "min_weight_iowe",
    "min_weight_iowe_product",
    "ensemble_avg_min_weight",
    "tub",
    "tub_curve",
    "BoundCurve",
]

MIN_DISTANCE_MAX_K = 24
IOWE_MAX_K = 20


def min_distance_bruteforce(generator, max_k: int = MIN_DISTANCE_MAX_K) -> tuple[int, int]:
    """(d, A_d) by enumerating all nonzero codewords; k <= 24."""
    gen = gf2.as_bits(np.atleast_2d(generator))
    k, n = gen.shape
    if k > max_k:
        raise ValueError(f"k={k} exceeds brute-force limit {max_k}")
    packed = _pack_rows(gen)
    k_lo = min(k, 14)
    lo = _packed_span(packed[:k_lo])
    hi = _packed_span(packed[k_lo:])
    best = n + 1
    count = 0
    chunk = max(1, 1 << 22 >> k_lo)
    for start in range(0, hi.shape[0], chunk):
        block = hi[start:start + chunk, None, :] ^ lo[None, :, :]
        w = np.bitwise_count(block).sum(axis=2, dtype=np.int64).ravel()
        if start == 0:
            w = w[1:]  # drop the zero word
        lowest = int(w.min())
        if lowest < best:
            best, count = lowest, int(np.count_nonzero(w == lowest))
        elif lowest == best:
            count += int(np.count_nonzero(w == best))
    return best, count


def min_weight_iowe(code: ComponentCode) -> dict[int, int]:
    """Input weights of the minimum-weight codewords.

    Returns {j: number of weight-d codewords whose systematic input has
    weight j}.  The input weight of a codeword is its weight restricted
    to the information set, since systematic encoding is the identity
    there.
    """
    if code.k > IOWE_MAX_K:
        raise ValueError(f"k={code.k} exceeds enumeration limit {IOWE_MAX_K}")
    gen = code.generator
    packed = _pack_rows(gen)
    span = _packed_span(packed)
    mask = np.zeros(gen.shape[1], dtype=np.uint8)
    mask[code.info_positions] = 1
    mask_packed = _pack_rows(mask.reshape(1, -1))[0]
    weights = np.bitwise_count(span).sum(axis=1, dtype=np.int64)
    info_w = np.bitwise_count(span & mask_packed).sum(axis=1, dtype=np.int64)
    sel = weights == code.d
    out: dict[int, int] = {}
    for j in np.sort(info_w[sel]):
        out[int(j)] = out.get(int(j), 0) + 1
    assert sum(out.values()) == code.min_weight_multiplicity()
    return out


def min_weight_iowe_product(pc: ProductCode) -> dict[int, int]:
    """Min-weight IOWE of a product code.

    A weight-d product word is a tensor of component minimum-weight
    words, and its input restricted to the product information set is
    the tensor of the component inputs, so input weights multiply:
    A_{j,d} = sum over j_1 * ... * j_mu = j of prod A^{(l)}_{j_l, d_l}.
    """
    combined: dict[int, int] = {1: 1}
    for comp in pc.components:
        part = min_weight_iowe(comp)
        nxt: dict[int, int] = {}
        for j1, c1 in combined.items():
            for j2, c2 in part.items():
                nxt[j1 * j2] = nxt.get(j1 * j2, 0) + c1 * c2
        combined = nxt
    assert sum(combined.values()) == pc.a_d
    return combined


def ensemble_avg_min_weight(outer_we: WeightEnumerator, inner_iowe: dict[int, int],
                            n_outer: int) -> Fraction:
    """Uniform-interleaver average multiplicity of the inner minimum
    weight in a serial concatenation.

    A weight-j outer codeword lands on any of the C(n_outer, j) inner
    input supports with equal probability over the interleaver ensemble,
    so the average count of inner minimum-weight words is
    sum_j A^o_j A^i_{j,d} / C(n_outer, j), exact in rationals.
    """
    if outer_we.n != n_outer:
        raise ValueError(f"outer enumerator length {outer_we.n} != {n_outer}")
    total = Fraction(0)
    for j, a_in in inner_iowe.items():
        a_out = outer_we.coeffs[j]
        if a_out:
            total += Fraction(a_out * a_in, math.comb(n_outer, j))
    return total


def tub(terms: dict[int, int], d: int, rate: float, ebn0_db: float) -> tuple[float, float]:
    """Truncated union bound at one SNR point, both flavours.

    Returns (bhattacharyya, qform).  The Bhattacharyya form uses only
    the minimum-distance term, A_d * beta**d with beta = exp(-R Eb/N0);
    the Q-function form sums A_w Q(sqrt(2 w R Eb/N0)) over every term
    supplied.  Values are not capped at 1.
    """
    if d not in terms or terms[d] <= 0:
        raise ValueError("terms must include a positive A_d entry")
    gamma = 10.0 ** (ebn0_db / 10.0)
    bhat = float(terms[d]) * math.exp(-rate * gamma * d)
    qform = sum(float(a) * 0.5 * math.erfc(math.sqrt(w * rate * gamma))
                for w, a in terms.items() if a)
    return bhat, qform


@dataclass
class BoundCurve:
    """Union bound evaluated on an Eb/N0 grid."""

    ebn0_db: list[float]
    bhattacharyya: list[float]
    qform: list[float]

    def to_csv(self) -> str:
        lines = ["ebn0_db,tub_bhattacharyya,tub_qform"]
        for e, b, q in zip(self.ebn0_db, self.bhattacharyya, self.qform):
            lines.append(f"{e:g},{b:.10e},{q:.10e}")
        return "\n".join(lines) + "\n"


def tub_curve(terms: dict[int, int], d: int, rate: float, ebn0_grid) -> BoundCurve:
    grid = [float(e) for e in ebn0_grid]
    pairs = [tub(terms, d, rate, e) for e in grid]
    return BoundCurve(grid, [p[0] for p in pairs], [p[1] for p in pairs])
