"""Concatenation of a systematic CRC outer code with a product inner code.

The message m is CRC-encoded to w = m G_o, reordered by an interleaver
to v (v[i] = w[perm[i]]), and v becomes the information vector of the
inner product code's systematic encoder.  For list decoding, the same
chain is expressed in the inner u-domain: the information bits x of a
valid path satisfy x = m G_mo with the mixed generator

    G_mo = G_o[:, perm] S,

S being the inner change of basis from systematic to u-domain inputs.
Candidate paths are therefore checkable by one syndrome with a parity
matrix for G_mo (see scl.outer_checker_from_crc).
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property

import numpy as np

from . import gf2
from .codes import ComponentCode, crc_code
from .product import ProductCode

# generator polynomials by degree, MSB first including the x^deg term
CRC_POLYS = {7: 0x89, 10: 0x633}

__all__ = ["CRC_POLYS", "Interleaver", "ConcatenatedCode", "build_concat",
           "crc_concat"]


@dataclass(eq=False)
class Interleaver:
    """Fixed reordering of the outer codeword: out[i] = in[perm[i]]."""

    perm: np.ndarray

    def __post_init__(self):
        perm = np.asarray(self.perm, dtype=np.intp)
        if sorted(perm.tolist()) != list(range(len(perm))):
            raise ValueError("perm is not a permutation")
        self.perm = perm

    @classmethod
    def trivial(cls, n: int) -> "Interleaver":
        return cls(np.arange(n, dtype=np.intp))

    @classmethod
    def random(cls, n: int, seed: int) -> "Interleaver":
        return cls(np.random.default_rng(seed).permutation(n))

    @property
    def n(self) -> int:
        return len(self.perm)

    def apply(self, x) -> np.ndarray:
        return np.asarray(x)[..., self.perm]

    def invert(self, x) -> np.ndarray:
        return np.asarray(x)[..., np.argsort(self.perm)]


@dataclass(eq=False)
class ConcatenatedCode:
    outer: ComponentCode
    inner: ProductCode
    interleaver: Interleaver

    @property
    def n(self) -> int:
        return self.inner.n

    @property
    def k(self) -> int:
        return self.outer.k

    @property
    def rate(self) -> float:
        return self.k / self.n

    @property
    def name(self) -> str:
        return f"{self.outer.name}+{self.inner.name}"

    @cached_property
    def mixed_generator(self) -> np.ndarray:
        """(k_outer, k_inner) map from messages to inner u-domain inputs."""
        permuted = self.outer.generator[:, self.interleaver.perm]
        return gf2.matmul(permuted, self.inner.change_of_basis())

    def encode(self, message) -> np.ndarray:
        """Systematic chain: CRC encode, interleave, product encode."""
        message = gf2.as_bits(message)
        if message.shape[-1] != self.k:
            raise ValueError(f"expected {self.k} message bits, got {message.shape[-1]}")
        w = gf2.matmul(message, self.outer.generator)
        return self.inner.encode_systematic(self.interleaver.apply(w))

    def encode_nonsystematic_route(self, message) -> np.ndarray:
        """Same map through the u-domain; used to cross-check encode()."""
        message = gf2.as_bits(message)
        x = gf2.matmul(message, self.mixed_generator)
        return self.inner.encode_nonsystematic(x)

    def extract_message(self, codeword) -> np.ndarray:
        """Read the message back off a codeword (systematic everywhere)."""
        v = np.asarray(codeword)[..., self.inner.info_positions]
        w = self.interleaver.invert(v)
        return w[..., self.outer.info_positions]


def build_concat(outer: ComponentCode, inner: ProductCode,
                 interleaver: Interleaver | None = None) -> ConcatenatedCode:
    if outer.kind != "crc":
        raise ValueError(f"outer code must be a crc code, got {outer.kind}")
    if outer.n != inner.k:
        raise ValueError(
            f"outer length {outer.n} must match inner dimension {inner.k}")
    if interleaver is None:
        interleaver = Interleaver.trivial(outer.n)
    if interleaver.n != outer.n:
        raise ValueError(
            f"interleaver size {interleaver.n} != outer length {outer.n}")
    code = ConcatenatedCode(outer=outer, inner=inner, interleaver=interleaver)
    # the two encoding routes must agree; catches basis or ordering slips
    rng = np.random.default_rng(0)
    sample = rng.integers(0, 2, size=(4, code.k), dtype=np.uint8)
    assert np.array_equal(code.encode(sample),
                          code.encode_nonsystematic_route(sample))
    return code


def crc_concat(inner: ProductCode, degree: int,
               interleaver: Interleaver | None = None) -> ConcatenatedCode:
    """Concatenate ``inner`` with the standard CRC of the given degree."""
    if degree not in CRC_POLYS:
        raise ValueError(f"no standard polynomial of degree {degree}; "
                         f"known: {sorted(CRC_POLYS)}")
    outer = crc_code(CRC_POLYS[degree], inner.k - degree,
                     name=f"CRC-{degree}({inner.k},{inner.k - degree})")
    return build_concat(outer, inner, interleaver)
