"""Product codes assembled from Hadamard-kernel component codes.

A mu-dimensional product of component codes (n_l, k_l, d_l) has
parameters (prod n_l, prod k_l, prod d_l) and generator
G_1 (x) ... (x) G_mu.  When every factor comes from the same Kronecker
kernel, the product is again a span of kernel rows: its frozen vector is
the Kronecker product of the component frozen vectors, so the whole code
can be encoded with one butterfly transform and decoded by successive
cancellation over the product frozen vector.

Indexing is 0-based and the flat codeword order is the C-order
flattening of the (n_1, ..., n_mu) array: axis 0 varies slowest.  Fibers
along axis l are codewords of component l.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass, field
from functools import reduce

import numpy as np

from . import gf2
from .codes import ComponentCode, generator_from_frozen, kernel_transform, rm_code

__all__ = [
    "ProductCode",
    "build_product",
    "parse_component",
    "parse_product",
]


@dataclass(eq=False)
class ProductCode:
    """Product code plus everything derived from its construction."""

    components: tuple[ComponentCode, ...]
    n: int
    k: int
    d: int
    a_d: int
    frozen: np.ndarray
    _cache: dict = field(default_factory=dict, repr=False)

    @property
    def shape(self) -> tuple[int, ...]:
        return tuple(c.n for c in self.components)

    @property
    def k_shape(self) -> tuple[int, ...]:
        return tuple(c.k for c in self.components)

    @property
    def rate(self) -> float:
        return self.k / self.n

    @property
    def name(self) -> str:
        return "x".join(c.name for c in self.components)

    @property
    def info_positions(self) -> np.ndarray:
        """Flat codeword indices where frozen = 1, ascending.

        These are simultaneously the u-domain information positions and
        the systematic positions of the codeword: the column submatrix
        of the kernel power on these indices is triangular with unit
        diagonal, hence an information set.
        """
        if "info_positions" not in self._cache:
            self._cache["info_positions"] = np.nonzero(self.frozen)[0]
        return self._cache["info_positions"]

    def nonsystematic_generator(self) -> np.ndarray:
        """Rows of the kernel power selected by the product frozen vector."""
        if "gen_nsys" not in self._cache:
            self._cache["gen_nsys"] = generator_from_frozen(self.frozen)
        return self._cache["gen_nsys"]

    def change_of_basis(self) -> np.ndarray:
        """k x k matrix S with G_systematic = S @ G_nonsystematic."""
        if "change_of_basis" not in self._cache:
            gen = self.nonsystematic_generator()
            self._cache["change_of_basis"] = gf2.inverse(gen[:, self.info_positions])
        return self._cache["change_of_basis"]

    def systematic_generator(self) -> np.ndarray:
        if "gen_sys" not in self._cache:
            self._cache["gen_sys"] = gf2.matmul(
                self.change_of_basis(), self.nonsystematic_generator()
            )
        return self._cache["gen_sys"]

    def _component_systematic(self, l: int) -> np.ndarray:
        key = ("comp_sys", l)
        if key not in self._cache:
            c = self.components[l]
            cols = c.info_positions
            inv = gf2.inverse(c.generator[:, cols])
            self._cache[key] = gf2.matmul(inv, c.generator)
        return self._cache[key]

    def encode_nonsystematic(self, info) -> np.ndarray:
        """Scatter info bits onto the frozen-one positions of u, then
        apply the kernel butterfly.  Accepts batches: (..., k) -> (..., n)."""
        info = gf2.as_bits(info)
        if info.shape[-1] != self.k:
            raise ValueError(f"expected {self.k} info bits, got {info.shape[-1]}")
        u = np.zeros(info.shape[:-1] + (self.n,), dtype=np.uint8)
        u[..., self.info_positions] = info
        return kernel_transform(u)

    def encode_systematic(self, info) -> np.ndarray:
        """Row-column systematic encoding: each axis in turn is encoded
        by the systematic encoder of its component code.

        Info bits land unchanged on the frozen-one codeword positions
        (row-major over the per-axis information sets); the result
        equals encode_nonsystematic(info @ S) with S the change of
        basis.  Accepts batches: (..., k) -> (..., n).
        """
        info = gf2.as_bits(info)
        if info.shape[-1] != self.k:
            raise ValueError(f"expected {self.k} info bits, got {info.shape[-1]}")
        batch = info.shape[:-1]
        arr = info.reshape(batch + self.k_shape)
        for l in range(len(self.components)):
            arr = self._apply_axis(arr, self._component_systematic(l), len(batch) + l)
        return arr.reshape(batch + (self.n,))

    @staticmethod
    def _apply_axis(arr: np.ndarray, mat: np.ndarray, axis: int) -> np.ndarray:
        moved = np.moveaxis(arr, axis, -1)
        lead = moved.shape[:-1]
        flat = gf2.matmul(moved.reshape(-1, mat.shape[0]), mat)
        return np.moveaxis(flat.reshape(lead + (mat.shape[1],)), -1, axis)

    def codeword_array(self, flat) -> np.ndarray:
        """Reshape flat codewords (..., n) to (..., n_1, ..., n_mu)."""
        flat = np.asarray(flat)
        return flat.reshape(flat.shape[:-1] + self.shape)

    def extract_info(self, codeword) -> np.ndarray:
        """Read the information bits off a systematically encoded word."""
        codeword = np.asarray(codeword)
        return codeword[..., self.info_positions]

    def __repr__(self) -> str:  # pragma: no cover
        return f"ProductCode({self.name}, ({self.n},{self.k},{self.d}), A_d={self.a_d})"


def build_product(components) -> ProductCode:
    """Assemble a product code from kernel component codes.

    Component order is kept exactly as given; axis l of the codeword
    array corresponds to components[l].  Minimum distance and its
    multiplicity come from the exact component enumerators:
    d = prod d_l and A_d = prod A_{d_l}.
    """
    comps = tuple(components)
    if not comps:
        raise ValueError("need at least one component code")
    for c in comps:
        if c.kind != "rm":
            raise ValueError("product factors must be kernel (rm) codes")
    frozen = reduce(gf2.kron, (c.frozen for c in comps))
    n = math.prod(c.n for c in comps)
    k = math.prod(c.k for c in comps)
    d = math.prod(c.d for c in comps)
    a_d = math.prod(c.min_weight_multiplicity() for c in comps)
    assert frozen.shape == (n,) and int(frozen.sum()) == k
    return ProductCode(components=comps, n=n, k=k, d=d, a_d=a_d, frozen=frozen)


_COMPONENT_RE = re.compile(r"([A-Za-z]+)\((\d+),(\d+)\)")


def parse_component(text: str) -> ComponentCode:
    """Parse one component descriptor: rep(n,1), SPC(n,n-1), eH(n,k),
    or RM(r,m)."""
    compact = text.strip().replace(" ", "")
    match = _COMPONENT_RE.fullmatch(compact)
    if not match:
        raise ValueError(f"cannot parse component descriptor {text!r}")
    name, a, b = match.group(1), int(match.group(2)), int(match.group(3))
    lname = name.lower()
    if lname == "rm":
        return rm_code(a, b, name=f"RM({a},{b})")
    n, k = a, b
    if n < 2 or n & (n - 1):
        raise ValueError(f"block length {n} is not a power of two in {text!r}")
    m = n.bit_length() - 1
    if lname == "rep" and k == 1:
        r = 0
    elif lname == "spc" and k == n - 1:
        r = m - 1
    elif lname == "eh" and k == n - 1 - m:
        r = m - 2
    else:
        raise ValueError(f"unknown or inconsistent component descriptor {text!r}")
    return rm_code(r, m, name=f"{name}({n},{k})")


def parse_product(text: str) -> ProductCode:
    """Parse a product descriptor like 'eH(16,11) x SPC(8,7)'."""
    parts = re.split(r"\s+x\s+|(?<=\))x(?=[A-Za-z])", text.strip())
    if not parts or not all(p.strip() for p in parts):
        raise ValueError(f"cannot parse product descriptor {text!r}")
    return build_product([parse_component(p) for p in parts])
