"""Iterative soft decoding of product codes.

Component codes are handled by exact BCJR on the syndrome trellis: the
state after t symbols is the partial syndrome (an (n-k)-bit integer),
a symbol b at position t moves state s to s XOR (b * H[:, t]).  Valid
codewords are exactly the paths from state 0 to state 0, so forward and
backward log-domain sweeps give the exact a-posteriori LLR of every
symbol, and subtracting the intrinsic input leaves the extrinsic part.

The product decoder exchanges extrinsics between the axes of the
codeword array: each pass re-decodes every fiber along one axis with
the channel LLRs plus the extrinsics produced by all other axes, in the
classic turbo schedule.  Decoding stops at the first iteration whose
elementwise hard decision satisfies every component check (and, for a
concatenated code, the outer check), or after ``max_iter`` iterations.

All message arrays are clamped to +/- LLR_CLAMP between passes.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import gf2
from .codes import ComponentCode
from .scl import LLR_CLAMP

MAX_TRELLIS_CHECKS = 12
# memory cap for one BCJR sweep; larger batches are processed in slices
_BCJR_BYTES_CAP = 128 * 2**20

__all__ = [
    "Trellis",
    "build_trellis",
    "bcjr_extrinsic",
    "BatchBpResult",
    "bp_decode_batch",
    "bp_decode",
    "bp_decode_concat_batch",
]


@dataclass(eq=False)
class Trellis:
    """Syndrome trellis of a short binary linear code."""

    n: int
    num_checks: int
    cols: np.ndarray  # (n,) int64, column t of H packed into an integer
    name: str = ""
    _perms: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        states = np.arange(self.num_states, dtype=np.int64)
        self._perms = states[None, :] ^ self.cols[:, None]

    @property
    def num_states(self) -> int:
        return 1 << self.num_checks

    def reachable_counts(self) -> list[int]:
        """Number of states alive at each of the n+1 time steps."""
        fwd = [np.zeros(self.num_states, bool) for _ in range(self.n + 1)]
        bwd = [np.zeros(self.num_states, bool) for _ in range(self.n + 1)]
        fwd[0][0] = True
        bwd[self.n][0] = True
        for t in range(self.n):
            fwd[t + 1] = fwd[t] | fwd[t][self._perms[t]]
        for t in range(self.n - 1, -1, -1):
            bwd[t] = bwd[t + 1] | bwd[t + 1][self._perms[t]]
        return [int((f & b).sum()) for f, b in zip(fwd, bwd)]

    def codeword_count(self) -> int:
        """Number of state-0 to state-0 paths; must equal 2**k."""
        counts = {0: 1}
        for t in range(self.n):
            nxt: dict[int, int] = {}
            col = int(self.cols[t])
            for s, c in counts.items():
                nxt[s] = nxt.get(s, 0) + c
                nxt[s ^ col] = nxt.get(s ^ col, 0) + c
            counts = nxt
        return counts.get(0, 0)


def build_trellis(code: ComponentCode) -> Trellis:
    r = code.n - code.k
    if r > MAX_TRELLIS_CHECKS:
        raise ValueError(
            f"trellis for {code.name} needs 2^{r} states; "
            f"limit is 2^{MAX_TRELLIS_CHECKS}")
    h = gf2.nullspace(code.generator)
    assert h.shape == (r, code.n)
    weights = 1 << np.arange(r, dtype=np.int64)
    cols = (h.astype(np.int64).T @ weights).astype(np.int64)
    return Trellis(n=code.n, num_checks=r, cols=cols, name=code.name)


def _lse(a: np.ndarray) -> np.ndarray:
    """logsumexp over the last axis; rows of all -inf give -inf."""
    m = np.max(a, axis=-1, keepdims=True)
    m = np.where(np.isfinite(m), m, 0.0)
    with np.errstate(divide="ignore"):
        return m[..., 0] + np.log(np.exp(a - m).sum(axis=-1))


def bcjr_extrinsic(trellis: Trellis, llrs) -> np.ndarray:
    """Exact extrinsic LLRs for every symbol of every input row.

    ``llrs`` has shape (..., n); the result has the same shape.  Symbol
    probabilities are P(b) proportional to exp(-b * llr), so positive
    LLRs favour 0, matching the rest of the package.
    """
    lam = np.asarray(llrs, dtype=np.float64)
    if lam.shape[-1] != trellis.n:
        raise ValueError(f"expected trailing axis {trellis.n}, got {lam.shape}")
    lead = lam.shape[:-1]
    lam = lam.reshape(-1, trellis.n)
    t_count, n = lam.shape
    s_count = trellis.num_states

    step = (n + 1) * s_count * 8 * 2
    chunk = max(1, _BCJR_BYTES_CAP // step)
    if t_count > chunk:
        parts = [bcjr_extrinsic(trellis, lam[i:i + chunk])
                 for i in range(0, t_count, chunk)]
        return np.concatenate(parts, axis=0).reshape(*lead, n)

    alpha = np.full((n + 1, t_count, s_count), -np.inf)
    beta = np.full((n + 1, t_count, s_count), -np.inf)
    alpha[0, :, 0] = 0.0
    beta[n, :, 0] = 0.0
    for t in range(n):
        perm = trellis._perms[t]
        g1 = -lam[:, t, None]
        alpha[t + 1] = np.logaddexp(alpha[t], alpha[t][:, perm] + g1)
    for t in range(n - 1, -1, -1):
        perm = trellis._perms[t]
        g1 = -lam[:, t, None]
        beta[t] = np.logaddexp(beta[t + 1], beta[t + 1][:, perm] + g1)

    ext = np.empty_like(lam)
    for t in range(n):
        perm = trellis._perms[t]
        # b=0 paths keep the state, b=1 paths cross to state ^ col; the
        # intrinsic term -lam[t] on the b=1 branch cancels on subtraction
        ext[:, t] = _lse(alpha[t] + beta[t + 1]) - _lse(alpha[t] + beta[t + 1][:, perm])
    return ext.reshape(*lead, n)


@dataclass
class BatchBpResult:
    codewords: np.ndarray   # (T, n) hard decisions at stop time
    posterior: np.ndarray   # (T, n) accumulated LLRs at stop time
    valid: np.ndarray       # (T,) hard decision satisfied every check
    iterations: np.ndarray  # (T,) iterations spent on each trial

    def outcome(self, t: int, info_positions) -> "DecodeOutcome":
        from .scl import DecodeOutcome
        cw = self.codewords[t]
        return DecodeOutcome(
            chosen_u=None,
            chosen_info=cw[np.asarray(info_positions)].copy(),
            chosen_codeword=cw.copy(),
            converged=bool(self.valid[t]),
            iterations=int(self.iterations[t]),
        )


def _axis_pass(lam_total, trellis, axis):
    """Run the component SISO over every fiber along one array axis."""
    moved = np.moveaxis(lam_total, axis, -1)
    ext = bcjr_extrinsic(trellis, moved)
    return np.moveaxis(ext, -1, axis)


def _axis_syndrome_ok(bits, h, axis):
    moved = np.moveaxis(bits, axis, -1)
    syn = gf2.matmul(moved.reshape(-1, moved.shape[-1]), h.T)
    reduced = syn.any(axis=1).reshape(moved.shape[:-1])
    # collapse everything but the trial axis
    return ~reduced.reshape(reduced.shape[0], -1).any(axis=1)


def _run_bp(lam, shape, trellises, parity, max_iter, outer=None):
    """Shared engine for plain and concatenated product BP.

    ``outer``, when given, is (trellis, parity, info_positions, perm):
    an extra component over the inner information positions, seen
    through the interleaver permutation ``perm`` (info slot i carries
    outer symbol perm[i]).
    """
    t_count, n = lam.shape
    mu = len(shape)
    out_bits = np.zeros((t_count, n), np.uint8)
    out_post = lam.copy()
    out_valid = np.zeros(t_count, bool)
    out_iter = np.full(t_count, max_iter, np.int64)

    act = np.arange(t_count)
    lam_a = lam
    ext = [np.zeros_like(lam) for _ in range(mu)]
    if outer is not None:
        _, _, info_pos, perm = outer
        inv = np.argsort(perm)
        ext.append(np.zeros_like(lam))

    for it in range(1, max_iter + 1):
        for l in range(mu):
            inp = lam_a + sum(e for j, e in enumerate(ext) if j != l)
            np.clip(inp, -LLR_CLAMP, LLR_CLAMP, out=inp)
            arr = inp.reshape(-1, *shape)
            ext[l] = np.clip(_axis_pass(arr, trellises[l], 1 + l),
                             -LLR_CLAMP, LLR_CLAMP).reshape(len(act), n)
        if outer is not None:
            o_trellis, _, info_pos, perm = outer
            inp = lam_a + sum(ext[:mu])
            np.clip(inp, -LLR_CLAMP, LLR_CLAMP, out=inp)
            x = inp[:, info_pos][:, inv]
            e_out = np.clip(bcjr_extrinsic(o_trellis, x), -LLR_CLAMP, LLR_CLAMP)
            ext[mu][:] = 0.0
            ext[mu][:, info_pos] = e_out[:, perm]

        total = lam_a + sum(ext)
        hard = (total < 0).astype(np.uint8)
        arr = hard.reshape(-1, *shape)
        ok = np.ones(len(act), bool)
        for l in range(mu):
            ok &= _axis_syndrome_ok(arr, parity[l], 1 + l)
        if outer is not None:
            o_syn = gf2.matmul(hard[:, info_pos][:, inv], outer[1].T)
            ok &= ~o_syn.any(axis=1)

        done = np.nonzero(ok)[0]
        if done.size:
            rows = act[done]
            out_bits[rows] = hard[done]
            out_post[rows] = total[done]
            out_valid[rows] = True
            out_iter[rows] = it
        live = np.nonzero(~ok)[0]
        if live.size == 0:
            break
        if done.size:
            act = act[live]
            lam_a = lam_a[live]
            ext = [e[live] for e in ext]
        if it == max_iter:
            out_bits[act] = hard[live]
            out_post[act] = total[live]

    return BatchBpResult(out_bits, out_post, out_valid, out_iter)


def bp_decode_batch(llrs, code, *, max_iter: int = 100) -> BatchBpResult:
    """Iterative decoding of a batch of product-code LLR vectors.

    ``llrs`` is (T, n) or (n,); one row per trial.  ``valid`` marks
    trials whose output is a genuine codeword (the stopping test); the
    others return the hard decision after the final iteration.
    """
    lam = np.atleast_2d(np.asarray(llrs, dtype=np.float64))
    if lam.shape[-1] != code.n:
        raise ValueError(f"expected length {code.n}, got {lam.shape[-1]}")
    if max_iter < 1:
        raise ValueError("max_iter must be positive")
    lam = np.clip(lam, -LLR_CLAMP, LLR_CLAMP)
    trellises = [build_trellis(c) for c in code.components]
    parity = [gf2.nullspace(c.generator) for c in code.components]
    return _run_bp(lam, code.shape, trellises, parity, max_iter)


def bp_decode(llrs, code, *, max_iter: int = 100):
    """Single-trial convenience wrapper around bp_decode_batch."""
    res = bp_decode_batch(llrs, code, max_iter=max_iter)
    return res.outcome(0, code.info_positions)


def bp_decode_concat_batch(llrs, concat, *, max_iter: int = 100) -> BatchBpResult:
    """Product BP with the outer code joined in as one more component.

    Each iteration runs every inner axis and then the outer SISO on the
    inner information positions (through the interleaver).  The outer
    extrinsics enter the axis passes exactly like another dimension's,
    and the stopping test additionally requires a zero outer syndrome.
    """
    inner = concat.inner
    lam = np.atleast_2d(np.asarray(llrs, dtype=np.float64))
    if lam.shape[-1] != inner.n:
        raise ValueError(f"expected length {inner.n}, got {lam.shape[-1]}")
    if max_iter < 1:
        raise ValueError("max_iter must be positive")
    lam = np.clip(lam, -LLR_CLAMP, LLR_CLAMP)
    trellises = [build_trellis(c) for c in inner.components]
    parity = [gf2.nullspace(c.generator) for c in inner.components]
    o_trellis = build_trellis(concat.outer)
    o_parity = gf2.nullspace(concat.outer.generator)
    outer = (o_trellis, o_parity, np.asarray(inner.info_positions),
             np.asarray(concat.interleaver.perm))
    return _run_bp(lam, inner.shape, trellises, parity, max_iter, outer=outer)
