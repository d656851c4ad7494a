"""Successive cancellation and SC list decoding over a frozen vector.

The decoder walks the u-domain positions of the kernel transform in
natural order (no bit reversal).  The recursion tree is kept in two flat
arrays per path: LLR memory of length 2n-1 and partial-sum memory of
length n-1, where the node currently alive at height h occupies the
slice [2**h - 1, 2**(h+1) - 1).  Everything is vectorised over a batch
of independent decodes and over the list paths, so one call decodes a
whole block of noisy words.

Conventions:
  * frozen vector: 1 marks an information position, 0 a position frozen
    to zero (its ones count is k);
  * check node: exact 2 atanh(tanh tanh) via the stable logaddexp form,
    with an opt-in min-sum approximation;
  * path metric: penalty |LLR| when the decision opposes the LLR sign
    ("hard", the default), or the exact ln(1 + exp(-|LLR|)) variant
    ("exact"); lower metric = more likely;
  * ties in pruning are broken deterministically: stable sort on the
    metric with path-continuation candidates enumerated before forks,
    in the surviving-path order of the previous step.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import gf2
from .codes import kernel_transform

__all__ = [
    "LLR_CLAMP",
    "llr_check",
    "llr_combine",
    "DecodeOutcome",
    "sc_decode",
    "scl_decode",
    "scl_decode_batch",
    "forced_path_metric",
    "genie_ml_lower_bound",
    "CrcChecker",
    "outer_checker_from_crc",
]

# Channel LLRs are clipped to this magnitude on entry everywhere in the
# package; keeps exp/log arithmetic comfortably inside float64 range.
LLR_CLAMP = 40.0


def llr_check(a, b, *, min_sum: bool = False):
    """Check-node combination of two LLRs.

    Exact form 2 atanh(tanh(a/2) tanh(b/2)), computed stably as
    logaddexp(0, a+b) - logaddexp(a, b).  min_sum=True switches to
    sign(a) sign(b) min(|a|, |b|).
    """
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    if min_sum:
        return np.sign(a) * np.sign(b) * np.minimum(np.abs(a), np.abs(b))
    return np.logaddexp(0.0, a + b) - np.logaddexp(a, b)


def llr_combine(a, b, bit):
    """Variable-node combination: b + (1 - 2 bit) a for a known bit."""
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    return b + (1.0 - 2.0 * np.asarray(bit, dtype=np.float64)) * a


def _pen0(lam, metric):
    if metric == "hard":
        return np.maximum(-lam, 0.0)
    return np.logaddexp(0.0, -lam)


def _pen1(lam, metric):
    if metric == "hard":
        return np.maximum(lam, 0.0)
    return np.logaddexp(0.0, lam)


def _check_args(llrs, frozen, metric):
    llrs = np.atleast_2d(np.asarray(llrs, dtype=np.float64))
    frozen = gf2.as_bits(frozen)
    n = frozen.shape[0]
    if n == 0 or n & (n - 1):
        raise ValueError("frozen vector length must be a power of two")
    if llrs.shape[-1] != n:
        raise ValueError(f"LLR length {llrs.shape[-1]} != frozen length {n}")
    if metric not in ("hard", "exact"):
        raise ValueError(f"unknown metric {metric!r}")
    return np.clip(llrs, -LLR_CLAMP, LLR_CLAMP), frozen


def _f_step(llr, h, min_sum):
    w = 1 << h
    parent = llr[..., 2 * w - 1: 4 * w - 1]
    a, b = parent[..., :w], parent[..., w:]
    if min_sum:
        llr[..., w - 1: 2 * w - 1] = np.sign(a) * np.sign(b) * np.minimum(np.abs(a), np.abs(b))
    else:
        llr[..., w - 1: 2 * w - 1] = np.logaddexp(0.0, a + b) - np.logaddexp(a, b)


def _g_step(llr, bits, h):
    w = 1 << h
    parent = llr[..., 2 * w - 1: 4 * w - 1]
    a, b = parent[..., :w], parent[..., w:]
    s = bits[..., w - 1: 2 * w - 1]
    llr[..., w - 1: 2 * w - 1] = b + (1.0 - 2.0 * s) * a


def _propagate_llrs(llr, bits, i, m, min_sum):
    """Refresh the decision LLR for leaf i (assumes leaf i-1 done)."""
    if i == 0:
        top = m - 1
    else:
        p = (i & -i).bit_length() - 1
        _g_step(llr, bits, p)
        top = p - 1
    for h in range(top, -1, -1):
        _f_step(llr, h, min_sum)


def _propagate_bits(bits, beta, i, m):
    """Fold the leaf-i decision back into the partial-sum memory."""
    q = ((i + 1) & -(i + 1)).bit_length() - 1  # trailing ones of i
    for h in range(q):
        w = 1 << h
        left = bits[..., w - 1: 2 * w - 1]
        beta = np.concatenate([left ^ beta, beta], axis=-1)
    if q < m:
        w = 1 << q
        bits[..., w - 1: 2 * w - 1] = beta


def _run_list(llrs, frozen, list_size, metric, min_sum):
    """Core list decoder over a batch.

    Returns (u_paths, metrics) with shapes (T, P, n) and (T, P), P the
    final list size, in the storage order of the last pruning step.
    """
    t_count, n = llrs.shape
    m = n.bit_length() - 1
    llr = np.zeros((t_count, 1, 2 * n - 1))
    llr[:, 0, n - 1:] = llrs
    bits = np.zeros((t_count, 1, n - 1), dtype=np.uint8)
    upaths = np.zeros((t_count, 1, n), dtype=np.uint8)
    pm = np.zeros((t_count, 1))
    rows = np.arange(t_count)[:, None]
    p = 1
    for i in range(n):
        _propagate_llrs(llr, bits, i, m, min_sum)
        lam = llr[:, :, 0]
        if not frozen[i]:
            pm = pm + _pen0(lam, metric)
            beta = np.zeros((t_count, p, 1), dtype=np.uint8)
        elif 2 * p <= list_size:
            pm = np.concatenate([pm + _pen0(lam, metric), pm + _pen1(lam, metric)], axis=1)
            llr = np.concatenate([llr, llr], axis=1)
            bits = np.concatenate([bits, bits], axis=1)
            upaths = np.concatenate([upaths, upaths], axis=1)
            upaths[:, p:, i] = 1
            beta = np.zeros((t_count, 2 * p, 1), dtype=np.uint8)
            beta[:, p:, 0] = 1
            p *= 2
        else:
            cand = np.concatenate([pm + _pen0(lam, metric), pm + _pen1(lam, metric)], axis=1)
            keep = np.argsort(cand, axis=1, kind="stable")[:, :list_size]
            parent = keep % p
            ubit = (keep >= p).astype(np.uint8)
            llr = llr[rows, parent]
            bits = bits[rows, parent]
            upaths = upaths[rows, parent]
            pm = np.take_along_axis(cand, keep, axis=1)
            p = list_size
            upaths[:, :, i] = ubit
            beta = ubit[:, :, None]
        _propagate_bits(bits, beta, i, m)
    order = np.argsort(pm, axis=1, kind="stable")
    return np.take_along_axis(upaths, order[:, :, None], axis=1), \
        np.take_along_axis(pm, order, axis=1)


def _run_forced(llrs, frozen, u_true, metric):
    """Metric of a prescribed u-vector: run the single-path recursion
    with every decision forced to the given bits."""
    t_count, n = llrs.shape
    m = n.bit_length() - 1
    llr = np.zeros((t_count, 1, 2 * n - 1))
    llr[:, 0, n - 1:] = llrs
    bits = np.zeros((t_count, 1, n - 1), dtype=np.uint8)
    pm = np.zeros(t_count)
    for i in range(n):
        _propagate_llrs(llr, bits, i, m, False)
        lam = llr[:, 0, 0]
        forced = u_true[:, i]
        pm = pm + np.where(forced == 0, _pen0(lam, metric), _pen1(lam, metric))
        _propagate_bits(bits, forced[:, None, None], i, m)
    return pm


@dataclass
class DecodeOutcome:
    """Result of one decode.

    ``candidates`` lists (u_vector, metric) pairs most likely first for
    list decoders; ``crc_passed`` aligns with it when a checker was
    used.  BP decoders fill ``converged``/``iterations`` instead of the
    list fields.
    """

    chosen_u: np.ndarray | None
    chosen_info: np.ndarray
    chosen_codeword: np.ndarray
    metric: float | None = None
    candidates: list | None = None
    crc_passed: list | None = None
    genie_contains_truth: bool | None = None
    converged: bool | None = None
    iterations: int | None = None


@dataclass
class BatchDecodeResult:
    """Vectorised decode of a block of words; row t is trial t."""

    u_paths: np.ndarray            # (T, P, n) most likely first
    metrics: np.ndarray            # (T, P)
    chosen_u: np.ndarray           # (T, n)
    pass_mask: np.ndarray | None   # (T, P) checker verdicts
    truth_metric: np.ndarray | None = None
    genie_contains_truth: np.ndarray | None = None
    genie_error: np.ndarray | None = None

    def chosen_codewords(self) -> np.ndarray:
        return kernel_transform(self.chosen_u)

    def outcome(self, t: int, frozen) -> DecodeOutcome:
        info_pos = np.nonzero(gf2.as_bits(frozen))[0]
        chosen = self.chosen_u[t]
        cands = [(self.u_paths[t, j].copy(), float(self.metrics[t, j]))
                 for j in range(self.u_paths.shape[1])]
        chosen_col = next(j for j in range(len(cands))
                          if np.array_equal(cands[j][0], chosen))
        return DecodeOutcome(
            chosen_u=chosen.copy(),
            chosen_info=chosen[info_pos].copy(),
            chosen_codeword=kernel_transform(chosen),
            metric=float(self.metrics[t, chosen_col]),
            candidates=cands,
            crc_passed=None if self.pass_mask is None else self.pass_mask[t].tolist(),
            genie_contains_truth=None if self.genie_contains_truth is None
            else bool(self.genie_contains_truth[t]),
        )


def scl_decode_batch(llrs, frozen, list_size, *, checker=None, metric="hard",
                     min_sum=False, true_u=None) -> BatchDecodeResult:
    """Decode a (T, n) block of LLR vectors with a common frozen vector.

    With a ``checker`` the decoder picks the most likely path whose
    information bits pass it, falling back to the overall most likely
    path when none do.  Passing the transmitted u-vectors as ``true_u``
    additionally evaluates the genie-aided ML lower bound for each
    trial: the truth is inserted into the final list and an error is
    flagged iff some (checker-passing) candidate beats its metric.
    """
    if list_size < 1:
        raise ValueError("list size must be >= 1")
    llrs, frozen = _check_args(llrs, frozen, metric)
    u_paths, metrics = _run_list(llrs, frozen, list_size, metric, min_sum)
    t_count, p, n = u_paths.shape
    info_pos = np.nonzero(frozen)[0]
    if checker is not None:
        flat = u_paths[:, :, info_pos].reshape(t_count * p, -1)
        pass_mask = np.asarray(checker(flat), dtype=bool).reshape(t_count, p)
        any_pass = pass_mask.any(axis=1)
        first_pass = np.argmax(pass_mask, axis=1)
        chosen_col = np.where(any_pass, first_pass, 0)
    else:
        pass_mask = None
        chosen_col = np.zeros(t_count, dtype=np.intp)
    chosen_u = u_paths[np.arange(t_count), chosen_col]
    result = BatchDecodeResult(u_paths, metrics, chosen_u, pass_mask)
    if true_u is not None:
        true_u = gf2.as_bits(np.atleast_2d(true_u))
        result.truth_metric = _run_forced(llrs, frozen, true_u, metric)
        is_truth = (u_paths == true_u[:, None, :]).all(axis=2)
        result.genie_contains_truth = is_truth.any(axis=1)
        rivals = ~is_truth if pass_mask is None else (~is_truth & pass_mask)
        rival_best = np.where(rivals, metrics, np.inf).min(axis=1)
        result.genie_error = rival_best < result.truth_metric
    return result


def scl_decode(llrs, frozen, list_size, *, checker=None, metric="hard",
               min_sum=False) -> DecodeOutcome:
    """List-decode one LLR vector; see :func:`scl_decode_batch`."""
    llrs = np.asarray(llrs, dtype=np.float64)
    res = scl_decode_batch(llrs[None, :], frozen, list_size, checker=checker,
                           metric=metric, min_sum=min_sum)
    return res.outcome(0, frozen)


def sc_decode(llrs, frozen, *, metric="hard", min_sum=False) -> DecodeOutcome:
    """Plain successive cancellation: the degenerate list of size 1."""
    return scl_decode(llrs, frozen, 1, metric=metric, min_sum=min_sum)


def forced_path_metric(llrs, frozen, u, *, metric="hard") -> float:
    """Path metric the decoder would assign to a prescribed u-vector."""
    llrs, frozen = _check_args(llrs, frozen, metric)
    u = gf2.as_bits(np.atleast_2d(u))
    return float(_run_forced(llrs, frozen, u, metric)[0])


def genie_ml_lower_bound(llrs, frozen, true_u, outcome: DecodeOutcome, *,
                         metric="hard") -> bool:
    """Genie-aided ML lower-bound error flag for one decoded trial.

    The true u-vector is inserted into the final candidate list before
    selection; the flag is True iff some other candidate (restricted to
    checker-passing ones when the decode used a checker) has a strictly
    better metric, i.e. iff even a maximum-likelihood decision could
    have failed.  Per trial this never exceeds the decoder's own error
    indicator.
    """
    true_u = gf2.as_bits(true_u)
    pm_true = forced_path_metric(llrs, frozen, true_u, metric=metric)
    flags = outcome.crc_passed or [True] * len(outcome.candidates)
    for (u_cand, pm_cand), ok in zip(outcome.candidates, flags):
        if ok and pm_cand < pm_true and not np.array_equal(u_cand, true_u):
            return True
    return False


@dataclass
class CrcChecker:
    """Membership test for the outer-code image in the u-domain.

    Holds a parity-check matrix for the mixed generator G_mo; a
    candidate's information bits pass iff their syndrome is zero, i.e.
    iff they encode some outer codeword.
    """

    parity: np.ndarray  # (k_inner - k_outer, k_inner)

    def __call__(self, info_bits) -> np.ndarray:
        info_bits = gf2.as_bits(np.atleast_2d(info_bits))
        syndrome = gf2.matmul(info_bits, self.parity.T)
        return ~syndrome.any(axis=1)


def outer_checker_from_crc(concat) -> CrcChecker:
    """Build the list-decoder checker for a concatenated code."""
    return CrcChecker(parity=gf2.nullspace(concat.mixed_generator))
