"""Monte-Carlo block-error measurement on the binary-input AWGN channel.

Every trial draws a uniformly random message, encodes, transmits with
BPSK over AWGN at the requested Eb/N0, decodes, and compares blocks.
The per-trial random stream is seeded by (master seed, SNR index, trial
index), so any trial can be regenerated in isolation and results do not
depend on how trials are scheduled across batches or workers.  Trials
are consumed in fixed-size batches; a point stops after the first whole
batch that reaches the minimum block-error count, or at the trial cap.

For list decoders the engine can also count the genie lower bound on
maximum-likelihood errors: a trial is charged to the genie only when
some surviving candidate (other than the transmitted path, which the
genie is told) beats the transmitted path's metric, so the genie count
never exceeds the decoder's.
"""

from __future__ import annotations

import csv
import itertools
import math
import re
import sys
import time
from dataclasses import dataclass, replace
from functools import partial
from multiprocessing import get_context

import numpy as np

from . import gf2
from .bp import bp_decode_batch, bp_decode_concat_batch
from .concat import ConcatenatedCode
from .product import ProductCode
from .scl import LLR_CLAMP, outer_checker_from_crc, scl_decode_batch

CSV_HEADER = ("code_id,decoder,list_size,max_iter,ebn0_db,trials,"
              "block_errors,cer,ci_low,ci_high,genie_lb_errors,seed")

__all__ = [
    "CSV_HEADER",
    "noise_sigma",
    "biawgn_llrs",
    "wilson_interval",
    "DecoderSpec",
    "parse_decoder",
    "SimConfig",
    "SimRecord",
    "run_experiment",
    "iter_experiment",
    "write_csv",
]


def noise_sigma(ebn0_db: float, rate: float) -> float:
    """Noise standard deviation for unit-energy BPSK at this Eb/N0."""
    if not 0 < rate <= 1:
        raise ValueError(f"rate must be in (0, 1], got {rate}")
    return math.sqrt(1.0 / (2.0 * rate * 10.0 ** (ebn0_db / 10.0)))


def biawgn_llrs(codewords, ebn0_db: float, rate: float, rng) -> np.ndarray:
    """Transmit codeword bits as +/-1, add noise, return channel LLRs."""
    bits = gf2.as_bits(codewords)
    sigma = noise_sigma(ebn0_db, rate)
    y = (1.0 - 2.0 * bits) + sigma * rng.standard_normal(bits.shape)
    return np.clip(2.0 * y / sigma**2, -LLR_CLAMP, LLR_CLAMP)


def wilson_interval(errors: int, trials: int, z: float = 1.96) -> tuple[float, float]:
    if trials < 1 or not 0 <= errors <= trials:
        raise ValueError(f"bad counts: {errors}/{trials}")
    p = errors / trials
    denom = 1.0 + z**2 / trials
    center = (p + z**2 / (2 * trials)) / denom
    half = z * math.sqrt(p * (1 - p) / trials + z**2 / (4 * trials**2)) / denom
    return max(0.0, center - half), min(1.0, center + half)


# ----------------------------------------------------------- decoder specs

_DECODER_RE = re.compile(
    r"^(?:(SC)|SCL\((\d+)\)(\+CRC)?|BP(?:\((\d+)\))?(\+OUTER)?)$", re.IGNORECASE)


@dataclass(frozen=True)
class DecoderSpec:
    """One decoder to run: 'SC', 'SCL(L)', 'SCL(L)+CRC', 'BP(I)', 'BP(I)+outer'."""

    kind: str               # "scl" or "bp"
    list_size: int | None = None
    max_iter: int | None = None
    outer: bool = False     # CRC-aided list / outer-aware BP

    @property
    def label(self) -> str:
        if self.kind == "scl":
            base = "SC" if self.list_size == 1 and not self.outer \
                else f"SCL({self.list_size})"
            return base + ("+CRC" if self.outer else "")
        return f"BP({self.max_iter})" + ("+outer" if self.outer else "")


def parse_decoder(text: str) -> DecoderSpec:
    m = _DECODER_RE.match(text.strip().replace(" ", ""))
    if not m:
        raise ValueError(
            f"bad decoder {text!r}; expected SC, SCL(L), SCL(L)+CRC, "
            f"BP(max_iter), or BP(max_iter)+outer")
    sc, scl_l, crc, bp_iter, outer = m.groups()
    if sc:
        return DecoderSpec(kind="scl", list_size=1)
    if scl_l is not None:
        if int(scl_l) < 1:
            raise ValueError("list size must be positive")
        return DecoderSpec(kind="scl", list_size=int(scl_l), outer=bool(crc))
    iters = int(bp_iter) if bp_iter else 100
    if iters < 1:
        raise ValueError("iteration count must be positive")
    return DecoderSpec(kind="bp", max_iter=iters, outer=bool(outer))


# ------------------------------------------------------------ configuration

@dataclass(frozen=True)
class SimConfig:
    code: ProductCode | ConcatenatedCode
    decoder: DecoderSpec
    ebn0_grid: tuple[float, ...]
    seed: int = 0
    min_block_errors: int = 100
    max_trials: int = 10**7
    batch_size: int = 256
    workers: int = 1
    genie: bool = True      # count the ML lower bound for list decoders
    metric: str = "hard"    # path-metric flavour for list decoders
    code_id: str = ""

    def __post_init__(self):
        if not self.ebn0_grid:
            raise ValueError("SNR grid is empty")
        if self.min_block_errors < 1:
            raise ValueError("min block errors must be >= 1")
        if self.max_trials < 1 or self.batch_size < 1 or self.workers < 1:
            raise ValueError("max_trials, batch_size, workers must be >= 1")
        concat = isinstance(self.code, ConcatenatedCode)
        if self.decoder.outer and not concat:
            raise ValueError(
                f"{self.decoder.label} needs a concatenated code")
        inner = self.code.inner if concat else self.code
        if self.decoder.kind == "bp" and len(inner.shape) != 2:
            raise ValueError("iterative decoding is wired for two dimensions")
        if not self.code_id:
            object.__setattr__(self, "code_id", self.code.name)


@dataclass(frozen=True)
class SimRecord:
    code_id: str
    decoder: str
    list_size: int | None
    max_iter: int | None
    ebn0_db: float
    trials: int
    block_errors: int
    cer: float
    ci_low: float
    ci_high: float
    genie_lb_errors: int | None
    seed: int
    wall_time: float = 0.0

    def csv_row(self) -> list:
        maybe = lambda v: "" if v is None else v
        return [self.code_id, self.decoder, maybe(self.list_size),
                maybe(self.max_iter), repr(float(self.ebn0_db)), self.trials,
                self.block_errors, repr(self.cer), repr(self.ci_low),
                repr(self.ci_high), maybe(self.genie_lb_errors), self.seed]


def write_csv(records, fileobj) -> None:
    writer = csv.writer(fileobj, lineterminator="\n")
    writer.writerow(CSV_HEADER.split(","))
    for rec in records:
        writer.writerow(rec.csv_row())


# ------------------------------------------------------------------ engine

def _transmit(cfg: SimConfig, snr_idx: int, trial_indices) -> tuple:
    """Draw messages and channel LLRs for the given absolute trial numbers.

    Returns (u_true, codewords, llrs).  Message bits and the noise come
    from one per-trial stream in that order, so every trial is a pure
    function of (seed, snr_idx, trial_idx).
    """
    code = cfg.code
    concat = isinstance(code, ConcatenatedCode)
    inner = code.inner if concat else code
    sigma = noise_sigma(cfg.ebn0_grid[snr_idx], code.rate)
    msgs = np.empty((len(trial_indices), code.k), np.uint8)
    noise = np.empty((len(trial_indices), code.n))
    for row, ti in enumerate(trial_indices):
        rng = np.random.default_rng([cfg.seed, snr_idx, int(ti)])
        msgs[row] = rng.integers(0, 2, size=code.k, dtype=np.uint8)
        noise[row] = rng.standard_normal(code.n)
    info = gf2.matmul(msgs, code.mixed_generator) if concat else msgs
    u_true = np.zeros((len(trial_indices), code.n), np.uint8)
    u_true[:, inner.info_positions] = info
    cw = inner.encode_nonsystematic(info)
    y = (1.0 - 2.0 * cw) + sigma * noise
    llrs = np.clip(2.0 * y / sigma**2, -LLR_CLAMP, LLR_CLAMP)
    return u_true, cw, llrs


def _run_batch(cfg: SimConfig, checker, snr_idx: int, batch_idx: int) -> tuple:
    """Decode one batch; returns (trials, block_errors, genie_errors)."""
    start = batch_idx * cfg.batch_size
    count = min(cfg.batch_size, cfg.max_trials - start)
    if count <= 0:
        return 0, 0, 0
    trial_indices = range(start, start + count)
    u_true, cw, llrs = _transmit(cfg, snr_idx, trial_indices)
    code = cfg.code
    concat = isinstance(code, ConcatenatedCode)
    inner = code.inner if concat else code

    if cfg.decoder.kind == "scl":
        res = scl_decode_batch(
            llrs, inner.frozen, cfg.decoder.list_size, checker=checker,
            metric=cfg.metric, true_u=u_true if cfg.genie else None)
        errors = (res.chosen_u != u_true).any(axis=1)
        genie = int(res.genie_error.sum()) if cfg.genie else 0
    else:
        if cfg.decoder.outer:
            res = bp_decode_concat_batch(llrs, code, max_iter=cfg.decoder.max_iter)
        else:
            res = bp_decode_batch(llrs, inner, max_iter=cfg.decoder.max_iter)
        errors = (res.codewords != cw).any(axis=1)
        genie = 0
    return count, int(errors.sum()), genie


def _point_batches(cfg: SimConfig, snr_idx: int):
    """Yield per-batch counters in batch order, across the worker pool."""
    checker = outer_checker_from_crc(cfg.code) \
        if cfg.decoder.kind == "scl" and cfg.decoder.outer else None
    job = partial(_run_batch, cfg, checker, snr_idx)
    if cfg.workers == 1:
        yield from map(job, itertools.count())
        return
    ctx = get_context("fork" if sys.platform.startswith("linux") else None)
    with ctx.Pool(cfg.workers) as pool:
        yield from pool.imap(job, itertools.count())


def _simulate_point(cfg: SimConfig, snr_idx: int) -> SimRecord:
    start = time.monotonic()
    trials = errors = genie = batches = 0
    for count, err, gen in _point_batches(cfg, snr_idx):
        trials += count
        errors += err
        genie += gen
        batches += 1
        if batches % 50 == 0:
            print(f"[sim] {cfg.code_id} {cfg.decoder.label} "
                  f"{cfg.ebn0_grid[snr_idx]:g} dB: {errors}/{trials}",
                  file=sys.stderr)
        if errors >= cfg.min_block_errors or trials >= cfg.max_trials:
            break
    lo, hi = wilson_interval(errors, trials)
    rec = SimRecord(
        code_id=cfg.code_id, decoder=cfg.decoder.label,
        list_size=cfg.decoder.list_size, max_iter=cfg.decoder.max_iter,
        ebn0_db=cfg.ebn0_grid[snr_idx], trials=trials, block_errors=errors,
        cer=errors / trials, ci_low=lo, ci_high=hi,
        genie_lb_errors=genie if cfg.genie and cfg.decoder.kind == "scl" else None,
        seed=cfg.seed, wall_time=time.monotonic() - start)
    print(f"[sim] {cfg.code_id} {cfg.decoder.label} {rec.ebn0_db:g} dB: "
          f"cer={rec.cer:.3g} ({errors}/{trials}) in {rec.wall_time:.1f}s",
          file=sys.stderr)
    return rec


def iter_experiment(cfg: SimConfig):
    """Yield one SimRecord per SNR grid point as soon as it finishes."""
    for snr_idx in range(len(cfg.ebn0_grid)):
        yield _simulate_point(cfg, snr_idx)


def run_experiment(cfg: SimConfig) -> list[SimRecord]:
    return list(iter_experiment(cfg))
