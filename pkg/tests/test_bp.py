import math

import numpy as np
import pytest

from rmprod import bp, codes, gf2
from rmprod.product import build_product, parse_product


def map_extrinsic(code, lam):
    """Exhaustive a-posteriori reference: marginalize over the full
    codebook with P(c) proportional to exp(-sum c_t * lam_t)."""
    k, n = code.k, code.n
    msgs = ((np.arange(2**k)[:, None] >> np.arange(k)[::-1]) & 1).astype(np.uint8)
    book = gf2.matmul(msgs, code.generator)
    scores = book.astype(np.float64) @ (-np.asarray(lam, dtype=np.float64))
    ext = np.empty(n)
    for t in range(n):
        num0 = np.logaddexp.reduce(scores[book[:, t] == 0])
        num1 = np.logaddexp.reduce(scores[book[:, t] == 1])
        ext[t] = (num0 - num1) - lam[t]
    return ext


# ---------------------------------------------------------------- trellis

def test_spc_trellis_two_states():
    tr = bp.build_trellis(codes.rm_code(2, 3))  # SPC(8,7)
    assert tr.num_checks == 1
    assert tr.reachable_counts() == [1] + [2] * 7 + [1]
    assert tr.codeword_count() == 2**7


def test_eh_trellis_state_budget():
    tr = bp.build_trellis(codes.rm_code(2, 4))  # eH(16,11)
    assert tr.num_states == 32
    counts = tr.reachable_counts()
    assert counts[0] == counts[-1] == 1
    assert max(counts) <= 32
    assert tr.codeword_count() == 2**11


def test_rep_trellis():
    tr = bp.build_trellis(codes.rm_code(0, 2))  # rep(4,1)
    assert tr.codeword_count() == 2
    assert tr.reachable_counts()[0] == 1


def test_trellis_size_limit():
    with pytest.raises(ValueError):
        bp.build_trellis(codes.rm_code(1, 6))  # RM(1,6): n-k = 57 checks


# ------------------------------------------------------------------- bcjr

@pytest.mark.parametrize("code", [
    codes.rm_code(1, 2),   # SPC(4,3)
    codes.rm_code(0, 2),   # rep(4,1)
    codes.rm_code(2, 3),   # SPC(8,7)
    codes.rm_code(2, 4),   # eH(16,11)
])
def test_bcjr_matches_exhaustive_map(code):
    tr = bp.build_trellis(code)
    rng = np.random.default_rng(31)
    for _ in range(8):
        lam = rng.normal(0, 2, size=code.n)
        got = bp.bcjr_extrinsic(tr, lam)
        want = map_extrinsic(code, lam)
        np.testing.assert_allclose(got, want, atol=1e-9)


def test_bcjr_spc_closed_form():
    # single parity check: extrinsic_t = 2 atanh(prod_{j != t} tanh(lam_j / 2))
    code = codes.rm_code(1, 2)
    tr = bp.build_trellis(code)
    lam = np.array([2.0, 2.0, 2.0, 2.0])
    got = bp.bcjr_extrinsic(tr, lam)
    want = 2 * math.atanh(math.tanh(1.0) ** 3)
    np.testing.assert_allclose(got, want, atol=1e-12)
    lam = np.array([1.0, -2.0, 0.5, 3.0])
    got = bp.bcjr_extrinsic(tr, lam)
    for t in range(4):
        prod = np.prod([math.tanh(lam[j] / 2) for j in range(4) if j != t])
        assert got[t] == pytest.approx(2 * math.atanh(prod), abs=1e-12)


def test_bcjr_batched_shapes():
    code = codes.rm_code(1, 2)
    tr = bp.build_trellis(code)
    rng = np.random.default_rng(5)
    lam = rng.normal(0, 1, size=(3, 7, 4))
    out = bp.bcjr_extrinsic(tr, lam)
    assert out.shape == (3, 7, 4)
    np.testing.assert_allclose(out[2, 4], bp.bcjr_extrinsic(tr, lam[2, 4]), atol=1e-12)


def test_bcjr_zero_input_gives_zero_extrinsic_sign_symmetry():
    tr = bp.build_trellis(codes.rm_code(2, 3))
    out = bp.bcjr_extrinsic(tr, np.zeros(8))
    np.testing.assert_allclose(out, 0.0, atol=1e-12)


# --------------------------------------------------------------------- bp

def test_bp_noiseless_first_iteration():
    pc = parse_product("eH(16,11) x SPC(8,7)")
    rng = np.random.default_rng(37)
    info = rng.integers(0, 2, size=(8, pc.k), dtype=np.uint8)
    cw = pc.encode_systematic(info)
    res = bp.bp_decode_batch((1.0 - 2.0 * cw) * 5.0, pc)
    assert res.valid.all()
    assert (res.iterations == 1).all()
    assert np.array_equal(res.codewords, cw)
    assert np.array_equal(res.codewords[:, pc.info_positions], info)


def test_bp_corrects_moderate_noise():
    pc = parse_product("eH(16,11) x SPC(8,7)")
    rng = np.random.default_rng(41)
    info = rng.integers(0, 2, size=(40, pc.k), dtype=np.uint8)
    cw = pc.encode_systematic(info)
    sigma = 0.55
    y = (1 - 2.0 * cw) + rng.normal(0, sigma, cw.shape)
    res = bp.bp_decode_batch(2 * y / sigma**2, pc, max_iter=50)
    ok = (res.codewords == cw).all(axis=1)
    assert ok.mean() > 0.9
    assert res.valid[ok].all()


def test_bp_valid_outputs_are_codewords():
    pc = parse_product("eH(16,11) x SPC(8,7)")
    rng = np.random.default_rng(43)
    info = rng.integers(0, 2, size=(60, pc.k), dtype=np.uint8)
    cw_true = pc.encode_systematic(info)
    sigma = 0.95
    y = (1 - 2.0 * cw_true) + rng.normal(0, sigma, cw_true.shape)
    res = bp.bp_decode_batch(2 * y / sigma**2, pc, max_iter=30)
    assert res.valid.any() and not res.valid.all()
    for t in np.nonzero(res.valid)[0]:
        cw = res.codewords[t]
        again = pc.encode_systematic(cw[pc.info_positions])
        assert np.array_equal(again, cw)
        assert res.iterations[t] <= 30


def test_bp_failures_report_max_iter():
    pc = parse_product("SPC(4,3) x SPC(4,3)")
    rng = np.random.default_rng(47)
    lam = rng.normal(0, 0.7, size=(300, pc.n))
    res = bp.bp_decode_batch(lam, pc, max_iter=6)
    bad = ~res.valid
    assert bad.any()
    assert (res.iterations[bad] == 6).all()


def test_bp_batch_matches_single_trials():
    # early-stop bookkeeping must not leak state between trials
    pc = parse_product("eH(16,11) x SPC(8,7)")
    rng = np.random.default_rng(53)
    info = rng.integers(0, 2, size=(25, pc.k), dtype=np.uint8)
    cw = pc.encode_systematic(info)
    sigma = 0.75
    y = (1 - 2.0 * cw) + rng.normal(0, sigma, cw.shape)
    lam = 2 * y / sigma**2
    res = bp.bp_decode_batch(lam, pc, max_iter=20)
    assert len(set(res.iterations.tolist())) > 1  # trials stop at different times
    for t in range(25):
        one = bp.bp_decode_batch(lam[t], pc, max_iter=20)
        assert np.array_equal(one.codewords[0], res.codewords[t])
        assert one.valid[0] == res.valid[t]
        assert one.iterations[0] == res.iterations[t]
        np.testing.assert_allclose(one.posterior[0], res.posterior[t], atol=1e-9)


def test_bp_three_dimensional_product():
    pc = build_product([codes.rm_code(1, 2)] * 3)  # SPC(4,3)^3
    rng = np.random.default_rng(59)
    info = rng.integers(0, 2, size=(10, pc.k), dtype=np.uint8)
    cw = pc.encode_systematic(info)
    sigma = 0.6
    y = (1 - 2.0 * cw) + rng.normal(0, sigma, cw.shape)
    res = bp.bp_decode_batch(2 * y / sigma**2, pc, max_iter=30)
    ok = (res.codewords == cw).all(axis=1)
    assert ok.mean() > 0.8


def test_bp_single_trial_wrapper():
    pc = parse_product("SPC(4,3) x SPC(4,3)")
    info = np.array([1, 0, 1, 0, 0, 1, 1, 1, 0], np.uint8)
    cw = pc.encode_systematic(info)
    out = bp.bp_decode((1.0 - 2.0 * cw) * 4.0, pc)
    assert out.converged
    assert out.iterations == 1
    assert np.array_equal(out.chosen_codeword, cw)
    assert np.array_equal(out.chosen_info, info)


def test_bp_input_validation():
    pc = parse_product("SPC(4,3) x SPC(4,3)")
    with pytest.raises(ValueError):
        bp.bp_decode_batch(np.zeros(15), pc)
    with pytest.raises(ValueError):
        bp.bp_decode_batch(np.zeros(16), pc, max_iter=0)
