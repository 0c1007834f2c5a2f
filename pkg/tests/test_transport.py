import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy.optimize import linprog

from helpers import cdf_oracle

from dmscope.errors import BinningMismatchError, EmptyInputError, NormalizationError
from dmscope.histogram import BinningConfig, PerformanceHistogram, build_histogram
from dmscope.reconstruction import BlurResample, score_corpus
from dmscope.synthcorpus import CorpusSpec, Shift, generate_corpus
from dmscope.transport import dm_metric, emd_1d, emd_lp


def linprog_emd(p, q):
    """Earth mover's distance from a generic LP solver, partial masses allowed."""
    n, m = len(p), len(q)
    cost = np.abs(np.subtract.outer(np.arange(n), np.arange(m))).ravel()
    a_ub, b_ub = [], []
    for i in range(n):
        row = np.zeros(n * m)
        row[i * m:(i + 1) * m] = 1
        a_ub.append(row)
        b_ub.append(p[i])
    for j in range(m):
        row = np.zeros(n * m)
        row[j::m] = 1
        a_ub.append(row)
        b_ub.append(q[j])
    shipped = min(sum(p), sum(q))
    res = linprog(cost, A_ub=a_ub, b_ub=b_ub, A_eq=[np.ones(n * m)], b_eq=[shipped],
                  bounds=(0, None), method="highs")
    assert res.success
    return res.fun / shipped


def hist(counts, binning=BinningConfig(10, 45, 0.5)):
    full = np.zeros(binning.bin_count, dtype=np.int64)
    for k, c in counts.items():
        full[k] = c
    return PerformanceHistogram(binning, full)


def test_identical_is_zero():
    p = np.array([0.2, 0.3, 0.5])
    assert emd_lp(p, p).dm_dB == 0.0
    assert emd_1d(p, p).dm_dB == 0.0


def test_unit_mass_move():
    p = np.eye(10)[3]
    q = np.eye(10)[7]
    r = emd_lp(p, q)
    assert r.dm_dB == 4.0
    assert r.flow.flows[3, 7] == 1.0 and r.flow.total == 1.0


def test_half_split():
    assert emd_lp([0.5, 0.5, 0], [0, 1, 0]).dm_dB == pytest.approx(0.5)
    assert emd_1d([0.5, 0.5, 0], [0, 0, 1], width_dB=2.0).dm_dB == pytest.approx(3.0)


def test_flow_constraints(rng):
    p = rng.random(20)
    p /= p.sum()
    q = rng.random(20)
    q /= q.sum()
    f = emd_lp(p, q).flow.flows
    assert (f >= 0).all()
    assert np.allclose(f.sum(axis=1), p, atol=1e-12)
    assert np.allclose(f.sum(axis=0), q, atol=1e-12)


def test_lp_against_linprog(rng):
    for _ in range(40):
        n = int(rng.integers(2, 12))
        p = rng.random(n) * (rng.random(n) > 0.3)
        q = rng.random(n) * (rng.random(n) > 0.3)
        p[0] += 0.1
        q[-1] += 0.1
        # unequal totals exercise the partial case
        expected = linprog_emd(p, q)
        assert emd_lp(p, q).dm_dB == pytest.approx(expected, abs=1e-9)


def test_partial_ships_smaller_mass():
    r = emd_lp([2.0, 0, 0], [0, 0, 1.0])
    assert r.flow.total == pytest.approx(1.0)
    assert r.dm_dB == pytest.approx(2.0)
    src, dst = hist({0: 4}), hist({2: 1, 3: 1})
    part = dm_metric(src, dst, partial=True)
    assert part.flow.total == 2.0
    assert part.dm_dB == pytest.approx(2.5 * 0.5)


def test_emd_1d_requires_normalized():
    with pytest.raises(NormalizationError):
        emd_1d([0.5, 0.6], [0.5, 0.5])


def test_invalid_masses():
    with pytest.raises(ValueError):
        emd_lp([0.5, -0.1], [0.2, 0.2])
    with pytest.raises(ValueError):
        emd_lp([0.5, 0.5], [1.0])
    with pytest.raises(EmptyInputError):
        emd_lp([0.0, 0.0], [1.0, 0.0])


def test_dm_checks_binning():
    with pytest.raises(BinningMismatchError):
        dm_metric(build_histogram([20.0]), build_histogram([20.0], BinningConfig(10, 45, 1)))
    with pytest.raises(EmptyInputError):
        dm_metric(build_histogram([20.0]), hist({}))


def test_dm_routes_agree(rng):
    for _ in range(30):
        a = build_histogram(rng.normal(25, 4, size=int(rng.integers(1, 300))))
        b = build_histogram(rng.normal(27, 2, size=int(rng.integers(1, 300))))
        closed = dm_metric(a, b).dm_dB
        assert closed == pytest.approx(cdf_oracle(a.counts, b.counts, 0.5), abs=1e-12)
        assert dm_metric(a, b, keep_flow=True).dm_dB == pytest.approx(closed, abs=1e-9)


def test_translation_is_exact():
    src = hist({2: 3, 5: 1, 9: 6})
    for j in range(1, 30):
        dst = PerformanceHistogram(src.binning, np.roll(src.counts, j))
        assert dm_metric(src, dst).dm_dB == j * 0.5


def test_two_corpora_five_db_apart():
    recon = BlurResample(4)
    a = score_corpus(recon, generate_corpus(CorpusSpec("gradient", 60, seed=5)).images)
    spec = CorpusSpec("noise", 60, seed=5, shift=Shift(blur_factor=5))
    b = score_corpus(recon, generate_corpus(spec).images)
    assert 4.0 <= np.mean(a) - np.mean(b) <= 6.0
    ha, hb = build_histogram(a), build_histogram(b)
    dm = dm_metric(ha, hb).dm_dB
    assert 4.0 <= dm <= 6.0
    assert dm == pytest.approx(cdf_oracle(ha.counts, hb.counts, 0.5), abs=1e-12)


def test_flow_csv(tmp_path):
    r = emd_lp([0.5, 0.5, 0], [0, 0.5, 0.5])
    path = tmp_path / "f.csv"
    r.flow.to_csv(path)
    rows = path.read_text().splitlines()
    assert rows[0] == "mu,nu,flow"
    assert sum(float(x.split(",")[2]) for x in rows[1:]) == pytest.approx(1.0)


counts = st.lists(st.integers(0, 20), min_size=8, max_size=8).filter(any)


@settings(max_examples=200)
@given(counts, counts, counts)
def test_metric_properties(a, b, c):
    binning = BinningConfig(0, 8, 1)
    p, q, r = (PerformanceHistogram(binning, np.array(x, dtype=np.int64)) for x in (a, b, c))
    pq, qp = dm_metric(p, q).dm_dB, dm_metric(q, p).dm_dB
    assert pq >= 0 and pq == qp
    assert dm_metric(p, r).dm_dB <= pq + dm_metric(q, r).dm_dB + 1e-12
    same = np.array_equal(np.array(a) * sum(b), np.array(b) * sum(a))
    assert (pq == 0.0) == same
