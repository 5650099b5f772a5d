import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from harpipe.errors import ConfigError
from harpipe.windowing import (WindowConfig, WindowScheduler, fuse,
                               sample_frames, sample_stride, windows_for_period)
from oracles import oracle_schedule

CLASSES = ("a", "b", "c")


def cfg(n=12, sr=4.0, m=4, theta=0.4, **kw):
    return WindowConfig(class_names=CLASSES, n=n, sr=sr, m=m, theta=theta, **kw)


class TestConfig:
    def test_durations(self):
        c = cfg(n=12, sr=4, m=4)
        assert c.t_sw == 3.0
        assert c.t_pw == 1.0
        assert c.windows_per_period == 3

    def test_m_must_divide_n(self):
        with pytest.raises(ConfigError):
            cfg(n=12, m=5)

    def test_theta_range(self):
        with pytest.raises(ConfigError):
            cfg(theta=1.0)


class TestSampling:
    def test_stride_30_to_5(self):
        assert sample_stride(30, 5) == 6
        picked = list(sample_frames(range(30), fps=30, sr=5))
        assert picked == [0, 6, 12, 18, 24]

    def test_identity_sampling(self):
        assert sample_stride(5, 5) == 1
        assert list(sample_frames(range(7), fps=5, sr=5)) == list(range(7))

    def test_fractional_ratio_rounds(self):
        assert sample_stride(29, 5) == 6

    def test_fps_below_sr_rejected(self):
        with pytest.raises(ConfigError):
            sample_stride(4, 5)


class TestWindowsForPeriod:
    def test_three_way_overlap_interior_period(self):
        # with n/m = 3, the fourth displayed period (index 3) draws from the
        # second, third, and fourth windows (indices 1, 2, 3)
        assert list(windows_for_period(3, cfg())) == [1, 2, 3]

    def test_first_period_only_first_window(self):
        assert list(windows_for_period(0, cfg())) == [0]

    def test_no_overlap_when_m_equals_n(self):
        c = cfg(n=4, m=4)
        for j in range(5):
            assert list(windows_for_period(j, c)) == [j]


class TestFuse:
    def test_mean_and_argmax(self):
        dec, mean = fuse([np.array([0.6, 0.4]), np.array([0.8, 0.2]),
                          np.array([0.7, 0.3])], theta=0.4)
        assert dec == 0
        np.testing.assert_allclose(mean, [0.7, 0.3])

    def test_single_contribution(self):
        dec, mean = fuse([np.array([0.2, 0.8])], theta=0.4)
        assert dec == 1

    def test_below_threshold_is_none(self):
        dec, _ = fuse([np.array([0.35, 0.33, 0.32])], theta=0.4)
        assert dec is None

    def test_tie_breaks_to_lowest_index(self):
        dec, _ = fuse([np.array([0.5, 0.5])], theta=0.4)
        assert dec == 0

    def test_empty_rejected(self):
        with pytest.raises(ValueError):
            fuse([], theta=0.4)

    def test_permutation_invariant(self):
        rng = np.random.default_rng(1)
        vecs = [v / v.sum() for v in rng.uniform(0.01, 1, size=(5, 4))]
        dec, mean = fuse(vecs, theta=0.3)
        rng.shuffle(vecs)
        dec2, mean2 = fuse(vecs, theta=0.3)
        assert dec == dec2
        np.testing.assert_allclose(mean, mean2)

    def test_mean_of_distributions_is_distribution(self):
        rng = np.random.default_rng(2)
        for _ in range(50):
            vecs = [v / v.sum() for v in rng.uniform(0.01, 1, size=(4, 6))]
            _, mean = fuse(vecs, theta=0.4)
            assert abs(mean.sum() - 1.0) < 1e-6

    def test_majority_vote_mode(self):
        vecs = [np.array([0.6, 0.4]), np.array([0.4, 0.6]), np.array([0.9, 0.1])]
        dec, _ = fuse(vecs, theta=0.4, majority_vote=True)
        assert dec == 0


def run_scheduler(c, frames, classify):
    sched = WindowScheduler(c, classify)
    out = []
    for i, f in enumerate(frames):
        out.extend(sched.feed(i, f))
    out.extend(sched.flush())
    return out


def indexed_classify(frames):
    """Deterministic per-window vector derived from frame payloads."""
    key = sum(f for f in frames) % 10
    v = np.array([1.0 + key, 2.0, 3.0 - key % 3])
    return v / v.sum()


class TestScheduler:
    def test_constant_one_hot_stream(self):
        c = cfg(n=12, sr=4, m=4)
        out = run_scheduler(c, range(40), lambda fr: np.array([0.0, 0.0, 1.0]))
        assert out
        assert all(p.decision == "c" for p in out)

    def test_exactly_n_frames_single_window(self):
        c = cfg(n=12, sr=4, m=4)
        out = run_scheduler(c, range(12), lambda fr: np.array([1.0, 0.0, 0.0]))
        assert len(out) == 3  # n/m periods, each with the lone window's output
        assert all(len(p.contributions) == 1 for p in out)

    def test_fig_geometry_interior_periods_get_three(self):
        c = cfg(n=12, sr=4, m=4)
        out = run_scheduler(c, range(48), indexed_classify)
        interior = [p for p in out if 2 <= p.period_index <= 8]
        assert interior
        assert all(len(p.contributions) == 3 for p in interior)

    def test_missing_frame_kills_window_not_stream(self):
        c = cfg(n=4, sr=4, m=2)
        frames = [0, 1, None, 3, 4, 5, 6, 7]
        out = run_scheduler(c, frames, lambda fr: np.array([1.0, 0.0, 0.0]))
        sched_failed = [p for p in out if not p.contributions]
        assert sched_failed  # the windows containing the None sample
        ok = [p for p in out if p.contributions]
        assert ok and all(p.decision == "a" for p in ok)

    def test_decision_latency_formula(self):
        c = cfg(n=12, sr=4, m=4)
        out = run_scheduler(c, range(36), indexed_classify)
        complete = [p for p in out if p.decided_at_sample is not None
                    and len(p.contributions) == 3]
        for p in complete:
            latency = (p.decided_at_sample - (p.period_index + 1) * c.m) / c.sr
            assert latency == (c.n - c.m) / c.sr

    def test_non_consecutive_feed_rejected(self):
        sched = WindowScheduler(cfg(), lambda fr: np.array([1.0, 0, 0]))
        sched.feed(0, 0)
        with pytest.raises(ValueError):
            sched.feed(2, 0)


def random_stream_case(rng):
    m = int(rng.choice([1, 2, 3, 4]))
    n = m * int(rng.integers(1, 5))
    length = int(rng.integers(0, 40))
    frames = [None if rng.random() < 0.15 else int(rng.integers(0, 100))
              for _ in range(length)]
    theta = float(rng.uniform(0.2, 0.6))
    return n, m, frames, theta


class TestOracleEquivalence:
    def test_matches_offline_bruteforce(self):
        rng = np.random.default_rng(99)
        for _ in range(200):
            n, m, frames, theta = random_stream_case(rng)
            c = WindowConfig(class_names=CLASSES, n=n, sr=4.0, m=m, theta=theta)
            got = run_scheduler(c, frames, indexed_classify)
            expected = oracle_schedule(frames, n, m, theta, indexed_classify)
            assert sorted(p.period_index for p in got) == sorted(expected)
            for p in got:
                e_dec, e_mean, e_cnt = expected[p.period_index]
                assert len(p.contributions) == e_cnt
                if e_mean is None:
                    assert p.decision is None and p.mean_probs is None
                else:
                    np.testing.assert_array_equal(p.mean_probs, e_mean)
                    assert p.decision == (None if e_dec is None else CLASSES[e_dec])


@given(st.integers(1, 4), st.integers(1, 4), st.integers(0, 30), st.integers(0, 2 ** 31 - 1))
@settings(max_examples=60, deadline=None)
def test_every_sample_in_one_period_and_bounded_windows(m, k, length, seed):
    n = m * k
    c = WindowConfig(class_names=CLASSES, n=n, sr=5.0, m=m)
    num_windows = (length - n) // m + 1 if length >= n else 0
    for s in range(length):
        periods = [j for j in range((length + m - 1) // m)
                   if j * m <= s < (j + 1) * m]
        assert len(periods) == 1
        windows = [w for w in range(num_windows) if w * m <= s < w * m + n]
        assert len(windows) <= k
