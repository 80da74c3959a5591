import math
import threading

import numpy as np
import pytest
from scipy import stats

from maxreward.distributions import Constant, Exponential, SeededRng
from maxreward.poisson_field import (
    Cone,
    MarkedPointField,
    RobotConfig,
    Strip,
    StripLazyField,
    Target,
    agility_transform,
    generate,
    load_field_csv,
    save_field_csv,
    visible_targets,
)


class TestRobotConfig:
    def test_agility(self):
        assert RobotConfig(v=2.0, w=1.0, sensing_range=5.0).agility == 0.5

    def test_validation(self):
        with pytest.raises(ValueError):
            RobotConfig(v=0.0, w=1.0, sensing_range=1.0)


class TestRegions:
    def test_areas_closed_form(self):
        assert Cone(10.0, 0.5).area() == 50.0
        assert Strip(10.0, 2.0).area() == 40.0

    def test_cone_samples_inside(self):
        rng = SeededRng(1)
        c = Cone(5.0, 0.7)
        p1, p2 = c.sample_positions(rng.uniforms(1000), rng.uniforms(1000))
        assert np.all((p1 >= 0) & (p1 <= 5.0))
        assert np.all(np.abs(p2) <= 0.7 * p1 + 1e-12)

    def test_cone_p1_density_proportional_to_width(self):
        # P(p1 <= x) = (x/L)^2 for a triangle
        u = SeededRng(2).uniforms(50000)
        p1 = Cone(1.0, 1.0).sample_p1(u)
        assert stats.kstest(p1, lambda x: x**2).pvalue > 0.01

    def test_strip_samples_inside(self):
        rng = SeededRng(3)
        s = Strip(4.0, 1.5)
        p1, p2 = s.sample_positions(rng.uniforms(1000), rng.uniforms(1000))
        assert np.all((p1 >= 0) & (p1 <= 4.0))
        assert np.all(np.abs(p2) <= 1.5)


class TestGenerate:
    def test_negligible_intensity_gives_empty_field(self):
        f = generate(1e-9, Strip(1.0, 0.5), Constant(1.0), SeededRng(4))
        assert len(f) == 0

    def test_rejects_nonpositive_intensity(self):
        with pytest.raises(ValueError):
            generate(0.0, Strip(1.0, 0.5), Constant(1.0), SeededRng(1))

    def test_count_mean_and_variance_poisson(self):
        counts = np.array([
            len(generate(1.0, Strip(1.0, 0.5), Constant(1.0), SeededRng(5, t)))
            for t in range(10000)
        ])
        assert counts.mean() == pytest.approx(1.0, abs=0.03)
        assert counts.var(ddof=1) == pytest.approx(1.0, abs=0.06)

    def test_chi_square_goodness_of_fit(self):
        lam_area = 2.0
        counts = np.array([
            len(generate(2.0, Strip(1.0, 0.5), Constant(1.0), SeededRng(6, t)))
            for t in range(10000)
        ])
        kmax = int(counts.max())
        observed = np.bincount(counts, minlength=kmax + 1).astype(float)
        expected = np.array([
            10000 * stats.poisson.pmf(k, lam_area) for k in range(kmax + 1)
        ])
        # merge the sparse tail so expected cell counts stay above 5
        cut = int(np.searchsorted(np.cumsum(expected[::-1]), 5.0))
        keep = kmax + 1 - cut
        obs = np.append(observed[:keep], observed[keep:].sum())
        exp = np.append(expected[:keep], expected[keep:].sum())
        p = stats.chisquare(obs, exp * obs.sum() / exp.sum()).pvalue
        assert p > 0.01

    def test_quadrant_counts_uncorrelated(self):
        quads = np.empty((2000, 4))
        for t in range(2000):
            f = generate(1.0, Strip(10.0, 5.0), Constant(1.0), SeededRng(7, t))
            quads[t] = [
                ((f.p1 < 5) & (f.p2 < 0)).sum(),
                ((f.p1 < 5) & (f.p2 >= 0)).sum(),
                ((f.p1 >= 5) & (f.p2 < 0)).sum(),
                ((f.p1 >= 5) & (f.p2 >= 0)).sum(),
            ]
        corr = np.corrcoef(quads.T)
        off = corr[~np.eye(4, dtype=bool)]
        assert np.all(np.abs(off) < 0.06)

    def test_sorted_strictly_by_p1(self):
        f = generate(5.0, Cone(10.0, 1.0), Exponential(1.0), SeededRng(8))
        assert np.all(np.diff(f.p1) > 0)

    def test_deterministic(self):
        a = generate(3.0, Cone(5.0, 1.0), Exponential(1.0), SeededRng(9))
        b = generate(3.0, Cone(5.0, 1.0), Exponential(1.0), SeededRng(9))
        assert np.array_equal(a.p1, b.p1)
        assert np.array_equal(a.rewards, b.rewards)


class TestAgilityTransform:
    def test_identity(self):
        f = generate(2.0, Cone(5.0, 1.0), Exponential(1.0), SeededRng(10))
        g = agility_transform(f, 1.0)
        assert np.array_equal(f.p2, g.p2)
        assert g.intensity == f.intensity

    def test_geometry_and_counts(self):
        f = generate(1.0, Cone(5.0, 2.0), Exponential(1.0), SeededRng(11))
        g = agility_transform(f, 2.0)
        assert g.region == Cone(5.0, 1.0)
        assert g.intensity == 2.0
        assert len(g) == len(f)
        assert sorted(g.rewards) == sorted(f.rewards)

    def test_transformed_intensity_empirical(self):
        # alpha=4: count/area of the transformed field should be 4x lambda
        total = 0
        area = Cone(5.0, 1.0).area()
        for t in range(2000):
            f = generate(1.0, Cone(5.0, 4.0), Exponential(1.0), SeededRng(12, t))
            total += len(agility_transform(f, 4.0))
        rate = total / (2000 * area)
        assert rate == pytest.approx(4.0, rel=0.03)

    def test_rejects_bad_alpha(self):
        f = generate(1.0, Cone(2.0, 1.0), Constant(1.0), SeededRng(13))
        with pytest.raises(ValueError):
            agility_transform(f, 0.0)


class TestVisibleTargets:
    def field(self):
        p1 = np.array([1.0, 2.0, 3.0])
        return MarkedPointField(1.0, Strip(4.0, 1.0), p1, np.zeros(3), np.ones(3))

    def test_interval_membership(self):
        got = visible_targets(self.field(), 1.5, 1.0)
        assert [t.p1 for t in got] == [2.0]

    def test_unlimited_sensing(self):
        got = visible_targets(self.field(), 1.5, math.inf)
        assert [t.p1 for t in got] == [2.0, 3.0]

    def test_matches_brute_force_filter(self):
        f = generate(3.0, Strip(10.0, 1.0), Exponential(1.0), SeededRng(14))
        for x1, S in [(0.0, 2.0), (3.3, 1.7), (9.0, 5.0)]:
            got = [(t.p1, t.p2, t.reward) for t in visible_targets(f, x1, S)]
            ref = [
                (p1, p2, r)
                for p1, p2, r in zip(f.p1, f.p2, f.rewards)
                if x1 <= p1 <= x1 + S
            ]
            assert got == ref

    def test_mean_visible_count(self):
        total = 0
        for t in range(5000):
            f = generate(2.0, Strip(10.0, 1.0), Constant(1.0), SeededRng(15, t))
            total += len(visible_targets(f, 2.0, 3.0))
        # window area 3 x 2, intensity 2 -> 12 expected
        assert total / 5000 == pytest.approx(12.0, rel=0.03)


class TestStripLazyField:
    def test_revisits_identical(self):
        f = StripLazyField(1.0, 1.0, Exponential(1.0), seed=16, depth=4.0)
        a = f.strip(3)
        b = f.strip(3)
        assert a is b

    def test_order_independent(self):
        f = StripLazyField(1.0, 1.0, Exponential(1.0), seed=17, depth=4.0)
        g = StripLazyField(1.0, 1.0, Exponential(1.0), seed=17, depth=4.0)
        fa = f.strip(0)
        ga2 = g.strip(2)
        ga0 = g.strip(0)
        assert np.array_equal(fa[0], ga0[0])
        assert np.array_equal(f.strip(2)[0], ga2[0])

    def test_targets_inside_strip_and_cone(self):
        f = StripLazyField(2.0, 0.5, Exponential(1.0), seed=18, depth=3.0)
        for k in range(4):
            p1, p2, _ = f.strip(k)
            assert np.all((p1 > k * 3.0) & (p1 <= (k + 1) * 3.0))
            assert np.all(np.abs(p2) <= 0.5 * p1)
            assert np.all(np.diff(p1) > 0)

    def test_count_matches_slice_area(self):
        # strip k of a depth-d cone has area alpha * d^2 * (2k + 1)
        total = np.zeros(3)
        for t in range(3000):
            f = StripLazyField(1.0, 1.0, Constant(1.0), seed=1000 + t, depth=2.0)
            total += [len(f.strip(k)[0]) for k in range(3)]
        expect = np.array([4.0 * (2 * k + 1) for k in range(3)])
        assert np.allclose(total / 3000, expect, rtol=0.05)

    def test_concurrent_queries_single_generation(self):
        f = StripLazyField(5.0, 1.0, Exponential(1.0), seed=19, depth=5.0)
        results = []

        def query():
            results.append(f.strip(1))

        threads = [threading.Thread(target=query) for _ in range(8)]
        for t in threads:
            t.start()
        for t in threads:
            t.join()
        assert all(r is results[0] for r in results)


class TestSerialization:
    def test_roundtrip(self, tmp_path):
        f = generate(2.0, Cone(5.0, 1.5), Exponential(1.0), SeededRng(20))
        path = tmp_path / "field.csv"
        save_field_csv(f, path)
        g = load_field_csv(path)
        assert np.array_equal(f.p1, g.p1)
        assert np.array_equal(f.p2, g.p2)
        assert np.array_equal(f.rewards, g.rewards)
        assert g.region == f.region
        assert g.intensity == f.intensity
        assert g.dist == f.dist

    def test_empty_field_roundtrip(self, tmp_path):
        f = generate(1e-9, Strip(1.0, 0.5), Constant(1.0), SeededRng(21))
        path = tmp_path / "empty.csv"
        save_field_csv(f, path)
        g = load_field_csv(path)
        assert len(g) == 0

    def test_targets_view(self):
        f = generate(2.0, Cone(4.0, 1.0), Exponential(1.0), SeededRng(22))
        ts = f.targets()
        assert all(isinstance(t, Target) for t in ts)
        assert [t.p1 for t in ts] == list(f.p1)
