import random
from fractions import Fraction as F

import pytest

from realkit.errors import CapExceeded, InvalidInstance
from realkit.metric import (
    Configuration,
    FiniteMetricSpace,
    close_pair_count,
    gamma_min_pairs,
    close_pair_envelope,
    make_space,
    mass_transfer_reduce,
    packing_number,
    packing_set,
    spread_configuration,
    validate_metric,
)
from helpers import brute_force_close_pairs, brute_force_packing, random_metric_space

EQ3 = make_space([[0, 1, 1], [1, 0, 1], [1, 1, 0]])
TWO = make_space([[0, 1], [1, 0]])
ONE = make_space([[0]])


class TestValidate:
    def test_equilateral_ok(self):
        assert validate_metric(EQ3).ok

    def test_symmetry_violation(self):
        space = FiniteMetricSpace(("a", "b"), ((F(0), F(1)), (F(2), F(0))))
        report = validate_metric(space)
        assert not report.ok
        assert ("symmetry", (0, 1)) in report.violations

    def test_triangle_violation(self):
        space = FiniteMetricSpace(
            ("a", "b", "c"),
            (
                (F(0), F(1), F(3)),
                (F(1), F(0), F(1)),
                (F(3), F(1), F(0)),
            ),
        )
        report = validate_metric(space)
        assert not report.ok
        kinds = {v[0] for v in report.violations}
        assert kinds == {"triangle"}

    def test_dimension_mismatch(self):
        space = FiniteMetricSpace(("a", "b"), ((F(0),),))
        with pytest.raises(InvalidInstance):
            validate_metric(space)


class TestPacking:
    def test_equilateral_below_distance(self):
        assert packing_number(EQ3, F(1, 2)) == 3

    def test_exceeding_is_strict(self):
        assert packing_number(EQ3, 1) == 1

    def test_at_zero_full_cardinality(self):
        assert packing_number(EQ3, 0) == 3

    def test_against_brute_force(self):
        rng = random.Random(3)
        for _ in range(12):
            space = random_metric_space(rng, 8)
            for t in [F(0)] + space.distance_values():
                assert packing_number(space, t) == brute_force_packing(space, t)

    def test_non_increasing_in_t(self):
        rng = random.Random(5)
        space = random_metric_space(rng, 7)
        values = [packing_number(space, t) for t in space.distance_values()]
        assert values == sorted(values, reverse=True)
        assert packing_number(space, 0) == space.n

    def test_packing_set_is_separated(self):
        rng = random.Random(9)
        space = random_metric_space(rng, 7)
        t = space.distance_values()[1]
        chosen = sorted(packing_set(space, t))
        for a in chosen:
            for b in chosen:
                if a != b:
                    assert space.dist[a][b] > t


class TestGamma:
    def test_two_points_split(self):
        assert gamma_min_pairs(TWO, 2, F(1, 2)) == 0

    def test_two_points_forced_colocation(self):
        assert gamma_min_pairs(TWO, 4, F(1, 2)) == 4

    def test_single_point_all_pairs(self):
        assert gamma_min_pairs(ONE, 3, F(1, 2)) == 6

    def test_cap(self):
        with pytest.raises(CapExceeded):
            gamma_min_pairs(TWO, 9, F(1, 2))

    def test_matches_particle_list_definition(self):
        rng = random.Random(21)
        for _ in range(5):
            space = random_metric_space(rng, 4)
            t = rng.choice(space.distance_values())
            best = None
            for cfg in _all_configs(space.n, 4):
                if cfg.total_mass != 4:
                    continue
                g = brute_force_close_pairs(space, cfg, t)
                best = g if best is None else min(best, g)
            assert gamma_min_pairs(space, 4, t) == best


def _all_configs(n, total):
    if n == 1:
        yield Configuration((total,))
        return
    for first in range(total + 1):
        for rest in _all_configs(n - 1, total - first):
            yield Configuration((first,) + rest.multiplicity)


class TestLemmaBounds:
    def test_known_values(self):
        # q = packing(TWO, 1/2) = 2: n(n/q - 1) = 4, n(n/q + 1) = 12
        assert close_pair_envelope(TWO, 4, F(1, 2)) == (F(4), F(12))

    def test_empty_configuration(self):
        assert close_pair_envelope(TWO, 0, F(1, 2)) == (F(0), F(0))

    def test_single_point_meets_lower_bound(self):
        lower, upper = close_pair_envelope(ONE, 3, F(1, 2))
        assert (lower, upper) == (F(6), F(12))
        assert gamma_min_pairs(ONE, 3, F(1, 2)) == lower

    def test_envelope_random_sweep(self):
        rng = random.Random(17)
        for _ in range(8):
            space = random_metric_space(rng, 5)
            ts = [F(0)] + space.distance_values()
            for n in range(0, 6):
                for t in ts:
                    lower, upper = close_pair_envelope(space, n, t)
                    gamma = gamma_min_pairs(space, n, t)
                    assert gamma >= max(0, lower)
                    spread = spread_configuration(space, n, t)
                    assert close_pair_count(space, spread, t) <= upper

    def test_envelope_on_eight_point_spaces(self):
        rng = random.Random(88)
        for _ in range(3):
            space = random_metric_space(rng, 8)
            ts = [F(0)] + space.distance_values()
            for n in range(0, 7):
                for t in ts:
                    lower, upper = close_pair_envelope(space, n, t)
                    gamma = gamma_min_pairs(space, n, t)
                    assert gamma >= max(0, lower)
                    assert close_pair_count(space, spread_configuration(space, n, t), t) <= upper


class TestMassTransfer:
    def test_two_point_merge(self):
        space = make_space([[0, F(3, 10)], [F(3, 10), 0]])
        final, trace = mass_transfer_reduce(space, Configuration((1, 1)), F(1, 2))
        assert final.multiplicity == (2, 0)
        assert [step.close_pairs for step in trace] == [2]

    def test_empty_input_unchanged(self):
        final, trace = mass_transfer_reduce(TWO, Configuration((0, 0)), F(1, 2))
        assert final.multiplicity == (0, 0)
        assert trace == []

    def test_idempotent_on_separated_input(self):
        final, trace = mass_transfer_reduce(TWO, Configuration((2, 3)), F(1, 2))
        assert final.multiplicity == (2, 3)
        assert trace == []

    def test_monotone_and_separated_random(self):
        rng = random.Random(13)
        for _ in range(20):
            space = random_metric_space(rng, 5)
            t = rng.choice(space.distance_values())
            masses = tuple(rng.randint(0, 3) for _ in range(5))
            config = Configuration(masses)
            start = brute_force_close_pairs(space, config, t)
            final, trace = mass_transfer_reduce(space, config, t)
            values = [start] + [step.close_pairs for step in trace]
            assert all(a >= b for a, b in zip(values, values[1:]))
            assert final.total_mass == config.total_mass
            for step in trace:
                recomputed = brute_force_close_pairs(
                    space, Configuration(step.masses), t
                )
                assert recomputed == step.close_pairs
            support = final.support()
            for a in support:
                for b in support:
                    if a != b:
                        assert space.dist[a][b] > t
