from fractions import Fraction

import pytest

from abcring.ideal_chain import limit_rates
from abcring.ring import ModelParams
from abcring.velocity import _side, ballistic_velocity, oracle_absorption, velocity, velocity_oracle

GRID = range(3, 13)


def test_side_probabilities_at_three():
    assert _side(3) == (1, 0, 0)


def test_tail_return_root():
    h = Fraction(1, 3)
    assert Fraction(3, 10) * h * h - h + Fraction(3, 10) == 0


@pytest.mark.parametrize("l, m", [(3, 3), (3, 7), (8, 4), (12, 12)])
def test_oracle_rows_sum_to_one(l, m):
    _, P = oracle_absorption(l, m)
    assert all(sum(row) == 1 for row in P)


def test_closed_form_equals_oracle_exactly():
    for l in GRID:
        for m in GRID:
            assert velocity(l, m) == velocity_oracle(l, m)


def test_known_value():
    assert velocity(3, 3) == Fraction(-4, 39)


def test_sign_of_the_drift():
    for l in GRID:
        for m in GRID:
            if l < m:
                assert velocity(l, m) < 0


def test_ballistic_velocity_antisymmetric():
    for l in GRID:
        assert ballistic_velocity(l, l) == 0
        for m in GRID:
            assert ballistic_velocity(l, m) == -ballistic_velocity(m, l)


@pytest.mark.parametrize("counts", [(3, 4, 52), (5, 5, 51), (4, 6, 51), (6, 4, 51)])
def test_ballistic_velocity_matches_ideal_chain(counts):
    p = ModelParams(*counts)
    drift = limit_rates(p, exact=False).drift()
    assert float(ballistic_velocity(p.n_a, p.n_b)) == pytest.approx(float(drift), abs=1e-12)


def test_asymptotic_band():
    for l in range(8, 13):
        for m in range(10, 13):
            assert abs(float(velocity(l, m)) * 3 ** m + 3) <= 0.05


def test_correction_shrinks_with_l_below_m():
    # |v 3^m + 3| decreases in l while l <= m; past m the sign of the correction flips
    for m in range(10, 13):
        devs = [abs(float(velocity(l, m)) * 3 ** m + 3) for l in range(3, m + 1)]
        assert all(b <= a for a, b in zip(devs, devs[1:]))


def test_rejects_small_blocks():
    with pytest.raises(ValueError):
        velocity(2, 5)
