"""
Test Partition Lattice
"""
import math

import pytest

from quasipower.errors import CapacityError
from quasipower.services.partition_lattice import (
    bell_number,
    enumerate_partitions,
    fubini,
    mobius_coefficient,
    smoothing_constants,
    stirling_partition,
)


def test_three_element_partitions():
    partitions = enumerate_partitions([1, 2, 3])
    assert len(partitions) == 5
    assert sorted(mobius_coefficient(alpha) for alpha in partitions) == [-1, -1, -1, 1, 2]
    assert partitions[0].blocks == ((1, 2, 3),)


@pytest.mark.parametrize("m", range(1, 8))
def test_partition_count_is_bell_number(m):
    partitions = enumerate_partitions(range(1, m + 1))
    assert len(partitions) == bell_number(m)
    assert len({alpha.blocks for alpha in partitions}) == len(partitions)


@pytest.mark.parametrize("m", range(2, 8))
def test_mobius_values_sum_to_zero(m):
    assert sum(mobius_coefficient(alpha) for alpha in enumerate_partitions(range(1, m + 1))) == 0


def test_partitions_of_arbitrary_index_set():
    partitions = enumerate_partitions({7, 2})
    assert {alpha.blocks for alpha in partitions} == {((2, 7),), ((2,), (7,))}


def test_bell_numbers():
    assert [bell_number(m) for m in range(1, 7)] == [1, 2, 5, 15, 52, 203]


def test_fubini_numbers():
    assert [fubini(j) for j in range(1, 6)] == [1, 3, 13, 75, 541]
    assert fubini(0) == 1


def test_stirling_partition_numbers():
    assert stirling_partition(4, 2) == 7
    assert stirling_partition(5, 3) == 25
    assert stirling_partition(3, 0) == 0


def test_empty_index_set_rejected():
    with pytest.raises(ValueError):
        enumerate_partitions([])


def test_capacity_limit():
    with pytest.raises(CapacityError):
        enumerate_partitions(range(13))


def test_smoothing_constants_one_dimension():
    constants = smoothing_constants(1)
    assert constants.c1 == pytest.approx((32.0 / (math.pi * 0.25)) ** (1.0 / 3.0))
    assert constants.c2 == pytest.approx(12.0 / math.pi)


def test_smoothing_constant_grows_with_dimension():
    assert smoothing_constants(3).c1 > smoothing_constants(2).c1 > smoothing_constants(1).c1
