"""
Partition Lattice Service
Set partitions of finite index sets and the combinatorial constants of the
Berry-Esseen bound (Mobius values, Stirling partition numbers, Fubini numbers).
"""
import math
from functools import lru_cache
from typing import Iterable, List, Tuple

from quasipower.config import MAX_PARTITION_SIZE
from quasipower.errors import CapacityError
from quasipower.schemas import SetPartition, SmoothingConstants


def _restricted_growth_strings(n: int):
    """Yield every restricted growth string a of length n (a[0] = 0, a[i] <= 1 + max(a[:i]))."""
    a = [0] * n
    maxima = [0] * n  # maxima[i] = max(a[:i + 1])
    while True:
        yield a
        # rightmost position that can still grow
        i = n - 1
        while i > 0 and a[i] > maxima[i - 1]:
            i -= 1
        if i == 0:
            return
        a[i] += 1
        maxima[i] = max(maxima[i - 1], a[i])
        for j in range(i + 1, n):
            a[j] = 0
            maxima[j] = maxima[i]


@lru_cache(maxsize=64)
def _partitions_of(ground: Tuple[int, ...]) -> Tuple[SetPartition, ...]:
    n = len(ground)
    partitions: List[SetPartition] = []
    for rgs in _restricted_growth_strings(n):
        blocks: List[List[int]] = []
        for element, label in zip(ground, rgs):
            if label == len(blocks):
                blocks.append([element])
            else:
                blocks[label].append(element)
        # labels appear in order of first occurrence, so blocks are already canonical
        partitions.append(
            SetPartition.model_construct(
                ground_set=ground, blocks=tuple(tuple(block) for block in blocks)
            )
        )
    return tuple(partitions)


def enumerate_partitions(K: Iterable[int]) -> Tuple[SetPartition, ...]:
    """
    Enumerates all set partitions of the index set K.

    Args:
        K: Index set (any iterable of distinct integers).

    Returns:
        Every partition exactly once, in restricted-growth-string order;
        the count equals the Bell number of |K|.

    Raises:
        ValueError: If K is empty or has repeated elements.
        CapacityError: If |K| exceeds MAX_PARTITION_SIZE.
    """
    ground = tuple(sorted(K))
    if not ground:
        raise ValueError("K must contain at least one index")
    if len(set(ground)) != len(ground):
        raise ValueError("K must not contain repeated indices")
    if len(ground) > MAX_PARTITION_SIZE:
        raise CapacityError(
            f"|K| = {len(ground)} exceeds the partition capacity {MAX_PARTITION_SIZE} "
            f"(Bell({len(ground)}) = {bell_number(len(ground))} partitions)"
        )
    return _partitions_of(ground)


def mobius_coefficient(alpha: SetPartition) -> int:
    """Mobius value mu(alpha, {K}) = (-1)^(|alpha|-1) (|alpha|-1)!."""
    k = alpha.size
    return (-1) ** (k - 1) * math.factorial(k - 1)


@lru_cache(maxsize=None)
def stirling_partition(j: int, k: int) -> int:
    """
    Number of partitions of a j-set into k nonempty blocks.

    Raises:
        ValueError: If j or k is negative.
    """
    if j < 0 or k < 0:
        raise ValueError(f"Stirling arguments must be nonnegative, got ({j}, {k})")
    if j == k:
        return 1
    if k == 0 or k > j:
        return 0
    return k * stirling_partition(j - 1, k) + stirling_partition(j - 1, k - 1)


def bell_number(n: int) -> int:
    """Number of set partitions of an n-set."""
    return sum(stirling_partition(n, k) for k in range(n + 1))


def fubini(j: int) -> int:
    """Ordered Bell number B_j = sum_k S(j, k) k!."""
    if j < 0:
        raise ValueError(f"fubini argument must be nonnegative, got {j}")
    return sum(stirling_partition(j, k) * math.factorial(k) for k in range(j + 1))


def smoothing_constants(m: int) -> SmoothingConstants:
    """
    Evaluates C1 = cbrt(32 / (pi (1 - (3/4)^(1/m)))) and C2 = 12 / pi.

    Args:
        m: Dimension, m >= 1.

    Returns:
        SmoothingConstants for dimension m.
    """
    if m < 1:
        raise ValueError(f"dimension must be at least 1, got {m}")
    c1 = (32.0 / (math.pi * (1.0 - 0.75 ** (1.0 / m)))) ** (1.0 / 3.0)
    return SmoothingConstants(dimension=m, c1=c1, c2=12.0 / math.pi)
