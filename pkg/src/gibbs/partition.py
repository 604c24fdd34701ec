"""
Block-size partitions and their enumeration
"""
import math
from collections import Counter
from dataclasses import dataclass

from ..errors import DomainError


@dataclass(frozen=True)
class Partition:
    """Multiset of block sizes (n_1, ..., n_k) of a partition of [n].

    Blocks are kept in the order given, which for data is the order of
    first appearance; every probability computed from a Partition is
    symmetric in that order.
    """
    block_sizes: tuple

    def __post_init__(self):
        sizes = tuple(self.block_sizes)
        if not sizes:
            raise DomainError("a partition needs at least one block")
        for m in sizes:
            if isinstance(m, bool) or int(m) != m or m < 1:
                raise DomainError(f"block sizes must be positive integers, got {m!r}")
        object.__setattr__(self, 'block_sizes', tuple(int(m) for m in sizes))

    @property
    def n(self):
        return sum(self.block_sizes)

    @property
    def k(self):
        return len(self.block_sizes)

    def profile(self):
        """Block sizes in decreasing order."""
        return tuple(sorted(self.block_sizes, reverse=True))

    def multiplicity(self):
        """Number of set partitions of [n] sharing this profile."""
        count = math.factorial(self.n)
        for m in self.block_sizes:
            count //= math.factorial(m)
        for repeats in Counter(self.block_sizes).values():
            count //= math.factorial(repeats)
        return count

    def seat(self, j):
        """Partition after one more customer joins block j; j == k opens a new block."""
        if not 0 <= j <= self.k:
            raise DomainError(f"block index must lie in [0, {self.k}], got {j}")
        if j == self.k:
            return Partition(self.block_sizes + (1,))
        sizes = list(self.block_sizes)
        sizes[j] += 1
        return Partition(tuple(sizes))

    @classmethod
    def from_labels(cls, labels):
        """Block sizes of a label sequence, in order of first appearance."""
        counts = Counter()
        order = []
        for label in labels:
            if label not in counts:
                order.append(label)
            counts[label] += 1
        return cls(tuple(counts[label] for label in order))

    def to_dict(self):
        return {'block_sizes': list(self.block_sizes)}

    def __str__(self):
        return "(" + ",".join(str(m) for m in self.block_sizes) + ")"


def integer_partitions(n, max_part=None):
    """Yield the integer partitions of n as decreasing tuples."""
    if n == 0:
        yield ()
        return
    top = n if max_part is None else min(n, max_part)
    for first in range(top, 0, -1):
        for rest in integer_partitions(n - first, first):
            yield (first,) + rest


def set_partitions(n):
    """Yield every set partition of [n] as a restricted growth label list."""
    if n < 1:
        raise DomainError(f"n must be positive, got {n}")
    labels = [0] * n

    def extend(i, k):
        if i == n:
            yield list(labels)
            return
        for label in range(k + 1):
            labels[i] = label
            yield from extend(i + 1, max(k, label + 1))

    labels[0] = 0
    yield from extend(1, 1)
