"""
Least-recently-used store backing the memo tables
"""
from collections import OrderedDict
from typing import NamedTuple, Optional

MISSING = object()


class MemoStats(NamedTuple):
    hits: int
    misses: int
    evictions: int
    size: int
    capacity: Optional[int]

    @property
    def hit_ratio(self):
        total = self.hits + self.misses
        return self.hits / total if total > 0 else 0.0


class LRUStore:
    """Ordered key-value store; capacity None never evicts.

    lookup returns MISSING on a miss so that falsy values such as 0.0 stay cacheable.
    """

    def __init__(self, capacity=None):
        if capacity is not None and capacity < 1:
            raise ValueError(f"capacity must be positive or None, got {capacity!r}")
        self.capacity = capacity
        self.entries = OrderedDict()
        self.hits = 0
        self.misses = 0
        self.evictions = 0

    def lookup(self, key):
        try:
            value = self.entries[key]
        except KeyError:
            self.misses += 1
            return MISSING
        self.entries.move_to_end(key)
        self.hits += 1
        return value

    def store(self, key, value):
        self.entries[key] = value
        self.entries.move_to_end(key)
        if self.capacity is not None and len(self.entries) > self.capacity:
            self.entries.popitem(last=False)
            self.evictions += 1

    def __contains__(self, key):
        return key in self.entries

    def stats(self):
        return MemoStats(self.hits, self.misses, self.evictions, len(self.entries), self.capacity)
