"""
Lock-guarded memo tables for Psi weights, Stirling tables and density tabulations
"""
import logging
from threading import Lock

from .policies import MISSING, LRUStore

logger = logging.getLogger(__name__)


class MemoTable:
    """Named memo table whose reads and publications are atomic.

    Values are computed outside the lock, so two threads missing on the
    same key may both compute it; the later store overwrites an equal value.
    """

    def __init__(self, name, capacity=None):
        self.name = name
        self.capacity = capacity
        self.lock = Lock()
        self.store = LRUStore(capacity)

    def get(self, key, default=None):
        with self.lock:
            value = self.store.lookup(key)
        return default if value is MISSING else value

    def put(self, key, value):
        with self.lock:
            self.store.store(key, value)

    def contains(self, key):
        with self.lock:
            return key in self.store

    def get_or_compute(self, key, compute):
        """Cached value for key, computed and published on a miss."""
        with self.lock:
            value = self.store.lookup(key)
        if value is MISSING:
            value = compute()
            self.put(key, value)
        return value

    def stats(self):
        with self.lock:
            return self.store.stats()

    def clear(self):
        with self.lock:
            stats = self.store.stats()
            self.store = LRUStore(self.capacity)
        logger.debug("memo table %s cleared after %d hits, %d misses", self.name, stats.hits, stats.misses)
