"""
Reproducible random streams
"""
import numpy as np

from ..errors import DomainError

_UINT64 = 2 ** 64


class RngState:
    """A (seed, stream_id) addressed PCG64 stream.

    The same pair always yields the same variates on every platform; distinct
    stream ids derive statistically independent streams from one seed through
    numpy's SeedSequence spawn keys.
    """

    def __init__(self, seed=0, stream_id=0):
        for name, value in (('seed', seed), ('stream_id', stream_id)):
            if isinstance(value, bool) or int(value) != value or not 0 <= int(value) < _UINT64:
                raise DomainError(f"{name} must be a 64-bit unsigned integer, got {value!r}")
        self.seed = int(seed)
        self.stream_id = int(stream_id)
        self.counter = 0
        sequence = np.random.SeedSequence(self.seed, spawn_key=(self.stream_id,))
        self.generator = np.random.Generator(np.random.PCG64(sequence))

    def spawn(self):
        """Child stream addressed by (seed, stream_id, counter); the counter advances."""
        self.counter += 1
        child = RngState.__new__(RngState)
        child.seed = self.seed
        child.stream_id = self.stream_id
        child.counter = 0
        sequence = np.random.SeedSequence(self.seed, spawn_key=(self.stream_id, self.counter))
        child.generator = np.random.Generator(np.random.PCG64(sequence))
        return child

    def __repr__(self):
        return f"RngState(seed={self.seed}, stream_id={self.stream_id}, counter={self.counter})"
