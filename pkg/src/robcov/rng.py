"""Seeded random streams shared by simulation and estimation.

``RngStream`` wraps the active backend generator (SplitMix64 counter +
Box-Muller normals).  Identical seeds give identical integer streams across
runs and platforms; the float stream is reproducible on a given platform.
"""

from .backend import kernels


class RngStream:
    """Single-owner random stream. State is (seed, uint64 counter)."""

    __slots__ = ("_impl",)

    def __init__(self, seed, state=None):
        self._impl = kernels.Rng(seed, state)

    @property
    def seed(self):
        return int(self._impl.seed)

    @property
    def state(self):
        return int(self._impl.state)

    def next_u64(self):
        return int(self._impl.next_u64())

    def uniform(self):
        """Uniform double in (0, 1)."""
        return self._impl.uniform()

    def normals(self, k):
        """Array of k standard normals (consumes ceil(k/2) Box-Muller pairs)."""
        return self._impl.normals(k)

    def normal(self):
        return float(self._impl.normals(1)[0])

    def spawn(self, index):
        """Independent child stream for replicate ``index`` (documented rule:
        child seed = mix64(seed + (index+1) * golden))."""
        return RngStream(derive_seed(self.seed, index))

    def to_state(self):
        return {"seed": self.seed, "state": self.state}

    @classmethod
    def from_state(cls, payload):
        return cls(payload["seed"], payload["state"])


def derive_seed(seed, index):
    """Deterministic child seed for replicate ``index``."""
    golden = 0x9E3779B97F4A7C15
    return int(kernels.mix64((int(seed) + (int(index) + 1) * golden) & ((1 << 64) - 1)))
