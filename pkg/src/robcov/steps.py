"""Decaying step-size schedules for the stochastic recursions."""

from dataclasses import dataclass


@dataclass(frozen=True)
class StepSchedule:
    """gamma_n = batch_scale * c * (n + n0)^(-exponent).

    ``exponent`` must lie in (1/2, 1); ``batch_scale`` is 1 for one-at-a-time
    updates and sqrt(s) for blocks of size s.
    """

    c: float = 1.0
    exponent: float = 0.75
    n0: float = 0.0
    batch_scale: float = 1.0

    def __post_init__(self):
        if self.c <= 0:
            raise ValueError("step constant c must be positive")
        if not 0.5 < self.exponent < 1.0:
            raise ValueError(f"step exponent must lie in (1/2, 1), got {self.exponent}")
        if self.n0 < 0:
            raise ValueError("step offset n0 must be non-negative")
        if self.batch_scale <= 0:
            raise ValueError("batch_scale must be positive")

    def at(self, n):
        """Step size for update index n >= 1 (strictly decreasing in n)."""
        return self.batch_scale * self.c * (n + self.n0) ** (-self.exponent)

    def scaled(self, batch_scale):
        return StepSchedule(self.c, self.exponent, self.n0, batch_scale)
