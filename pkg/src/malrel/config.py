from __future__ import annotations

from dataclasses import dataclass


@dataclass(frozen=True)
class Limits:
    """Size caps for desk-scale computations. All of them can be overridden."""

    max_carrier: int = 64
    max_free_elements: int = 200_000
    max_power_carrier: int = 10**6
    # homomorphism search: branching nodes examined before giving up
    max_hom_candidates: int = 10**6
    # enumerate_admissible: closures performed before giving up
    max_admissible_closures: int = 200_000

    def __post_init__(self):
        for name, value in vars(self).items():
            if value <= 0:
                raise ValueError(f"{name} must be positive, got {value}")


DEFAULT_LIMITS = Limits()
