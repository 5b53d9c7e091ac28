"""Model parameters and seeding conventions."""
from __future__ import annotations

import enum
from dataclasses import dataclass

import numpy as np

__all__ = ["Variant", "Clock", "ModelParams", "replica_seed", "replica_rng"]


class Variant(str, enum.Enum):
    SI = "si"
    SI_INNOVATORS = "si-innovators"
    SIR = "sir"


class Clock(str, enum.Enum):
    NODE = "node"  # each adopter rings at beta and contacts a uniform neighbour
    EDGE = "edge"  # each clone rings at its own rate ``edge_rate``


@dataclass(frozen=True)
class ModelParams:
    """Contact process parameters.

    ``beta_prime`` is the spontaneous adoption rate for ``SI_INNOVATORS`` and
    the removal rate for ``SIR``; it is ignored for plain ``SI``.
    ``edge_rate`` is the per-clone contact rate used with ``Clock.EDGE``; when
    left as ``None`` it defaults to ``beta / mean_degree``, which makes the two
    clocks coincide on regular graphs.
    """

    beta: float = 1.0
    p: float = 1.0
    beta_prime: float = 0.0
    variant: Variant = Variant.SI
    clock: Clock = Clock.NODE
    edge_rate: float | None = None

    def __post_init__(self):
        object.__setattr__(self, "variant", Variant(self.variant))
        object.__setattr__(self, "clock", Clock(self.clock))
        if not self.beta > 0:
            raise ValueError(f"beta must be > 0, got {self.beta}")
        if not 0.0 <= self.p <= 1.0:
            raise ValueError(f"p must lie in [0, 1], got {self.p}")
        if self.beta_prime < 0:
            raise ValueError(f"beta_prime must be >= 0, got {self.beta_prime}")
        if self.variant is Variant.SIR and not self.beta_prime < self.beta:
            raise ValueError("SIR requires beta_prime < beta")
        if self.edge_rate is not None and not self.edge_rate > 0:
            raise ValueError(f"edge_rate must be > 0, got {self.edge_rate}")

    @property
    def innovation_rate(self):
        return self.beta_prime if self.variant is Variant.SI_INNOVATORS else 0.0

    @property
    def removal_rate(self):
        return self.beta_prime if self.variant is Variant.SIR else 0.0

    def clone_rate(self, degree, mean_degree):
        """Contact rate of a single clone of a node with the given degree."""
        if self.clock is Clock.NODE:
            return self.beta / degree
        if self.edge_rate is None:
            return self.beta / mean_degree
        return self.edge_rate


def replica_seed(base_seed, replica):
    """Seed of replica ``r``: ``SeedSequence(base_seed, spawn_key=(r,))``.

    This is the same stream ``SeedSequence(base_seed).spawn(...)[r]`` yields,
    so ensembles do not depend on scheduling or on how many replicas run.
    """
    return np.random.SeedSequence(int(base_seed), spawn_key=(int(replica),))


def replica_rng(base_seed, replica):
    return np.random.Generator(np.random.PCG64(replica_seed(base_seed, replica)))
