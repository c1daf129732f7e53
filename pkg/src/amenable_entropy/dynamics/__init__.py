"""Concrete systems and their entropy and pressure functionals."""

from .entropy import conditional_entropy, shannon_entropy
from .functionals import naive_entropy, ollagnier_entropy, ow_entropy
from .pressure import goodwyn_check, is_adapted, naive_pressure, ow_pressure, pressure_P_f
from .refine import h_alpha_F, refine
from .systems import (
    ArcCover,
    ArcPartition,
    AtomPartition,
    Bernoulli,
    CircleRotation,
    FiniteFixture,
    Markov,
    SetCover,
    ShiftSystem,
    Suspension,
    SymbolPartition,
)

__all__ = [
    "ArcCover", "ArcPartition", "AtomPartition", "Bernoulli", "CircleRotation", "FiniteFixture", "Markov",
    "SetCover", "ShiftSystem", "Suspension", "SymbolPartition", "conditional_entropy", "goodwyn_check",
    "h_alpha_F", "is_adapted", "naive_entropy", "naive_pressure", "ollagnier_entropy", "ow_entropy",
    "ow_pressure", "pressure_P_f", "refine", "shannon_entropy",
]
