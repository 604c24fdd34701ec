"""
One posterior random probability measure
"""
import json
import math
from dataclasses import dataclass

import numpy as np

from ..errors import DomainError

MASS_TOL = 1e-10


@dataclass(frozen=True)
class PosteriorMeasure:
    """Posterior draw: masses on the k observed atoms plus fresh base-measure atoms.

    continuous holds the absolute masses of fresh atoms, labeled by draw
    order; residual is the fresh mass left unbroken by stick truncation.
    scale_split is R_k for T1 and beta_k for T2; t_draw is the matching total.
    ess is the effective sample size of the SIR pool the draw was resampled
    from; exact and rejection draws are independent and report 1.0.
    """
    representation: str
    fixed_atoms: np.ndarray
    continuous: np.ndarray
    residual: float
    scale_split: float
    t_draw: float
    ess: float
    method: str = 'exact'

    def __post_init__(self):
        if self.representation not in ('T1', 'T2'):
            raise DomainError(f"unknown representation {self.representation!r}")
        fixed = np.asarray(self.fixed_atoms, dtype=float)
        continuous = np.asarray(self.continuous, dtype=float)
        if np.any(fixed < 0) or np.any(continuous < 0) or self.residual < 0:
            raise DomainError("posterior masses must be nonnegative")
        object.__setattr__(self, 'fixed_atoms', fixed)
        object.__setattr__(self, 'continuous', continuous)
        gap = abs(self.total_mass() - 1.0)
        if gap > MASS_TOL:
            raise DomainError(f"posterior masses total 1 {'+' if self.total_mass() > 1 else '-'} {gap:.3g}")

    @property
    def k(self):
        return int(self.fixed_atoms.size)

    def fixed_mass(self):
        return math.fsum(self.fixed_atoms)

    def continuous_mass(self):
        return math.fsum(self.continuous) + self.residual

    def total_mass(self):
        return math.fsum(np.concatenate([self.fixed_atoms, self.continuous, [self.residual]]))

    def to_dict(self):
        return {
            'representation': self.representation,
            'scale_split': self.scale_split,
            't_draw': self.t_draw,
            'fixed_atoms': [[j + 1, float(w)] for j, w in enumerate(self.fixed_atoms)],
            'continuous': [[i + 1, float(w)] for i, w in enumerate(self.continuous)],
            'residual': self.residual,
            'ess': self.ess,
            'method': self.method,
        }

    def to_json(self):
        return json.dumps(self.to_dict())

    @classmethod
    def from_dict(cls, document):
        return cls(representation=document['representation'],
                   fixed_atoms=np.array([w for _, w in document['fixed_atoms']], dtype=float),
                   continuous=np.array([w for _, w in document['continuous']], dtype=float),
                   residual=float(document['residual']),
                   scale_split=float(document['scale_split']),
                   t_draw=float(document['t_draw']),
                   ess=float(document['ess']),
                   method=document.get('method', 'exact'))
