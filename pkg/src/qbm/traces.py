"""Common result container for the evolution engines."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

__all__ = ["EnergyTrace"]


@dataclass(frozen=True)
class EnergyTrace:
    """Energy bookkeeping along one trajectory.

    theta    rate of change of the mean environment energy
    de_sys   <E_S>(t) - <E_S>(0)
    dq_env   cumulative environment energy change, Int_0^t theta
    dh_int   interaction energy change (exact engine only, else None)
    phi      system-energy rate d<E_S>/dt when the engine provides it
    engine   "analytic" | "exact" | "fcs_check"
    params   parameter echo for provenance (plain dict, JSON-able)
    """

    t: np.ndarray
    theta: np.ndarray
    de_sys: np.ndarray
    dq_env: np.ndarray
    engine: str
    params: dict = field(default_factory=dict)
    dh_int: np.ndarray | None = None
    phi: np.ndarray | None = None

    def __post_init__(self):
        n = self.t.size
        for name in ("theta", "de_sys", "dq_env", "dh_int", "phi"):
            col = getattr(self, name)
            if col is None:
                continue
            if col.size != n:
                raise ValueError(f"column {name} length mismatch")
            if not np.all(np.isfinite(col)):
                raise ValueError(f"column {name} contains non-finite entries")
