"""Numerical tolerances shared by every analysis routine."""

from __future__ import annotations

import dataclasses
import json
from dataclasses import dataclass
from pathlib import Path


@dataclass(frozen=True)
class Tolerances:
    """Central record of all tolerance constants.

    Attributes
    ----------
    rank : float
        Relative eigenvalue / residual cutoff used when extracting supports
        and orthonormal bases.
    orth : float
        Allowed deviation of a basis Gram matrix from the identity.
    herm : float
        Allowed Hermiticity defect, relative to ``max(1, ||A||_F)``.
    psd : float
        Allowed negative eigenvalue, relative to ``max(1, lambda_max)``.
    sub : float
        Projector distance under which two subspaces are equal.
    zero : float
        Relative size under which a propagated state counts as zero.
    channel : float
        Allowed residual of ``sum_i E_i^dag E_i`` against ``I`` (or of the
        measurement completeness equation).
    state_trace : float
        Initial states whose trace is within this of 1 are renormalized;
        larger deviations are rejected at ingestion.
    marginal_factor : float
        Verdicts within this factor of ``zero`` are flagged as marginal.
    """

    rank: float = 1e-9
    orth: float = 1e-8
    herm: float = 1e-8
    psd: float = 1e-8
    sub: float = 1e-7
    zero: float = 1e-9
    channel: float = 1e-9
    state_trace: float = 1e-9
    marginal_factor: float = 10.0

    def replace(self, **changes: float) -> "Tolerances":
        unknown = set(changes) - {f.name for f in dataclasses.fields(self)}
        if unknown:
            raise KeyError(f"unknown tolerance(s): {', '.join(sorted(unknown))}")
        return dataclasses.replace(self, **{k: float(v) for k, v in changes.items()})

    def as_dict(self) -> dict[str, float]:
        return dataclasses.asdict(self)

    @classmethod
    def from_file(cls, path: str | Path) -> "Tolerances":
        """Load overrides from a JSON object such as ``{"zero": 1e-10}``."""
        data = json.loads(Path(path).read_text(encoding="utf-8"))
        if not isinstance(data, dict):
            raise ValueError("tolerance config must be a JSON object")
        section = data.get("tolerances", data)
        return cls().replace(**section)


DEFAULT = Tolerances()


def resolve(tol: Tolerances | None) -> Tolerances:
    return DEFAULT if tol is None else tol
