"""Parameter packs shared by the pipeline stages."""

from __future__ import annotations

import json
from dataclasses import asdict, dataclass, fields, replace
from pathlib import Path

from .errors import FormatError, PreconditionError

__all__ = ["ParamPack", "EngineConfig", "load_params"]


@dataclass(frozen=True)
class ParamPack:
    """Density constants of the pipeline.

    ``c`` bounds the degree ratio from below, ``delta`` the in-class minimum
    degree, ``zeta`` the sparse-cut threshold, ``beta``/``gamma`` the two
    bipartite-distance thresholds, ``eta`` the cross-class edge budget,
    ``xi`` the forest budget and ``rho`` the high-degree move threshold.
    They must satisfy eta <= beta <= xi <= gamma <= zeta <= delta <= c <= 1.
    """

    c: float = 0.25
    delta: float = 0.1
    zeta: float = 0.02
    gamma: float = 0.01
    xi: float = 0.005
    beta: float = 0.001
    eta: float = 0.0005
    rho: float = 0.01
    t: int = 2

    def __post_init__(self):
        chain = [("eta", self.eta), ("beta", self.beta), ("xi", self.xi), ("gamma", self.gamma),
                 ("zeta", self.zeta), ("delta", self.delta), ("c", self.c)]
        if chain[0][1] <= 0:
            raise PreconditionError("eta must be positive")
        for (name_a, a), (name_b, b) in zip(chain, chain[1:]):
            if a > b:
                raise PreconditionError(f"parameter chain broken: {name_a}={a} > {name_b}={b}")
        if self.c > 1:
            raise PreconditionError(f"c={self.c} exceeds 1")
        if not 0 < self.rho <= 1:
            raise PreconditionError(f"rho={self.rho} must lie in (0, 1]")
        if self.t < 1:
            raise PreconditionError(f"t={self.t} must be positive")

    @classmethod
    def for_density(cls, c: float, t: int = 2) -> "ParamPack":
        """Default constants scaled down so that the chain fits under ``c``."""
        base = cls()
        if c >= base.c:
            return replace(base, t=t)
        k = c / base.c
        return cls(c=c, delta=base.delta * k, zeta=base.zeta * k, gamma=base.gamma * k, xi=base.xi * k,
                   beta=base.beta * k, eta=base.eta * k, rho=base.rho * k, t=t)

    def with_(self, **changes) -> "ParamPack":
        return replace(self, **changes)

    def to_json(self) -> dict:
        return asdict(self)

    @classmethod
    def from_json(cls, data: dict) -> "ParamPack":
        known = {f.name for f in fields(cls)}
        unknown = set(data) - known
        if unknown:
            raise FormatError(f"unknown parameters: {sorted(unknown)}")
        return cls(**data)


@dataclass(frozen=True)
class EngineConfig:
    """Working constants of the packing engine.

    ``eps`` and ``mu`` are the regularity and density thresholds used for
    cluster pairs, ``split_xi`` sizes the two small split parts, ``T`` is the
    pair threshold of the balancing collection, ``attempts`` bounds reseeded
    retries of a failed engine run.  ``min_final_half`` caps the template
    part so that each half keeps at least that many vertices for the final
    pair tiling, whenever the half is large enough to allow it.
    """

    eps: float = 0.15
    mu: float = 0.2
    split_xi: float = 0.1
    T: int = 3
    min_clusters: int = 2
    max_clusters: int = 8
    attempts: int = 25
    strict_regularity: bool = False
    tiling_budget: int = 200_000
    min_final_half: int = 16


def load_params(path: str | Path | None, t: int | None = None) -> ParamPack:
    if path is None:
        return ParamPack() if t is None else ParamPack(t=t)
    try:
        data = json.loads(Path(path).read_text())
    except json.JSONDecodeError as exc:
        raise FormatError(f"params file is not JSON: {exc}") from None
    if t is not None:
        data["t"] = t
    return ParamPack.from_json(data)
