"""Hierarchy times and the trivial-background fundamental solution."""

from __future__ import annotations

import re
from dataclasses import dataclass, field

import numpy as np


@dataclass(frozen=True)
class TimeVector:
    """Active hierarchy times: ``active[n]`` is t_{2n+1}; ``active[0]`` is x.

    Values may be scalars or arrays; they broadcast against each other.
    """

    active: dict = field(default_factory=dict)

    def __post_init__(self):
        for n in self.active:
            if int(n) != n or n < 0:
                raise ValueError(f"time index must be a non-negative integer, got {n!r}")
        if 0 not in self.active:
            object.__setattr__(self, "active", {0: 0.0, **self.active})

    @classmethod
    def of(cls, x=0.0, **named) -> "TimeVector":
        """``TimeVector.of(x, t3=..., t5=...)``."""
        active = {0: x}
        for name, val in named.items():
            n = _index_from_name(name)
            if n == 0:
                raise ValueError("t1 is x; pass it positionally")
            active[n] = val
        return cls(active)

    @classmethod
    def from_names(cls, mapping: dict) -> "TimeVector":
        """Build from ``{"t1": x, "t3": t, ...}`` (``"x"`` is accepted for t1)."""
        active = {}
        for name, val in mapping.items():
            n = 0 if name == "x" else _index_from_name(name)
            active[n] = val
        return cls(active)

    @property
    def x(self):
        return self.active[0]

    def get(self, n: int):
        return self.active.get(n, 0.0)

    def replace(self, **changes) -> "TimeVector":
        active = dict(self.active)
        for name, val in changes.items():
            active[0 if name == "x" else _index_from_name(name)] = val
        return TimeVector(active)

    def shape(self) -> tuple:
        return np.broadcast(*[np.asarray(v) for v in self.active.values()]).shape


def _index_from_name(name: str) -> int:
    m = re.fullmatch(r"t(\d+)", name)
    if not m or int(m.group(1)) % 2 == 0:
        raise ValueError(f"hierarchy times are t1, t3, t5, ...; got {name!r}")
    return (int(m.group(1)) - 1) // 2


def spectral_phase(times: TimeVector, lam: complex):
    """theta = sum_n lam^(2n+1) t_{2n+1}, so that Psi(lam) = exp(theta J)."""
    total = 0
    for n, t in times.active.items():
        total = total + lam ** (2 * n + 1) * np.asarray(t)
    return total


def xi(times: TimeVector, mu, variant: str = "soliton"):
    """Soliton: sum (-1)^n mu^(2n+1) t_{2n+1}.  Breather: sum mu^(2n+1) t_{2n+1}."""
    if variant == "soliton":
        total = 0
        for n, t in times.active.items():
            total = total + (-1) ** n * mu ** (2 * n + 1) * np.asarray(t)
        return total
    if variant == "breather":
        return spectral_phase(times, mu)
    raise ValueError(f"unknown variant {variant!r}")


def rotation_block(theta, n_components: int) -> np.ndarray:
    """exp(theta J): [[cos, sin], [-sin, cos]] on the first two axes, identity on the rest.

    Batched over the shape of ``theta``; matrix axes are last.
    """
    theta = np.asarray(theta)
    out = np.zeros(theta.shape + (n_components + 2, n_components + 2), dtype=complex)
    c, s = np.cos(theta), np.sin(theta)
    out[..., 0, 0] = c
    out[..., 0, 1] = s
    out[..., 1, 0] = -s
    out[..., 1, 1] = c
    for k in range(2, n_components + 2):
        out[..., k, k] = 1.0
    return out


def fundamental_solution(times: TimeVector, lam: complex, n_components: int) -> np.ndarray:
    """Psi(lam) = exp(theta J) over the zero background.

    At lam = i mu this is the cosh / i sinh block with the soliton xi; at
    real-axis-free lam = mu it is the cos / sin block with the breather xi.
    """
    return rotation_block(spectral_phase(times, lam), n_components)


def reduction_q(n_components: int) -> np.ndarray:
    return np.diag([-1.0] + [1.0] * (n_components + 1))
