"""Discrete-time Monte Carlo of mixed SIS/SIR/SIRS spreading with the blockbuster trigger.

Each round is synchronous and two-phase: transmissions, spreader exits and
stifler reversion are all decided from the state at the start of the round,
then applied together. While the trigger is off, messages travel over
dominant edges only; once it fires, implicit edges carry traffic as well and
stay open for the rest of the run.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from enum import IntEnum
from typing import Optional

import numpy as np

from .graph import HybridGraph, Visibility, select_dominant_edges
from .rng import substream

__all__ = [
    "NodeModel",
    "NodeState",
    "PropagationConfig",
    "PropagationError",
    "ReplicaResult",
    "SimulationTrace",
    "assign_models",
    "blockbuster_gamma",
    "blockbuster_phi",
    "run",
    "run_replica",
    "step",
]


class PropagationError(ValueError):
    pass


class NodeModel(IntEnum):
    SIS = 0
    SIRS = 1
    SIR = 2


class NodeState(IntEnum):
    IGNORANT = 0
    SPREADER = 1
    STIFLER = 2


@dataclass(frozen=True)
class PropagationConfig:
    """Dynamic parameters.

    ``mixture`` is ``(u, w, q)``: the SIS, SIRS and SIR shares. ``delta`` is the
    per-node dominant-edge target; when set, edge visibility is drawn afresh
    for each replica, otherwise the graph's stored labels are used.
    """

    lam: float = 0.1
    beta: float = 0.2
    sigma: float = 0.1
    mixture: tuple[float, float, float] = (0.8, 0.05, 0.15)
    phi_trigger: float = 0.1
    horizon: int = 100
    i0: float = 0.01
    replicas: int = 20
    rng_seed: int = 0
    delta: Optional[int] = None
    freeze_models: bool = False

    def __post_init__(self):
        object.__setattr__(self, "mixture", tuple(float(x) for x in self.mixture))
        for name in ("lam", "beta", "sigma", "i0"):
            val = getattr(self, name)
            if not 0.0 <= val <= 1.0:
                raise PropagationError(f"{name} must lie in [0, 1], got {val}")
        if len(self.mixture) != 3 or any(not 0.0 <= x <= 1.0 for x in self.mixture):
            raise PropagationError(f"mixture must be three probabilities, got {self.mixture}")
        if abs(sum(self.mixture) - 1.0) > 1e-12:
            raise PropagationError(f"mixture must sum to 1, got {sum(self.mixture)!r}")
        if self.horizon < 2:
            raise PropagationError(f"horizon must be >= 2, got {self.horizon}")
        if self.replicas < 1:
            raise PropagationError(f"replicas must be >= 1, got {self.replicas}")
        if self.rng_seed < 0:
            raise PropagationError("rng_seed must be non-negative")
        if self.delta is not None and self.delta <= 1:
            raise PropagationError(f"delta must exceed 1, got {self.delta}")

    def with_(self, **changes) -> "PropagationConfig":
        return replace(self, **changes)


def assign_models(n: int, mixture, rng: np.random.Generator) -> np.ndarray:
    """Independent per-node draw: SIS w.p. u, SIRS w.p. w, SIR w.p. q."""
    u, w, q = (float(x) for x in mixture)
    if min(u, w, q) < 0 or abs(u + w + q - 1.0) > 1e-12:
        raise PropagationError(f"invalid mixture {mixture}")
    draws = rng.random(n)
    models = np.full(n, NodeModel.SIR, dtype=np.int8)
    models[draws < u + w] = NodeModel.SIRS
    models[draws < u] = NodeModel.SIS
    return models


def blockbuster_phi(i_t: float, t: int) -> float:
    """Spreader density over ``log10(t + 1)``."""
    if t <= 0:
        if i_t == 0:
            return 0.0
        raise PropagationError("blockbuster effect is undefined at t = 0")
    return i_t / math.log10(t + 1)


def blockbuster_gamma(phi_t: float, phi_threshold: float, t: int, T: int, gamma_prev: int) -> int:
    """Latching trigger: can only switch on while ``t <= T/2``."""
    if T < 2:
        raise PropagationError(f"horizon must be >= 2, got {T}")
    if gamma_prev:
        return 1
    if t <= T / 2 and phi_t >= phi_threshold:
        return 1
    return 0


@dataclass
class _EdgeView:
    tails: np.ndarray
    heads: np.ndarray
    eids: np.ndarray

    @classmethod
    def of(cls, g: HybridGraph) -> "_EdgeView":
        indptr, heads, eids = g.csr()
        tails = np.repeat(np.arange(g.n, dtype=np.int64), np.diff(indptr))
        return cls(tails, heads, eids)


def step(
    g: HybridGraph,
    models: np.ndarray,
    states: np.ndarray,
    config: PropagationConfig,
    gamma: int,
    rng: np.random.Generator,
    dominant: Optional[np.ndarray] = None,
    _view: Optional[_EdgeView] = None,
) -> np.ndarray:
    """One synchronous round; returns the new state array.

    ``dominant`` is a per-edge boolean mask; it defaults to the graph's labels.

    Randomness is consumed in a fixed layout regardless of the state: one
    uniform per directed edge, then one per node for exits and one per node
    for reversion. Two runs sharing a generator therefore see the same coin
    for the same (round, edge) or (round, node), which makes coupled
    comparisons meaningful.
    """
    view = _view or _EdgeView.of(g)
    if dominant is None:
        dominant = g.visibility == Visibility.DOMINANT
    n = states.size
    edge_coins = rng.random(view.tails.size)
    exit_coins = rng.random(n)
    back_coins = rng.random(n)
    spreading = states == NodeState.SPREADER
    ignorant = states == NodeState.IGNORANT
    stifled = states == NodeState.STIFLER

    live = spreading[view.tails] & ignorant[view.heads] & (edge_coins < config.lam)
    if not gamma:
        live &= dominant[view.eids]
    hit = view.heads[live]

    new = states.copy()
    leaving = np.flatnonzero(spreading & (exit_coins < config.beta))
    new[leaving] = np.where(models[leaving] == NodeModel.SIS, NodeState.IGNORANT, NodeState.STIFLER)
    back = stifled & (models == NodeModel.SIRS) & (back_coins < config.sigma)
    new[back] = NodeState.IGNORANT
    new[hit] = NodeState.SPREADER
    return new


@dataclass
class ReplicaResult:
    s: np.ndarray
    i: np.ndarray
    r: np.ndarray
    phi: np.ndarray
    gamma: np.ndarray
    trigger_time: Optional[int]
    ever_infected: int


@dataclass
class SimulationTrace:
    """Replica-averaged densities over ``t = 0..T``.

    ``phi[0]`` is NaN (the effect is undefined before the first round).
    ``gamma`` is the fraction of replicas whose trigger is on at round ``t``.
    """

    t: np.ndarray
    s_density: np.ndarray
    i_density: np.ndarray
    r_density: np.ndarray
    phi: np.ndarray
    gamma: np.ndarray
    trigger_times: list[Optional[int]]
    replicas: list[ReplicaResult] = field(default_factory=list)

    @property
    def trigger_fraction(self) -> float:
        return sum(t is not None for t in self.trigger_times) / len(self.trigger_times)

    @property
    def peak_i(self) -> float:
        return float(self.i_density.max())

    @property
    def peak_round(self) -> int:
        return int(np.argmax(self.i_density))


def run_replica(
    g: HybridGraph,
    config: PropagationConfig,
    rng: np.random.Generator,
    models: Optional[np.ndarray] = None,
    dominant: Optional[np.ndarray] = None,
    pin_gamma: Optional[int] = None,
) -> ReplicaResult:
    """Single run. ``pin_gamma`` forces the trigger value (for coupling checks)."""
    n = g.n
    n_seed = math.ceil(config.i0 * n)
    if config.i0 * n < 1:
        raise PropagationError(f"i0 * N = {config.i0 * n:g} < 1: no initial spreader")
    if models is None:
        models = assign_models(n, config.mixture, rng)
    if dominant is None:
        if config.delta is not None:
            dominant = select_dominant_edges(g, config.delta, rng)
        else:
            dominant = g.visibility == Visibility.DOMINANT
    view = _EdgeView.of(g)
    states = np.zeros(n, dtype=np.int8)
    states[rng.choice(n, size=n_seed, replace=False)] = NodeState.SPREADER
    ever = states == NodeState.SPREADER

    T = config.horizon
    counts = np.zeros((T + 1, 3), dtype=np.int64)
    phi = np.full(T + 1, np.nan)
    gam = np.zeros(T + 1, dtype=np.int8)
    counts[0] = np.bincount(states, minlength=3)
    gamma = 0 if pin_gamma is None else pin_gamma
    gam[0] = gamma
    trigger = None
    for t in range(1, T + 1):
        states = step(g, models, states, config, gamma, rng, dominant, view)
        ever |= states == NodeState.SPREADER
        counts[t] = np.bincount(states, minlength=3)
        phi[t] = blockbuster_phi(counts[t, 1] / n, t)
        if pin_gamma is None:
            gamma = blockbuster_gamma(phi[t], config.phi_trigger, t, T, gamma)
            if gamma and trigger is None:
                trigger = t
        gam[t] = gamma
    dens = counts / n
    return ReplicaResult(dens[:, 0], dens[:, 1], dens[:, 2], phi, gam, trigger, int(ever.sum()))


def run(
    g: HybridGraph,
    config: PropagationConfig,
    keep_replicas: bool = False,
) -> SimulationTrace:
    """Average ``config.replicas`` independent runs.

    Replica ``k`` draws from ``substream(config.rng_seed, "propagation", k)``;
    with ``freeze_models`` all replicas share one model assignment.
    """
    if g.n == 0:
        raise PropagationError("graph is empty")
    frozen = None
    if config.freeze_models:
        frozen = assign_models(g.n, config.mixture, substream(config.rng_seed, "models"))
    results = []
    for k in range(config.replicas):
        rng = substream(config.rng_seed, "propagation", k)
        results.append(run_replica(g, config, rng, models=frozen))
    T = config.horizon
    stack = lambda attr: np.mean([getattr(r, attr) for r in results], axis=0)  # noqa: E731
    phi = np.mean([r.phi for r in results], axis=0)
    return SimulationTrace(
        t=np.arange(T + 1),
        s_density=stack("s"),
        i_density=stack("i"),
        r_density=stack("r"),
        phi=phi,
        gamma=stack("gamma"),
        trigger_times=[r.trigger_time for r in results],
        replicas=results if keep_replicas else [],
    )
