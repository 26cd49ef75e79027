"""Small-world, scale-free and hybrid network generators.

Networks I-III compose a Watts-Strogatz style ring (``K`` neighbours, rewiring
probability ``p``) with Barabasi-Albert style preferential attachment (``m``
edges per new node):

* Network I grows ``aN`` scale-free nodes onto a ``(1-a)N`` node ring.
* Network II bridges several small-world subnets onto a BA core.
* Network III treats whole subnets as super-nodes and wires them together
  with size-proportional subnet choice and degree-proportional endpoints.

Every generator is deterministic for a given ``numpy.random.Generator`` state.
"""

from __future__ import annotations

import bisect
import math
from array import array
from dataclasses import dataclass, field
from enum import Enum
from typing import Optional

import numpy as np

from .graph import GeneratorTag, GraphError, HybridGraph, Origin

__all__ = [
    "ConstructionLog",
    "GeneratorParams",
    "NetworkKind",
    "SubnetKind",
    "SubnetPlan",
    "generate",
    "generate_ba",
    "generate_network_i",
    "generate_network_ii",
    "generate_network_iii",
    "generate_ws",
    "ring_lattice",
]

MAX_REWIRE_ATTEMPTS = 100
_UNIFORM_BATCH = 1 << 16


class NetworkKind(str, Enum):
    I = "I"
    II = "II"
    III = "III"
    WS = "WS"
    BA = "BA"


class SubnetKind(str, Enum):
    WS = "WS"
    BA = "BA"


class ConstructionLog(list):
    """Event list of ``{"step", "kind", "details"}`` dicts."""

    def emit(self, step, kind: str, **details) -> None:
        self.append({"step": step, "kind": kind, "details": details})

    def bridge_edges(self) -> int:
        return sum(e["details"].get("edges", 0) for e in self if e["kind"] == "bridge")


@dataclass(frozen=True)
class GeneratorParams:
    n_total: int
    a: float = 0.5
    k_ring: int = 4
    p_rewire: float = 0.3
    m_attach: int = 4
    rng_seed: int = 0

    def __post_init__(self):
        if self.n_total < 1:
            raise GraphError(f"n_total must be positive, got {self.n_total}")
        if not 0.0 <= self.a <= 1.0:
            raise GraphError(f"a must lie in [0, 1], got {self.a}")
        if self.k_ring < 2 or self.k_ring % 2:
            raise GraphError(f"K must be an even integer >= 2, got {self.k_ring}")
        if not 0.0 <= self.p_rewire <= 1.0:
            raise GraphError(f"p must lie in [0, 1], got {self.p_rewire}")
        if self.m_attach < 1:
            raise GraphError(f"m must be >= 1, got {self.m_attach}")
        if self.rng_seed < 0:
            raise GraphError(f"rng_seed must be non-negative, got {self.rng_seed}")

    @property
    def n_small_world(self) -> int:
        return int(round((1.0 - self.a) * self.n_total))

    @property
    def n_scale_free(self) -> int:
        return self.n_total - self.n_small_world


@dataclass
class SubnetPlan:
    sizes: list[int]
    kinds: list[SubnetKind] = field(default_factory=list)

    def __post_init__(self):
        self.sizes = [int(s) for s in self.sizes]
        if not self.kinds:
            self.kinds = [SubnetKind.WS] * len(self.sizes)
        self.kinds = [SubnetKind(k) for k in self.kinds]
        if len(self.kinds) != len(self.sizes):
            raise GraphError("subnet plan needs one kind per size")
        if any(s < 1 for s in self.sizes):
            raise GraphError(f"every subnet needs at least one node, got sizes {self.sizes}")

    def total(self, kind: SubnetKind) -> int:
        return sum(s for s, k in zip(self.sizes, self.kinds) if k is kind)


class _Uniforms:
    """Buffered uniform draws; cuts per-call overhead in the attachment loops.

    Batches start small and double, so many tiny blocks stay cheap.
    """

    def __init__(self, rng: np.random.Generator):
        self._rng = rng
        self._buf: list[float] = []
        self._pos = 0
        self._batch = 64

    def next(self) -> float:
        if self._pos >= len(self._buf):
            self._buf = self._rng.random(self._batch).tolist()
            self._batch = min(2 * self._batch, _UNIFORM_BATCH)
            self._pos = 0
        u = self._buf[self._pos]
        self._pos += 1
        return u


# -- building blocks ----------------------------------------------------------


def ring_lattice(n: int, K: int) -> tuple[np.ndarray, np.ndarray]:
    """Edges ``(i, i+j mod n)`` for ``j = 1..K/2``, ordered by ``j`` then ``i``."""
    half = K // 2
    src = np.tile(np.arange(n, dtype=np.int64), half)
    dst = (src + np.repeat(np.arange(1, half + 1, dtype=np.int64), n)) % n
    return src, dst


def _complete_edges(n: int) -> tuple[np.ndarray, np.ndarray]:
    i, j = np.triu_indices(n, k=1)
    return i.astype(np.int64), j.astype(np.int64)


def _ws_edges(n: int, K: int, p: float, rng: np.random.Generator) -> tuple[np.ndarray, np.ndarray]:
    """Ring lattice plus rewiring; the first endpoint of every edge is kept."""
    src, dst = ring_lattice(n, K)
    n_edges = src.size
    rewired = rng.random(n_edges) < p
    new_dst = dst.copy()
    pending = np.flatnonzero(rewired)
    new_dst[pending] = rng.integers(0, n, size=pending.size)
    attempts = np.zeros(n_edges, dtype=np.int64)
    while rewired.any():
        lo = np.minimum(src, new_dst)
        hi = np.maximum(src, new_dst)
        keys = lo * n + hi
        # lattice (fixed) edges win collisions; among rewired edges the lowest index wins
        order = np.lexsort((np.arange(n_edges), rewired, keys))
        sorted_keys = keys[order]
        dup_sorted = np.zeros(n_edges, dtype=bool)
        dup_sorted[1:] = sorted_keys[1:] == sorted_keys[:-1]
        loser = np.zeros(n_edges, dtype=bool)
        loser[order[dup_sorted]] = True
        bad = rewired & ((src == new_dst) | loser)
        bad_idx = np.flatnonzero(bad)
        if bad_idx.size == 0:
            break
        attempts[bad_idx] += 1
        give_up = bad_idx[attempts[bad_idx] >= MAX_REWIRE_ATTEMPTS]
        new_dst[give_up] = dst[give_up]
        rewired[give_up] = False
        pending = bad_idx[attempts[bad_idx] < MAX_REWIRE_ATTEMPTS]
        new_dst[pending] = rng.integers(0, n, size=pending.size)
    return src, new_dst


def _small_world_block(n: int, K: int, p: float, rng) -> tuple[np.ndarray, np.ndarray]:
    """WS subnet; falls back to a complete graph when a ring of K is impossible."""
    if n <= K or n < 4:
        return _complete_edges(n)
    return _ws_edges(n, K, p, rng)


class _PreferentialAttacher:
    """Grows nodes that link to ``m`` distinct existing nodes with P ~ degree.

    Sampling uses the endpoint pool: every edge contributes both endpoints, so a
    uniform draw from the pool is a degree-proportional draw over nodes.
    """

    def __init__(self, src, dst, rng: np.random.Generator):
        self.pool = array("q", np.concatenate([src, dst]).tolist())
        self.uniforms = _Uniforms(rng)
        self.new_src = array("q")
        self.new_dst = array("q")

    def attach(self, node: int, m: int, existing: int) -> int:
        m_eff = min(m, existing)
        pool = self.pool
        size = len(pool)
        nxt = self.uniforms.next
        targets: list[int] = []
        if size == 0:
            # no edges yet: uniform over existing nodes
            while len(targets) < m_eff:
                t = int(nxt() * existing)
                if t not in targets:
                    targets.append(t)
        else:
            while len(targets) < m_eff:
                t = pool[int(nxt() * size)]
                if t not in targets:
                    targets.append(t)
        for t in targets:
            self.new_src.append(t)
            self.new_dst.append(node)
            pool.append(t)
            pool.append(node)
        return m_eff

    def edges(self) -> tuple[np.ndarray, np.ndarray]:
        return (
            np.frombuffer(self.new_src, dtype=np.int64).copy(),
            np.frombuffer(self.new_dst, dtype=np.int64).copy(),
        )


def _ba_block(n: int, m: int, rng) -> tuple[np.ndarray, np.ndarray]:
    """Triangle seed plus preferential attachment; complete graph below 4 nodes."""
    if n < 4:
        return _complete_edges(n)
    s0, d0 = _complete_edges(3)
    att = _PreferentialAttacher(s0, d0, rng)
    for node in range(3, n):
        att.attach(node, m, node)
    s1, d1 = att.edges()
    return np.concatenate([s0, s1]), np.concatenate([d0, d1])


# -- public generators ----------------------------------------------------------


def generate_ws(n: int, K: int, p: float, rng: np.random.Generator, log: Optional[ConstructionLog] = None) -> HybridGraph:
    """Watts-Strogatz ring of ``n`` nodes; edge count is exactly ``n*K/2``."""
    if K < 2 or K % 2:
        raise GraphError(f"K must be an even integer >= 2, got {K}")
    if n <= K:
        raise GraphError(f"ring needs n > K, got n={n}, K={K}")
    if not 0.0 <= p <= 1.0:
        raise GraphError(f"p must lie in [0, 1], got {p}")
    src, dst = _ws_edges(n, K, p, rng)
    if log is not None:
        log.emit(1, "ring_lattice", nodes=n, edges=n * K // 2)
        log.emit(2, "rewire", probability=p, rewired=int(np.count_nonzero(dst != ring_lattice(n, K)[1])))
    return HybridGraph.from_edges(
        n, src, dst, GeneratorTag.PURE_WS, origin=np.full(n, Origin.SMALL_WORLD, dtype=np.int8)
    )


def generate_ba(
    n: int,
    m: int,
    rng: np.random.Generator,
    seed_graph: Optional[HybridGraph] = None,
    log: Optional[ConstructionLog] = None,
) -> HybridGraph:
    """Preferential attachment.

    Without ``seed_graph`` growth starts from a triangle (``n >= 3``); node
    ``t`` then adds ``min(m, t)`` edges. With ``seed_graph`` the new nodes grow
    on top of that graph until it has ``n`` nodes in total.
    """
    if m < 1:
        raise GraphError(f"m must be >= 1, got {m}")
    if seed_graph is None:
        if n < 3:
            raise GraphError(f"triangle seed needs n >= 3, got {n}")
        s0, d0 = _complete_edges(3)
        start = 3
        origin = np.full(n, Origin.SCALE_FREE, dtype=np.int8)
        tag = GeneratorTag.PURE_BA
    else:
        if n < seed_graph.n:
            raise GraphError("target size is smaller than the seed graph")
        s0, d0 = seed_graph.src, seed_graph.dst
        start = seed_graph.n
        origin = np.concatenate(
            [seed_graph.origin, np.full(n - start, Origin.SCALE_FREE, dtype=np.int8)]
        )
        tag = seed_graph.generator_tag
    att = _PreferentialAttacher(s0, d0, rng)
    added = 0
    for node in range(start, n):
        added += att.attach(node, m, node)
    s1, d1 = att.edges()
    if log is not None:
        log.emit("seed", "seed", nodes=start, edges=int(s0.size))
        log.emit("attach", "preferential_attachment", nodes=n - start, edges=added, m=m)
    return HybridGraph.from_edges(n, np.concatenate([s0, s1]), np.concatenate([d0, d1]), tag, origin=origin)


def generate_network_i(params: GeneratorParams, rng: np.random.Generator, log: Optional[ConstructionLog] = None) -> HybridGraph:
    """Small-world ring of ``(1-a)N`` nodes, then ``aN`` preferentially attached nodes.

    The scale-free layer is seeded on the ring: its first node links to ``m``
    ring nodes drawn proportional to ring degree. Every later node links to
    ``m`` distinct nodes drawn proportional to their degree in the scale-free
    layer (edges created by attachment), which lets hubs form even when the
    ring holds most of the nodes.
    """
    n_sw = params.n_small_world
    K, m = params.k_ring, params.m_attach
    if n_sw <= K:
        raise GraphError(f"small-world base needs (1-a)N > K, got {n_sw} <= {K}")
    src, dst = _ws_edges(n_sw, K, params.p_rewire, rng)
    if log is not None:
        log.emit(1, "ring_lattice", nodes=n_sw, edges=n_sw * K // 2)
        log.emit(2, "rewire", probability=params.p_rewire)
    srcs, dsts = [src], [dst]
    if params.n_total > n_sw:
        seed = _PreferentialAttacher(src, dst, rng)
        added = seed.attach(n_sw, m, n_sw)
        layer_nodes = added + 1
        s0, d0 = seed.edges()
        layer = _PreferentialAttacher(s0, d0, rng)
        for node in range(n_sw + 1, params.n_total):
            added += layer.attach(node, m, layer_nodes)
            layer_nodes += 1
        s1, d1 = layer.edges()
        srcs += [s0, s1]
        dsts += [d0, d1]
        if log is not None:
            log.emit(3, "preferential_attachment", nodes=params.n_scale_free, edges=added, m=m)
    origin = np.full(params.n_total, Origin.SCALE_FREE, dtype=np.int8)
    origin[:n_sw] = Origin.SMALL_WORLD
    return HybridGraph.from_edges(
        params.n_total,
        np.concatenate(srcs),
        np.concatenate(dsts),
        GeneratorTag.NETWORK_I,
        origin=origin,
    )


def _compose(total: int, parts: int, min_size: int, rng: np.random.Generator) -> list[int]:
    """Random composition of ``total`` into ``parts`` sizes, each >= ``min_size``.

    The part count is reduced when the budget cannot honour the minimum.
    """
    if total <= 0:
        return []
    parts = max(1, min(parts, total // max(min_size, 1)))
    if parts == 1:
        return [total]
    spare = total - parts * min_size
    cuts = np.sort(rng.integers(0, spare + 1, size=parts - 1))
    extra = np.diff(np.concatenate([[0], cuts, [spare]]))
    return [int(min_size + e) for e in extra]


def generate_network_ii(
    params: GeneratorParams,
    rng: np.random.Generator,
    n_subnets: Optional[int] = None,
    log: Optional[ConstructionLog] = None,
) -> HybridGraph:
    """BA core of ``aN`` nodes with small-world subnets bridged onto it.

    Core nodes get subnet id 0, small-world subnets ids ``1..U``. Each subnet
    sends ``xi`` bridges (``1 <= xi <= ceil(0.1 * size)``) from distinct members
    to uniformly chosen core nodes.
    """
    n_sw, n_sf = params.n_small_world, params.n_scale_free
    K, m = params.k_ring, params.m_attach
    if n_sf < 3:
        raise GraphError(f"BA core needs aN >= 3 nodes, got {n_sf}")
    core_src, core_dst = _ba_block(n_sf, m, rng)
    if log is not None:
        log.emit((1, 2), "ba_core", nodes=n_sf, edges=int(core_src.size))
    srcs, dsts = [core_src], [core_dst]
    subnet = np.zeros(params.n_total, dtype=np.int64)
    if n_sw > 0:
        if n_subnets is None:
            n_subnets = int(rng.integers(1, max(1, math.ceil(n_sw / (2 * K))) + 1))
        sizes = _compose(n_sw, n_subnets, K + 1, rng)
        if log is not None:
            log.emit(3, "subnet_plan", sizes=sizes)
        offset = n_sf
        for idx, size in enumerate(sizes, start=1):
            s, d = _small_world_block(size, K, params.p_rewire, rng)
            srcs.append(s + offset)
            dsts.append(d + offset)
            subnet[offset : offset + size] = idx
            if log is not None:
                log.emit((4, 5), "ws_subnet", subnet=idx, nodes=size, edges=int(s.size))
            xi = int(rng.integers(1, max(1, math.ceil(0.1 * size)) + 1))
            members = rng.choice(size, size=xi, replace=False) + offset
            cores = rng.integers(0, n_sf, size=xi)
            srcs.append(cores.astype(np.int64))
            dsts.append(members.astype(np.int64))
            if log is not None:
                log.emit(6, "bridge", subnet=idx, edges=xi)
            offset += size
    origin = np.full(params.n_total, Origin.SMALL_WORLD, dtype=np.int8)
    origin[:n_sf] = Origin.SCALE_FREE
    return HybridGraph.from_edges(
        params.n_total,
        np.concatenate(srcs),
        np.concatenate(dsts),
        GeneratorTag.NETWORK_II,
        origin=origin,
        subnet=subnet,
    )


def default_subnet_plan(params: GeneratorParams, rng: np.random.Generator) -> SubnetPlan:
    """Random plan: small-world subnets of size >= K+1, BA subnets of size >= 3."""
    n_sw, n_sf = params.n_small_world, params.n_scale_free
    K, m = params.k_ring, params.m_attach
    sizes: list[int] = []
    kinds: list[SubnetKind] = []
    if n_sw > 0:
        u_ws = int(rng.integers(1, max(1, math.ceil(n_sw / (2 * K))) + 1))
        ws_sizes = _compose(n_sw, u_ws, K + 1, rng)
        sizes += ws_sizes
        kinds += [SubnetKind.WS] * len(ws_sizes)
    if n_sf > 0:
        u_ba = int(rng.integers(1, max(1, math.ceil(n_sf / (2 * max(m, 3)))) + 1))
        ba_sizes = _compose(n_sf, u_ba, 3, rng)
        sizes += ba_sizes
        kinds += [SubnetKind.BA] * len(ba_sizes)
    return SubnetPlan(sizes, kinds)


def generate_network_iii(
    params: GeneratorParams,
    rng: np.random.Generator,
    plan: Optional[SubnetPlan] = None,
    log: Optional[ConstructionLog] = None,
) -> HybridGraph:
    """Subnets wired together as super-nodes.

    Starting from one random subnet, each remaining subnet (in plan order) adds
    two edges to an already wired subnet chosen with probability proportional
    to its size; both endpoints are drawn proportional to current degree inside
    their subnet. Duplicate edges are redrawn.
    """
    if params.n_total < 4:
        raise GraphError(f"network III needs N >= 4, got {params.n_total}")
    K, m = params.k_ring, params.m_attach
    if plan is None:
        plan = default_subnet_plan(params, rng)
    else:
        if plan.total(SubnetKind.WS) + plan.total(SubnetKind.BA) != params.n_total:
            raise GraphError("subnet plan sizes must sum to N")
    if log is not None:
        log.emit((1, 2, 3), "subnet_plan", sizes=plan.sizes, kinds=[k.value for k in plan.kinds])

    n = sum(plan.sizes)
    offsets = np.concatenate([[0], np.cumsum(plan.sizes)]).astype(np.int64)
    origin = np.empty(n, dtype=np.int8)
    subnet = np.empty(n, dtype=np.int64)
    srcs, dsts = [], []
    for idx, (size, kind) in enumerate(zip(plan.sizes, plan.kinds)):
        lo = offsets[idx]
        if kind is SubnetKind.WS:
            s, d = _small_world_block(size, K, params.p_rewire, rng)
            origin[lo : lo + size] = Origin.SMALL_WORLD
            step = (5, 6) if size >= 4 else 4
        else:
            s, d = _ba_block(size, m, rng)
            origin[lo : lo + size] = Origin.SCALE_FREE
            step = (7, 8) if size >= 4 else 4
        subnet[lo : lo + size] = idx
        srcs.append(s + lo)
        dsts.append(d + lo)
        if log is not None:
            log.emit(step, f"{kind.value.lower()}_subnet", subnet=idx, nodes=size, edges=int(s.size))

    internal_src = np.concatenate(srcs) if srcs else np.empty(0, dtype=np.int64)
    internal_dst = np.concatenate(dsts) if dsts else np.empty(0, dtype=np.int64)
    bridge_src, bridge_dst = _wire_subnets(plan, offsets, subnet, internal_src, internal_dst, rng, log)
    return HybridGraph.from_edges(
        n,
        np.concatenate([internal_src, bridge_src]),
        np.concatenate([internal_dst, bridge_dst]),
        GeneratorTag.NETWORK_III,
        origin=origin,
        subnet=subnet,
    )


def _wire_subnets(plan, offsets, subnet, src, dst, rng, log):
    n_sub = len(plan.sizes)
    if n_sub <= 1:
        return np.empty(0, dtype=np.int64), np.empty(0, dtype=np.int64)
    # static endpoint pool grouped by subnet; bridge endpoints accumulate separately
    ends = np.concatenate([src, dst])
    ends = ends[np.argsort(subnet[ends], kind="stable")]
    bounds = np.searchsorted(subnet[ends], np.arange(n_sub + 1))
    static = [ends[bounds[s] : bounds[s + 1]] for s in range(n_sub)]
    extra: list[list[int]] = [[] for _ in range(n_sub)]
    uni = _Uniforms(rng)
    existing: set[tuple[int, int]] = set()

    def pick_node(s: int) -> int:
        base, more = static[s], extra[s]
        total = base.size + len(more)
        if total == 0:
            return int(offsets[s] + int(uni.next() * plan.sizes[s]))
        r = int(uni.next() * total)
        return int(base[r]) if r < base.size else more[r - base.size]

    start = int(rng.integers(0, n_sub))
    order = [start] + [s for s in range(n_sub) if s != start]
    wired = [start]
    cum = [plan.sizes[start]]
    bsrc, bdst = array("q"), array("q")
    if log is not None:
        log.emit("9a", "start_subnet", subnet=start)
    for s in order[1:]:
        target = wired[bisect.bisect_right(cum, uni.next() * cum[-1])]
        made = 0
        for _ in range(2):
            for _attempt in range(MAX_REWIRE_ATTEMPTS):
                i, j = pick_node(s), pick_node(target)
                key = (min(i, j), max(i, j))
                if key not in existing:
                    break
            else:
                continue
            existing.add(key)
            bsrc.append(i)
            bdst.append(j)
            extra[s].append(i)
            extra[target].append(j)
            made += 1
        if log is not None:
            log.emit(("9b", "9c"), "bridge", subnet=s, target=target, edges=made)
        wired.append(s)
        cum.append(cum[-1] + plan.sizes[s])
    return (
        np.frombuffer(bsrc, dtype=np.int64).copy(),
        np.frombuffer(bdst, dtype=np.int64).copy(),
    )


def generate(
    kind: NetworkKind,
    params: GeneratorParams,
    rng: Optional[np.random.Generator] = None,
    log: Optional[ConstructionLog] = None,
    plan: Optional[SubnetPlan] = None,
) -> HybridGraph:
    """Dispatch on network kind; ``rng`` defaults to a stream from ``params.rng_seed``."""
    from .rng import substream

    if rng is None:
        rng = substream(params.rng_seed, "generator")
    kind = NetworkKind(kind)
    if kind is NetworkKind.WS:
        return generate_ws(params.n_total, params.k_ring, params.p_rewire, rng, log)
    if kind is NetworkKind.BA:
        return generate_ba(params.n_total, params.m_attach, rng, log=log)
    if kind is NetworkKind.I:
        return generate_network_i(params, rng, log)
    if kind is NetworkKind.II:
        return generate_network_ii(params, rng, log=log)
    return generate_network_iii(params, rng, plan=plan, log=log)
