"""Undirected simple graph with node provenance and dominant/implicit edges.

Edges live in flat numpy arrays (``src``, ``dst``, ``visibility``); a CSR view
is built on demand for neighbour queries. Node ids are dense in ``[0, n)`` and
follow generation order, so an id doubles as the node's birth order.
"""

from __future__ import annotations

from enum import Enum, IntEnum
from typing import Iterator, Optional

import numpy as np
import scipy.sparse as sp
from scipy.sparse.csgraph import connected_components

__all__ = [
    "DegreeMode",
    "GeneratorTag",
    "GraphError",
    "HybridGraph",
    "Origin",
    "Visibility",
    "assign_implicit_edges",
    "select_dominant_edges",
]


class GraphError(ValueError):
    """Invalid graph construction or query."""


class Origin(IntEnum):
    SMALL_WORLD = 0
    SCALE_FREE = 1

    @property
    def label(self) -> str:
        return "SW" if self is Origin.SMALL_WORLD else "SF"


class Visibility(IntEnum):
    DOMINANT = 0
    IMPLICIT = 1

    @property
    def code(self) -> str:
        return "D" if self is Visibility.DOMINANT else "I"


class GeneratorTag(str, Enum):
    NETWORK_I = "NetworkI"
    NETWORK_II = "NetworkII"
    NETWORK_III = "NetworkIII"
    PURE_WS = "PureWS"
    PURE_BA = "PureBA"


class DegreeMode(str, Enum):
    ALL = "all"
    DOMINANT_ONLY = "dominant"


_EMPTY = np.empty(0, dtype=np.int64)


class HybridGraph:
    """Simple undirected graph over nodes ``0..n-1``.

    ``origin`` holds an :class:`Origin` code per node and ``subnet`` a subnet
    index per node (or ``None`` for generators without subnets). Edges are
    stored once with ``src < dst``.
    """

    def __init__(
        self,
        n: int,
        generator_tag: GeneratorTag = GeneratorTag.PURE_WS,
        origin: Optional[np.ndarray] = None,
        subnet: Optional[np.ndarray] = None,
    ):
        if n < 0:
            raise GraphError(f"node count must be non-negative, got {n}")
        self.n = int(n)
        self.generator_tag = GeneratorTag(generator_tag)
        if origin is None:
            origin = np.zeros(self.n, dtype=np.int8)
        origin = np.array(origin, dtype=np.int8)
        if origin.shape != (self.n,):
            raise GraphError("origin array must have one entry per node")
        self.origin = origin
        self.origin.setflags(write=False)
        if subnet is not None:
            subnet = np.array(subnet, dtype=np.int64)
            if subnet.shape != (self.n,):
                raise GraphError("subnet array must have one entry per node")
            subnet.setflags(write=False)
        self.subnet = subnet

        self._src = _EMPTY
        self._dst = _EMPTY
        self._vis = np.empty(0, dtype=np.int8)
        self._pending: list[tuple[int, int]] = []
        self._pending_keys: set[tuple[int, int]] = set()
        self._csr: Optional[tuple[np.ndarray, np.ndarray, np.ndarray]] = None
        self.labels_assigned = False

    @classmethod
    def from_edges(
        cls,
        n: int,
        src,
        dst,
        generator_tag: GeneratorTag = GeneratorTag.PURE_WS,
        origin=None,
        subnet=None,
        visibility=None,
    ) -> "HybridGraph":
        """Bulk constructor; validates ids, self-loops and duplicates."""
        g = cls(n, generator_tag, origin, subnet)
        src = np.asarray(src, dtype=np.int64)
        dst = np.asarray(dst, dtype=np.int64)
        if src.shape != dst.shape or src.ndim != 1:
            raise GraphError("src and dst must be 1-d arrays of equal length")
        if src.size:
            if min(src.min(), dst.min()) < 0 or max(src.max(), dst.max()) >= n:
                raise GraphError("edge endpoint out of range")
            if np.any(src == dst):
                raise GraphError("self-loops are not allowed")
        lo = np.minimum(src, dst)
        hi = np.maximum(src, dst)
        keys = lo * max(n, 1) + hi
        if np.unique(keys).size != keys.size:
            raise GraphError("parallel edges are not allowed")
        g._src, g._dst = lo, hi
        if visibility is None:
            g._vis = np.zeros(lo.size, dtype=np.int8)
        else:
            vis = np.asarray(visibility, dtype=np.int8)
            if vis.shape != lo.shape:
                raise GraphError("visibility must have one entry per edge")
            g._vis = vis.copy()
            g.labels_assigned = bool(np.any(vis == Visibility.IMPLICIT))
        return g

    # -- construction -----------------------------------------------------

    def _check_node(self, i: int) -> None:
        if not 0 <= i < self.n:
            raise GraphError(f"node id {i} out of range [0, {self.n})")

    def has_edge(self, i: int, j: int) -> bool:
        self._check_node(i)
        self._check_node(j)
        key = (min(i, j), max(i, j))
        if key in self._pending_keys:
            return True
        if self._src.size == 0:
            return False
        indptr, nbrs, _ = self._materialized_csr()
        return bool(np.any(nbrs[indptr[i] : indptr[i + 1]] == j))

    def add_edge(self, i: int, j: int) -> bool:
        """Insert a dominant edge; return False if it already exists."""
        i, j = int(i), int(j)
        self._check_node(i)
        self._check_node(j)
        if i == j:
            raise GraphError(f"self-loop on node {i} rejected")
        if self.labels_assigned:
            raise GraphError("graph is sealed once edge visibility is assigned")
        if self.has_edge(i, j):
            return False
        key = (min(i, j), max(i, j))
        self._pending.append(key)
        self._pending_keys.add(key)
        return True

    def _flush(self) -> None:
        if not self._pending:
            return
        extra = np.array(self._pending, dtype=np.int64).reshape(-1, 2)
        self._src = np.concatenate([self._src, extra[:, 0]])
        self._dst = np.concatenate([self._dst, extra[:, 1]])
        self._vis = np.concatenate([self._vis, np.zeros(len(extra), dtype=np.int8)])
        self._pending.clear()
        self._pending_keys.clear()
        self._csr = None

    def _materialized_csr(self) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        if self._csr is None:
            src, dst = self._src, self._dst
            tails = np.concatenate([src, dst])
            heads = np.concatenate([dst, src])
            eids = np.concatenate([np.arange(src.size), np.arange(src.size)])
            order = np.lexsort((heads, tails))
            counts = np.bincount(tails, minlength=self.n)
            indptr = np.zeros(self.n + 1, dtype=np.int64)
            np.cumsum(counts, out=indptr[1:])
            self._csr = (indptr, heads[order], eids[order])
        return self._csr

    # -- queries ----------------------------------------------------------

    @property
    def src(self) -> np.ndarray:
        self._flush()
        return self._src

    @property
    def dst(self) -> np.ndarray:
        self._flush()
        return self._dst

    @property
    def visibility(self) -> np.ndarray:
        self._flush()
        return self._vis

    @property
    def edge_count(self) -> int:
        return int(self._src.size + len(self._pending))

    def csr(self) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        """``(indptr, neighbours, edge_ids)``; neighbours sorted per node."""
        self._flush()
        return self._materialized_csr()

    def edges(self) -> Iterator[tuple[int, int, Visibility]]:
        self._flush()
        for i, j, v in zip(self._src.tolist(), self._dst.tolist(), self._vis.tolist()):
            yield i, j, Visibility(v)

    def neighbors(self, i: int, mode: DegreeMode = DegreeMode.ALL) -> np.ndarray:
        self._check_node(i)
        indptr, nbrs, eids = self.csr()
        sl = slice(indptr[i], indptr[i + 1])
        if DegreeMode(mode) is DegreeMode.ALL:
            return nbrs[sl]
        return nbrs[sl][self._vis[eids[sl]] == Visibility.DOMINANT]

    def degrees(self, mode: DegreeMode = DegreeMode.ALL) -> np.ndarray:
        self._flush()
        if DegreeMode(mode) is DegreeMode.ALL:
            src, dst = self._src, self._dst
        else:
            keep = self._vis == Visibility.DOMINANT
            src, dst = self._src[keep], self._dst[keep]
        return np.bincount(src, minlength=self.n) + np.bincount(dst, minlength=self.n)

    def degree(self, i: int, mode: DegreeMode = DegreeMode.ALL) -> int:
        return int(self.neighbors(i, mode).size)

    def average_degree(self, mode: DegreeMode = DegreeMode.ALL) -> float:
        if self.n == 0:
            raise GraphError("average degree of an empty graph is undefined")
        return float(self.degrees(mode).sum()) / self.n

    def max_degree(self) -> int:
        return int(self.degrees().max()) if self.n else 0

    def is_connected(self) -> bool:
        if self.n <= 1:
            return True
        adj = sp.coo_matrix(
            (np.ones(self.edge_count), (self.src, self.dst)), shape=(self.n, self.n)
        )
        n_comp, _ = connected_components(adj, directed=False)
        return n_comp == 1

    def __repr__(self) -> str:
        return f"HybridGraph(n={self.n}, edges={self.edge_count}, tag={self.generator_tag.value})"


def select_dominant_edges(g: HybridGraph, delta: int, rng: np.random.Generator) -> np.ndarray:
    """Boolean mask over edges: True where the edge stays dominant.

    Every node picks ``min(degree, delta)`` incident edges uniformly at random;
    an edge is dominant if either endpoint picked it.
    """
    if delta <= 1:
        raise GraphError(f"delta must exceed 1 (alpha > delta > 1), got {delta}")
    indptr, _, eids = g.csr()
    m = eids.size
    owner = np.repeat(np.arange(g.n), np.diff(indptr))
    order = np.lexsort((rng.random(m), owner))
    rank = np.empty(m, dtype=np.int64)
    rank[order] = np.arange(m) - indptr[owner[order]]
    keep = np.zeros(g.edge_count, dtype=bool)
    keep[eids[rank < delta]] = True
    return keep


def assign_implicit_edges(g: HybridGraph, delta: int, rng: np.random.Generator) -> None:
    """Label edges dominant/implicit in place. Allowed once per graph."""
    if g.labels_assigned:
        raise GraphError("edge visibility has already been assigned")
    keep = select_dominant_edges(g, delta, rng)
    g._vis = np.where(keep, Visibility.DOMINANT, Visibility.IMPLICIT).astype(np.int8)
    g.labels_assigned = True
