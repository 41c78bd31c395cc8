"""Method-of-types machinery on de Bruijn multigraphs.

A k-block count table with total n is a balanced integer circulation on the
de Bruijn graph whose vertices are (k-1)-words and whose arcs are k-words
(arc w goes from prefix(w) to suffix(w)).  Balance (in-degree = out-degree
at every vertex) is exactly stationarity of the normalized table, and a
*connected* balanced table is the cyclic type of an actual sample, realized
by reading an Eulerian circuit.

This module provides: exhaustive type enumeration (small n), exact type
class sizes and the factorial / entropy sandwich bounds, deterministic
Eulerian realization, rounding of an arbitrary stationary law to a nearby
realizable type, and the decomposition of a stationary law into a convex
combination of simple-cycle measures.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from typing import Iterator, Optional

import numpy as np

from .blocks import BlockDistribution, cyclic_window_codes, empirical_block_measure

__all__ = [
    "CountTable",
    "CycleMeasure",
    "TypeSizeBounds",
    "components",
    "cycle_decompose",
    "enumerate_simple_cycles",
    "enumerate_strings_chunk",
    "enumerate_types",
    "realize_sample",
    "round_to_type",
    "type_class_size",
    "type_count_bound",
]

#: Chunk budget (total matrix cells) for exhaustive string enumeration.
_CHUNK_CELLS = 1 << 22


@dataclass(frozen=True)
class CountTable:
    """Integer k-block counts with total mass ``n``, balanced at every vertex.

    ``counts[c]`` is the number of occurrences of the k-word with code ``c``.
    Balance means: for every (k-1)-word u, the counts of words starting with
    u equal the counts of words ending with u.  Cyclic empirical counts of
    any sample satisfy this exactly, and conversely every *connected*
    balanced table is realizable (see :func:`realize_sample`).
    """

    alphabet_size: int
    k: int
    n: int
    counts: np.ndarray

    def __post_init__(self) -> None:
        c = np.asarray(self.counts, dtype=np.int64)
        if c.shape != (self.alphabet_size**self.k,):
            raise ValueError(
                f"expected {self.alphabet_size ** self.k} counts, got shape {c.shape}"
            )
        if np.any(c < 0):
            raise ValueError("negative count")
        if int(c.sum()) != self.n:
            raise ValueError(f"counts sum to {int(c.sum())}, expected n={self.n}")
        c.flags.writeable = False
        object.__setattr__(self, "counts", c)
        if self.k >= 2:
            out_deg, in_deg = self._degrees(c)
            if not np.array_equal(out_deg, in_deg):
                raise ValueError("count table is not balanced (not a cyclic type)")

    def _degrees(self, c: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        A, V = self.alphabet_size, self.alphabet_size ** (self.k - 1)
        return c.reshape(V, A).sum(axis=1), c.reshape(A, V).sum(axis=0)

    @property
    def vertex_count(self) -> int:
        return self.alphabet_size ** (self.k - 1)

    def out_degrees(self) -> np.ndarray:
        """Total count of words starting at each (k-1)-word vertex."""
        return self.counts.reshape(self.vertex_count, self.alphabet_size).sum(axis=1)

    def to_distribution(self) -> BlockDistribution:
        return BlockDistribution(
            self.alphabet_size, self.k, self.counts / self.n, stationary=True
        )

    def to_json_dict(self) -> dict:
        return {"k": self.k, "n": self.n, "counts": [int(c) for c in self.counts]}

    @classmethod
    def from_json_dict(cls, d: dict, alphabet_size: int) -> "CountTable":
        return cls(alphabet_size, int(d["k"]), int(d["n"]), np.asarray(d["counts"]))


def components(table: CountTable) -> list[list[int]]:
    """Weakly-connected components of the support multigraph.

    Only vertices with nonzero degree are considered.  Components are
    returned as sorted vertex lists, ordered by their smallest vertex.
    For balanced tables weak and strong connectivity coincide.
    """
    A, V = table.alphabet_size, table.vertex_count
    adj: dict[int, set[int]] = {}
    for w in np.flatnonzero(table.counts):
        u, v = int(w) // A, int(w) % V
        adj.setdefault(u, set()).add(v)
        adj.setdefault(v, set()).add(u)
    seen: set[int] = set()
    comps = []
    for start in sorted(adj):
        if start in seen:
            continue
        stack, comp = [start], set()
        while stack:
            u = stack.pop()
            if u in comp:
                continue
            comp.add(u)
            stack.extend(adj[u] - comp)
        seen |= comp
        comps.append(sorted(comp))
    return comps


def _eulerian_circuit_arcs(table: CountTable, start: int) -> list[int]:
    """Arc codes of an Eulerian circuit through ``start``'s component.

    Deterministic: at every vertex the smallest available appended symbol is
    taken first; arcs are recorded on retreat (classic stack form of
    Hierholzer's method) and reversed.
    """
    A, V = table.alphabet_size, table.vertex_count
    rem = table.counts.reshape(V, A).copy()
    ptr = np.zeros(V, dtype=np.int64)
    stack: list[tuple[int, int]] = [(start, -1)]
    out: list[int] = []
    while stack:
        u, arrived_by = stack[-1]
        b = int(ptr[u])
        while b < A and rem[u, b] == 0:
            b += 1
        ptr[u] = b
        if b == A:
            stack.pop()
            if arrived_by >= 0:
                out.append(arrived_by)
        else:
            rem[u, b] -= 1
            arc = u * A + b
            stack.append((arc % V, arc))
    out.reverse()
    return out


def realize_sample(table: CountTable) -> np.ndarray:
    """A sample whose cyclic k-block counts reproduce ``table``.

    For a connected table the round trip is exact.  A table with m > 1
    components yields the concatenation of per-component Eulerian samples
    (components in ascending order of their smallest vertex), whose type
    differs from table/n by at most k*A**(k-1)/n in total variation — the
    junctions corrupt at most (k-1) cyclic windows each.
    """
    if table.n == 0:
        raise ValueError("cannot realize an empty count table")
    A = table.alphabet_size
    symbols: list[int] = []
    for comp in components(table):
        for arc in _eulerian_circuit_arcs(table, comp[0]):
            symbols.append(arc % A)
    return np.asarray(symbols, dtype=np.int64)


def enumerate_strings_chunk(lo: int, hi: int, n: int, alphabet_size: int) -> np.ndarray:
    """Digit matrix (hi-lo, n) of the strings with codes lo..hi-1."""
    idx = np.arange(lo, hi, dtype=np.int64)
    out = np.empty((idx.size, n), dtype=np.int64)
    for j in range(n - 1, -1, -1):
        out[:, j] = idx % alphabet_size
        idx //= alphabet_size
    return out


def _chunked_count_matrices(
    n: int, k: int, alphabet_size: int
) -> Iterator[np.ndarray]:
    """Yield cyclic k-block count matrices for all A**n strings, in chunks."""
    total = alphabet_size**n
    n_words = alphabet_size**k
    rows = max(1, _CHUNK_CELLS // max(n_words, n))
    for lo in range(0, total, rows):
        hi = min(lo + rows, total)
        x = enumerate_strings_chunk(lo, hi, n, alphabet_size)
        codes = cyclic_window_codes(x, k, alphabet_size)
        offsets = np.arange(hi - lo, dtype=np.int64)[:, None] * n_words
        flat = np.bincount((offsets + codes).ravel(), minlength=(hi - lo) * n_words)
        yield flat.reshape(hi - lo, n_words)


def enumerate_types(n: int, k: int, alphabet_size: int) -> list[BlockDistribution]:
    """All distinct cyclic k-block types of strings of length n.

    Exhausts the A**n strings (guarded), so only viable at desk scale; the
    count is at most (n+1)**(A**k).  Types are returned in lexicographic
    order of their count vectors.
    """
    if alphabet_size**n > 1 << 24:
        raise ValueError("type enumeration limited to A**n <= 2**24 strings")
    if k > n:
        raise ValueError("block length exceeds string length")
    chunks = [np.unique(m, axis=0) for m in _chunked_count_matrices(n, k, alphabet_size)]
    types = np.unique(np.vstack(chunks), axis=0)
    return [
        BlockDistribution(alphabet_size, k, row / n, stationary=True) for row in types
    ]


def type_count_bound(n: int, k: int, alphabet_size: int) -> float:
    """Polynomial bound (n+1)**(A**k) on the number of k-block types.

    Computed in log space; returns inf when the value exceeds float range.
    """
    log_bound = alphabet_size**k * math.log(n + 1)
    return math.exp(log_bound) if log_bound < 709 else math.inf


@dataclass(frozen=True)
class TypeSizeBounds:
    """Sandwich bounds on the number of strings in a type class.

    ``euler_*`` are the factorial-ratio bounds from counting Eulerian
    circuits; ``entropy_*`` are the cruder exponential bounds
    (en)**(-2 A**k) * e**(n h_k)  <=  size  <=  (n-1) * e**(n h_k),
    the latter valid for n >= 2 (for n < 2 they are reported as (0, inf)).
    """

    euler_lower: float
    euler_upper: float
    entropy_lower: float
    entropy_upper: float


def type_class_size(table: CountTable, mode: str = "exact"):
    """Number of strings whose cyclic type is ``table`` (exact or bounded).

    Exact mode enumerates all A**n strings and requires n <= 16.  Bounds
    mode evaluates, per vertex u with outgoing count R_u > 0,

        prod (R_u - 1)! / prod N_w!   and   n * prod R_u! / prod N_w!

    (exact rational arithmetic), plus the entropy-form pair; the exact size
    always lies inside both intervals.
    """
    if mode == "exact":
        if table.n > 16:
            raise ValueError("exact type class size limited to n <= 16")
        target = table.counts
        matches = 0
        for m in _chunked_count_matrices(table.n, table.k, table.alphabet_size):
            matches += int((m == target).all(axis=1).sum())
        return matches
    if mode != "bounds":
        raise ValueError(f"mode must be 'exact' or 'bounds', got {mode!r}")

    denom = math.prod(math.factorial(int(c)) for c in table.counts if c > 0)
    degrees = [int(r) for r in table.out_degrees() if r > 0]
    lower = Fraction(math.prod(math.factorial(r - 1) for r in degrees), denom)
    upper = Fraction(table.n * math.prod(math.factorial(r) for r in degrees), denom)

    from .entropy import conditional_block_entropy  # local to avoid cycle

    h = conditional_block_entropy(table.to_distribution())
    n, n_words = table.n, table.alphabet_size**table.k
    if n >= 2:
        ent_lo = math.exp(n * h - 2 * n_words * math.log(math.e * n))
        # The factor n (not n-1) is forced by zero-entropy aperiodic
        # necklaces, whose class is all n rotations; it also follows from
        # the factorial upper bound since prod R_u!/prod N_w! <= e^{n h}.
        ent_hi = n * math.exp(n * h)
    else:
        ent_lo, ent_hi = 0.0, math.inf
    return TypeSizeBounds(float(lower), float(upper), ent_lo, ent_hi)


# ---------------------------------------------------------------------------
# Rounding a stationary law to a realizable type
# ---------------------------------------------------------------------------


def _arc_endpoints(w: int, alphabet_size: int, k: int) -> tuple[int, int]:
    V = alphabet_size ** (k - 1)
    return w // alphabet_size, w % V


def _find_fractional_cycle(
    frac_arcs: list[int], alphabet_size: int, k: int
) -> list[tuple[int, int]]:
    """An undirected cycle among the given arcs, as (arc, direction) pairs.

    Direction +1 means the arc is traversed from its tail to its head.
    Every vertex incident to a fractional arc of a balanced circulation has
    at least two incident fractional arc-slots, so a cycle always exists;
    self-loops count as cycles of length one.
    """
    A = alphabet_size
    for w in frac_arcs:
        u, v = _arc_endpoints(w, A, k)
        if u == v:
            return [(w, +1)]
    # vertex -> list of (arc, other endpoint, direction when leaving here)
    incid: dict[int, list[tuple[int, int, int]]] = {}
    for w in frac_arcs:
        u, v = _arc_endpoints(w, A, k)
        incid.setdefault(u, []).append((w, v, +1))
        incid.setdefault(v, []).append((w, u, -1))
    start = min(incid)
    path: list[tuple[int, int]] = []  # (arc, direction)
    at = start
    prev_arc = -1
    visited_at: dict[int, int] = {start: 0}
    while True:
        arc, nxt, direction = next(
            (w, v, d) for (w, v, d) in incid[at] if w != prev_arc
        )
        path.append((arc, direction))
        at, prev_arc = nxt, arc
        if at in visited_at:
            return path[visited_at[at] :]
        visited_at[at] = len(path)


def _shortest_support_cycle(
    z: np.ndarray, alphabet_size: int, k: int
) -> list[int]:
    """Arc codes of a shortest directed cycle in the support of ``z``.

    Self-loops win outright; otherwise a breadth-first search from every
    arc's head back to its tail, smallest start vertex and smallest symbols
    first, keeps the choice deterministic.
    """
    A, V = alphabet_size, alphabet_size ** (k - 1)
    support = np.flatnonzero(z > 0)
    if support.size == 0:
        raise ValueError("no cycle: empty support")
    loops = [int(w) for w in support if w // A == w % V]
    if loops:
        return [loops[0]]
    out_arcs: dict[int, list[int]] = {}
    for w in support:
        out_arcs.setdefault(int(w) // A, []).append(int(w))
    best: Optional[list[int]] = None
    for start in sorted(out_arcs):
        # BFS over vertices, tracking the arc used to reach each one
        parent: dict[int, tuple[int, int]] = {}
        frontier = [start]
        seen = {start}
        found = False
        while frontier and not found:
            nxt: list[int] = []
            for u in frontier:
                for w in out_arcs.get(u, ()):
                    v = w % V
                    if v == start:
                        parent[start] = (u, w)
                        found = True
                        break
                    if v not in seen:
                        seen.add(v)
                        parent[v] = (u, w)
                        nxt.append(v)
                if found:
                    break
            frontier = nxt
        if not found:
            continue
        cycle = []
        at = start
        while True:
            u, w = parent[at]
            cycle.append(w)
            at = u
            if at == start:
                break
        cycle.reverse()
        if best is None or len(cycle) < len(best):
            best = cycle
    if best is None:
        raise ValueError("no directed cycle in support")
    return best


def round_to_type(nu: BlockDistribution, n: int) -> BlockDistribution:
    """Nearest-in-spirit realizable type with denominator n.

    Stage 1 rounds the real circulation n*nu to integers by pushing mass
    around cycles of fractional arcs, never letting an arc cross an integer,
    so every count lands on floor or ceil of its target (balance is
    preserved by construction; push directions steer the total toward n).
    Stage 2 repairs any leftover total-mass mismatch one unit at a time
    (extra units on the all-zeros self-loop, removals along shortest
    support cycles).  Stage 3 restores realizability for disconnected
    supports by round-tripping through an Eulerian concatenation.

    The result is realizable and within (k+2)*A**k/n of ``nu`` in total
    variation.
    """
    if not nu.stationary:
        raise ValueError("round_to_type requires a stationary distribution")
    if n < nu.k:
        raise ValueError("need n >= k to realize a k-block type")
    A, k = nu.alphabet_size, nu.k
    target = nu.weights * n

    if k == 1:
        # single vertex: balance is vacuous, use largest-remainder rounding
        z = np.floor(target).astype(np.int64)
        rema = target - z
        short = n - int(z.sum())
        for w in np.argsort(-rema)[:short]:
            z[w] += 1
    else:
        z = target.copy()
        snap_tol = 1e-9 * max(1.0, float(n))
        for _ in range(z.size + 1):
            nearest = np.round(z)
            z[np.abs(z - nearest) <= snap_tol] = nearest[np.abs(z - nearest) <= snap_tol]
            frac_arcs = [int(w) for w in np.flatnonzero(np.abs(z - np.round(z)) > snap_tol)]
            if not frac_arcs:
                break
            cycle = _find_fractional_cycle(frac_arcs, A, k)
            up_room = min(
                (math.ceil(z[w]) - z[w]) if d > 0 else (z[w] - math.floor(z[w]))
                for w, d in cycle
            )
            down_room = min(
                (z[w] - math.floor(z[w])) if d > 0 else (math.ceil(z[w]) - z[w])
                for w, d in cycle
            )
            mass_coeff = sum(d for _, d in cycle)
            deficit = n - z.sum()
            sign = 1.0 if mass_coeff * deficit >= 0 else -1.0
            step = up_room if sign > 0 else down_room
            for w, d in cycle:
                z[w] += sign * d * step
        z = np.round(z).astype(np.int64)

        # total-mass repair (stage 1 can only land within a few units of n)
        while z.sum() < n:
            z[0] += 1  # self-loop at the all-zeros word
        while z.sum() > n:
            cycle = _shortest_support_cycle(z, A, k)
            if z.sum() - len(cycle) < n:
                # removing this cycle would overshoot; add zeros-loop units
                # first so the removal lands exactly on n
                z[0] += int(len(cycle) - (z.sum() - n))
            for w in cycle:
                z[w] -= 1

    table = CountTable(A, k, n, z)
    if len(components(table)) > 1:
        return empirical_block_measure(realize_sample(table), k, A)
    return table.to_distribution()


# ---------------------------------------------------------------------------
# Convex decomposition into simple-cycle measures
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class CycleMeasure:
    """Uniform measure on the arcs of one vertex-simple directed cycle.

    Each of the ell arcs carries weight 1/ell; since every vertex on the
    cycle has a unique successor, all conditionals are 0 or 1 and the
    conditional block entropy vanishes identically.
    """

    alphabet_size: int
    k: int
    arcs: tuple[int, ...]

    def __post_init__(self) -> None:
        if not self.arcs:
            raise ValueError("empty cycle")
        A, V = self.alphabet_size, self.alphabet_size ** (self.k - 1)
        sources = [w // A for w in self.arcs]
        if len(set(sources)) != len(sources):
            raise ValueError("cycle revisits a vertex")
        for w, w_next in zip(self.arcs, self.arcs[1:] + self.arcs[:1]):
            if w % V != w_next // A:
                raise ValueError("arcs do not chain into a closed cycle")

    @property
    def distribution(self) -> BlockDistribution:
        w = np.zeros(self.alphabet_size**self.k)
        w[list(self.arcs)] = 1.0 / len(self.arcs)
        return BlockDistribution(self.alphabet_size, self.k, w, stationary=True)


def cycle_decompose(nu: BlockDistribution) -> list[tuple[float, CycleMeasure]]:
    """Write a stationary law as a convex combination of cycle measures.

    Repeatedly takes a smallest-weight support arc, closes it into a
    vertex-simple cycle through the support (breadth-first, smallest
    symbols first), and subtracts that smallest weight from the whole
    cycle — zeroing at least one arc per round, so at most A**k rounds.
    The recombination error is at most the residual mass threshold 1e-11.
    """
    if not nu.stationary:
        raise ValueError("cycle decomposition requires a stationary distribution")
    A, k = nu.alphabet_size, nu.k
    V = A ** (k - 1)
    w = nu.weights.copy()
    parts: list[tuple[float, CycleMeasure]] = []
    residual_tol = 1e-11
    for _ in range(w.size + 1):
        total = float(w.sum())
        if total <= residual_tol:
            break
        masked = np.where(w > 1e-13, w, np.inf)
        a = int(np.argmin(masked))
        m = float(w[a])
        head, tail = a % V, a // A
        if head == tail:
            cycle = [a]
        else:
            path = _shortest_path_arcs(w, head, tail, A, k)
            cycle = [a] + path
        for arc in cycle:
            w[arc] -= m
        w[a] = 0.0
        np.clip(w, 0.0, None, out=w)
        parts.append((m * len(cycle), CycleMeasure(A, k, tuple(cycle))))
    else:
        raise RuntimeError("cycle decomposition failed to terminate")
    return parts


def _shortest_path_arcs(
    z: np.ndarray, source: int, target: int, alphabet_size: int, k: int
) -> list[int]:
    """Arc codes of a shortest directed support path source -> target (BFS,
    smallest appended symbol first)."""
    A, V = alphabet_size, alphabet_size ** (k - 1)
    parent: dict[int, tuple[int, int]] = {}
    frontier, seen = [source], {source}
    while frontier:
        nxt = []
        for u in frontier:
            for b in range(A):
                arc = u * A + b
                if z[arc] <= 1e-13:
                    continue
                v = arc % V
                if v in seen:
                    continue
                seen.add(v)
                parent[v] = (u, arc)
                if v == target:
                    path = []
                    at = v
                    while at != source:
                        pu, pw = parent[at]
                        path.append(pw)
                        at = pu
                    path.reverse()
                    return path
                nxt.append(v)
        frontier = nxt
    raise ValueError("support is not strongly connected along the needed path")


@lru_cache(maxsize=None)
def enumerate_simple_cycles(alphabet_size: int, k: int) -> tuple[tuple[int, ...], ...]:
    """All vertex-simple directed cycles of the full de Bruijn graph.

    Cycles are rooted at their smallest vertex and enumerated by depth-first
    search restricted to vertices >= the root, so each cycle appears exactly
    once (as a tuple of arc codes).  Exponential in general — intended for
    desk-scale oracle work.
    """
    A, V = alphabet_size, alphabet_size ** (k - 1)
    cycles: list[tuple[int, ...]] = []

    def extend(root: int, u: int, arcs: list[int], visited: set[int]) -> None:
        for b in range(A):
            arc = u * A + b
            v = arc % V
            if v == root:
                cycles.append(tuple(arcs + [arc]))
            elif v > root and v not in visited:
                visited.add(v)
                extend(root, v, arcs + [arc], visited)
                visited.remove(v)

    for root in range(V):
        extend(root, root, [], {root})
    return tuple(cycles)
