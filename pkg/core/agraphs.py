# Copyright 2025 H2so4 Consulting LLC

import math
from collections import deque
from dataclasses import dataclass
from typing import Dict, FrozenSet, Iterable, List, Optional, Sequence, Tuple

from .models import (Arc, CyclicWord, InputError, Letter, MembershipError, Rank,
                     Subgroup, Word, letter_key, signed_letters)
from .words import inverse_letters, reduce_letters

Edge = Tuple[int, int, int]  # (origin, terminus, positive label)


class AGraph:
    # AGraph: finite pointed graph labeled by generators 1..rank. Each topological edge is
    # stored once in its positive orientation; vertex degree counts both orientations.
    # Instances are immutable; every operation below builds a new graph.

    __slots__ = ("num_vertices", "edges", "base", "rank", "_adjacency", "_folded")

    def __init__(self, num_vertices: int, edges: Iterable[Edge], base: int = 0, rank: int = 2):
        # __init__: validate vertex/label ranges and sort edges by (origin, label, terminus).
        if num_vertices < 1:
            raise InputError("a graph needs at least one vertex")
        if not 0 <= base < num_vertices:
            raise InputError(f"base vertex {base} out of range")
        checked = []
        for e in edges:
            u, v, a = (int(t) for t in e)
            if not (0 <= u < num_vertices and 0 <= v < num_vertices):
                raise InputError(f"edge {e} has an endpoint out of range")
            if not 1 <= a <= rank:
                raise InputError(f"edge {e} has label outside 1..{rank}")
            checked.append((u, v, a))
        # end for  # edges loop
        self.num_vertices = num_vertices
        self.edges: Tuple[Edge, ...] = tuple(sorted(checked, key=lambda e: (e[0], e[2], e[1])))
        self.base = base
        self.rank = rank
        self._adjacency = None
        self._folded = None
        # __init__  # AGraph.__init__

    def __repr__(self) -> str:
        return f"AGraph(n={self.num_vertices}, base={self.base}, edges={list(self.edges)})"

    @property
    def volume(self) -> int:
        return len(self.edges)

    def adjacency(self) -> List[List[Tuple[Letter, int, int]]]:
        # adjacency: per vertex, oriented edges out of it as (letter, target, edge index),
        # sorted by letter order a < A < b < B.
        if self._adjacency is None:
            adj: List[List[Tuple[Letter, int, int]]] = [[] for _ in range(self.num_vertices)]
            for i, (u, v, a) in enumerate(self.edges):
                adj[u].append((a, v, i))
                adj[v].append((-a, u, i))
            for row in adj:
                row.sort(key=lambda t: (letter_key(t[0]), t[1], t[2]))
            self._adjacency = adj
        return self._adjacency
        # adjacency  # AGraph.adjacency

    def degree(self, v: int) -> int:
        return len(self.adjacency()[v])

    def is_folded(self) -> bool:
        if self._folded is None:
            self._folded = all(
                len({t[0] for t in row}) == len(row) for row in self.adjacency()
            )
        return self._folded

    def transitions(self) -> List[Dict[Letter, Tuple[int, int]]]:
        # transitions: letter -> (target, edge index) per vertex; only defined when folded.
        if not self.is_folded():
            raise InputError("path reading requires a folded graph")
        return [{x: (t, i) for x, t, i in row} for row in self.adjacency()]

    def is_connected(self) -> bool:
        seen = {self.base}
        queue = deque([self.base])
        adj = self.adjacency()
        while queue:
            v = queue.popleft()
            for _, t, _ in adj[v]:
                if t not in seen:
                    seen.add(t)
                    queue.append(t)
        return len(seen) == self.num_vertices

# AGraph


@dataclass(frozen=True)
class VertexPartition:
    blocks: Tuple[Tuple[int, ...], ...]

    def validate(self, num_vertices: int) -> None:
        seen = set()
        for block in self.blocks:
            if not block:
                raise InputError("partition blocks must be nonempty")
            for v in block:
                if v in seen or not 0 <= v < num_vertices:
                    raise InputError(f"partition does not match the vertex set (vertex {v})")
                seen.add(v)
        if len(seen) != num_vertices:
            raise InputError("partition does not cover every vertex")


def fold_with_map(num_vertices: int, edges: Sequence[Edge], base: int, rank: int,
                  merges: Iterable[Tuple[int, int]] = ()) -> Tuple[AGraph, List[int]]:
    # fold_with_map: Stallings folding by union-find over vertices. Collisions of
    # (vertex, letter) go on a FIFO worklist; extra vertex identifications may be queued
    # up front via `merges`. Returns the folded graph and the old -> new vertex map.
    parent = list(range(num_vertices))

    def find(x: int) -> int:
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    table: List[Optional[Dict[Letter, int]]] = [dict() for _ in range(num_vertices)]
    pending = deque(merges)

    for u, v, a in edges:
        s = table[u].get(a)
        if s is None:
            table[u][a] = v
        else:
            pending.append((s, v))
        s = table[v].get(-a)
        if s is None:
            table[v][-a] = u
        else:
            pending.append((s, u))
    # end for  # edges loop

    while pending:
        x, y = pending.popleft()
        x, y = find(x), find(y)
        if x == y:
            continue
        if len(table[x]) < len(table[y]):
            x, y = y, x
        parent[y] = x
        absorbed, keep = table[y], table[x]
        table[y] = None
        for a, t in absorbed.items():
            s = keep.get(a)
            if s is None:
                keep[a] = t
            else:
                pending.append((s, t))
    # end while  # pending merges

    roots = sorted({find(v) for v in range(num_vertices)})
    renum = {x: i for i, x in enumerate(roots)}
    new_edges = [
        (renum[x], renum[find(t)], a)
        for x in roots for a, t in table[x].items() if a > 0
    ]
    graph = AGraph(len(roots), new_edges, renum[find(base)], rank)
    graph._folded = True
    return graph, [renum[find(v)] for v in range(num_vertices)]
    # fold_with_map  # fold_with_map


def fold(g: AGraph) -> AGraph:
    if g.is_folded():
        return g
    return fold_with_map(g.num_vertices, g.edges, g.base, g.rank)[0]


def merge_and_fold(g: AGraph, u: int, v: int) -> AGraph:
    return fold_with_map(g.num_vertices, g.edges, g.base, g.rank, [(u, v)])[0]


def _edge_for(u: int, v: int, x: Letter) -> Edge:
    return (u, v, x) if x > 0 else (v, u, -x)


def _default_rank(w: Word, rank: Optional[int]) -> int:
    return rank if rank is not None else max(2, w.max_generator())


def cycle_graph(w: CyclicWord, rank: Optional[int] = None) -> AGraph:
    # cycle_graph: C_w, the circle reading w from the base vertex 0.
    word = w.rep if isinstance(w, CyclicWord) else w
    n = len(word)
    if n == 0:
        raise InputError("cannot build the cycle graph of the empty word")
    edges = [_edge_for(i, (i + 1) % n, x) for i, x in enumerate(word.letters)]
    g = AGraph(n, edges, 0, _default_rank(word, rank))
    if not g.is_folded():
        raise InputError(f"{word} is not cyclically reduced")
    return g


def path_graph(w: Word, rank: Optional[int] = None) -> AGraph:
    n = len(w)
    if n == 0:
        raise InputError("cannot build the path graph of the empty word")
    edges = [_edge_for(i, i + 1, x) for i, x in enumerate(w.letters)]
    return AGraph(n + 1, edges, 0, _default_rank(w, rank))


def rose(rank: int) -> AGraph:
    return AGraph(1, [(0, 0, a) for a in range(1, rank + 1)], 0, rank)


def quotient(g: AGraph, partition: VertexPartition) -> AGraph:
    # quotient: collapse each block to one vertex, then fold.
    partition.validate(g.num_vertices)
    merges = [(block[0], v) for block in partition.blocks for v in block[1:]]
    return fold_with_map(g.num_vertices, g.edges, g.base, g.rank, merges)[0]


def rank(g: AGraph) -> int:
    if not g.is_connected():
        raise InputError("rank is defined for connected graphs only")
    return len(g.edges) - g.num_vertices + 1


def index(g: AGraph) -> Rank:
    # index: vertex count when every vertex has degree 2r, else infinite.
    if not g.is_folded():
        raise InputError("index requires a folded graph")
    full = 2 * g.rank
    if all(g.degree(v) == full for v in range(g.num_vertices)):
        return g.num_vertices
    return math.inf


def maximal_arcs(g: AGraph) -> List[Arc]:
    # maximal_arcs: closures of the components left after deleting the base and every
    # vertex of degree >= 3. Walks start from those breakpoints and run through degree-2
    # vertices; an arc may also end at a degree-1 vertex.
    adj = g.adjacency()
    breakpoints = {v for v in range(g.num_vertices) if v == g.base or len(adj[v]) >= 3}
    used = [False] * len(g.edges)
    arcs: List[Arc] = []

    for start in sorted(breakpoints):
        for x, t, i in adj[start]:
            if used[i]:
                continue
            steps = []
            labels = []
            v, letter, target, edge = start, x, t, i
            while True:
                used[edge] = True
                steps.append((edge, 1 if letter > 0 else -1))
                labels.append(letter)
                v = target
                if v in breakpoints or len(adj[v]) != 2:
                    break
                # continue through the other oriented edge at a degree-2 vertex
                nxt = [(y, s, j) for y, s, j in adj[v] if not (j == edge and y == -letter)]
                letter, target, edge = nxt[0]
            # end while  # arc walk
            arcs.append(Arc(tuple(steps), start, v, Word(tuple(labels))))
        # end for  # oriented edges at breakpoint
    # end for  # breakpoints loop
    return arcs
    # maximal_arcs  # maximal_arcs


def trace(g: AGraph, w: Word, start: Optional[int] = None) -> Optional[Tuple[int, List[int]]]:
    # trace: follow w from `start` (default base); returns (end vertex, edge indices) or None.
    trans = g.transitions()
    v = g.base if start is None else start
    crossed = []
    for x in w.letters:
        hop = trans[v].get(x)
        if hop is None:
            return None
        v, e = hop
        crossed.append(e)
    return v, crossed


def reads_word(g: AGraph, w: Word) -> bool:
    # reads_word: some path (from any vertex) is labeled w; advance the state set letter by letter.
    trans = g.transitions()
    states = set(range(g.num_vertices))
    for x in w.letters:
        states = {trans[v][x][0] for v in states if x in trans[v]}
        if not states:
            return False
    return True


def accepts_loop(g: AGraph, w: Word) -> bool:
    result = trace(g, w)
    return result is not None and result[0] == g.base


def trim_core(g: AGraph) -> AGraph:
    # trim_core: strip hanging trees, keeping the base vertex.
    degree = [g.degree(v) for v in range(g.num_vertices)]
    alive = [True] * g.num_vertices
    edge_alive = [True] * len(g.edges)
    adj = g.adjacency()
    queue = deque(v for v in range(g.num_vertices) if v != g.base and degree[v] <= 1)
    while queue:
        v = queue.popleft()
        if not alive[v]:
            continue
        alive[v] = False
        for _, t, i in adj[v]:
            if edge_alive[i]:
                edge_alive[i] = False
                degree[t] -= 1
                if t != g.base and alive[t] and degree[t] <= 1:
                    queue.append(t)
    # end while  # pruning queue
    if all(alive):
        return g
    keep = [v for v in range(g.num_vertices) if alive[v]]
    renum = {v: i for i, v in enumerate(keep)}
    edges = [(renum[u], renum[v], a) for i, (u, v, a) in enumerate(g.edges) if edge_alive[i]]
    out = AGraph(len(keep), edges, renum[g.base], g.rank)
    out._folded = g._folded
    return out


def is_core(g: AGraph) -> bool:
    return trim_core(g) is g


def canonical_order(g: AGraph) -> List[int]:
    # canonical_order: BFS from the base taking letters in order a < A < b < B; in a folded
    # graph each (vertex, letter) has at most one successor, so the order is label-determined.
    adj = g.adjacency()
    if not g.is_folded():
        raise InputError("canonical form requires a folded graph")
    order = [g.base]
    seen = {g.base}
    head = 0
    while head < len(order):
        v = order[head]
        head += 1
        for _, t, _ in adj[v]:
            if t not in seen:
                seen.add(t)
                order.append(t)
    if len(order) != g.num_vertices:
        raise InputError("canonical form requires a connected graph")
    return order


def canonicalize(g: AGraph) -> AGraph:
    order = canonical_order(g)
    renum = {v: i for i, v in enumerate(order)}
    out = AGraph(g.num_vertices, [(renum[u], renum[v], a) for u, v, a in g.edges], 0, g.rank)
    out._folded = True
    return out


def canonical_form(g: AGraph) -> bytes:
    # canonical_form: equal iff isomorphic as pointed labeled graphs (folded, connected).
    order = canonical_order(g)
    renum = {v: i for i, v in enumerate(order)}
    edges = sorted((renum[u], a, renum[v]) for u, v, a in g.edges)
    body = ";".join(f"{u},{a},{v}" for u, a, v in edges)
    return f"{g.num_vertices}|{body}".encode("ascii")


@dataclass(frozen=True)
class SpanningBasis:
    tree: FrozenSet[int]
    basis: Tuple[Word, ...]
    generator_of_edge: Dict[int, int]
    graph: AGraph

    @property
    def rank(self) -> int:
        return len(self.basis)

    def rewrite(self, w: Word) -> Word:
        # rewrite: express a loop at the base in the basis letters, recording each crossing
        # of a non-tree edge (sign = direction of travel).
        trans = self.graph.transitions()
        v = self.graph.base
        out = []
        for x in w.letters:
            hop = trans[v].get(x)
            if hop is None:
                raise MembershipError(f"{w} is not readable from the base vertex")
            v, e = hop
            j = self.generator_of_edge.get(e)
            if j is not None:
                out.append(j if x > 0 else -j)
        if v != self.graph.base:
            raise MembershipError(f"{w} does not label a closed path at the base vertex")
        return Word(reduce_letters(out))

    def expand(self, u: Word) -> Word:
        out: Tuple[Letter, ...] = ()
        for j in u.letters:
            piece = self.basis[abs(j) - 1]
            out = reduce_letters(out + (piece.letters if j > 0 else inverse_letters(piece.letters)))
        return Word(out)


def basis_of(g: AGraph, letter_order: Optional[Sequence[Letter]] = None) -> SpanningBasis:
    # basis_of: BFS spanning tree from the base; one basis word per non-tree edge,
    # tree-path(base -> u) . label(e) . tree-path(v -> base).
    if not g.is_folded():
        raise InputError("basis_of requires a folded graph")
    if letter_order is None:
        rank_order = {x: k for k, x in enumerate(signed_letters(g.rank))}
    else:
        rank_order = {x: k for k, x in enumerate(letter_order)}
    adj = g.adjacency()
    prefix: Dict[int, Tuple[Letter, ...]] = {g.base: ()}
    tree = set()
    queue = deque([g.base])
    while queue:
        v = queue.popleft()
        for x, t, i in sorted(adj[v], key=lambda h: rank_order[h[0]]):
            if t not in prefix:
                prefix[t] = prefix[v] + (x,)
                tree.add(i)
                queue.append(t)
    # end while  # BFS
    if len(prefix) != g.num_vertices:
        raise InputError("basis_of requires a connected graph")
    basis = []
    generator_of_edge = {}
    for i, (u, v, a) in enumerate(g.edges):
        if i in tree:
            continue
        basis.append(Word(reduce_letters(prefix[u] + (a,) + inverse_letters(prefix[v]))))
        generator_of_edge[i] = len(basis)
    return SpanningBasis(frozenset(tree), tuple(basis), generator_of_edge, g)
    # basis_of  # basis_of


def subgroup_of_graph(g: AGraph) -> Subgroup:
    # subgroup_of_graph: the Subgroup represented by (g, base): core, canonical numbering, basis.
    core = canonicalize(trim_core(fold(g)))
    spanning = basis_of(core)
    return Subgroup(
        graph=core,
        basis=spanning.basis,
        rank=rank(core),
        index=index(core),
        key=canonical_form(core),
    )


def wedge(gens: Sequence[Word], rank: int) -> AGraph:
    # wedge: one loop per nontrivial generator, all through the base vertex 0.
    edges: List[Edge] = []
    n = 1
    for w in gens:
        k = len(w)
        if k == 0:
            continue
        path = [0] + list(range(n, n + k - 1)) + [0]
        n += k - 1
        for i, x in enumerate(w.letters):
            edges.append(_edge_for(path[i], path[i + 1], x))
    return AGraph(n, edges, 0, rank)


def stallings_from_generators(gens: Sequence[Word], rank: int) -> Subgroup:
    for w in gens:
        if w.max_generator() > rank:
            raise InputError(f"generator {w} uses letters outside rank {rank}")
    return subgroup_of_graph(wedge(gens, rank))


def is_subgroup_of(h: Subgroup, k: Subgroup) -> bool:
    return all(accepts_loop(k.graph, b) for b in h.basis)


def conjugate_subgroup(h: Subgroup, c: Word) -> Subgroup:
    # c H c^-1
    if not c:
        return h
    cl, ci = c.letters, inverse_letters(c.letters)
    gens = [Word(reduce_letters(cl + b.letters + ci)) for b in h.basis]
    return stallings_from_generators(gens, h.graph.rank)


def apply_letter_map(g: AGraph, images: Sequence[Letter]) -> AGraph:
    # relabel by a basis permutation/inversion; inverted generators flip their edges
    edges = []
    for u, v, a in g.edges:
        b = images[a - 1]
        edges.append((u, v, b) if b > 0 else (v, u, -b))
    out = AGraph(g.num_vertices, edges, g.base, g.rank)
    out._folded = g._folded
    return out


def arc_crossings(g: AGraph, w: Word) -> List[int]:
    # arc_crossings: how often the loop w at the base runs through each maximal arc.
    arcs = maximal_arcs(g)
    result = trace(g, w)
    if result is None or result[0] != g.base:
        raise MembershipError(f"{w} does not label a closed path at the base vertex")
    first_edge = {arc.edges[0][0]: k for k, arc in enumerate(arcs)}
    counts = [0] * len(arcs)
    for e in result[1]:
        k = first_edge.get(e)
        if k is not None:
            counts[k] += 1
    return counts
