# Copyright 2025 H2so4 Consulting LLC

import itertools
import logging
from dataclasses import dataclass
from functools import lru_cache
from typing import Dict, FrozenSet, List, Optional, Sequence, Tuple

import networkx as nx

from .agraphs import AGraph, basis_of
from .models import CyclicWord, InputError, Letter, Word, letter_key, signed_letters
from .text_utils import render_letters
from .words import cyclic_length, cyclic_reduce, reduce_letters, strip_conjugator

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class WhiteheadGraph:
    rank: int
    edges: Tuple[Tuple[Letter, Letter], ...]  # unordered pairs, stored sorted; a multiset

    def to_networkx(self) -> nx.MultiGraph:
        g = nx.MultiGraph()
        g.add_nodes_from(signed_letters(self.rank))
        g.add_edges_from(self.edges)
        return g


@dataclass(frozen=True)
class WhiteheadMove:
    # WhiteheadMove: multiplier a and affected set S (a in S, a^-1 not in S). Generator
    # x != a^{+-1} goes to a^-[x^-1 in S] . x . a^[x in S]; a is fixed.
    multiplier: Letter
    affected: FrozenSet[Letter]

    def validate(self, rank: int) -> None:
        a, s = self.multiplier, self.affected
        if a == 0 or abs(a) > rank:
            raise InputError(f"multiplier {a} outside rank {rank}")
        if a not in s or -a in s:
            raise InputError("affected set must contain the multiplier and not its inverse")
        if any(x == 0 or abs(x) > rank for x in s):
            raise InputError(f"affected set has letters outside rank {rank}")

    def images(self, rank: int) -> Dict[Letter, Tuple[Letter, ...]]:
        a, s = self.multiplier, self.affected
        out: Dict[Letter, Tuple[Letter, ...]] = {}
        for g in range(1, rank + 1):
            if g == abs(a):
                img: Tuple[Letter, ...] = (g,)
            else:
                img = ((-a,) if -g in s else ()) + (g,) + ((a,) if g in s else ())
            out[g] = img
            out[-g] = tuple(-x for x in reversed(img))
        return out

    def inverse(self) -> "WhiteheadMove":
        a = self.multiplier
        return WhiteheadMove(-a, frozenset((self.affected - {a}) | {-a}))

    def sort_key(self) -> Tuple:
        return (letter_key(self.multiplier), tuple(sorted(letter_key(x) for x in self.affected)))

    def __str__(self) -> str:
        members = ", ".join(render_letters((x,)) for x in sorted(self.affected, key=letter_key))
        return f"({render_letters((self.multiplier,))}; {{{members}}})"


@lru_cache(maxsize=None)
def _move_table(rank: int) -> Tuple[Tuple[WhiteheadMove, Dict[Letter, Tuple[Letter, ...]]], ...]:
    # every nontrivial move for this rank, lexicographically ordered, with its letter images
    letters = signed_letters(rank)
    moves = []
    for a in letters:
        others = [x for x in letters if x not in (a, -a)]
        for k in range(1, len(others) + 1):
            for extra in itertools.combinations(others, k):
                moves.append(WhiteheadMove(a, frozenset((a,) + extra)))
    moves.sort(key=WhiteheadMove.sort_key)
    return tuple((m, m.images(rank)) for m in moves)


def enumerate_moves(rank: int) -> List[WhiteheadMove]:
    return [m for m, _ in _move_table(rank)]


def _image(letters: Sequence[Letter], table: Dict[Letter, Tuple[Letter, ...]]) -> Tuple[Letter, ...]:
    out: List[Letter] = []
    for x in letters:
        for y in table[x]:
            if out and out[-1] == -y:
                out.pop()
            else:
                out.append(y)
    return tuple(out)


def whitehead_graph(w: CyclicWord, rank: int) -> WhiteheadGraph:
    # whitehead_graph: one edge {x, y^-1} per cyclic adjacency x.y of w.
    ls = w.rep.letters
    if not ls:
        raise InputError("the empty word has no Whitehead graph")
    n = len(ls)
    edges = []
    for i in range(n):
        x, y = ls[i], -ls[(i + 1) % n]
        edges.append(tuple(sorted((x, y), key=letter_key)))
    edges.sort(key=lambda e: (letter_key(e[0]), letter_key(e[1])))
    return WhiteheadGraph(rank, tuple(edges))


def is_whitehead_nonprimitive_certificate(w: CyclicWord, rank: int) -> bool:
    # connected and cut-vertex free Whitehead graph => w is not primitive (sufficient only)
    if len(w) < 2:
        return False
    simple = nx.Graph(whitehead_graph(w, rank).to_networkx())
    if not nx.is_connected(simple):
        return False
    return next(nx.articulation_points(simple), None) is None


def apply_move(m: WhiteheadMove, w: Word, rank: int) -> Word:
    m.validate(rank)
    if w.max_generator() > rank:
        raise InputError(f"{w} uses letters outside rank {rank}")
    return Word(_image(w.letters, m.images(rank)))


def minimize(w: Word, rank: int) -> Tuple[CyclicWord, List[WhiteheadMove]]:
    # minimize: greedy descent on (cyclic length, length). Each step takes the move with the
    # largest decrease, ties broken by the lexicographically least move.
    if not w:
        raise InputError("cannot minimize the trivial word")
    if w.max_generator() > rank:
        raise InputError(f"{w} uses letters outside rank {rank}")
    current = w.letters
    chain: List[WhiteheadMove] = []
    table = _move_table(rank)
    while True:
        best_key = (cyclic_length(current), len(current))
        best: Optional[Tuple[WhiteheadMove, Tuple[Letter, ...]]] = None
        for move, images in table:
            img = _image(current, images)
            key = (cyclic_length(img), len(img))
            if key < best_key:
                best_key, best = key, (move, img)
        # end for  # moves loop
        if best is None:
            break
        chain.append(best[0])
        current = best[1]
        log.debug("whitehead step %s -> length %d", best[0], len(current))
    # end while  # descent
    core, _ = cyclic_reduce(Word(current))
    return core, chain
    # minimize  # minimize


@lru_cache(maxsize=200_000)
def _is_primitive_core(letters: Tuple[Letter, ...], rank: int) -> bool:
    # cyclic-length descent on cyclic cores; any strictly shortening move will do
    current = letters
    table = _move_table(rank)
    while len(current) > 1:
        for _, images in table:
            _, img = strip_conjugator(_image(current, images))
            if len(img) < len(current):
                current = img
                break
        else:
            return False
    return True


def is_primitive(w: Word, rank: int) -> bool:
    if not w:
        raise InputError("the trivial word is not primitive")
    if w.max_generator() > rank:
        raise InputError(f"{w} uses letters outside rank {rank}")
    _, core = strip_conjugator(w.letters)
    return _is_primitive_core(core, rank)


def is_primitive_loop(g: AGraph, w: Word, letter_order: Optional[Sequence[Letter]] = None) -> bool:
    # is_primitive_loop: is the loop w at the base primitive in pi_1(g, base)?
    spanning = basis_of(g, letter_order)
    u = spanning.rewrite(w)
    if not u:
        raise InputError(f"{w} is trivial in the fundamental group")
    return is_primitive(u, spanning.rank)
