# Copyright 2025 H2so4 Consulting LLC

import logging
import math
import time
from concurrent.futures import ThreadPoolExecutor
from typing import Callable, Dict, Iterator, List, Optional, Tuple

from .agraphs import (AGraph, accepts_loop, arc_crossings, canonical_form, canonicalize,
                      conjugate_subgroup, cycle_graph, fold, is_subgroup_of, maximal_arcs,
                      merge_and_fold, subgroup_of_graph)
from .agraphs import rank as graph_rank
from .models import (ArcProfile, InputError, PiRankReport, ResourceLimitError, Subgroup,
                     Word)
from .whitehead import is_primitive, is_primitive_loop, is_whitehead_nonprimitive_certificate
from .words import cyclic_reduce

log = logging.getLogger(__name__)

DEFAULT_MAX_STATES = 10_000_000


def _expand(g: AGraph) -> List[Tuple[bytes, AGraph]]:
    # every single-pair merge of g, folded and canonically numbered
    out = []
    for u in range(g.num_vertices):
        for v in range(u + 1, g.num_vertices):
            q = canonicalize(merge_and_fold(g, u, v))
            out.append((canonical_form(q), q))
    return out


def quotient_closure(g: AGraph, bound: Optional[int] = None, threads: int = 1,
                     expand_if: Optional[Callable[[AGraph], bool]] = None) -> Iterator[AGraph]:
    # quotient_closure: every distinct folded quotient of g, each yielded once.
    # Breadth-first over "merge a vertex pair, then fold", memoized by canonical form.
    # Each level is expanded (optionally on a thread pool) and merged in state order, so
    # the emission order does not depend on `threads`. `expand_if` restricts which states
    # get expanded; leaving it unset keeps the closure exhaustive.
    start = canonicalize(fold(g))
    seen = {canonical_form(start)}
    level = [start]
    yield start
    pool = ThreadPoolExecutor(max_workers=threads) if threads > 1 else None
    try:
        depth = 0
        while level:
            frontier = [q for q in level if expand_if is None or expand_if(q)]
            if pool is not None:
                expansions = pool.map(_expand, frontier)
            else:
                expansions = map(_expand, frontier)
            nxt: List[AGraph] = []
            for children in expansions:
                for key, q in children:
                    if key in seen:
                        continue
                    seen.add(key)
                    if bound is not None and len(seen) > bound:
                        log.warning("quotient search stopped at %d states", len(seen))
                        raise ResourceLimitError(
                            f"quotient search exceeded the state bound of {bound}",
                            bound, len(seen))
                    nxt.append(q)
                    yield q
                # end for  # children loop
            # end for  # expansions loop
            depth += 1
            log.debug("quotient closure level %d: %d new states, %d total",
                      depth, len(nxt), len(seen))
            level = nxt
        # end while  # levels
    finally:
        if pool is not None:
            pool.shutdown(wait=True)
    # quotient_closure  # quotient_closure


def primitivity_rank(w: Word, rank: int, max_states: int = DEFAULT_MAX_STATES,
                     threads: int = 1, heuristic: bool = False) -> PiRankReport:
    # primitivity_rank: pi(w) and Crit(w) from the folded quotients of the cycle graph.
    # The closure is always run to completion; primitivity is then tested in ascending
    # rank order on quotients of rank <= r, stopping at the first rank with a
    # non-primitive witness. Quotients of higher rank cannot matter: a non-primitive w has
    # F_r itself as a witness, and a primitive w of F_r stays primitive in every subgroup.
    if not w:
        raise InputError("the trivial word has no primitivity rank")
    if w.max_generator() > rank:
        raise InputError(f"{w} uses letters outside rank {rank}")
    started = time.perf_counter()
    core, conjugator = cyclic_reduce(w)
    target = core.rep
    g = cycle_graph(core, rank)

    expand_if = None
    if heuristic:
        # unsound pruning: rank is not monotone along merge chains
        expand_if = lambda q: graph_rank(q) <= rank  # noqa: E731

    by_rank: Dict[int, List[AGraph]] = {}
    explored = 0
    for q in quotient_closure(g, bound=max_states, threads=threads, expand_if=expand_if):
        explored += 1
        k = graph_rank(q)
        if k <= rank:
            by_rank.setdefault(k, []).append(q)
    # end for  # closure stream

    tests = 0
    pi = math.inf
    witnesses: List[AGraph] = []
    for k in sorted(by_rank):
        for q in by_rank[k]:
            tests += 1
            if not is_primitive_loop(q, target):
                witnesses.append(q)
        # end for  # quotients of rank k
        if witnesses:
            pi = k
            break
    # end for  # ascending ranks

    crit: Dict[bytes, Subgroup] = {}
    for q in witnesses:
        h = conjugate_subgroup(subgroup_of_graph(q), conjugator)
        crit[h.key] = h
    members = tuple(crit[key] for key in sorted(crit))

    report = PiRankReport(
        word=w,
        cyclic_word=core,
        conjugator=conjugator,
        pi=pi,
        crit=members,
        quotients_explored=explored,
        primitivity_tests=tests,
        elapsed=time.perf_counter() - started,
        rank=rank,
        certificate=len(core) >= 2 and is_whitehead_nonprimitive_certificate(core, rank),
        heuristic=heuristic,
    )
    _audit(report)
    log.debug("pi(%s) = %s with %d critical subgroups (%d states, %d tests)",
              w, pi, len(members), explored, tests)
    return report
    # primitivity_rank  # primitivity_rank


def _audit(report: PiRankReport) -> None:
    # _audit: self-checks on every report; failures are bugs, not user errors.
    if (report.pi == math.inf) != (not report.crit):
        raise RuntimeError("pi is infinite exactly when Crit is empty")
    if report.crit and not 1 <= report.pi <= report.rank:
        raise RuntimeError(f"pi = {report.pi} outside 1..{report.rank}")
    if report.pi == math.inf and not report.heuristic and not is_primitive(report.word, report.rank):
        raise RuntimeError(f"{report.word} is not primitive but no critical subgroup was found")
    if report.certificate and report.pi == math.inf and not report.heuristic:
        raise RuntimeError(f"Whitehead certificate fired on primitive word {report.word}")
    for h in report.crit:
        if h.rank != report.pi:
            raise RuntimeError(f"critical subgroup of rank {h.rank}, expected {report.pi}")
        if not accepts_loop(h.graph, report.word):
            raise RuntimeError(f"critical subgroup does not contain {report.word}")
        if is_primitive_loop(h.graph, report.word):
            raise RuntimeError(f"{report.word} is primitive in a critical subgroup")
    # end for  # crit audit


def maximal_critical_subgroups(report: PiRankReport) -> Tuple[Subgroup, ...]:
    # Crit members not properly contained in another member
    return tuple(
        h for h in report.crit
        if not any(k.key != h.key and is_subgroup_of(h, k) for k in report.crit)
    )


def long_arc_profile(report: PiRankReport) -> Tuple[ArcProfile, ...]:
    # long_arc_profile: per Crit member, the longest maximal arc and how often the loop
    # of w runs through it.
    out = []
    for h in report.crit:
        arcs = maximal_arcs(h.graph)
        crossings = arc_crossings(h.graph, report.word)
        best = max(range(len(arcs)), key=lambda k: (len(arcs[k]), -k))
        out.append(ArcProfile(longest_arc=len(arcs[best]), crossings=crossings[best],
                              arc_count=len(arcs)))
    return tuple(out)
