# Copyright 2025 H2so4 Consulting LLC

import logging
import math
import sys
from concurrent.futures import ThreadPoolExecutor
from dataclasses import replace
from fractions import Fraction
from typing import Dict, Iterable, List, Optional, Sequence, Tuple

import numpy as np
from tqdm import tqdm

from .agraphs import AGraph, path_graph, reads_word
from .agraphs import rank as graph_rank
from .hash_utils import derive_seed
from .models import (CheckMode, CyclicWord, DecayFit, GenericityReport, InputError, Letter,
                     ParamSet, Readability, ResourceLimitError, SubwordReadability,
                     SurveyRow, SurveyTable, Word, letter_key)
from .pirank import DEFAULT_MAX_STATES, primitivity_rank, quotient_closure
from .whitehead import is_primitive
from .words import (contains_all_two_letter_subwords, cyclic_reduce,
                    cyclic_sphere_size, enumerate_cyclic_classes, enumerate_words,
                    inverse_letters, is_proper_power, sample_word, sphere_size)

log = logging.getLogger(__name__)

WILSON_Z = 1.96

# survey columns, in report order
PI_IS_R = "pi_r"
CRIT_IS_WHOLE = "pi_r_crit_whole"
PROPER_POWER = "proper_power"
PRIMITIVE = "primitive"
IN_P = "in_P"
IN_P_PRIME = "in_P_prime"


def validate_params(p: ParamSet) -> List[str]:
    # validate_params: every violated inequality, in exact rational arithmetic.
    violations = []
    lam, mu, L, r = Fraction(p.lam), Fraction(p.mu), p.L, p.r
    if not 0 < mu <= 1:
        violations.append("0 < mu <= 1")
    if not 0 < lam < 1:
        violations.append("0 < lambda < 1")
    if L < 2:
        violations.append("L >= 2")
    if r < 2:
        violations.append("r >= 2")
    if violations:
        return violations
    bound_L = mu / (15 * L + 3 * mu)
    bound_r = mu / (15 * r + 3 * mu)
    if not lam <= bound_L:
        violations.append("lambda <= mu/(15L+3mu)")
    if not bound_L <= bound_r:
        violations.append("mu/(15L+3mu) <= mu/(15r+3mu), i.e. L >= r")
    if not bound_r < Fraction(1, 6):
        violations.append("mu/(15r+3mu) < 1/6")
    if not lam < mu / (3 * r):
        violations.append("lambda < mu/(3r)")
    return violations


def _lcp(x: Sequence[Letter], y: Sequence[Letter]) -> int:
    k = 0
    for a, b in zip(x, y):
        if a != b:
            break
        k += 1
    return k


def max_piece_length(w: CyclicWord) -> int:
    # max_piece_length: longest common prefix of two distinct members of the symmetrized
    # set (the n rotations of w and the n of w^-1, taken by position), capped at n-1.
    # Sorting brings the best pair next to each other.
    ls = w.rep.letters
    n = len(ls)
    if n == 0:
        raise InputError("the empty word has no pieces")
    # a < A < b < B as small ints, so rotations compare as plain tuples
    coded = tuple(2 * abs(x) + (x < 0) for x in ls)
    inv = tuple(2 * abs(x) + (x < 0) for x in inverse_letters(ls))
    elements = [coded[i:] + coded[:i] for i in range(n)] + [inv[i:] + inv[:i] for i in range(n)]
    elements.sort()
    best = max(_lcp(elements[i], elements[i + 1]) for i in range(len(elements) - 1))
    return min(best, n - 1)


def _budget(w: Word, mu: Fraction) -> int:
    return math.floor(Fraction(mu) * len(w))


def _check_witness(q: AGraph, w: Word, budget: int, max_rank: int, low_degree: bool) -> None:
    # witness audit; a failure here is a bug in the search
    ok = (q.is_folded() and q.is_connected() and q.volume <= budget
          and graph_rank(q) <= max_rank and reads_word(q, w))
    if ok and low_degree:
        ok = any(q.degree(v) < 2 * q.rank for v in range(q.num_vertices))
    if not ok:
        raise RuntimeError(f"readability witness for {w} fails its definition")


def _search(w: Word, mu: Fraction, max_rank: int, rank: int, low_degree: bool,
            max_states: int) -> Optional[AGraph]:
    # The image of the w-path in any witness is a folded quotient of the path graph with
    # no larger volume or rank, and keeps a low-degree vertex if the witness has one
    # (a 2r-regular subgraph of a connected folded graph is the whole graph). In a folded
    # graph every path labeled by a reduced word is reduced. So searching the quotients
    # of the path graph decides readability exactly.
    if not w:
        raise InputError("readability is defined for nontrivial words")
    if w.max_generator() > rank:
        raise InputError(f"{w} uses letters outside rank {rank}")
    budget = _budget(w, mu)
    full = 2 * rank
    for q in quotient_closure(path_graph(w, rank), bound=max_states):
        if q.volume > budget or graph_rank(q) > max_rank:
            continue
        if low_degree and all(q.degree(v) >= full for v in range(q.num_vertices)):
            continue
        _check_witness(q, w, budget, max_rank, low_degree)
        return q
    return None


def is_mu_readable(w: Word, mu: Fraction, rank: int,
                   max_states: int = DEFAULT_MAX_STATES) -> Optional[AGraph]:
    # a folded graph with <= mu|w| edges and rank <= r-1 reading w, or None
    return _search(w, mu, rank - 1, rank, False, max_states)


def is_mu_L_readable(w: Word, mu: Fraction, L: int, rank: int,
                     max_states: int = DEFAULT_MAX_STATES) -> Optional[AGraph]:
    # as is_mu_readable with rank bound L and a vertex of degree < 2r
    return _search(w, mu, L, rank, True, max_states)


def _readability(found: Optional[AGraph]) -> Readability:
    return Readability.READABLE if found is not None else Readability.NOT_READABLE


def checked_subwords(w: CyclicWord, mode: CheckMode) -> List[Word]:
    # checked_subwords: w itself, or every subword of a rotation of length >= ceil(n/2),
    # longest first, one per inversion pair.
    ls = w.rep.letters
    n = len(ls)
    if mode == CheckMode.WORD_ONLY:
        return [w.rep]
    out: List[Word] = []
    seen = set()
    doubled = ls + ls
    for m in range(n, (n + 1) // 2 - 1, -1):
        for i in range(n):
            piece = tuple(doubled[i:i + m])
            key = min(piece, inverse_letters(piece), key=lambda t: [letter_key(x) for x in t])
            if key in seen:
                continue
            seen.add(key)
            out.append(Word(piece))
        # end for  # start positions
    # end for  # lengths
    return out


def check_condition(w: CyclicWord, p: ParamSet, mode: CheckMode = CheckMode.FULL,
                    cyclic_subwords: bool = False, max_states: int = DEFAULT_MAX_STATES,
                    verify: bool = False, threads: int = 1) -> GenericityReport:
    # check_condition: the (lambda, mu, L)-condition and the P' clause for w.
    # Clause (3) stops at the first readable subword; a resource-limited subword marks
    # the report inconclusive unless another clause already fails.
    violations = validate_params(p)
    if violations:
        raise InputError("invalid parameters: " + "; ".join(violations))
    if len(w) == 0:
        raise InputError("the condition is defined for nontrivial words")
    if w.rep.max_generator() > p.r:
        raise InputError(f"{w} uses letters outside rank {p.r}")
    n = len(w)
    piece = max_piece_length(w)
    c_prime_ok = piece < Fraction(p.lam) * n
    proper_power = is_proper_power(w.rep) is not None
    two_letter = contains_all_two_letter_subwords(w.rep, p.r, cyclic=cyclic_subwords)

    results: List[SubwordReadability] = []
    readable = False
    unknown = False
    for u in checked_subwords(w, mode):
        try:
            mu_w = is_mu_readable(u, p.mu, p.r, max_states)
            mu_state = _readability(mu_w)
        except ResourceLimitError:
            mu_w, mu_state = None, Readability.UNKNOWN
        try:
            mu_L_w = is_mu_L_readable(u, p.mu, p.L, p.r, max_states)
            mu_L_state = _readability(mu_L_w)
        except ResourceLimitError:
            mu_L_w, mu_L_state = None, Readability.UNKNOWN
        results.append(SubwordReadability(u, mu_state, mu_L_state, mu_w, mu_L_w))
        if Readability.READABLE in (mu_state, mu_L_state):
            readable = True
            break
        if Readability.UNKNOWN in (mu_state, mu_L_state):
            unknown = True
    # end for  # subwords loop

    if not c_prime_ok or proper_power or readable:
        in_P: Optional[bool] = False
    elif unknown:
        in_P = None
    else:
        in_P = True
    if in_P is False or not two_letter:
        in_P_prime: Optional[bool] = False
    else:
        in_P_prime = in_P

    report = GenericityReport(
        word=w,
        params=p,
        mode=mode,
        max_piece_len=piece,
        c_prime_ok=c_prime_ok,
        proper_power=proper_power,
        readability=tuple(results),
        all_two_letter_subwords=two_letter,
        in_P=in_P,
        in_P_prime=in_P_prime,
        inconclusive=in_P is None,
    )
    if verify:
        report = replace(report, cross_check=theorem_cross_check(report, max_states, threads))
    return report
    # check_condition  # check_condition


def theorem_cross_check(report: GenericityReport, max_states: int = DEFAULT_MAX_STATES,
                        threads: int = 1) -> Optional[bool]:
    # theorem_cross_check: for words in P', pi(w) = r and Crit(w) = {F_r} must hold.
    # None when the hypothesis fails or pi is out of reach.
    if report.in_P_prime is not True:
        return None
    r = report.params.r
    try:
        pr = primitivity_rank(report.word.rep, r, max_states=max_states, threads=threads)
    except ResourceLimitError:
        log.warning("cross-check of %s skipped: state bound reached", report.word)
        return None
    ok = pr.pi == r and pr.crit_is_whole_group()
    if not ok:
        log.error("%s satisfies the condition but pi = %s with %d critical subgroups",
                  report.word, pr.pi, len(pr.crit))
    return ok


def wilson_radius(successes: float, total: float, z: float = WILSON_Z) -> float:
    # half-width of the Wilson score interval
    if total <= 0:
        return 0.0
    p = successes / total
    denom = 1 + z * z / total
    return float(z * math.sqrt(p * (1 - p) / total + z * z / (4 * total * total)) / denom)


def fit_decay(rows: Iterable[SurveyRow], column: str = CRIT_IS_WHOLE) -> Optional[DecayFit]:
    # fit_decay: least squares of log(1 - f_n) against n, giving 1 - f_n ~ C sigma^n.
    ns, ys = [], []
    for row in rows:
        if column not in row.fractions:
            continue
        rest = 1.0 - row.fractions[column]
        if rest <= 0:
            continue
        ns.append(row.n)
        ys.append(math.log(rest))
    if len(ns) < 2:
        return None
    x = np.asarray(ns, dtype=float)
    y = np.asarray(ys, dtype=float)
    slope, intercept = np.polyfit(x, y, 1)
    fitted = slope * x + intercept
    ss_res = float(np.sum((y - fitted) ** 2))
    ss_tot = float(np.sum((y - y.mean()) ** 2))
    r_squared = 1.0 - ss_res / ss_tot if ss_tot > 0 else 1.0
    return DecayFit(C=float(math.exp(intercept)), sigma=float(math.exp(slope)),
                    r_squared=r_squared, points=len(ns))


class _Classifier:
    # _Classifier: survey columns for a cyclic core, memoized by its canonical rotation.

    def __init__(self, rank: int, params: Optional[ParamSet], max_states: int,
                 heuristic: bool):
        self.rank = rank
        self.params = params
        self.max_states = max_states
        self.heuristic = heuristic
        self._memo: Dict[Tuple[Letter, ...], Optional[Dict[str, bool]]] = {}

    def __call__(self, w: Word) -> Optional[Dict[str, bool]]:
        # None means the word could not be classified within the state bound
        core, _ = cyclic_reduce(w)
        key = core.rep.letters
        if key not in self._memo:
            self._memo[key] = self._classify(core)
        return self._memo[key]

    def _classify(self, core: CyclicWord) -> Optional[Dict[str, bool]]:
        if len(core) == 0:
            return {PI_IS_R: False, CRIT_IS_WHOLE: False, PROPER_POWER: False,
                    PRIMITIVE: False}
        try:
            pr = primitivity_rank(core.rep, self.rank, max_states=self.max_states,
                                  heuristic=self.heuristic)
        except ResourceLimitError:
            return None
        row = {
            PI_IS_R: pr.pi == self.rank,
            CRIT_IS_WHOLE: pr.pi == self.rank and pr.crit_is_whole_group(),
            PROPER_POWER: is_proper_power(core.rep) is not None,
            PRIMITIVE: is_primitive(core.rep, self.rank),
        }
        if self.params is not None:
            try:
                report = check_condition(core, self.params, max_states=self.max_states)
            except ResourceLimitError:
                return None
            if report.in_P is None or report.in_P_prime is None:
                # inconclusive readability is an error, not a negative
                return None
            row[IN_P] = report.in_P
            row[IN_P_PRIME] = report.in_P_prime
        return row
    # _Classifier


def _columns(params: Optional[ParamSet]) -> List[str]:
    cols = [PI_IS_R, CRIT_IS_WHOLE, PROPER_POWER, PRIMITIVE]
    if params is not None:
        cols += [IN_P, IN_P_PRIME]
    return cols


def _population(n: int, rank: int, samples: Optional[int], cyclic: bool, seed: int):
    # (word, weight) pairs for one survey row
    if samples is None:
        if cyclic:
            return [(c.rep, size) for c, size in enumerate_cyclic_classes(n, rank)]
        return [(w, 1) for w in enumerate_words(n, rank)]
    return [(sample_word(n, rank, cyclic=cyclic, seed=derive_seed(seed, n, i)), 1)
            for i in range(samples)]


def survey(lengths: Sequence[int], samples: Optional[int], rank: int, seed: int,
           params: Optional[ParamSet] = None, cyclic: bool = True, threads: int = 1,
           max_states: int = DEFAULT_MAX_STATES, heuristic: bool = False,
           progress: bool = False) -> SurveyTable:
    # survey: per length, the weighted fraction of words in each column. samples=None
    # enumerates every word (rotation classes weighted by size when cyclic); otherwise
    # word i of length n is drawn with seed derive_seed(seed, n, i).
    if samples is not None and samples < 1:
        raise InputError("samples must be positive")
    if any(n < 1 for n in lengths):
        raise InputError("survey lengths must be at least 1")
    if params is not None:
        violations = validate_params(params)
        if violations:
            raise InputError("invalid parameters: " + "; ".join(violations))
    classify = _Classifier(rank, params, max_states, heuristic)
    columns = _columns(params)
    rows: List[SurveyRow] = []
    pool = ThreadPoolExecutor(max_workers=threads) if threads > 1 else None
    try:
        for n in tqdm(list(lengths), desc="survey", disable=not progress, file=sys.stderr):
            cells = _population(n, rank, samples, cyclic, seed)
            words = [w for w, _ in cells]
            results = list(pool.map(classify, words)) if pool is not None else [classify(w) for w in words]
            counts = {c: 0 for c in columns}
            total = 0
            errors = 0
            for (_, weight), result in zip(cells, results):
                if result is None:
                    errors += weight
                    continue
                total += weight
                for c in columns:
                    if result[c]:
                        counts[c] += weight
            # end for  # cells loop
            fractions = {c: counts[c] / total for c in columns} if total else {}
            if samples is None or not total:
                radii = {c: 0.0 for c in fractions}
            else:
                radii = {c: wilson_radius(counts[c], total) for c in columns}
            population = cyclic_sphere_size(n, rank) if cyclic else sphere_size(n, rank)
            rows.append(SurveyRow(n=n, population=population,
                                  samples="exhaustive" if samples is None else samples,
                                  counts=counts, total=total, errors=errors,
                                  fractions=fractions, radii=radii))
            log.debug("survey n=%d: %d classified, %d over the state bound or inconclusive", n, total, errors)
        # end for  # lengths loop
    finally:
        if pool is not None:
            pool.shutdown(wait=True)
    return SurveyTable(rank=rank, cyclic=cyclic, seed=seed, rows=tuple(rows),
                       fit=fit_decay(rows))
    # survey  # survey
