# Copyright 2025 H2so4 Consulting LLC

import itertools
import logging
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from fractions import Fraction
from typing import List, Optional, Sequence, Tuple

import numpy as np

from .hash_utils import derive_seed
from .models import (Comparison, ComparisonRow, InputError, Rank, ResourceLimitError, Word,
                     WordMeasureEstimate)
from .pirank import DEFAULT_MAX_STATES, primitivity_rank

log = logging.getLogger(__name__)

MC_BLOCK_SIZE = 8192
DEFAULT_EXACT_LIMIT = 2_000_000  # tuples of permutations
_EXACT_CHUNK = 65_536


@dataclass(frozen=True)
class Permutation:
    # Permutation of {0..N-1}; products act on the right: (p * q)[x] = q[p[x]].
    images: Tuple[int, ...]

    def __post_init__(self):
        if sorted(self.images) != list(range(len(self.images))):
            raise InputError(f"not a permutation: {self.images}")

    @classmethod
    def identity(cls, N: int) -> "Permutation":
        return cls(tuple(range(N)))

    @property
    def degree(self) -> int:
        return len(self.images)

    def __mul__(self, other: "Permutation") -> "Permutation":
        if other.degree != self.degree:
            raise InputError("permutations of different degrees")
        return Permutation(tuple(other.images[x] for x in self.images))

    def inverse(self) -> "Permutation":
        out = [0] * self.degree
        for x, y in enumerate(self.images):
            out[y] = x
        return Permutation(tuple(out))

    def fixed_points(self) -> int:
        return sum(1 for x, y in enumerate(self.images) if x == y)


def evaluate_word(w: Word, perms: Sequence[Permutation]) -> Permutation:
    # evaluate_word: substitute perms[i-1] for a_i, left to right; the empty word is the identity.
    if not perms:
        raise InputError("need at least one permutation")
    N = perms[0].degree
    if any(p.degree != N for p in perms):
        raise InputError("all permutations must have the same degree")
    if w.max_generator() > len(perms):
        raise InputError(f"{w} needs {w.max_generator()} permutations, got {len(perms)}")
    result = Permutation.identity(N)
    for x in w.letters:
        p = perms[x - 1] if x > 0 else perms[-x - 1].inverse()
        result = result * p
    return result


def _generators(w: Word) -> List[int]:
    return sorted({abs(x) for x in w.letters})


def _fixes(w: Word, perms: dict, invs: dict, count: int, N: int) -> np.ndarray:
    # fixed-point counts of w over a batch: perms[g] is (count, N), one row per sample
    ident = np.arange(N)
    cur = np.tile(ident, (count, 1))
    for x in w.letters:
        table = perms[x] if x > 0 else invs[-x]
        cur = np.take_along_axis(table, cur, axis=1)
    return (cur == ident).sum(axis=1)


def _inverses(perms: dict, count: int, N: int) -> dict:
    rows = np.tile(np.arange(N), (count, 1))
    invs = {}
    for g, table in perms.items():
        inv = np.empty_like(table)
        np.put_along_axis(inv, table, rows, axis=1)
        invs[g] = inv
    return invs


def _mc_block(w: Word, N: int, count: int, seed: int) -> Tuple[int, float, float]:
    # one block of samples: (count, mean, sum of squared deviations)
    rng = np.random.default_rng(seed)
    base = np.tile(np.arange(N), (count, 1))
    perms = {g: rng.permuted(base, axis=1) for g in _generators(w)}
    fixes = _fixes(w, perms, _inverses(perms, count, N), count, N).astype(np.float64)
    mean = float(fixes.mean())
    return count, mean, float(((fixes - mean) ** 2).sum())


def _combine(parts: List[Tuple[int, float, float]]) -> Tuple[int, float, float]:
    # pairwise tree over block statistics; the tree shape depends only on the block count
    while len(parts) > 1:
        merged = []
        for i in range(0, len(parts) - 1, 2):
            (na, ma, sa), (nb, mb, sb) = parts[i], parts[i + 1]
            n = na + nb
            delta = mb - ma
            merged.append((n, ma + delta * nb / n, sa + sb + delta * delta * na * nb / n))
        if len(parts) % 2:
            merged.append(parts[-1])
        parts = merged
    return parts[0]


def predicted_fix(N: int, pi: Rank, crit_size: int) -> float:
    # 1 + |Crit| / N^(pi-1); just 1 for primitive words
    if pi == math.inf:
        return 1.0
    return 1.0 + crit_size / float(N) ** (pi - 1)


def mc_expected_fix(w: Word, N: int, samples: int, seed: int, threads: int = 1,
                    block_size: int = MC_BLOCK_SIZE, pi: Optional[Rank] = None,
                    crit_size: Optional[int] = None) -> WordMeasureEstimate:
    # mc_expected_fix: Monte Carlo mean of #fix(w(s_1..s_r)). Block b draws from
    # derive_seed(seed, N, b), so the estimate does not depend on `threads`.
    if N < 1:
        raise InputError("degree N must be at least 1")
    if samples < 1:
        raise InputError("samples must be at least 1")
    sizes = [block_size] * (samples // block_size)
    if samples % block_size:
        sizes.append(samples % block_size)
    jobs = [(w, N, size, derive_seed(seed, N, b)) for b, size in enumerate(sizes)]
    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            parts = list(pool.map(lambda job: _mc_block(*job), jobs))
    else:
        parts = [_mc_block(*job) for job in jobs]
    n, mean, ss = _combine(parts)
    stderr = math.sqrt(ss / (n - 1)) / math.sqrt(n) if n > 1 else 0.0
    log.debug("E[fix] of %s at N=%d: %.6f +- %.6f over %d samples", w, N, mean, stderr, n)
    prediction = predicted_fix(N, pi, crit_size) if pi is not None and crit_size is not None else None
    return WordMeasureEstimate(word=w, N=N, samples=n, mean_fix=mean, stderr=stderr,
                               exact=None, prediction=prediction, mode="monte-carlo")


def exact_size(w: Word, N: int) -> int:
    # number of tuples the exact average runs over: (N!)^k for k occurring generators
    return math.factorial(N) ** len(_generators(w))


def exact_expected_fix(w: Word, N: int, limit: int = DEFAULT_EXACT_LIMIT) -> Fraction:
    # exact_expected_fix: average #fix over every tuple of the generators occurring in w.
    if N < 1:
        raise InputError("degree N must be at least 1")
    gens = _generators(w)
    total = exact_size(w, N)
    if total > limit:
        raise ResourceLimitError(
            f"exact enumeration needs {total} tuples, above the limit of {limit}", limit, 0)
    if not gens:
        return Fraction(N)
    all_perms = np.array(list(itertools.permutations(range(N))), dtype=np.int64)
    factorial = len(all_perms)
    shape = (factorial,) * len(gens)
    fixes = 0
    for start in range(0, total, _EXACT_CHUNK):
        flat = np.arange(start, min(total, start + _EXACT_CHUNK))
        picks = np.unravel_index(flat, shape)
        perms = {g: all_perms[idx] for g, idx in zip(gens, picks)}
        fixes += int(_fixes(w, perms, _inverses(perms, len(flat), N), len(flat), N).sum())
    # end for  # chunks
    return Fraction(fixes, total)
    # exact_expected_fix  # exact_expected_fix


def exact_estimate(w: Word, N: int, limit: int = DEFAULT_EXACT_LIMIT, pi: Optional[Rank] = None,
                   crit_size: Optional[int] = None) -> WordMeasureEstimate:
    value = exact_expected_fix(w, N, limit)
    prediction = predicted_fix(N, pi, crit_size) if pi is not None and crit_size is not None else None
    return WordMeasureEstimate(word=w, N=N, samples=exact_size(w, N), mean_fix=float(value),
                               stderr=0.0, exact=value, prediction=prediction, mode="exact")


def compare(w: Word, N_list: Sequence[int], samples: int, seed: int, rank: int,
            pi: Optional[Rank] = None, crit_size: Optional[int] = None,
            exact_when_feasible: bool = True, limit: int = DEFAULT_EXACT_LIMIT,
            threads: int = 1, max_states: int = DEFAULT_MAX_STATES) -> Comparison:
    # compare: E[#fix] against 1 + |Crit|/N^(pi-1) for each N. pi and |Crit| are computed
    # unless supplied; N^(pi-1)(E-1) should approach |Crit|.
    if pi is None or crit_size is None:
        report = primitivity_rank(w, rank, max_states=max_states, threads=threads)
        pi, crit_size = report.pi, len(report.crit)
    rows: List[ComparisonRow] = []
    for N in N_list:
        if exact_when_feasible and exact_size(w, N) <= limit:
            est = exact_estimate(w, N, limit, pi, crit_size)
        else:
            est = mc_expected_fix(w, N, samples, seed, threads=threads, pi=pi,
                                  crit_size=crit_size)
        prediction = predicted_fix(N, pi, crit_size)
        value = est.mean_fix
        normalized = None if pi == math.inf else float(N) ** (pi - 1) * (value - 1.0)
        rows.append(ComparisonRow(N=N, estimate=est, value=value, prediction=prediction,
                                  residual=value - prediction, normalized_stat=normalized))
    # end for  # degrees loop
    return Comparison(word=w, pi=pi, crit_size=crit_size, rows=rows)
    # compare  # compare
