# Copyright 2025 H2so4 Consulting LLC

import logging
from typing import Dict, Iterable, Iterator, Optional, Sequence, Tuple, Union

import numpy as np

from .models import Alphabet, CyclicWord, InputError, Letter, Word, signed_letters

log = logging.getLogger(__name__)

SeedLike = Union[None, int, np.random.Generator]


def _key(x: Letter) -> int:
    # integer form of letter_key: a < A < b < B < ...
    return 2 * x if x > 0 else -2 * x + 1


def reduce_letters(seq: Iterable[Letter]) -> Tuple[Letter, ...]:
    # reduce_letters: stack-based free reduction on raw letters (no range check).
    out = []
    for x in seq:
        if out and out[-1] == -x:
            out.pop()
        else:
            out.append(x)
    return tuple(out)


def inverse_letters(seq: Sequence[Letter]) -> Tuple[Letter, ...]:
    return tuple(-x for x in reversed(seq))


def free_reduce(seq: Iterable[Letter], rank: Optional[int] = None) -> Word:
    # free_reduce: cancel adjacent x x^-1 pairs until none remain.
    seq = tuple(seq)
    if rank is not None:
        alphabet = Alphabet(rank)
        for x in seq:
            alphabet.check(x)
    elif any(x == 0 for x in seq):
        raise InputError("0 is not a letter")
    return Word(reduce_letters(seq))
    # free_reduce  # free_reduce


def multiply(*words: Word) -> Word:
    out: Tuple[Letter, ...] = ()
    for w in words:
        out = reduce_letters(out + w.letters)
    return Word(out)


def power(w: Word, k: int) -> Word:
    if k < 0:
        return power(w.inverse(), -k)
    return Word(reduce_letters(w.letters * k))


def strip_conjugator(letters: Sequence[Letter]) -> Tuple[Tuple[Letter, ...], Tuple[Letter, ...]]:
    # strip_conjugator: split a reduced word as c . m . c^-1 with m cyclically reduced.
    i, j = 0, len(letters) - 1
    while i < j and letters[i] == -letters[j]:
        i += 1
        j -= 1
    return tuple(letters[:i]), tuple(letters[i:j + 1])


def cyclic_length(letters: Sequence[Letter]) -> int:
    i, j = 0, len(letters) - 1
    while i < j and letters[i] == -letters[j]:
        i += 1
        j -= 1
    return j - i + 1


def least_rotation(letters: Sequence[Letter]) -> int:
    # offset of the lexicographically least rotation
    n = len(letters)
    if n <= 1:
        return 0
    keys = [_key(x) for x in letters]
    doubled = keys + keys
    return min(range(n), key=lambda i: doubled[i:i + n])


def smallest_period(letters: Sequence[Letter]) -> int:
    n = len(letters)
    for d in range(1, n + 1):
        if n % d == 0 and all(letters[i] == letters[i % d] for i in range(n)):
            return d
    return n


def cyclic_reduce(w: Word) -> Tuple[CyclicWord, Word]:
    # cyclic_reduce: w = conjugator . core . conjugator^-1 with core the least rotation.
    conj, middle = strip_conjugator(w.letters)
    k = least_rotation(middle)
    rep = middle[k:] + middle[:k]
    # middle = u v, rep = v u, so middle = u . rep . u^-1
    conjugator = reduce_letters(conj + middle[:k])
    return CyclicWord(Word(rep)), Word(conjugator)
    # cyclic_reduce  # cyclic_reduce


def cyclic_word(w: Word) -> CyclicWord:
    return cyclic_reduce(w)[0]


def is_proper_power(w: Word) -> Optional[Tuple[Word, int]]:
    # is_proper_power: maximal k >= 2 with w = u^k, decided on the cyclic core.
    if not w:
        raise InputError("the empty word has no root")
    conj, middle = strip_conjugator(w.letters)
    d = smallest_period(middle)
    k = len(middle) // d
    if k < 2:
        return None
    root = reduce_letters(conj + middle[:d] + inverse_letters(conj))
    return Word(root), k
    # is_proper_power  # is_proper_power


def two_letter_subwords(rank: int) -> Tuple[Tuple[Letter, Letter], ...]:
    letters = signed_letters(rank)
    return tuple((x, y) for x in letters for y in letters if x != -y)


def contains_all_two_letter_subwords(w: Word, rank: int, cyclic: bool = False) -> bool:
    # contains_all_two_letter_subwords: every reduced xy (2r(2r-1) of them) occurs in w.
    need = 2 * rank * (2 * rank - 1)
    ls = w.letters
    available = len(ls) if cyclic else len(ls) - 1
    if available < need:
        return False
    seen = {(ls[i], ls[i + 1]) for i in range(len(ls) - 1)}
    if cyclic and len(ls) > 1 and ls[-1] != -ls[0]:
        seen.add((ls[-1], ls[0]))
    return len(seen) == need
    # contains_all_two_letter_subwords  # contains_all_two_letter_subwords


def _rng(seed: SeedLike) -> np.random.Generator:
    if isinstance(seed, np.random.Generator):
        return seed
    return np.random.default_rng(seed)


def sample_word(n: int, rank: int, cyclic: bool = False, seed: SeedLike = None) -> Word:
    # sample_word: simple non-backtracking walk of length n, uniform on the n-sphere.
    # With cyclic=True, rejection-sample until cyclically reduced.
    if n < 1:
        raise InputError("sample length must be at least 1")
    letters = signed_letters(rank)
    successors: Dict[Letter, Tuple[Letter, ...]] = {
        x: tuple(y for y in letters if y != -x) for x in letters
    }
    rng = _rng(seed)
    attempts = 0
    while True:
        attempts += 1
        first = letters[int(rng.integers(2 * rank))]
        steps = rng.integers(0, 2 * rank - 1, size=n - 1)
        out = [first]
        for s in steps:
            out.append(successors[out[-1]][int(s)])
        # end for  # walk steps
        if not cyclic or n == 1 or out[0] != -out[-1]:
            break
    if attempts > 1:
        log.debug("cyclic rejection sampling took %d attempts", attempts)
    return Word(tuple(out))
    # sample_word  # sample_word


def enumerate_words(n: int, rank: int, cyclic: bool = False) -> Iterator[Word]:
    # enumerate_words: every reduced (or cyclically reduced) word of length n, lex order.
    if n < 0:
        raise InputError("length must be nonnegative")
    if n == 0:
        yield Word(())
        return
    letters = signed_letters(rank)
    prefix = []

    def extend(depth: int) -> Iterator[Word]:
        for x in letters:
            if prefix and prefix[-1] == -x:
                continue
            if depth == n - 1 and cyclic and n > 1 and prefix[0] == -x:
                continue
            prefix.append(x)
            if depth == n - 1:
                yield Word(tuple(prefix))
            else:
                yield from extend(depth + 1)
            prefix.pop()
        # end for  # letters loop

    yield from extend(0)
    # enumerate_words  # enumerate_words


def enumerate_cyclic_classes(n: int, rank: int) -> Iterator[Tuple[CyclicWord, int]]:
    # enumerate_cyclic_classes: one canonical word per rotation class, with class size.
    for w in enumerate_words(n, rank, cyclic=True):
        if n > 0 and least_rotation(w.letters) != 0:
            continue
        yield CyclicWord(w), smallest_period(w.letters) if n > 0 else 1


def sphere_size(n: int, rank: int) -> int:
    if n == 0:
        return 1
    return 2 * rank * (2 * rank - 1) ** (n - 1)


def ball_size(n: int, rank: int) -> int:
    return sum(sphere_size(k, rank) for k in range(n + 1))


def cyclic_sphere_size(n: int, rank: int) -> int:
    # trace of the non-backtracking transition matrix to the n-th power
    if n == 0:
        return 1
    return (2 * rank - 1) ** n + (rank - 1) * (-1) ** n + rank


def apply_letter_map(w: Word, images: Sequence[Letter]) -> Word:
    # images[i-1] is the signed image of generator a_i (a permutation/inversion of the basis)
    return Word(reduce_letters(
        images[x - 1] if x > 0 else -images[-x - 1] for x in w.letters
    ))


def random_letter_map(rank: int, seed: SeedLike = None) -> Tuple[Letter, ...]:
    rng = _rng(seed)
    perm = rng.permutation(rank) + 1
    signs = rng.choice([-1, 1], size=rank)
    return tuple(int(s * p) for s, p in zip(signs, perm))
