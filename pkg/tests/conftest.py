# Copyright 2025 H2so4 Consulting LLC

import pytest

from core.models import CyclicWord, Word
from core.text_utils import parse_word
from core.words import cyclic_word, sample_word


@pytest.fixture
def word():
    # word("abAB") -> Word over F_2 (pass rank= for larger alphabets)
    def make(text: str, rank: int = 2) -> Word:
        return parse_word(text, rank)
    return make


@pytest.fixture
def cword(word):
    def make(text: str, rank: int = 2) -> CyclicWord:
        return cyclic_word(word(text, rank))
    return make


@pytest.fixture
def random_words():
    # seeded batch of words; cyclic=True gives cyclically reduced ones
    def make(count: int, lengths, rank: int = 2, cyclic: bool = False, seed: int = 0):
        out = []
        for i in range(count):
            n = lengths[i % len(lengths)]
            out.append(sample_word(n, rank, cyclic=cyclic, seed=seed * 100_003 + i))
        return out
    return make
