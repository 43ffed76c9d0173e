# Copyright 2025 H2so4 Consulting LLC
from dataclasses import dataclass, field
from enum import Enum
from fractions import Fraction
from typing import TYPE_CHECKING, Dict, List, Optional, Tuple, Union

if TYPE_CHECKING:
    from .agraphs import AGraph

# A letter is a nonzero int: +i is the generator a_i, -i its inverse.
Letter = int
Rank = Union[int, float]  # math.inf for "infinite"

MAX_RANK = 26


class PrimrankError(Exception):
    pass


class InputError(PrimrankError, ValueError):
    pass


class MembershipError(InputError):
    pass


class ResourceLimitError(PrimrankError, RuntimeError):
    def __init__(self, message: str, bound: int, explored: int = 0):
        super().__init__(message)
        self.bound = bound
        self.explored = explored


def letter_key(x: Letter) -> Tuple[int, int]:
    # a < A < b < B < ...
    return (abs(x), 0 if x > 0 else 1)


def signed_letters(rank: int) -> Tuple[Letter, ...]:
    out = []
    for g in range(1, rank + 1):
        out.append(g)
        out.append(-g)
    return tuple(out)


@dataclass(frozen=True)
class Alphabet:
    r: int

    def __post_init__(self):
        if not isinstance(self.r, int) or self.r < 2 or self.r > MAX_RANK:
            raise InputError(f"rank must be an integer in 2..{MAX_RANK}, got {self.r!r}")

    @property
    def letters(self) -> Tuple[Letter, ...]:
        return signed_letters(self.r)

    def check(self, x: Letter) -> None:
        if x == 0 or abs(x) > self.r:
            raise InputError(f"letter {x} outside the alphabet of rank {self.r}")


@dataclass(frozen=True)
class Word:
    letters: Tuple[Letter, ...] = ()

    def __post_init__(self):
        ls = self.letters
        for i in range(len(ls) - 1):
            if ls[i] == -ls[i + 1]:
                raise InputError(f"word is not freely reduced at position {i}")

    def __len__(self) -> int:
        return len(self.letters)

    def __iter__(self):
        return iter(self.letters)

    def __getitem__(self, i):
        return self.letters[i]

    def __bool__(self) -> bool:
        return bool(self.letters)

    def inverse(self) -> "Word":
        return Word(tuple(-x for x in reversed(self.letters)))

    def sort_key(self) -> Tuple:
        return (len(self.letters), tuple(letter_key(x) for x in self.letters))

    def max_generator(self) -> int:
        return max((abs(x) for x in self.letters), default=0)

    def __str__(self) -> str:
        if not self.letters:
            return "1"
        return "".join(
            chr(ord("a") + x - 1) if x > 0 else chr(ord("A") - x - 1)
            for x in self.letters
        )


@dataclass(frozen=True)
class CyclicWord:
    rep: Word

    def __post_init__(self):
        ls = self.rep.letters
        if len(ls) > 1 and ls[0] == -ls[-1]:
            raise InputError(f"{self.rep} is not cyclically reduced")

    def __len__(self) -> int:
        return len(self.rep)

    def __str__(self) -> str:
        return str(self.rep)


@dataclass(frozen=True)
class Arc:
    edges: Tuple[Tuple[int, int], ...]  # (edge index, +1 forward / -1 backward)
    start: int
    end: int
    label: Word

    def __len__(self) -> int:
        return len(self.edges)


@dataclass(frozen=True)
class Subgroup:
    graph: "AGraph"  # canonical numbering
    basis: Tuple[Word, ...]
    rank: int
    index: Rank
    key: bytes

    def is_whole_group(self) -> bool:
        return self.index == 1


@dataclass(frozen=True)
class ArcProfile:
    longest_arc: int
    crossings: int
    arc_count: int


@dataclass(frozen=True)
class PiRankReport:
    word: Word
    cyclic_word: CyclicWord
    conjugator: Word
    pi: Rank
    crit: Tuple[Subgroup, ...]
    quotients_explored: int
    primitivity_tests: int
    elapsed: float
    rank: int
    certificate: bool = False
    heuristic: bool = False

    def crit_is_whole_group(self) -> bool:
        return len(self.crit) == 1 and self.crit[0].is_whole_group()


class Readability(str, Enum):
    READABLE = "readable"
    NOT_READABLE = "not_readable"
    UNKNOWN = "unknown"


class CheckMode(str, Enum):
    FULL = "full"
    WORD_ONLY = "word-only"


@dataclass(frozen=True)
class ParamSet:
    lam: Fraction
    mu: Fraction
    L: int
    r: int


@dataclass(frozen=True)
class SubwordReadability:
    subword: Word
    mu_readable: Readability
    mu_L_readable: Readability
    mu_witness: Optional["AGraph"] = None
    mu_L_witness: Optional["AGraph"] = None


@dataclass(frozen=True)
class GenericityReport:
    word: CyclicWord
    params: ParamSet
    mode: CheckMode
    max_piece_len: int
    c_prime_ok: bool
    proper_power: bool
    readability: Tuple[SubwordReadability, ...]
    all_two_letter_subwords: bool
    in_P: Optional[bool]
    in_P_prime: Optional[bool]
    inconclusive: bool
    cross_check: Optional[bool] = None


@dataclass(frozen=True)
class SurveyRow:
    n: int
    population: int
    samples: Union[int, str]
    counts: Dict[str, int]
    total: int
    errors: int
    fractions: Dict[str, float]
    radii: Dict[str, float]


@dataclass(frozen=True)
class DecayFit:
    C: float
    sigma: float
    r_squared: float
    points: int


@dataclass(frozen=True)
class SurveyTable:
    rank: int
    cyclic: bool
    seed: int
    rows: Tuple[SurveyRow, ...]
    fit: Optional[DecayFit] = None


@dataclass(frozen=True)
class WordMeasureEstimate:
    word: Word
    N: int
    samples: int
    mean_fix: float
    stderr: float
    exact: Optional[Fraction]
    prediction: Optional[float]
    mode: str


@dataclass(frozen=True)
class ComparisonRow:
    N: int
    estimate: WordMeasureEstimate
    value: float
    prediction: float
    residual: float
    normalized_stat: Optional[float]


@dataclass(frozen=True)
class Comparison:
    word: Word
    pi: Rank
    crit_size: int
    rows: List[ComparisonRow] = field(default_factory=list)
