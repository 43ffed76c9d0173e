import re
from fractions import Fraction
from typing import List, Sequence, Tuple

from .models import InputError, Letter, MAX_RANK, Word

_RATIONAL = re.compile(r"^(\d+)/(\d+)$")
_RANGE = re.compile(r"^(\d+)\.\.(\d+)$")


def parse_letters(text: str, rank: int) -> Tuple[Letter, ...]:
    # "1" is the empty word; a..z are generators, A..Z their inverses
    if text == "1":
        return ()
    out: List[Letter] = []
    for pos, ch in enumerate(text):
        if "a" <= ch <= "z":
            x = ord(ch) - ord("a") + 1
        elif "A" <= ch <= "Z":
            x = -(ord(ch) - ord("A") + 1)
        else:
            raise InputError(f"invalid character {ch!r} at position {pos} in word {text!r}")
        if abs(x) > rank:
            raise InputError(f"letter {ch!r} is outside the alphabet of rank {rank}")
        out.append(x)
    if not out:
        raise InputError("empty word text; write the identity as '1'")
    return tuple(out)


def parse_word(text: str, rank: int) -> Word:
    from .words import free_reduce
    return free_reduce(parse_letters(text.strip(), rank), rank)


def render_letters(letters: Sequence[Letter]) -> str:
    if len(letters) > 0 and max(abs(x) for x in letters) > MAX_RANK:
        raise InputError("cannot render generators beyond z")
    return str(Word(tuple(letters)))


def parse_rational(text: str) -> Fraction:
    m = _RATIONAL.match(text.strip())
    if not m:
        raise InputError(f"rational must be written P/Q, got {text!r}")
    num, den = int(m.group(1)), int(m.group(2))
    if den == 0:
        raise InputError(f"zero denominator in {text!r}")
    return Fraction(num, den)


def render_rational(q: Fraction) -> str:
    return f"{q.numerator}/{q.denominator}"


def parse_lengths(text: str) -> List[int]:
    m = _RANGE.match(text.strip())
    if m:
        lo, hi = int(m.group(1)), int(m.group(2))
        if lo > hi:
            raise InputError(f"empty length range {text!r}")
        return list(range(lo, hi + 1))
    return parse_int_list(text)


def parse_int_list(text: str) -> List[int]:
    try:
        values = [int(part) for part in text.split(",") if part.strip()]
    except ValueError:
        raise InputError(f"expected comma-separated integers, got {text!r}")
    if not values:
        raise InputError("empty integer list")
    return values
