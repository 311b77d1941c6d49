"""Finite words over a signed alphabet.

A word records which embedded arc each stratum interval of a curve traverses
and in which direction.  Reduction is ordinary free reduction; a word whose
reduction is empty is a whisker.
"""
from __future__ import annotations

from typing import Iterable, NamedTuple, Optional, Sequence


class Letter(NamedTuple):
    name: str
    sign: int = 1

    def inverse(self) -> "Letter":
        return Letter(self.name, -self.sign)

    def __str__(self) -> str:
        return self.name if self.sign > 0 else self.name + "'"


Word = tuple  # tuple[Letter, ...]
Pairing = frozenset  # frozenset[tuple[int, int]]


def letter(token: str) -> Letter:
    """Parse ``a`` or ``a'`` (prime marks the inverse)."""
    sign = 1
    while token.endswith("'"):
        token = token[:-1]
        sign = -sign
    if not token:
        raise ValueError("empty letter token")
    return Letter(token, sign)


def parse_word(text: str) -> Word:
    """Parse whitespace separated tokens, e.g. ``"a b b' c"``."""
    return tuple(letter(tok) for tok in text.split())


def format_word(w: Iterable[Letter]) -> str:
    return " ".join(str(x) for x in w)


def as_word(w) -> Word:
    if isinstance(w, str):
        return parse_word(w)
    return tuple(Letter(*x) if not isinstance(x, Letter) else x for x in w)


def _cancels(x: Letter, y: Letter) -> bool:
    return x.name == y.name and x.sign == -y.sign


def reduce(w) -> Word:
    """Free reduction with a stack; returns the normal form."""
    stack: list[Letter] = []
    for x in as_word(w):
        if stack and _cancels(stack[-1], x):
            stack.pop()
        else:
            stack.append(x)
    return tuple(stack)


def reduction_survivors(w) -> list[int]:
    """Indices of the letters left standing by the stack reduction.

    Consecutive runs of cancelled indices are the maximal trivial subwords
    used when removing whiskers.
    """
    stack: list[int] = []
    w = as_word(w)
    for i, x in enumerate(w):
        if stack and _cancels(w[stack[-1]], x):
            stack.pop()
        else:
            stack.append(i)
    return stack


def is_whisker(w) -> bool:
    return len(reduce(w)) == 0


def has_whiskers(w) -> bool:
    w = as_word(w)
    return reduce(w) != w


def nesting_pairing(w) -> Optional[Pairing]:
    """Well-nested pairing of each letter with an inverse, if one exists.

    Push indices; a letter that inverts the top of the stack is matched with
    it.  The pairing exists exactly when the stack empties.
    """
    w = as_word(w)
    stack: list[int] = []
    matches = []
    for j, x in enumerate(w):
        if stack and _cancels(w[stack[-1]], x):
            matches.append((stack.pop(), j))
        else:
            stack.append(j)
    if stack:
        return None
    return frozenset(matches)


def is_valid_pairing(w, pairing: Iterable[tuple[int, int]]) -> bool:
    """Check that ``pairing`` is a complete, inverse-matching, non-crossing pairing."""
    w = as_word(w)
    pairs = sorted(pairing)
    seen: set[int] = set()
    for i, j in pairs:
        if not (0 <= i < j < len(w)) or i in seen or j in seen:
            return False
        if not _cancels(w[i], w[j]):
            return False
        seen.update((i, j))
    if len(seen) != len(w):
        return False
    for i, j in pairs:
        for k, l in pairs:
            if i < k < j < l:
                return False
    return True


def truncation_reducible(w, keep: Iterable[int]) -> bool:
    """Whether the subword on the kept indices is a whisker."""
    w = as_word(w)
    keep = sorted(set(keep))
    if keep and (keep[0] < 0 or keep[-1] >= len(w)):
        raise IndexError("keep indices outside the word")
    return is_whisker(tuple(w[i] for i in keep))


def word_concat(w1, w2) -> Word:
    return as_word(w1) + as_word(w2)


def word_inverse(w) -> Word:
    return tuple(x.inverse() for x in reversed(as_word(w)))


def equivalent(w1, w2) -> bool:
    """Equality of reduced words, cross-checked against the whisker test on w1*w2^-1."""
    by_normal_form = reduce(w1) == reduce(w2)
    by_whisker = is_whisker(word_concat(w1, word_inverse(w2)))
    if by_normal_form != by_whisker:  # pragma: no cover - would be a bug in reduce
        raise AssertionError("equivalence routes disagree")
    return by_normal_form


def canonical_relabel(w) -> Word:
    """Rename letters x0, x1, ... by first appearance, first appearance positive.

    Two words describe the same curve up to arc renaming and a per-arc
    orientation choice iff their canonical forms agree.
    """
    names: dict[str, tuple[str, int]] = {}
    out = []
    for x in as_word(w):
        if x.name not in names:
            names[x.name] = (f"x{len(names)}", x.sign)
        new, flip = names[x.name]
        out.append(Letter(new, x.sign * flip))
    return tuple(out)
