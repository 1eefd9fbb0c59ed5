"""Outcomes, preference matrices, question sets and characters.

Bit convention: question ``j`` of an ``n``-question election lives at bit
position ``n - j`` of a row word, so ``format(word, f"0{n}b")`` reads the
row left to right exactly as it is printed (question 1 is the leftmost
column).  Question-set masks use the same positions.
"""

from __future__ import annotations

import itertools
import json
from dataclasses import dataclass, field
from typing import Iterable, Iterator, Sequence

from . import _backend

MAX_N = 16


class MatrixFormatError(ValueError):
    """Raised when matrix text cannot be parsed; carries the offending line."""

    def __init__(self, message: str, line: int | None = None):
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)


class NotSeparableError(ValueError):
    pass


def _check_n(n: int) -> None:
    if not 1 <= n <= MAX_N:
        raise ValueError(f"question count must be in 1..{MAX_N}, got {n}")


def question_bit(n: int, j: int) -> int:
    """Word bit holding question ``j`` (1-based) out of ``n``."""
    return 1 << (n - j)


def popcount(x: int) -> int:
    return bin(x).count("1")


@dataclass(frozen=True)
class Outcome:
    n: int
    bits: int

    def __post_init__(self):
        _check_n(self.n)
        if self.bits < 0 or self.bits >> self.n:
            raise ValueError(f"outcome {self.bits:#x} does not fit in {self.n} questions")

    @classmethod
    def parse(cls, text: str) -> "Outcome":
        text = text.strip()
        if not text or set(text) - {"0", "1"}:
            raise ValueError(f"not a 0/1 outcome: {text!r}")
        return cls(len(text), int(text, 2))

    def __getitem__(self, j: int) -> int:
        """Value (0 or 1) of question ``j``."""
        if not 1 <= j <= self.n:
            raise IndexError(j)
        return (self.bits >> (self.n - j)) & 1

    def __str__(self) -> str:
        return format(self.bits, f"0{self.n}b")


@dataclass(frozen=True, order=True)
class QuestionSet:
    n: int
    mask: int

    def __post_init__(self):
        _check_n(self.n)
        if self.mask < 0 or self.mask >> self.n:
            raise ValueError(f"mask {self.mask:#x} does not fit in {self.n} questions")

    @classmethod
    def of(cls, n: int, questions: Iterable[int]) -> "QuestionSet":
        mask = 0
        for q in questions:
            if not 1 <= q <= n:
                raise ValueError(f"question {q} outside 1..{n}")
            mask |= question_bit(n, q)
        return cls(n, mask)

    @classmethod
    def full(cls, n: int) -> "QuestionSet":
        return cls(n, (1 << n) - 1)

    @classmethod
    def empty(cls, n: int) -> "QuestionSet":
        return cls(n, 0)

    def questions(self) -> tuple[int, ...]:
        return tuple(j for j in range(1, self.n + 1) if self.mask & question_bit(self.n, j))

    def complement(self) -> "QuestionSet":
        return QuestionSet(self.n, ((1 << self.n) - 1) & ~self.mask)

    def __contains__(self, j: int) -> bool:
        return 1 <= j <= self.n and bool(self.mask & question_bit(self.n, j))

    def __len__(self) -> int:
        return popcount(self.mask)

    def __iter__(self) -> Iterator[int]:
        return iter(self.questions())

    def __str__(self) -> str:
        return "{" + ",".join(map(str, self.questions())) + "}"


def _sort_key(mask: int) -> tuple[int, int]:
    return popcount(mask), mask


@dataclass(frozen=True)
class Character:
    """A collection of question sets; always holds the empty and the full set.

    ``masks`` is normalised to sorted ``(popcount, mask)`` order with no
    duplicates, so equal collections compare and hash equal.
    """

    n: int
    masks: tuple[int, ...]

    def __post_init__(self):
        _check_n(self.n)
        full = (1 << self.n) - 1
        found = set(self.masks)
        for m in found:
            if m < 0 or m & ~full:
                raise ValueError(f"mask {m:#x} does not fit in {self.n} questions")
        found |= {0, full}
        object.__setattr__(self, "masks", tuple(sorted(found, key=_sort_key)))

    @classmethod
    def of(cls, n: int, sets: Iterable[Iterable[int]]) -> "Character":
        return cls(n, tuple(QuestionSet.of(n, s).mask for s in sets))

    @classmethod
    def trivial(cls, n: int) -> "Character":
        return cls(n, ())

    @classmethod
    def power_set(cls, n: int) -> "Character":
        return cls(n, tuple(range(1 << n)))

    @classmethod
    def from_bits(cls, n: int, bits: int) -> "Character":
        """Inverse of :attr:`bits`: bit ``m`` set means mask ``m`` is a member."""
        return cls(n, tuple(m for m in range(1 << n) if bits >> m & 1))

    @property
    def bits(self) -> int:
        out = 0
        for m in self.masks:
            out |= 1 << m
        return out

    @property
    def sets(self) -> tuple[QuestionSet, ...]:
        return tuple(QuestionSet(self.n, m) for m in self.masks)

    def nontrivial(self) -> tuple[int, ...]:
        full = (1 << self.n) - 1
        return tuple(m for m in self.masks if m not in (0, full))

    def __contains__(self, s) -> bool:
        if isinstance(s, QuestionSet):
            return s.n == self.n and s.mask in self.masks
        return s in self.masks

    def __iter__(self) -> Iterator[QuestionSet]:
        return iter(self.sets)

    def __len__(self) -> int:
        return len(self.masks)

    def as_lists(self) -> list[list[int]]:
        lists = [list(QuestionSet(self.n, m).questions()) for m in self.masks]
        lists.sort(key=lambda s: (len(s), s))
        return lists

    def to_json(self) -> dict:
        return {"n": self.n, "separable": self.as_lists()}

    def dumps(self) -> str:
        return json.dumps(self.to_json(), separators=(",", ":"))

    @classmethod
    def from_json(cls, obj) -> "Character":
        if isinstance(obj, str):
            obj = json.loads(obj)
        try:
            n = int(obj["n"])
            sets = obj["separable"]
        except (KeyError, TypeError) as exc:
            raise ValueError("character JSON needs keys 'n' and 'separable'") from exc
        return cls.of(n, sets)

    def __str__(self) -> str:
        inner = ", ".join("∅" if m == 0 else str(QuestionSet(self.n, m)) for m in self.masks)
        return "{" + inner + "}"


@dataclass(frozen=True)
class InducedOrder:
    s: QuestionSet
    order: tuple[int, ...]

    def __str__(self) -> str:
        width = len(self.s)
        return " ≻ ".join(format(o, f"0{width}b") for o in self.order)


@dataclass(frozen=True)
class PreferenceMatrix:
    """A strict ranking of all ``2**n`` outcomes, rows[0] most preferred."""

    n: int
    rows: tuple[int, ...]
    rank_of: tuple[int, ...] = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        _check_n(self.n)
        rows = tuple(self.rows)
        object.__setattr__(self, "rows", rows)
        size = 1 << self.n
        if len(rows) != size:
            raise ValueError(f"matrix on {self.n} questions needs {size} rows, got {len(rows)}")
        rank = [-1] * size
        for i, r in enumerate(rows):
            if not 0 <= r < size:
                raise ValueError(f"row {i + 1} ({r}) is not an outcome on {self.n} questions")
            if rank[r] >= 0:
                raise ValueError(f"row {i + 1} repeats row {rank[r] + 1}")
            rank[r] = i
        object.__setattr__(self, "rank_of", tuple(rank))

    @classmethod
    def from_strings(cls, rows: Sequence[str]) -> "PreferenceMatrix":
        return parse_matrix("\n".join(rows))

    def __len__(self) -> int:
        return len(self.rows)

    def outcome(self, i: int) -> Outcome:
        return Outcome(self.n, self.rows[i])

    def prefers(self, x: int, y: int) -> bool:
        return self.rank_of[x] < self.rank_of[y]

    def column(self, j: int) -> tuple[int, ...]:
        b = question_bit(self.n, j)
        return tuple(1 if r & b else 0 for r in self.rows)

    def row_strings(self) -> list[str]:
        return [format(r, f"0{self.n}b") for r in self.rows]

    def to_text(self) -> str:
        return "\n".join(self.row_strings()) + "\n"

    def reversed(self) -> "PreferenceMatrix":
        return PreferenceMatrix(self.n, self.rows[::-1])

    def flip_columns(self, flips: QuestionSet | int) -> "PreferenceMatrix":
        mask = flips.mask if isinstance(flips, QuestionSet) else flips
        return PreferenceMatrix(self.n, tuple(r ^ mask for r in self.rows))

    def __str__(self) -> str:
        return self.to_text().rstrip("\n")


def parse_matrix(text: str) -> PreferenceMatrix:
    """Parse the plain text format: one row per line, '0'/'1' characters.

    Blank lines are rejected except for trailing ones; ``\\r`` is ignored.
    """
    lines = text.replace("\r", "").split("\n")
    while lines and lines[-1].strip() == "":
        lines.pop()
    if not lines:
        raise MatrixFormatError("empty matrix text")
    width = len(lines[0].strip())
    if not 1 <= width <= MAX_N:
        raise MatrixFormatError(f"row width {width} outside 1..{MAX_N}", 1)
    seen: dict[int, int] = {}
    rows = []
    for lineno, raw in enumerate(lines, start=1):
        line = raw.strip()
        if not line:
            raise MatrixFormatError("empty line", lineno)
        if len(line) != width:
            raise MatrixFormatError(f"expected {width} characters, got {len(line)}", lineno)
        bad = set(line) - {"0", "1"}
        if bad:
            raise MatrixFormatError(f"non-binary character {sorted(bad)[0]!r}", lineno)
        word = int(line, 2)
        if word in seen:
            raise MatrixFormatError(f"duplicate row {line} (first seen on line {seen[word]})", lineno)
        seen[word] = lineno
        rows.append(word)
    expected = 1 << width
    if len(rows) != expected:
        raise MatrixFormatError(
            f"{width} questions need {expected} rows, found {len(rows)}", len(rows)
        )
    return PreferenceMatrix(width, tuple(rows))


def render_matrix(p: PreferenceMatrix) -> str:
    return p.to_text()


def _positions(n: int, mask: int) -> list[int]:
    """Bit positions of ``mask``, most significant (lowest question) first."""
    return [n - j for j in range(1, n + 1) if mask >> (n - j) & 1]


def compress(word: int, positions: Sequence[int]) -> int:
    """Gather the bits of ``word`` at ``positions`` into a packed word."""
    out = 0
    for p in positions:
        out = (out << 1) | (word >> p & 1)
    return out


def spread(word: int, positions: Sequence[int]) -> int:
    """Inverse of :func:`compress`."""
    out = 0
    width = len(positions)
    for i, p in enumerate(positions):
        if word >> (width - 1 - i) & 1:
            out |= 1 << p
    return out


def _mask(n: int, s) -> int:
    if isinstance(s, QuestionSet):
        if s.n != n:
            raise ValueError(f"question set on {s.n} questions used with matrix on {n}")
        return s.mask
    return int(s)


def restrict(p: PreferenceMatrix, fixed: QuestionSet, x: int | Outcome) -> PreferenceMatrix:
    """Submatrix on the unfixed questions for rows agreeing with ``x`` on ``fixed``.

    ``x`` is either a full-width word with bits only inside ``fixed`` or an
    :class:`Outcome` on ``fixed`` itself (its questions in ascending order).
    Surviving questions are renumbered ``1..n-|fixed|`` in ascending order.
    """
    n = p.n
    full = (1 << n) - 1
    f = _mask(n, fixed)
    if f == 0 or f == full:
        raise ValueError("fixed set must be a proper nonempty subset of the questions")
    fpos = _positions(n, f)
    if isinstance(x, Outcome):
        if x.n != len(fpos):
            raise ValueError(f"outcome has {x.n} questions, fixed set has {len(fpos)}")
        x = spread(x.bits, fpos)
    if x & ~f:
        raise ValueError("outcome has bits outside the fixed set")
    keep = _positions(n, full & ~f)
    rows = tuple(compress(r, keep) for r in p.rows if r & f == x)
    return PreferenceMatrix(len(keep), rows)


def is_separable(p: PreferenceMatrix, s: QuestionSet | int) -> bool:
    m = _mask(p.n, s)
    if m == 0 or m == (1 << p.n) - 1:
        return True
    return _backend.impl.is_separable_rows(p.rows, p.n, m)


def is_separable_by_definition(p: PreferenceMatrix, s: QuestionSet | int) -> bool:
    """Reference check: materialise every restriction and compare all pairs."""
    n = p.n
    m = _mask(n, s)
    full = (1 << n) - 1
    if m == 0 or m == full:
        return True
    f = full & ~m
    fpos = _positions(n, f)
    subs = [restrict(p, QuestionSet(n, f), spread(y, fpos)) for y in range(1 << len(fpos))]
    return all(a.rows == b.rows for a, b in itertools.combinations(subs, 2))


def character(p: PreferenceMatrix) -> Character:
    return Character(p.n, tuple(_backend.impl.character_masks(p.rows, p.n)))


def character_by_definition(p: PreferenceMatrix) -> Character:
    return Character(
        p.n, tuple(m for m in range(1 << p.n) if is_separable_by_definition(p, m))
    )


def induced_order(p: PreferenceMatrix, s: QuestionSet | int) -> InducedOrder:
    n = p.n
    m = _mask(n, s)
    qs = QuestionSet(n, m)
    full = (1 << n) - 1
    if m == 0:
        raise ValueError("induced order needs a nonempty set")
    if m == full:
        return InducedOrder(qs, p.rows)
    if not is_separable(p, m):
        raise NotSeparableError(f"{qs} is not separable")
    first = p.rows[0] & (full & ~m)
    keep = _positions(n, m)
    return InducedOrder(qs, tuple(compress(r, keep) for r in p.rows if r & ~m == first))


def is_cubic(p: PreferenceMatrix) -> bool:
    rows = p.rows
    return all(popcount(a ^ b) == 1 for a, b in zip(rows, rows[1:]))


def shift_up(t: QuestionSet, k: int) -> QuestionSet:
    """Renumber ``t`` into ``n + 1`` questions, leaving a gap at question ``k``."""
    if not 1 <= k <= t.n + 1:
        raise ValueError(f"k={k} outside 1..{t.n + 1}")
    return QuestionSet.of(t.n + 1, (q if q < k else q + 1 for q in t.questions()))


def shift_down(t: QuestionSet, k: int) -> QuestionSet:
    """Inverse of :func:`shift_up`; ``t`` must not contain ``k``."""
    if k in t:
        raise ValueError(f"question {k} is in {t}")
    return QuestionSet.of(t.n - 1, (q if q < k else q - 1 for q in t.questions()))


def permute_mask(n: int, mask: int, sigma: Sequence[int]) -> int:
    """Image of a mask under ``sigma`` given as 1-based images ``sigma[j-1]``."""
    out = 0
    for j in range(1, n + 1):
        if mask & question_bit(n, j):
            out |= question_bit(n, sigma[j - 1])
    return out


def _check_perm(n: int, sigma: Sequence[int]) -> None:
    if sorted(sigma) != list(range(1, n + 1)):
        raise ValueError(f"{tuple(sigma)} is not a permutation of 1..{n}")


def permute_character(sigma: Sequence[int], c: Character) -> Character:
    _check_perm(c.n, sigma)
    return Character(c.n, tuple(permute_mask(c.n, m, sigma) for m in c.masks))


def characters_isomorphic(c1: Character, c2: Character) -> tuple[int, ...] | None:
    """Some ``sigma`` with ``permute_character(sigma, c1) == c2``, else ``None``."""
    if c1.n != c2.n:
        raise ValueError(f"characters on {c1.n} and {c2.n} questions")
    if len(c1) != len(c2):
        return None
    if sorted(map(popcount, c1.masks)) != sorted(map(popcount, c2.masks)):
        return None
    target = set(c2.masks)
    for sigma in itertools.permutations(range(1, c1.n + 1)):
        if all(permute_mask(c1.n, m, sigma) in target for m in c1.masks):
            return sigma
    return None


_LETTERS = "abcdefghijklmnop"
_key_cache: dict[tuple[int, tuple[int, ...]], str] = {}


def _encode(n: int, masks: Iterable[int]) -> tuple[tuple[int, ...], ...]:
    sets = [QuestionSet(n, m).questions() for m in masks]
    return tuple(sorted(sets, key=lambda s: (len(s), s)))


def character_class_key(c: Character) -> str:
    """Canonical class name such as ``{a}{a,b}``; ``∅`` when nothing nontrivial."""
    cache_key = (c.n, c.masks)
    hit = _key_cache.get(cache_key)
    if hit is not None:
        return hit
    nontrivial = c.nontrivial()
    if not nontrivial:
        key = "∅"
    else:
        best = min(
            _encode(c.n, (permute_mask(c.n, m, sigma) for m in nontrivial))
            for sigma in itertools.permutations(range(1, c.n + 1))
        )
        key = "".join("{" + ",".join(_LETTERS[q - 1] for q in s) + "}" for s in best)
    _key_cache[cache_key] = key
    return key


def parse_class_key(key: str, n: int) -> Character:
    """Character on ``n`` questions whose class name is ``key`` (letters a→1, b→2, ...)."""
    key = key.strip().replace(" ", "").replace("},{", "}{")
    if key in ("∅", "{}", ""):
        return Character.trivial(n)
    if not (key.startswith("{") and key.endswith("}")):
        raise ValueError(f"malformed character class key {key!r}")
    sets = []
    for part in key[1:-1].split("}{"):
        qs = []
        for letter in part.split(","):
            if len(letter) != 1 or letter not in _LETTERS:
                raise ValueError(f"malformed character class key {key!r}")
            qs.append(_LETTERS.index(letter) + 1)
        if len(set(qs)) != len(qs) or max(qs) > n:
            raise ValueError(f"class key {key!r} does not fit {n} questions")
        sets.append(qs)
    return Character.of(n, sets)


def is_nested(c: Character) -> bool:
    masks = c.masks
    # sorted by size, so a chain means each set contains its predecessor
    return all(a & b == a for a, b in zip(masks, masks[1:]))


def is_intersection_closed(c: Character) -> bool:
    present = set(c.masks)
    return all(a & b in present for a, b in itertools.combinations(c.masks, 2))
