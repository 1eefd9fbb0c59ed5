"""Signed permutations acting on preference matrices by column moves.

A :class:`SignedPermutation` ``g = (sigma, flips)`` sends a matrix ``P`` to
the matrix whose column ``j`` is column ``sigma(j)`` of ``P``, complemented
when ``j`` is in ``flips``.  This is the right action ``P -> ~(~P @ M)`` with
``M[sigma(j), j] = -1 if j in flips else 1`` and ``~`` swapping 0 and -1,
so ``act(act(P, g), h) == act(P, compose(g, h))``.

Because old question ``sigma(j)`` becomes new question ``j``, the character
transforms by ``sigma`` inverse:
``character(act(P, g)) == permute_character(inverse(g).sigma, character(P))``.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from typing import Iterator, Sequence

from .prefcore import PreferenceMatrix, QuestionSet, is_cubic, question_bit

ORBIT_MAX_N = 4


@dataclass(frozen=True)
class SignedPermutation:
    n: int
    sigma: tuple[int, ...]
    flips: QuestionSet

    def __post_init__(self):
        sigma = tuple(int(x) for x in self.sigma)
        object.__setattr__(self, "sigma", sigma)
        if sorted(sigma) != list(range(1, self.n + 1)):
            raise ValueError(f"{sigma} is not a permutation of 1..{self.n}")
        if self.flips.n != self.n:
            raise ValueError("flip set and permutation disagree on n")

    @classmethod
    def identity(cls, n: int) -> "SignedPermutation":
        return cls(n, tuple(range(1, n + 1)), QuestionSet.empty(n))

    @classmethod
    def of(cls, sigma: Sequence[int], flips: Sequence[int] = ()) -> "SignedPermutation":
        n = len(sigma)
        return cls(n, tuple(sigma), QuestionSet.of(n, flips))

    @classmethod
    def parse(cls, text: str) -> "SignedPermutation":
        """Parse ``"perm=2,3,1 flips=3"``; ``flips=`` may be empty or omitted."""
        fields = {}
        for part in text.split():
            key, sep, value = part.partition("=")
            if not sep or key not in ("perm", "flips"):
                raise ValueError(f"bad group element token {part!r}")
            fields[key] = value
        if "perm" not in fields:
            raise ValueError("group element needs perm=...")
        return cls.of(_int_list(fields["perm"]), _int_list(fields.get("flips", "")))

    def is_identity(self) -> bool:
        return self.sigma == tuple(range(1, self.n + 1)) and self.flips.mask == 0

    def apply_word(self, word: int) -> int:
        n = self.n
        out = 0
        for j, src in enumerate(self.sigma, start=1):
            if word & question_bit(n, src):
                out |= question_bit(n, j)
        return out ^ self.flips.mask

    def __str__(self) -> str:
        return "perm={} flips={}".format(
            ",".join(map(str, self.sigma)), ",".join(map(str, self.flips.questions()))
        )


def _int_list(text: str) -> list[int]:
    text = text.strip()
    if not text:
        return []
    try:
        return [int(x) for x in text.split(",")]
    except ValueError as exc:
        raise ValueError(f"expected comma-separated integers, got {text!r}") from exc


def _same_n(g: SignedPermutation, h: SignedPermutation) -> None:
    if g.n != h.n:
        raise ValueError(f"group elements on {g.n} and {h.n} questions")


def act(p: PreferenceMatrix, g: SignedPermutation) -> PreferenceMatrix:
    if p.n != g.n:
        raise ValueError(f"matrix on {p.n} questions, group element on {g.n}")
    return PreferenceMatrix(p.n, tuple(map(g.apply_word, p.rows)))


def compose(g: SignedPermutation, h: SignedPermutation) -> SignedPermutation:
    """Product ``g·h``: acting by it equals acting by ``g`` then by ``h``."""
    _same_n(g, h)
    n = g.n
    sigma = tuple(g.sigma[h.sigma[j] - 1] for j in range(n))
    flips = [
        j for j in range(1, n + 1) if (h.sigma[j - 1] in g.flips) != (j in h.flips)
    ]
    return SignedPermutation(n, sigma, QuestionSet.of(n, flips))


def inverse(g: SignedPermutation) -> SignedPermutation:
    n = g.n
    inv = [0] * n
    for j, s in enumerate(g.sigma, start=1):
        inv[s - 1] = j
    flips = [i for i in range(1, n + 1) if inv[i - 1] in g.flips]
    return SignedPermutation(n, tuple(inv), QuestionSet.of(n, flips))


def group_elements(n: int) -> Iterator[SignedPermutation]:
    """All ``2**n * n!`` elements, permutations outer, flip masks inner."""
    for sigma in itertools.permutations(range(1, n + 1)):
        for mask in range(1 << n):
            yield SignedPermutation(n, sigma, QuestionSet(n, mask))


def orbit(p: PreferenceMatrix) -> set[PreferenceMatrix]:
    if not is_cubic(p):
        raise ValueError("orbit is only defined here for cubic matrices")
    if p.n > ORBIT_MAX_N:
        raise ValueError(f"orbit materialisation limited to n <= {ORBIT_MAX_N}")
    return {act(p, g) for g in group_elements(p.n)}


def stabilizer(p: PreferenceMatrix) -> list[SignedPermutation]:
    return [g for g in group_elements(p.n) if act(p, g) == p]


def canonical_element(p: PreferenceMatrix) -> SignedPermutation:
    """The unique ``g`` with ``act(p, g)`` in canonical form.

    Canonical: the first row is all ones and question ``j`` is the ``j``-th
    distinct question to change going down the rows.
    """
    if not is_cubic(p):
        raise ValueError("canonical form is only defined for cubic matrices")
    n = p.n
    order: list[int] = []
    seen = 0
    for a, b in zip(p.rows, p.rows[1:]):
        d = a ^ b
        if not d & seen:
            seen |= d
            order.append(n - d.bit_length() + 1)
            if len(order) == n:
                break
    top = p.rows[0]
    flips = [j for j, q in enumerate(order, start=1) if not top & question_bit(n, q)]
    return SignedPermutation(n, tuple(order), QuestionSet.of(n, flips))


def canonicalize(p: PreferenceMatrix) -> tuple[PreferenceMatrix, SignedPermutation]:
    g = canonical_element(p)
    return act(p, g), g


def is_canonical(p: PreferenceMatrix) -> bool:
    return is_cubic(p) and canonical_element(p).is_identity()
