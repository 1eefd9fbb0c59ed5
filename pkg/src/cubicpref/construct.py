"""Stack and weave: building cubic matrices on n+1 questions from ones on n.

``stack`` puts two matrices of ``n`` questions end to end (the last row of
the upper one equal to the first row of the lower one) and inserts a new
question ``k`` that is constant on each half.  ``weave`` doubles every row
of one matrix and inserts a question whose column reads ``1,0,0,1,1,0,0,...,1``.
Both have exact character laws, used by :func:`synthesize` to build a
matrix with a prescribed character by peeling inserted questions off.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from .grayenum import find_representative
from .hyperoct import SignedPermutation, act, inverse
from .prefcore import (
    Character,
    PreferenceMatrix,
    QuestionSet,
    character,
    character_class_key,
    characters_isomorphic,
    is_cubic,
    is_nested,
    question_bit,
    shift_up,
)


class ConstructionError(ValueError):
    pass


@dataclass(frozen=True)
class StackSpec:
    k: int
    sign: int = 1

    def __post_init__(self):
        if self.sign not in (0, 1):
            raise ValueError(f"sign must be 0 or 1, got {self.sign}")


@dataclass(frozen=True)
class WeaveSpec:
    k: int
    sign: int = 1

    def __post_init__(self):
        if self.sign not in (0, 1):
            raise ValueError(f"sign must be 0 or 1, got {self.sign}")


def _insert_bit(word: int, n: int, k: int, bit: int) -> int:
    """Insert ``bit`` as question ``k`` of ``n + 1`` into an ``n``-question word."""
    low = n + 1 - k  # bit positions below the new question
    hi = word >> low
    lo = word & ((1 << low) - 1)
    return (hi << (low + 1)) | (bit << low) | lo


def _drop_bit(word: int, n: int, k: int) -> int:
    """Remove question ``k`` from an ``n``-question word."""
    low = n - k
    return ((word >> (low + 1)) << low) | (word & ((1 << low) - 1))


def _check_k(k: int, n: int) -> None:
    if not 1 <= k <= n + 1:
        raise ValueError(f"insertion position k={k} outside 1..{n + 1}")


def stackable(a: PreferenceMatrix, b: PreferenceMatrix) -> bool:
    if a.n != b.n:
        raise ValueError(f"matrices on {a.n} and {b.n} questions")
    return a.rows[-1] == b.rows[0]


def make_stack_partner(a: PreferenceMatrix) -> PreferenceMatrix:
    """Flip exactly the columns where ``a``'s first and last rows differ."""
    return a.flip_columns(a.rows[0] ^ a.rows[-1])


def stack(a: PreferenceMatrix, b: PreferenceMatrix, spec: StackSpec) -> PreferenceMatrix:
    if not stackable(a, b):
        raise ConstructionError("last row of the upper matrix must equal the first row of the lower")
    n = a.n
    _check_k(spec.k, n)
    top, bottom = spec.sign, 1 - spec.sign
    rows = [_insert_bit(r, n, spec.k, top) for r in a.rows]
    rows += [_insert_bit(r, n, spec.k, bottom) for r in b.rows]
    return PreferenceMatrix(n + 1, tuple(rows))


def weave_column(size: int, sign: int = 1) -> tuple[int, ...]:
    """The inserted weave column: ``1,0,0,1,1,0,0,...,1`` for ``sign=1``."""
    return tuple((1 if i % 4 in (0, 3) else 0) ^ (1 - sign) for i in range(size))


def weave(a: PreferenceMatrix, spec: WeaveSpec) -> PreferenceMatrix:
    n = a.n
    _check_k(spec.k, n)
    col = weave_column(2 * len(a.rows), spec.sign)
    rows = tuple(_insert_bit(a.rows[i // 2], n, spec.k, col[i]) for i in range(len(col)))
    return PreferenceMatrix(n + 1, rows)


def predicted_stack_character(c1: Character, c2: Character, k: int) -> Character:
    if c1.n != c2.n:
        raise ValueError(f"characters on {c1.n} and {c2.n} questions")
    n = c1.n
    _check_k(k, n)
    kbit = question_bit(n + 1, k)
    common = set(c1.masks) & set(c2.masks)
    masks = [shift_up(QuestionSet(n, t), k).mask | kbit for t in common]
    return Character(n + 1, tuple(masks) + (0,))


def predicted_weave_character(c: Character, k: int) -> Character:
    _check_k(k, c.n)
    masks = [shift_up(QuestionSet(c.n, t), k).mask for t in c.masks]
    return Character(c.n + 1, tuple(masks))


def _stack_sign(col: tuple[int, ...]) -> int | None:
    half = len(col) // 2
    top = col[0]
    if all(x == top for x in col[:half]) and all(x != top for x in col[half:]):
        return top
    return None


def _weave_sign(col: tuple[int, ...]) -> int | None:
    for sign in (1, 0):
        if col == weave_column(len(col), sign):
            return sign
    return None


def detect_stack_column(p: PreferenceMatrix) -> tuple[int, int] | None:
    """``(k, sign)`` of the column reading ``1..1 0..0`` (sign 1) or its complement."""
    if p.n < 2:
        return None
    for k in range(1, p.n + 1):
        sign = _stack_sign(p.column(k))
        if sign is not None:
            return k, sign
    return None


def detect_weave_column(p: PreferenceMatrix) -> tuple[int, int] | None:
    if p.n < 2:
        return None
    for k in range(1, p.n + 1):
        sign = _weave_sign(p.column(k))
        if sign is not None:
            return k, sign
    return None


def unstack(p: PreferenceMatrix, k: int, sign: int) -> tuple[PreferenceMatrix, PreferenceMatrix]:
    if not 1 <= k <= p.n or p.n < 2:
        raise ConstructionError(f"no question {k} to unstack on {p.n} questions")
    if _stack_sign(p.column(k)) != sign:
        raise ConstructionError(f"column {k} is not a stack column with sign {sign}")
    half = len(p.rows) // 2
    n = p.n - 1
    upper = PreferenceMatrix(n, tuple(_drop_bit(r, p.n, k) for r in p.rows[:half]))
    lower = PreferenceMatrix(n, tuple(_drop_bit(r, p.n, k) for r in p.rows[half:]))
    return upper, lower


def unweave(p: PreferenceMatrix, k: int, sign: int) -> PreferenceMatrix:
    if not 1 <= k <= p.n or p.n < 2:
        raise ConstructionError(f"no question {k} to unweave on {p.n} questions")
    if _weave_sign(p.column(k)) != sign:
        raise ConstructionError(f"column {k} is not a weave column with sign {sign}")
    rows = [_drop_bit(r, p.n, k) for r in p.rows]
    if any(rows[i] != rows[i + 1] for i in range(0, len(rows), 2)):
        raise ConstructionError("paired rows disagree outside the weave column")
    return PreferenceMatrix(p.n - 1, tuple(rows[::2]))


# ------------------------------------------------------------------ synthesis

@dataclass
class Synthesis:
    """Outcome of :func:`synthesize_trace`.

    ``steps`` lists the operations innermost first, each a dict such as
    ``{"op": "stack", "k": 5, "sign": 1, "n": 4}`` where ``n`` is the
    question count of the input.  ``reason`` explains a failure.
    """

    target: Character
    matrix: PreferenceMatrix | None = None
    base: PreferenceMatrix | None = None
    steps: list[dict] = field(default_factory=list)
    reason: str = ""
    proved_inadmissible: bool = False

    @property
    def ok(self) -> bool:
        return self.matrix is not None

    def to_json(self) -> dict:
        out = {
            "character": self.target.to_json(),
            "status": "admissible" if self.ok else "not found",
            "steps": self.steps,
        }
        if self.base is not None:
            out["base"] = self.base.row_strings()
        if not self.ok:
            out["reason"] = self.reason
            out["proved_inadmissible"] = self.proved_inadmissible
        return out


class _NotFound(Exception):
    def __init__(self, reason: str, proved: bool = False):
        super().__init__(reason)
        self.proved = proved


def _peel_weave(c: Character, k: int) -> Character | None:
    """Character ``c'`` with ``predicted_weave_character(c', k) == c``, if any."""
    n = c.n
    full = (1 << n) - 1
    kbit = question_bit(n, k)
    if full & ~kbit not in c.masks:
        return None
    inner = []
    for m in c.masks:
        if m == full:
            continue
        if m & kbit:
            return None
        inner.append(_drop_bit(m, n, k))
    return Character(n - 1, tuple(inner))


def _peel_stack(c: Character, k: int) -> Character | None:
    n = c.n
    kbit = question_bit(n, k)
    if kbit not in c.masks:
        return None
    inner = []
    for m in c.masks:
        if m == 0:
            continue
        if not m & kbit:
            return None
        inner.append(_drop_bit(m & ~kbit, n, k))
    return Character(n - 1, tuple(inner))


def _base_case(c: Character) -> PreferenceMatrix:
    key = character_class_key(c)
    rep = find_representative(c.n, key)
    if rep is None:
        raise _NotFound(f"no cubic matrix on {c.n} questions has class {key}", proved=c.n <= 4)
    sigma = characters_isomorphic(character(rep), c)
    # act by the inverse relabelling: character(act(P, g)) = inverse(g).sigma(character(P))
    g = inverse(SignedPermutation(c.n, sigma, QuestionSet.empty(c.n)))
    return act(rep, g)


def _build(c: Character, base_n: int, steps: list[dict], holder: dict) -> PreferenceMatrix:
    n = c.n
    if n <= base_n or n == 1:
        p = _base_case(c)
        holder["base"] = p
        return p
    for k in range(1, n + 1):
        inner = _peel_weave(c, k)
        if inner is not None:
            p1 = _build(inner, base_n, steps, holder)
            steps.append({"op": "weave", "k": k, "sign": 1, "n": n - 1})
            return weave(p1, WeaveSpec(k, 1))
    for k in range(1, n + 1):
        inner = _peel_stack(c, k)
        if inner is not None:
            p1 = _build(inner, base_n, steps, holder)
            p2 = make_stack_partner(p1)
            steps.append({"op": "stack", "k": k, "sign": 1, "n": n - 1})
            return stack(p1, p2, StackSpec(k, 1))
    raise _NotFound(
        f"character on {n} questions has neither a singleton nor a co-singleton to peel"
    )


def synthesize_trace(c: Character, base_n: int = 4) -> Synthesis:
    """Try to build a cubic matrix with character exactly ``c``.

    Failure is only a proof of inadmissibility when ``proved_inadmissible``
    is set (non-nested target, or an exhaustive base lookup came up empty).
    """
    result = Synthesis(c)
    if not 1 <= base_n <= 4:
        raise ValueError(f"base_n must be in 1..4, got {base_n}")
    if not is_nested(c):
        result.reason = "character is not nested; no cubic matrix has it"
        result.proved_inadmissible = True
        return result
    holder: dict = {}
    try:
        p = _build(c, base_n, result.steps, holder)
    except _NotFound as exc:
        result.reason = str(exc)
        result.steps = []
        # only a lookup on the target itself is exhaustive
        result.proved_inadmissible = exc.proved and c.n <= base_n
        return result
    got = character(p)
    if got != c or not is_cubic(p):
        raise AssertionError(f"synthesised matrix has character {got}, wanted {c}")
    result.matrix = p
    result.base = holder.get("base")
    return result


def synthesize(c: Character, base_n: int = 4) -> PreferenceMatrix | None:
    return synthesize_trace(c, base_n).matrix
