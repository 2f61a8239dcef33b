"""Freely reduced words in a free group of finite rank.

Letters are signed generator indices: ``k`` stands for the generator
``x_k`` and ``-k`` for its inverse, with ``1 <= k <= rank``.  In text form
``x_1 .. x_26`` are written ``a .. z`` and their inverses ``A .. Z``.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Iterator

__all__ = [
    "WordError",
    "Word",
    "CyclicWord",
    "PeriodicDecomposition",
    "parse_word",
    "parse_letters",
    "free_reduce",
    "multiply",
    "invert",
    "power",
    "cyclic_reduce",
    "is_cyclically_reduced",
    "is_subword",
    "max_cancellation",
    "ball_size",
    "lemma62_bound",
    "periodic_decompose",
    "power_subword_bound",
    "primitive_root",
    "have_conjugate_powers",
    "is_cyclic_permutation",
    "letter_key",
    "shortlex_key",
    "reduced_words",
    "cyclically_reduced_words",
    "generator",
]


class WordError(ValueError):
    """Malformed word input or a violated precondition on words."""


def letter_key(letter: int) -> int:
    # x1 < X1 < x2 < X2 < ...
    return 2 * (abs(letter) - 1) + (letter < 0)


def _letter_char(letter: int) -> str:
    k = abs(letter)
    if k > 26:
        return f"[{letter}]"
    ch = chr(ord("a") + k - 1)
    return ch if letter > 0 else ch.upper()


@dataclass(frozen=True)
class Word:
    """An element of the free group F(x_1, ..., x_rank) in reduced form.

    Construct through :func:`free_reduce` or :func:`parse_word`; the
    constructor only validates.
    """

    letters: tuple[int, ...]
    rank: int

    def __post_init__(self) -> None:
        if self.rank < 1:
            raise WordError(f"rank must be positive, got {self.rank}")
        prev = 0
        for x in self.letters:
            if x == 0 or abs(x) > self.rank:
                raise WordError(f"letter {x} out of range for rank {self.rank}")
            if x == -prev:
                raise WordError("word is not freely reduced")
            prev = x

    @classmethod
    def identity(cls, rank: int) -> Word:
        return cls((), rank)

    def __len__(self) -> int:
        return len(self.letters)

    def __iter__(self) -> Iterator[int]:
        return iter(self.letters)

    def __getitem__(self, item):
        if isinstance(item, slice):
            # every contiguous block of a reduced word is reduced
            return Word(self.letters[item], self.rank)
        return self.letters[item]

    def __bool__(self) -> bool:
        return bool(self.letters)

    def __mul__(self, other: Word) -> Word:
        return multiply(self, other)

    def __pow__(self, n: int) -> Word:
        return power(self, n)

    def inverse(self) -> Word:
        return invert(self)

    def __str__(self) -> str:
        return "".join(_letter_char(x) for x in self.letters)

    def __repr__(self) -> str:
        return f"Word({str(self)!r}, rank={self.rank})"

    def text(self, alphabet: str | None = None) -> str:
        """Render with a custom alphabet, e.g. ``"xy"`` for the edge group."""
        if alphabet is None:
            return str(self)
        out = []
        for x in self.letters:
            ch = alphabet[abs(x) - 1]
            out.append(ch if x > 0 else ch.upper())
        return "".join(out)


@dataclass(frozen=True)
class CyclicWord:
    core: Word

    def __post_init__(self) -> None:
        if not is_cyclically_reduced(self.core):
            raise WordError(f"{self.core} is not cyclically reduced")

    def __len__(self) -> int:
        return len(self.core)

    def __str__(self) -> str:
        return str(self.core)


@dataclass(frozen=True)
class PeriodicDecomposition:
    period: Word
    exponent: int
    remainder: Word


def generator(k: int, rank: int) -> Word:
    return Word((k,), rank)


def free_reduce(raw: Iterable[int], rank: int) -> Word:
    """Single left-to-right stack pass."""
    stack: list[int] = []
    for x in raw:
        if x == 0 or abs(x) > rank:
            raise WordError(f"letter {x} out of range for rank {rank}")
        if stack and stack[-1] == -x:
            stack.pop()
        else:
            stack.append(x)
    return Word(tuple(stack), rank)


def parse_letters(text: str, alphabet: str | None = None) -> list[int]:
    """Letters of ``text``; lowercase is a generator, uppercase its inverse."""
    out = []
    for pos, ch in enumerate(text):
        if ch.isspace():
            continue
        if alphabet is None:
            if "a" <= ch <= "z":
                out.append(ord(ch) - ord("a") + 1)
                continue
            if "A" <= ch <= "Z":
                out.append(-(ord(ch) - ord("A") + 1))
                continue
        else:
            k = alphabet.find(ch.lower())
            if k >= 0 and ch.isalpha():
                out.append(k + 1 if ch.islower() else -(k + 1))
                continue
        raise WordError(f"invalid character {ch!r} at position {pos} in {text!r}")
    return out


def parse_word(text: str, rank: int | None = None, alphabet: str | None = None) -> Word:
    """Parse and freely reduce ``text``.

    Without ``rank`` the rank is the largest generator index used (at least 1).
    """
    letters = parse_letters(text, alphabet)
    if rank is None:
        rank = max((abs(x) for x in letters), default=1)
    return free_reduce(letters, rank)


def _check_rank(u: Word, v: Word) -> None:
    if u.rank != v.rank:
        raise WordError(f"rank mismatch: {u.rank} vs {v.rank}")


def multiply(u: Word, v: Word) -> Word:
    _check_rank(u, v)
    k = max_cancellation(u, v)
    return Word(u.letters[: len(u) - k] + v.letters[k:], u.rank)


def invert(w: Word) -> Word:
    return Word(tuple(-x for x in reversed(w.letters)), w.rank)


def power(w: Word, n: int) -> Word:
    if n < 0:
        return power(invert(w), -n)
    if n == 0 or not w:
        return Word.identity(w.rank)
    core, conj = cyclic_reduce(w)
    k = len(conj)
    # w = c * core * c^-1, so w^n = c * core^n * c^-1 with no further cancellation
    return Word(w.letters[:k] + core.core.letters * n + w.letters[len(w) - k :], w.rank)


def is_cyclically_reduced(w: Word) -> bool:
    return len(w) < 2 or w.letters[0] != -w.letters[-1]


def cyclic_reduce(w: Word) -> tuple[CyclicWord, Word]:
    """Return ``(core, c)`` with ``w = c * core * c^-1``."""
    letters = w.letters
    i, j = 0, len(letters) - 1
    while i < j and letters[i] == -letters[j]:
        i += 1
        j -= 1
    core = Word(letters[i : j + 1], w.rank)
    return CyclicWord(core), Word(letters[:i], w.rank)


def is_subword(u: Word, w: Word) -> bool:
    _check_rank(u, w)
    n, m = len(u), len(w)
    if n == 0:
        return True
    a, b = u.letters, w.letters
    return any(b[i : i + n] == a for i in range(m - n + 1))


def max_cancellation(u: Word, v: Word) -> int:
    """Length of the terminal segment of ``u`` cancelled against ``v``."""
    _check_rank(u, v)
    a, b = u.letters, v.letters
    k = 0
    limit = min(len(a), len(b))
    while k < limit and a[-1 - k] == -b[k]:
        k += 1
    return k


def ball_size(rank: int, n: int) -> int:
    """Number of reduced words of length at most ``n`` over ``rank`` generators."""
    if rank < 1:
        raise WordError("rank must be positive")
    if n < 0:
        raise WordError("radius must be non-negative")
    if rank == 1:
        return 2 * n + 1
    # 1 + sum_{k=1..n} 2r(2r-1)^(k-1)
    q = 2 * rank - 1
    return 1 + rank * (q**n - 1) // (rank - 1)


def _as_cyclic(w: Word | CyclicWord) -> Word:
    word = w.core if isinstance(w, CyclicWord) else w
    if not word:
        raise WordError("word must be nontrivial")
    if not is_cyclically_reduced(word):
        raise WordError(f"{word} is not cyclically reduced")
    return word


def lemma62_bound(a: Word | CyclicWord, b: Word | CyclicWord) -> int:
    """Upper bound on the cancelled block in ``a^n b^m``: ``2 * N * l(a)``.

    ``N`` counts elements of length at most ``l(b)``.  Valid only when no
    nontrivial power of ``a`` is conjugate to a power of ``b``; that is the
    caller's responsibility.
    """
    a, b = _as_cyclic(a), _as_cyclic(b)
    _check_rank(a, b)
    return 2 * ball_size(a.rank, len(b)) * len(a)


def periodic_decompose(s: Word, v: Word) -> PeriodicDecomposition:
    """Write ``v`` as ``s^n q`` letter by letter.

    The premise is that ``s v`` and ``v alpha`` coincide as reduced words,
    with ``alpha = v^-1 s v`` of the same length as ``s``.
    """
    _check_rank(s, v)
    if not s or not v:
        raise WordError("s and v must be nontrivial")
    if len(v) <= len(s):
        raise WordError("need l(v) > l(s)")
    alpha = multiply(multiply(invert(v), s), v)
    sv = s.letters + v.letters
    va = v.letters + alpha.letters
    if (
        len(alpha) != len(s)
        or s.letters[-1] == -v.letters[0]
        or v.letters[-1] == -alpha.letters[0]
        or sv != va
    ):
        raise WordError("not an (s,alpha)-shifted word")
    n = len(v) // len(s)
    cut = n * len(s)
    if v.letters[:cut] != s.letters * n:
        # unreachable when the premise holds
        raise WordError("not an (s,alpha)-shifted word")
    return PeriodicDecomposition(s, n, Word(v.letters[cut:], v.rank))


def is_cyclic_permutation(u: Word, v: Word) -> bool:
    if len(u) != len(v):
        return False
    if not u:
        return True
    doubled = u.letters + u.letters
    n = len(v)
    return any(doubled[i : i + n] == v.letters for i in range(n))


def _cyclic_root(w: Word) -> tuple[Word, int]:
    # w cyclically reduced and nontrivial
    n = len(w)
    for d in range(1, n + 1):
        if n % d == 0 and w.letters[:d] * (n // d) == w.letters:
            return Word(w.letters[:d], w.rank), n // d
    raise AssertionError("unreachable")


def primitive_root(w: Word) -> tuple[Word, int]:
    """Return ``(root, e)`` with ``w = root^e`` and ``e`` maximal."""
    if not w:
        raise WordError("trivial word has no root")
    core, conj = cyclic_reduce(w)
    root, e = _cyclic_root(core.core)
    return multiply(multiply(conj, root), invert(conj)), e


def have_conjugate_powers(a: Word, b: Word) -> bool:
    """True iff ``a^p`` is conjugate to ``b^q`` for some nonzero ``p``, ``q``.

    Two elements of a free group have conjugate nontrivial powers exactly
    when the cyclic cores of their primitive roots agree up to cyclic
    permutation and inversion.
    """
    _check_rank(a, b)
    if not a or not b:
        raise WordError("words must be nontrivial")
    ra, _ = _cyclic_root(cyclic_reduce(a)[0].core)
    rb, _ = _cyclic_root(cyclic_reduce(b)[0].core)
    return is_cyclic_permutation(ra, rb) or is_cyclic_permutation(ra, invert(rb))


def power_subword_bound(a: Word | CyclicWord, b: Word | CyclicWord) -> int:
    """``M`` such that ``a^M`` is never a subword of a power of ``b`` and vice versa."""
    a, b = _as_cyclic(a), _as_cyclic(b)
    _check_rank(a, b)
    if have_conjugate_powers(a, b):
        raise WordError(f"powers of {a} and {b} are conjugate")
    return max(ball_size(a.rank, len(b)), ball_size(a.rank, len(a)))


def shortlex_key(w: Word) -> tuple[int, tuple[int, ...]]:
    return len(w), tuple(letter_key(x) for x in w.letters)


def _ordered_letters(rank: int) -> list[int]:
    return [s * k for k in range(1, rank + 1) for s in (1, -1)]


def reduced_words(rank: int, max_length: int, min_length: int = 0) -> Iterator[Word]:
    """All reduced words with length in ``[min_length, max_length]``, shortlex."""
    letters = _ordered_letters(rank)

    def extend(prefix: tuple[int, ...], remaining: int) -> Iterator[tuple[int, ...]]:
        if remaining == 0:
            yield prefix
            return
        last = prefix[-1] if prefix else 0
        for x in letters:
            if x != -last:
                yield from extend(prefix + (x,), remaining - 1)

    for n in range(min_length, max_length + 1):
        for t in extend((), n):
            yield Word(t, rank)


def cyclically_reduced_words(
    rank: int, max_length: int | None = None, min_length: int = 1
) -> Iterator[Word]:
    """Nontrivial cyclically reduced words in shortlex order; unbounded if no max."""
    n = max(min_length, 1)
    while max_length is None or n <= max_length:
        for w in reduced_words(rank, n, n):
            if is_cyclically_reduced(w):
                yield w
        n += 1

