"""Probability distributions over a terminal-extended alphabet.

An alphabet is an ordered set of plain symbols; the terminal symbol ``$``
is implicit and always last. A distribution assigns a probability to every
symbol including the terminal. Both types are immutable values, so they are
safe to share between threads and to use as dictionary keys.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Mapping

TERMINAL = "$"

#: |sum(probs) - 1| must stay below this for a vector to count as a distribution.
SUM_TOLERANCE = 1e-9

#: Probabilities above this count as support membership (LM outputs carry float noise).
SUPPORT_EPS = 1e-9


class AlphabetMismatch(ValueError):
    """Operands disagree on their alphabet."""


class InvalidDistribution(ValueError):
    """A probability vector violates the distribution invariants."""


@dataclass(frozen=True)
class Alphabet:
    """Ordered, duplicate-free symbols; ordering breaks ranking ties.

    The ordering is total and fixed for the lifetime of the alphabet.
    """

    symbols: tuple[str, ...]
    _index: dict[str, int] = field(init=False, repr=False, compare=False, hash=False)

    def __init__(self, symbols: Iterable[str]):
        object.__setattr__(self, "symbols", tuple(symbols))
        if len(set(self.symbols)) != len(self.symbols):
            raise ValueError(f"duplicate symbols in alphabet: {self.symbols!r}")
        if TERMINAL in self.symbols:
            raise ValueError(f"the terminal symbol {TERMINAL!r} is implicit and cannot be listed")
        for sym in self.symbols:
            if not isinstance(sym, str) or not sym:
                raise ValueError(f"symbols must be non-empty strings, got {sym!r}")
        object.__setattr__(
            self, "_index", {sym: i for i, sym in enumerate(self.symbols + (TERMINAL,))}
        )

    @property
    def extended(self) -> tuple[str, ...]:
        """All symbols including the terminal, in order."""
        return self.symbols + (TERMINAL,)

    def index(self, symbol: str) -> int:
        """Position of ``symbol`` in the extended ordering."""
        try:
            return self._index[symbol]
        except KeyError:
            raise AlphabetMismatch(f"symbol {symbol!r} not in alphabet {self.symbols!r}") from None

    def __contains__(self, symbol: str) -> bool:
        return symbol in self._index and symbol != TERMINAL

    def __len__(self) -> int:
        return len(self.symbols)

    def __eq__(self, other: object) -> bool:
        return isinstance(other, Alphabet) and self.symbols == other.symbols

    def __hash__(self) -> int:
        return hash(self.symbols)


@dataclass(frozen=True)
class Distribution:
    """Probability vector over an alphabet's extended symbols, in alphabet order."""

    alphabet: Alphabet
    probs: tuple[float, ...]

    def __post_init__(self) -> None:
        object.__setattr__(self, "probs", tuple(float(p) for p in self.probs))
        n = len(self.alphabet.extended)
        if len(self.probs) != n:
            raise InvalidDistribution(
                f"expected {n} probabilities (one per symbol incl. {TERMINAL!r}), got {len(self.probs)}"
            )
        for sym, p in zip(self.alphabet.extended, self.probs):
            if not -SUM_TOLERANCE <= p <= 1.0 + SUM_TOLERANCE:
                raise InvalidDistribution(f"probability of {sym!r} out of [0,1]: {p!r}")
        total = sum(self.probs)
        if abs(total - 1.0) > SUM_TOLERANCE:
            raise InvalidDistribution(f"probabilities sum to {total!r}, not 1")

    @classmethod
    def from_map(cls, alphabet: Alphabet, probs: Mapping[str, float]) -> "Distribution":
        """Build from a symbol->probability mapping, normalizing entry order.

        The mapping must cover every symbol of the extended alphabet exactly.
        """
        expected = set(alphabet.extended)
        given = set(probs)
        if given != expected:
            missing = sorted(expected - given)
            extra = sorted(given - expected)
            raise InvalidDistribution(
                f"probability map does not match alphabet (missing {missing}, extra {extra})"
            )
        return cls(alphabet, tuple(probs[sym] for sym in alphabet.extended))

    def prob(self, symbol: str) -> float:
        return self.probs[self.alphabet.index(symbol)]

    def as_dict(self) -> dict[str, float]:
        return dict(zip(self.alphabet.extended, self.probs))

    def support(self, eps: float = SUPPORT_EPS) -> frozenset[str]:
        """Symbols with probability above ``eps``."""
        return frozenset(s for s, p in zip(self.alphabet.extended, self.probs) if p > eps)

    def __repr__(self) -> str:
        inner = ", ".join(f"{s}:{p:g}" for s, p in zip(self.alphabet.extended, self.probs))
        return f"Distribution({{{inner}}})"


def require_same_alphabet(d1: Distribution, d2: Distribution) -> None:
    if d1.alphabet != d2.alphabet:
        raise AlphabetMismatch(
            f"distributions over different alphabets: {d1.alphabet.symbols!r} vs {d2.alphabet.symbols!r}"
        )
