"""Active learning of quotient PDFAs from a language model.

The learner drives an observation table of queried distributions: RED rows
are candidate states, BLUE rows their one-symbol continuations, columns a
suffix-closed set of distinguishing suffixes. Rows are compared through
their *row signatures* (tuple of class signatures, one per suffix), never
through pairwise predicates, so row equality is transitive by construction.
Once the table is closed and consistent it folds into a hypothesis quotient
PDFA which an equivalence oracle either accepts or refutes with a
counterexample word.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import TYPE_CHECKING

from .automata import QuotientPdfa
from .distributions import Distribution
from .models import CachedModel, LanguageModel, cached
from .relations import EquivalenceSpec, signature
from .words import EMPTY, Word, prefixes, word_key

if TYPE_CHECKING:  # pragma: no cover
    from .teacher import EqOracle


class TableLimitExceeded(RuntimeError):
    """The observation table outgrew the configured cell budget."""


class LearnerInvariantError(AssertionError):
    """A structural property of the algorithm failed; indicates a bug."""


@dataclass(frozen=True)
class ConsistencyDefect:
    """Two equal RED rows whose continuations disagree on ``symbol + suffix``."""

    first: Word
    second: Word
    symbol: str
    suffix: Word

    @property
    def new_suffix(self) -> Word:
        return (self.symbol,) + self.suffix


class ObservationTable:
    """RED/BLUE prefix rows times suffix columns of queried distributions."""

    def __init__(
        self,
        model: LanguageModel,
        equivalence: EquivalenceSpec,
        *,
        max_cells: int = 100_000,
    ):
        self.model: CachedModel = cached(model)
        self.equivalence = equivalence
        self.max_cells = max_cells
        self._key = lambda w: word_key(self.model.alphabet, w)
        self.red: list[Word] = [EMPTY]
        self.suffixes: list[Word] = [EMPTY]
        self._cells: dict[tuple[Word, Word], Distribution] = {}
        self._cell_sigs: dict[tuple[Word, Word], bytes] = {}
        self._fill_all()

    # -- structure ---------------------------------------------------------

    @property
    def blue(self) -> list[Word]:
        """RED's one-symbol continuations that are not RED themselves."""
        red = set(self.red)
        out = {p + (s,) for p in self.red for s in self.model.alphabet.symbols} - red
        return sorted(out, key=self._key)

    def dimensions(self) -> tuple[int, int, int]:
        return len(self.red), len(self.blue), len(self.suffixes)

    def cell(self, prefix: Word, suffix: Word) -> Distribution:
        return self._cells[(prefix, suffix)]

    def row_signature(self, prefix: Word) -> tuple[bytes, ...]:
        return tuple(self._cell_sigs[(prefix, s)] for s in self.suffixes)

    def red_classes(self) -> dict[tuple[bytes, ...], list[Word]]:
        """RED rows grouped by row signature, in length-lex discovery order."""
        classes: dict[tuple[bytes, ...], list[Word]] = {}
        for p in sorted(self.red, key=self._key):
            classes.setdefault(self.row_signature(p), []).append(p)
        return classes

    def red_class_count(self) -> int:
        return len({self.row_signature(p) for p in self.red})

    def validate(self) -> None:
        """Check the structural invariants; raises on violation.

        RED is prefix-closed and contains the empty word, the suffix set is
        suffix-closed and contains the empty word, BLUE is exactly RED's
        uncovered one-symbol continuations, and every row has a queried cell
        per suffix equal to the model's answer.
        """
        red = set(self.red)
        if EMPTY not in red:
            raise LearnerInvariantError("the empty word must be RED")
        for p in red:
            if p and p[:-1] not in red:
                raise LearnerInvariantError(f"RED is not prefix-closed at {p!r}")
        suffixes = set(self.suffixes)
        if EMPTY not in suffixes:
            raise LearnerInvariantError("the empty word must be a suffix")
        for s in suffixes:
            if s and s[1:] not in suffixes:
                raise LearnerInvariantError(f"suffixes are not suffix-closed at {s!r}")
        expected_blue = {
            p + (symbol,) for p in red for symbol in self.model.alphabet.symbols
        } - red
        if set(self.blue) != expected_blue:
            raise LearnerInvariantError("BLUE is not RED's uncovered continuations")
        for p in self.red + self.blue:
            for s in self.suffixes:
                if self._cells.get((p, s)) != self.model.query(p + s):
                    raise LearnerInvariantError(f"cell ({p!r}, {s!r}) is stale or missing")

    # -- filling -----------------------------------------------------------

    def _fill(self, prefix: Word, suffix: Word) -> None:
        key = (prefix, suffix)
        if key in self._cells:
            return
        if len(self._cells) >= self.max_cells:
            raise TableLimitExceeded(
                f"table would exceed {self.max_cells} cells; "
                "the target may not be regular under this equivalence"
            )
        dist = self.model.query(prefix + suffix)
        self._cells[key] = dist
        self._cell_sigs[key] = signature(dist, self.equivalence)

    def _fill_all(self) -> None:
        for p in self.red + self.blue:
            for s in self.suffixes:
                self._fill(p, s)

    # -- closedness and consistency ----------------------------------------

    def closed(self) -> tuple[bool, Word | None]:
        """Whether every BLUE row matches some RED row; else the first offender."""
        red_rows = {self.row_signature(p) for p in self.red}
        for p in self.blue:
            if self.row_signature(p) not in red_rows:
                return False, p
        return True, None

    def close_step(self, offender: Word) -> None:
        """Promote an unmatched BLUE row to RED and query its continuations."""
        if offender not in self.blue:
            raise ValueError(f"offender {offender!r} is not a BLUE row")
        before = self.red_class_count()
        self.red.append(offender)
        self.red.sort(key=self._key)
        self._fill_all()
        if self.red_class_count() <= before:
            raise LearnerInvariantError("closing must add a new RED row class")

    def consistent(self) -> tuple[bool, ConsistencyDefect | None]:
        """Whether equal RED rows keep equal rows after every symbol.

        Scans RED pairs in length-lex order, symbols in alphabet order, and
        suffixes in column order, so the reported defect is deterministic.
        """
        classes = self.red_classes()
        for rows in classes.values():
            for i, p in enumerate(rows):
                for p2 in rows[i + 1 :]:
                    for symbol in self.model.alphabet.symbols:
                        sig1 = self.row_signature(p + (symbol,))
                        sig2 = self.row_signature(p2 + (symbol,))
                        if sig1 != sig2:
                            for s, a, b in zip(self.suffixes, sig1, sig2):
                                if a != b:
                                    return False, ConsistencyDefect(p, p2, symbol, s)
        return True, None

    def consistent_step(self, defect: ConsistencyDefect) -> None:
        """Add the separating suffix as a new column and fill it."""
        new_suffix = defect.new_suffix
        if new_suffix in self.suffixes:
            raise ValueError(f"suffix {new_suffix!r} already present")
        before = self.red_class_count()
        self.suffixes.append(new_suffix)
        self._fill_all()
        if self.red_class_count() <= before:
            raise LearnerInvariantError("a consistency defect must split a RED class")

    def update_with_counterexample(self, word: Word) -> None:
        """Move every prefix of the counterexample into RED and refill."""
        before = self.red_class_count()
        present = set(self.red)
        for p in prefixes(word):
            if p not in present:
                self.red.append(p)
                present.add(p)
        self.red.sort(key=self._key)
        self._fill_all()
        if self.red_class_count() < before:
            raise LearnerInvariantError("adding rows can never merge RED classes")

    # -- hypothesis construction ---------------------------------------------

    def build_hypothesis(self) -> QuotientPdfa:
        """Fold the closed+consistent table into a quotient PDFA."""
        ok, offender = self.closed()
        if not ok:
            raise ValueError(f"table is not closed (offending row {offender!r})")
        ok, defect = self.consistent()
        if not ok:
            raise ValueError(f"table is not consistent ({defect!r})")

        classes = self.red_classes()
        class_id = {sig: i for i, sig in enumerate(classes)}
        representatives = [rows[0] for rows in classes.values()]

        transitions: list[list[int | None]] = [
            [None] * len(self.model.alphabet) for _ in classes
        ]
        for sig, rows in classes.items():
            src = class_id[sig]
            for p in rows:
                for i, symbol in enumerate(self.model.alphabet.symbols):
                    dst_sig = self.row_signature(p + (symbol,))
                    if dst_sig not in class_id:
                        raise LearnerInvariantError("closedness violated during build")
                    dst = class_id[dst_sig]
                    if transitions[src][i] is None:
                        transitions[src][i] = dst
                    elif transitions[src][i] != dst:
                        raise LearnerInvariantError("consistency violated during build")

        hypothesis = QuotientPdfa(
            alphabet=self.model.alphabet,
            initial=class_id[self.row_signature(EMPTY)],
            class_signatures=tuple(
                self._cell_sigs[(rep, EMPTY)] for rep in representatives
            ),
            representatives=tuple(self._cells[(rep, EMPTY)] for rep in representatives),
            transitions=tuple(tuple(row) for row in transitions),
            equivalence=self.equivalence.spec_string(),
        )
        self._check_hypothesis_against_table(hypothesis, class_id)
        return hypothesis

    def _check_hypothesis_against_table(
        self, hypothesis: QuotientPdfa, class_id: dict[tuple[bytes, ...], int]
    ) -> None:
        """Cell-exact sanity: the hypothesis reproduces the table it came from.

        Every RED prefix must run to its own row class, and running any
        prefix+suffix must land in the class of the queried distribution.
        """
        for p in self.red:
            state, _ = hypothesis.run(p)
            if state != class_id[self.row_signature(p)]:
                raise LearnerInvariantError(f"red prefix {p!r} runs to a foreign class")
            for s in self.suffixes:
                if hypothesis.class_after(p + s) != self._cell_sigs[(p, s)]:
                    raise LearnerInvariantError(
                        f"hypothesis class after {p + s!r} disagrees with the table"
                    )


@dataclass
class LearnerReport:
    """Outcome of a learning run, including query-complexity accounting."""

    hypothesis: QuotientPdfa | None
    converged: bool
    rounds: int
    mq_count: int
    table_history: list[tuple[int, int, int]] = field(default_factory=list)
    events: list[dict] = field(default_factory=list)
    oracle: str = ""
    stop_reason: str = "converged"


def learn(
    model: LanguageModel,
    equivalence: EquivalenceSpec,
    teacher: "EqOracle",
    *,
    max_rounds: int = 64,
    max_cells: int = 100_000,
) -> LearnerReport:
    """Run the table-based learning loop until the oracle accepts.

    Alternates closing and consistency repair, builds a hypothesis, and asks
    the equivalence oracle; counterexample prefixes are folded back into the
    table. Guaranteed to terminate when the target is regular under the
    equivalence and the oracle exact; otherwise the round and cell limits
    stop the run and the report is flagged as non-converged.
    """
    mq = cached(model)
    oracle_name = getattr(teacher, "description", teacher.__class__.__name__)
    try:
        table = ObservationTable(mq, equivalence, max_cells=max_cells)
    except TableLimitExceeded as exc:
        return LearnerReport(
            hypothesis=None, converged=False, rounds=0, mq_count=mq.misses,
            oracle=oracle_name, stop_reason=str(exc),
        )
    events: list[dict] = []

    def record(event: str) -> None:
        red, blue, suffixes = table.dimensions()
        events.append(
            {
                "event": event,
                "red": red,
                "blue": blue,
                "suffixes": suffixes,
                "classes": table.red_class_count(),
            }
        )

    hypothesis: QuotientPdfa | None = None
    rounds = 0
    converged = False
    stop_reason = "round limit exceeded"
    history: list[tuple[int, int, int]] = []
    try:
        while rounds < max_rounds:
            while True:
                ok, offender = table.closed()
                if not ok:
                    table.close_step(offender)
                    record("close")
                    continue
                ok, defect = table.consistent()
                if not ok:
                    table.consistent_step(defect)
                    record("consistent")
                    continue
                break
            hypothesis = table.build_hypothesis()
            rounds += 1
            history.append(table.dimensions())
            record("hypothesis")
            counterexample = teacher.check(hypothesis)
            if counterexample is None:
                converged = True
                stop_reason = "converged"
                break
            table.update_with_counterexample(counterexample)
            record("counterexample")
    except TableLimitExceeded as exc:
        stop_reason = str(exc)

    return LearnerReport(
        hypothesis=hypothesis,
        converged=converged,
        rounds=rounds,
        mq_count=mq.misses,
        table_history=history,
        events=events,
        oracle=oracle_name,
        stop_reason=stop_reason,
    )
