"""What a curious party can infer about foreign border colors.

When a party recolors a border vertex ``v`` from ``old`` to ``new`` and ``n``
external edges hang off ``v``, the external conflict change ``delta`` is in
``[-n, n]``.  Under the uniform model over admissible ``(d1, d0)`` pairs
(``d1`` edges going 0->1, ``d0`` going 1->0, ``d1 - d0 = delta``) a fixed
foreign neighbor has color ``new`` with probability ``E[d1] / n`` and color
``old`` with probability ``E[d0] / n``.

Seeing only a comparison bit narrows ``delta`` to an interval; at the
interval ends ``delta = -n`` or ``delta = n`` pins every neighbor's color.
A hidden companion move adds an unknown term and removes that certainty.
"""
from __future__ import annotations

import csv
import enum
import io
import itertools
import json
from dataclasses import asdict, dataclass, field
from fractions import Fraction

import numpy as np

from .errors import ParameterError, TranscriptParseError
from .graph import PartitionedGraph


@dataclass(frozen=True)
class GuessProbabilities:
    p_new: Fraction
    p_old: Fraction

    def as_floats(self) -> tuple[float, float]:
        return float(self.p_new), float(self.p_old)


@dataclass(frozen=True)
class InferenceScenario:
    n: int
    delta: int
    delta_a: int = 0
    comparison_bit: bool | None = None

    def __post_init__(self):
        _check(self.n, self.delta)


def _check(n: int, delta: int):
    if n < 1:
        raise ParameterError("a border vertex has at least one external edge")
    if abs(delta) > n:
        raise ParameterError(f"|delta| must not exceed n (got delta={delta}, n={n})")


def admissible_pairs(n: int, delta: int) -> list[tuple[int, int]]:
    """All ``(d1, d0)`` with ``d1 - d0 = delta`` and ``d1 + d0 <= n``."""
    _check(n, delta)
    return [(d0 + delta, d0) for d0 in range(n + 1)
            if d0 + delta >= 0 and 2 * d0 + delta <= n]


def lemma1_probs(n: int, delta: int) -> GuessProbabilities:
    """Closed form for the guessing probabilities given the exact ``delta``."""
    _check(n, delta)
    if delta >= 0:
        p_new = Fraction(delta + (n + delta) // 2, 2 * n)
        p_old = Fraction((n - delta) // 2, 2 * n)
    else:
        p_old = Fraction(-delta + (n - delta) // 2, 2 * n)
        p_new = Fraction((n + delta) // 2, 2 * n)
    return GuessProbabilities(p_new, p_old)


def lemma1_enumerate(n: int, delta: int) -> GuessProbabilities:
    """Brute-force oracle: enumerate every edge labelling of every admissible pair.

    Labels are ``+`` (0->1), ``-`` (1->0) and ``=`` (0->0).  Each pair is
    equally likely and, within a pair, each labelling is equally likely; the
    observed edge is edge 0.
    """
    pairs = admissible_pairs(n, delta)
    p_new = p_old = Fraction(0)
    for d1, d0 in pairs:
        labellings = [lab for lab in itertools.product("+-=", repeat=n)
                      if lab.count("+") == d1 and lab.count("-") == d0]
        w = Fraction(1, len(pairs) * len(labellings))
        p_new += w * sum(lab[0] == "+" for lab in labellings)
        p_old += w * sum(lab[0] == "-" for lab in labellings)
    return GuessProbabilities(p_new, p_old)


def monte_carlo_lemma1(n: int, delta: int, trials: int, seed: int = 0) -> tuple[float, float]:
    """Sample a uniform admissible pair, then a uniform edge; return frequencies."""
    pairs = np.array(admissible_pairs(n, delta))
    rng = np.random.default_rng(seed)
    picks = pairs[rng.integers(len(pairs), size=trials)]
    edge = rng.integers(n, size=trials)
    new = edge < picks[:, 0]
    old = (edge >= picks[:, 0]) & (edge < picks[:, 0] + picks[:, 1])
    return float(new.mean()), float(old.mean())


class CertainInference(enum.Enum):
    ALL_EQUAL_OLD = "all_equal_old"
    ALL_EQUAL_NEW = "all_equal_new"


def lemma2_worst_case(delta_a: int, n: int, comparison_bit: bool) -> CertainInference | None:
    """The two boundary cases where a bare comparison bit pins ``delta``."""
    if n < 1:
        raise ParameterError("n must be >= 1")
    if delta_a == n - 1 and comparison_bit:
        return CertainInference.ALL_EQUAL_OLD
    if delta_a == -n and not comparison_bit:
        return CertainInference.ALL_EQUAL_NEW
    return None


def feasible_deltas(n: int, delta_a: int, bit: bool, threshold: int = 0,
                    companion_bound: int = 0) -> list[int]:
    """Values of ``delta`` consistent with ``bit == (delta + delta_a + c < threshold)``.

    ``c`` is the unknown companion contribution, anywhere in
    ``[-companion_bound, companion_bound]``.
    """
    out = []
    for d in range(-n, n + 1):
        lo = d + delta_a - companion_bound
        hi = d + delta_a + companion_bound
        if (bit and lo < threshold) or (not bit and hi >= threshold):
            out.append(d)
    return out


def posterior_probs(n: int, deltas: list[int]) -> GuessProbabilities:
    """Closed-form probabilities averaged over equally likely ``delta`` values."""
    if not deltas:
        raise ParameterError("no feasible delta")
    probs = [lemma1_probs(n, d) for d in deltas]
    return GuessProbabilities(sum((p.p_new for p in probs), Fraction(0)) / len(probs),
                              sum((p.p_old for p in probs), Fraction(0)) / len(probs))


# -- empirical adversary ----------------------------------------------------------

@dataclass
class Guess:
    move_id: int
    own_vertex: int
    foreign_vertex: int
    guessed_color: int
    confidence: float
    certain: bool
    correct: bool | None = None
    naive_fired: bool = False
    naive_color: int | None = None
    naive_correct: bool | None = None


@dataclass
class AdversaryReport:
    party: int
    defense: bool
    moves_seen: int = 0
    guesses: list[Guess] = field(default_factory=list)

    @property
    def certain(self) -> list[Guess]:
        return [g for g in self.guesses if g.certain]

    @property
    def certain_correct(self) -> int:
        return sum(1 for g in self.guesses if g.certain and g.correct)

    @property
    def naive_fired(self) -> int:
        return sum(1 for g in self.guesses if g.naive_fired)

    @property
    def naive_correct(self) -> int:
        return sum(1 for g in self.guesses if g.naive_fired and g.naive_correct)

    @property
    def accuracy(self) -> float | None:
        scored = [g for g in self.guesses if g.correct is not None]
        return sum(g.correct for g in scored) / len(scored) if scored else None

    def summary(self) -> dict:
        return {"party": self.party, "defense": self.defense, "moves_seen": self.moves_seen,
                "guesses": len(self.guesses), "accuracy": self.accuracy,
                "certain": len(self.certain), "certain_correct": self.certain_correct,
                "naive_fired": self.naive_fired, "naive_correct": self.naive_correct}

    def per_vertex(self) -> dict[int, dict]:
        """Most confident guess per foreign vertex."""
        best: dict[int, Guess] = {}
        for g in self.guesses:
            cur = best.get(g.foreign_vertex)
            if cur is None or (g.certain, g.confidence) > (cur.certain, cur.confidence):
                best[g.foreign_vertex] = g
        return {v: {"guess": g.guessed_color, "confidence": g.confidence,
                    "certain": g.certain, "correct": g.correct} for v, g in sorted(best.items())}

    def to_json(self) -> str:
        return json.dumps({"summary": self.summary(),
                           "per_vertex": {str(v): d for v, d in self.per_vertex().items()},
                           "guesses": [asdict(g) for g in self.guesses]}, sort_keys=True)

    def to_csv(self) -> str:
        buf = io.StringIO()
        writer = csv.DictWriter(buf, fieldnames=list(Guess.__dataclass_fields__))
        writer.writeheader()
        for g in self.guesses:
            writer.writerow(asdict(g))
        return buf.getvalue()


def _events(transcript):
    events = getattr(transcript, "events", transcript)
    if not isinstance(events, list):
        raise TranscriptParseError("expected a transcript or a list of events")
    return events


def empirical_adversary(transcript, adversary_party: int,
                        companion_bound: int | None = None) -> AdversaryReport:
    """Replay one party's view and guess the colors of its foreign neighbors.

    Only the party's own events feed the guesses: its border moves (vertex,
    old and new color, foreign neighbor ids, internal change ``delta_a``,
    comparison threshold) and the comparison bits it received.  Whether a
    companion move happens is public protocol configuration.  With a
    companion, its contribution is only known to lie within
    ``companion_bound`` (default: ``n_vertices - 1`` when the transcript meta
    carries it, otherwise unbounded).

    The oracle stream is read afterwards, only to score the guesses.
    """
    meta = getattr(transcript, "meta", {})
    defense = bool(meta.get("sync_move", True))
    if defense:
        if companion_bound is None:
            companion_bound = int(meta.get("n_vertices", 10 ** 9)) - 1
    else:
        companion_bound = 0
    report = AdversaryReport(adversary_party, defense)
    truth: list[int] | None = None
    pending: dict[int, tuple[dict, dict[int, int]]] = {}

    for ev in _events(transcript):
        stream = ev.get("stream")
        if stream == "oracle":
            if ev["ev"] == "init":
                truth = list(ev["colors"])
            elif ev["ev"] == "apply" and truth is not None:
                for v, c in ev["changes"].items():
                    truth[int(v)] = c
            continue
        if stream != "party" or ev.get("party") != adversary_party:
            continue
        if ev["ev"] == "border_move":
            snapshot = {w: truth[w] for w in ev["peers"]} if truth is not None else {}
            pending[ev["cmp_id"]] = (ev, snapshot)
        elif ev["ev"] == "bit" and ev["cmp_id"] in pending:
            move, snapshot = pending.pop(ev["cmp_id"])
            report.moves_seen += 1
            _guess(report, move, ev["bit"], snapshot, companion_bound)
    return report


def _guess(report: AdversaryReport, move: dict, bit: bool, snapshot: dict[int, int],
           companion_bound: int):
    n = move["n_ext"]
    old, new = move["old"], move["to"]
    threshold = move.get("threshold", 0)
    deltas = feasible_deltas(n, move["delta_a"], bit, threshold, companion_bound)
    probs = posterior_probs(n, deltas)
    certain = deltas in ([-n], [n])
    if probs.p_new > probs.p_old:
        color, conf = new, probs.p_new
    else:
        color, conf = old, probs.p_old
    # the bare detector ignores any companion term
    naive = lemma2_worst_case(move["delta_a"] - threshold, n, bit)
    naive_color = None
    if naive is CertainInference.ALL_EQUAL_OLD:
        naive_color = old
    elif naive is CertainInference.ALL_EQUAL_NEW:
        naive_color = new
    for w in move["peers"]:
        truth = snapshot.get(w)
        report.guesses.append(Guess(
            move["move_id"], move["vertex"], w, color, float(conf), certain,
            None if truth is None else truth == color,
            naive is not None, naive_color,
            None if truth is None or naive is None else truth == naive_color))


# -- boundary instance --------------------------------------------------------------

def boundary_instance() -> tuple[PartitionedGraph, list[int]]:
    """Three parties; party 1's border vertex has one neighbor in party 0 and
    two in party 2, plus two internal neighbors.

    Vertices: 0 (party 0); 1, 2, 3 (party 1, vertex 1 is the border vertex);
    4, 5 (party 2).  Under the returned 2-coloring, recoloring vertex 1 raises
    internal conflicts by 2 (= n - 1) and clears all three external conflicts,
    so an accepted move pins every foreign neighbor to the old color.
    """
    g = PartitionedGraph(6, 3, (0, 1, 1, 1, 2, 2),
                         ((0, 1), (1, 2), (1, 3), (1, 4), (1, 5)))
    return g, [0, 0, 1, 1, 0, 0]
