"""Token-based replay and the Rozinat-style fitness measure.

Replay pushes each trace through a workflow net, producing and consuming
tokens as transitions fire. Tokens that have to be conjured for a firing
are counted missing; tokens left over after the final marking is consumed
are counted remaining. Fitness combines both penalties:

    f = 1/2 (1 - sum(m) / sum(c)) + 1/2 (1 - sum(r) / sum(p))

Replay first searches for a firing sequence that reproduces the trace
without any missing or remaining tokens, so language members always score
a clean replay even when a label appears on several transitions. Only
when no such sequence exists does the heuristic walk take over and start
conjuring tokens.
"""

from __future__ import annotations

import logging
from collections import Counter
from dataclasses import dataclass

from .errors import UnknownLabel
from .flows import EventLog
from .petri import PetriNet

LOGGER = logging.getLogger(__name__)

__all__ = [
    "ReplayCounts",
    "FitnessReport",
    "replay_trace",
    "fitness",
    "fitness_table_csv",
]

# How many consecutive silent firings replay may insert between two
# observed events (and after the last one). Nets mined from wide parallel
# behavior route every branch through silent scaffolding, so closing all
# branches after the final event can legitimately take dozens of firings.
DEFAULT_SILENT_DEPTH = 64
# Expansion budget for the perfect-replay search; past this the trace is
# treated as a non-member and replayed heuristically.
_SEARCH_BUDGET = 200_000
# Distinct markings a silent closure may collect before it is cut off.
# Only nets with massive interleavings of silent choices get near this.
_CLOSURE_CAP = 20_000

# Sentinel cone key for steering silent moves toward the final marking.
_FINAL = "\x00final"


@dataclass(frozen=True)
class ReplayCounts:
    """Token bookkeeping for one replayed trace."""

    produced: int
    consumed: int
    missing: int
    remaining: int

    @property
    def fits(self) -> bool:
        return self.missing == 0 and self.remaining == 0

    @property
    def fitness(self) -> float:
        missing_share = self.missing / self.consumed if self.consumed else 0.0
        remaining_share = self.remaining / self.produced if self.produced else 0.0
        return 0.5 * (1.0 - missing_share) + 0.5 * (1.0 - remaining_share)


@dataclass
class FitnessReport:
    """Aggregate fitness over a log, with per-case details."""

    fitness: float
    case_count: int
    perfect_cases: int
    per_case: list[tuple[str, ReplayCounts, float]]

    @property
    def perfect_fraction(self) -> float:
        return self.perfect_cases / self.case_count if self.case_count else 0.0


def _freeze(marking: Counter) -> tuple:
    return tuple(sorted((p, n) for p, n in marking.items() if n > 0))


def _covers(marking: Counter, target: Counter) -> bool:
    return all(marking[p] >= n for p, n in target.items())


class _Replayer:
    def __init__(self, net: PetriNet, silent_depth: int, on_unknown: str):
        if on_unknown not in ("penalize", "raise"):
            raise ValueError(f"on_unknown must be 'penalize' or 'raise', got {on_unknown!r}")
        self.net = net
        self.silent_depth = silent_depth
        self.on_unknown = on_unknown
        self.inputs = {t: net.inputs(t) for t in net.transitions}
        self.outputs = {t: net.outputs(t) for t in net.transitions}
        self.silent = sorted(t for t, label in net.transitions.items() if label is None)
        self.by_label: dict[str, list[str]] = {}
        for transition, label in sorted(net.transitions.items()):
            if label is not None:
                self.by_label.setdefault(label, []).append(transition)
        self.final_frozen = _freeze(net.final_marking)
        self.input_sets = {t: frozenset(p) for t, p in self.inputs.items()}
        self.output_sets = {t: frozenset(p) for t, p in self.outputs.items()}
        self._closures: dict[tuple, list[tuple[Counter, list[str]]]] = {}
        self._cones: dict[str, frozenset[str]] = {}

    # -- shared firing mechanics -------------------------------------------

    def _enabled(self, transition: str, marking: Counter) -> bool:
        return all(marking[p] >= 1 for p in self.inputs[transition])

    def _fire(self, transition: str, marking: Counter) -> Counter:
        successor = Counter(marking)
        for p in self.inputs[transition]:
            successor[p] -= 1
        for p in self.outputs[transition]:
            successor[p] += 1
        return successor

    def _silent_closure(self, marking: Counter) -> list[tuple[Counter, list[str]]]:
        """All markings reachable by silent firings within the depth bound.

        Breadth-first with transitions tried in ID order, so the list is
        deterministic and each marking carries its shortest, tie-broken
        silent path. The input marking itself comes first. Closures are
        cached per marking and truncated once they collect _CLOSURE_CAP
        markings, which only nets with huge silent interleavings reach.
        """
        start = _freeze(marking)
        cached = self._closures.get(start)
        if cached is not None:
            return cached
        seen = {start}
        frontier: list[tuple[Counter, list[str]]] = [(marking, [])]
        closure = [(Counter(marking), [])]
        for _ in range(self.silent_depth):
            next_frontier: list[tuple[Counter, list[str]]] = []
            for state, path in frontier:
                for transition in self.silent:
                    if not self._enabled(transition, state):
                        continue
                    successor = self._fire(transition, state)
                    frozen = _freeze(successor)
                    if frozen in seen:
                        continue
                    seen.add(frozen)
                    entry = (successor, path + [transition])
                    next_frontier.append(entry)
                    closure.append(entry)
                    if len(closure) >= _CLOSURE_CAP:
                        LOGGER.debug("silent closure truncated at %d markings", _CLOSURE_CAP)
                        self._closures[start] = closure
                        return closure
            if not next_frontier:
                break
            frontier = next_frontier
        self._closures[start] = closure
        return closure

    # -- perfect replay search ---------------------------------------------

    def _cone(self, key: str) -> frozenset[str]:
        """Silent transitions that can route tokens toward a goal.

        For a label the goal is the input places of its transitions, for
        _FINAL the final marking. The cone is the backward silent slice:
        every silent transition feeding a goal place directly or through
        other cone members. Trying cone members first keeps the perfect
        replay search pointed at the next firing instead of wandering
        through interleavings of unrelated silent choices.
        """
        cached = self._cones.get(key)
        if cached is not None:
            return cached
        if key == _FINAL:
            targets = set(self.net.final_marking)
        else:
            targets = set()
            for transition in self.by_label.get(key, ()):
                targets.update(self.inputs[transition])
        cone: set[str] = set()
        queue = list(targets)
        queued = set(queue)
        while queue:
            place = queue.pop()
            for transition in self.silent:
                if transition in cone or place not in self.outputs[transition]:
                    continue
                cone.add(transition)
                for source in self.inputs[transition]:
                    if source not in queued:
                        queued.add(source)
                        queue.append(source)
        result = frozenset(cone)
        self._cones[key] = result
        return result

    def _member_path(self, trace: tuple[str, ...]) -> list[str] | None:
        """Full firing sequence replaying the trace into the final marking.

        Returns None when no such sequence exists within the silent-depth
        and expansion budgets, meaning the trace is not (recognizably) a
        language member. The search walks (marking, position) states one
        transition at a time, depth first: a transition carrying the next
        label is tried before any silent firing and silent firings in the
        cone of the next goal come before the rest. Two reductions keep
        parallel silent scaffolding from blowing the walk up. A state is
        expanded again only when revisited with a shorter run of
        consecutive silent firings, and after a silent firing the search
        skips smaller-ID silent moves that were already fireable before
        it, so commuting firing orders collapse into one canonical
        schedule rather than being explored per interleaving.
        """
        if any(label not in self.by_label for label in trace):
            return None
        length = len(trace)
        start = Counter(self.net.initial_marking)
        # Paths live as parent links (transition, link) to avoid copying
        # a growing list onto every stacked state.
        stack: list[tuple[Counter, tuple, int, int, str | None, tuple | None]] = [
            (start, _freeze(start), 0, 0, None, None)
        ]
        best: dict[tuple[tuple, int, str | None], int] = {}
        budget = _SEARCH_BUDGET
        while stack:
            marking, frozen, position, run, last, link = stack.pop()
            key = (frozen, position, last)
            seen = best.get(key)
            if seen is not None and seen <= run:
                continue
            best[key] = run
            budget -= 1
            if budget <= 0:
                LOGGER.debug("perfect-replay search budget exhausted; falling back")
                return None
            if position == length and frozen == self.final_frozen:
                path: list[str] = []
                while link is not None:
                    transition, link = link
                    path.append(transition)
                path.reverse()
                return path
            moves: list[tuple[str, int, int, str | None]] = []
            if position < length:
                for transition in self.by_label[trace[position]]:
                    if self._enabled(transition, marking):
                        moves.append((transition, position + 1, 0, None))
            if run < self.silent_depth:
                cone = self._cone(trace[position] if position < length else _FINAL)
                ready = [
                    t
                    for t in self.silent
                    if self._enabled(t, marking)
                    and not (
                        last is not None
                        and t < last
                        and self.input_sets[t].isdisjoint(self.input_sets[last])
                        and self.input_sets[t].isdisjoint(self.output_sets[last])
                    )
                ]
                for transition in [t for t in ready if t in cone] + [
                    t for t in ready if t not in cone
                ]:
                    moves.append((transition, position, run + 1, transition))
            for transition, next_position, next_run, next_last in reversed(moves):
                successor = self._fire(transition, marking)
                stack.append(
                    (
                        successor,
                        _freeze(successor),
                        next_position,
                        next_run,
                        next_last,
                        (transition, link),
                    )
                )
        return None

    def _counts_for_path(self, path: list[str]) -> ReplayCounts:
        marking = Counter(self.net.initial_marking)
        produced = sum(marking.values())
        consumed = 0
        for transition in path:
            consumed += len(self.inputs[transition])
            produced += len(self.outputs[transition])
            marking = self._fire(transition, marking)
        consumed += sum(self.net.final_marking.values())
        return ReplayCounts(produced, consumed, 0, 0)

    # -- heuristic walk ----------------------------------------------------

    def _greedy(self, trace: tuple[str, ...]) -> ReplayCounts:
        marking = Counter(self.net.initial_marking)
        produced = sum(marking.values())
        consumed = 0
        missing = 0

        def fire(transition: str):
            nonlocal produced, consumed, marking
            consumed += len(self.inputs[transition])
            produced += len(self.outputs[transition])
            marking = self._fire(transition, marking)

        for position, label in enumerate(trace):
            candidates = self.by_label.get(label)
            if not candidates:
                if self.on_unknown == "raise":
                    raise UnknownLabel(f"no transition labeled {label!r} (event {position})")
                missing += 1
                produced += 1
                continue
            ready = [t for t in candidates if self._enabled(t, marking)]
            if not ready:
                for state, path in self._silent_closure(marking):
                    ready = [t for t in candidates if self._enabled(t, state)]
                    if ready:
                        for silent_transition in path:
                            fire(silent_transition)
                        break
            if ready:
                fire(ready[0])
                continue

            def deficit(transition: str) -> int:
                return sum(max(0, 1 - marking[p]) for p in self.inputs[transition])

            chosen = min(candidates, key=lambda t: (deficit(t), t))
            missing += deficit(chosen)
            for place in self.inputs[chosen]:
                if marking[place] < 1:
                    marking[place] += 1
            fire(chosen)

        final = self.net.final_marking
        exact_path = None
        covering_path = None
        for state, path in self._silent_closure(marking):
            frozen = _freeze(state)
            if frozen == self.final_frozen:
                exact_path = path
                break
            if covering_path is None and _covers(state, final):
                covering_path = path
        for silent_transition in exact_path if exact_path is not None else (covering_path or []):
            fire(silent_transition)
        for place, needed in sorted(final.items()):
            consumed += needed
            available = marking[place]
            if available < needed:
                missing += needed - available
                marking[place] = 0
            else:
                marking[place] = available - needed
        remaining = sum(count for count in marking.values() if count > 0)
        return ReplayCounts(produced, consumed, missing, remaining)

    def replay(self, trace: tuple[str, ...]) -> ReplayCounts:
        if self.on_unknown == "raise":
            for position, label in enumerate(trace):
                if label not in self.by_label:
                    raise UnknownLabel(f"no transition labeled {label!r} (event {position})")
        path = self._member_path(trace)
        if path is not None:
            return self._counts_for_path(path)
        return self._greedy(trace)


def replay_trace(
    net: PetriNet,
    trace,
    *,
    silent_depth: int = DEFAULT_SILENT_DEPTH,
    on_unknown: str = "penalize",
) -> ReplayCounts:
    """Replay one trace (sequence of event classes) against a net.

    Initial-marking tokens count as produced and consuming the final
    marking counts as consumed, so counts are never zero on a workflow
    net. If some firing sequence reproduces the trace and lands exactly
    on the final marking, replay reports it with zero missing and zero
    remaining tokens. Otherwise the heuristic walk fires the enabled
    transition for each event (after a bounded breadth-first search over
    silent firings, ``silent_depth`` deep), then the candidate needing
    the fewest conjured tokens. Labels absent from the net count
    ``m += 1, p += 1`` under the default policy; ``on_unknown="raise"``
    raises :class:`UnknownLabel` instead.
    """
    return _Replayer(net, silent_depth, on_unknown).replay(tuple(trace))


def fitness(
    net: PetriNet,
    log,
    *,
    silent_depth: int = DEFAULT_SILENT_DEPTH,
    on_unknown: str = "penalize",
) -> FitnessReport:
    """Aggregate token-replay fitness of a log against a net.

    The aggregate divides summed counts across cases, not a mean of
    per-case values; with every case fitting perfectly the two coincide.
    Accepts an :class:`EventLog` or an iterable of traces; identical
    traces are replayed once and the counts reused.
    """
    if isinstance(log, EventLog):
        cases = [(case.case_id, case.trace) for case in log.cases]
    else:
        cases = [(str(i + 1), tuple(trace)) for i, trace in enumerate(log)]
    replayer = _Replayer(net, silent_depth, on_unknown)
    cache: dict[tuple[str, ...], ReplayCounts] = {}
    per_case = []
    produced = consumed = missing = remaining = 0
    perfect = 0
    for case_id, trace in cases:
        counts = cache.get(trace)
        if counts is None:
            counts = replayer.replay(trace)
            cache[trace] = counts
        per_case.append((case_id, counts, counts.fitness))
        produced += counts.produced
        consumed += counts.consumed
        missing += counts.missing
        remaining += counts.remaining
        if counts.fits:
            perfect += 1
    missing_share = missing / consumed if consumed else 0.0
    remaining_share = remaining / produced if produced else 0.0
    aggregate = 0.5 * (1.0 - missing_share) + 0.5 * (1.0 - remaining_share)
    return FitnessReport(
        fitness=aggregate,
        case_count=len(cases),
        perfect_cases=perfect,
        per_case=per_case,
    )


def fitness_table_csv(rows: list[tuple[str, FitnessReport]]) -> str:
    """Fitness results as a comma-separated table, one category per row."""
    lines = ["category,cases,fitness,perfectly_fitting_fraction"]
    for category, report in rows:
        lines.append(
            f"{category},{report.case_count},{report.fitness:.6f},"
            f"{report.perfect_fraction:.6f}"
        )
    return "\n".join(lines) + "\n"
