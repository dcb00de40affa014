"""Process trees: construction helpers and language membership.

A tree is either an activity leaf, a silent leaf (tau), or an operator
node (sequence, exclusive choice, parallel, loop) over child trees. Loop
children are body first, then one or more redo parts: the language is
body (redo body)*.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum
from itertools import combinations
from typing import Iterable, Sequence

__all__ = [
    "Operator",
    "ProcessTree",
    "activity",
    "tau",
    "seq",
    "choice",
    "parallel",
    "loop",
    "flower",
    "tree_alphabet",
    "tree_depth",
    "tree_admits",
]


class Operator(Enum):
    SEQUENCE = "sequence"
    CHOICE = "choice"
    PARALLEL = "parallel"
    LOOP = "loop"


_SYMBOL = {
    Operator.SEQUENCE: "seq",
    Operator.CHOICE: "xor",
    Operator.PARALLEL: "and",
    Operator.LOOP: "loop",
}


@dataclass(frozen=True)
class ProcessTree:
    """Immutable tree node; exactly one of label/operator is set, or neither (tau)."""

    label: str | None = None
    operator: Operator | None = None
    children: tuple[ProcessTree, ...] = ()

    def __post_init__(self):
        if self.label is not None and self.operator is not None:
            raise ValueError("a node is either a leaf or an operator, not both")
        if self.label is not None and self.children:
            raise ValueError("activity leaves have no children")
        if self.operator is not None and not self.children:
            raise ValueError(f"{self.operator.value} node needs children")
        if self.operator is Operator.LOOP and len(self.children) < 2:
            raise ValueError("loop needs a body and at least one redo child")

    @property
    def is_leaf(self) -> bool:
        return self.operator is None

    @property
    def is_tau(self) -> bool:
        return self.operator is None and self.label is None

    def __str__(self) -> str:
        if self.is_tau:
            return "tau"
        if self.label is not None:
            return self.label
        inner = ", ".join(str(c) for c in self.children)
        return f"{_SYMBOL[self.operator]}({inner})"


def activity(label: str) -> ProcessTree:
    return ProcessTree(label=label)


def tau() -> ProcessTree:
    return ProcessTree()


def seq(*children: ProcessTree) -> ProcessTree:
    return ProcessTree(operator=Operator.SEQUENCE, children=tuple(children))


def choice(*children: ProcessTree) -> ProcessTree:
    return ProcessTree(operator=Operator.CHOICE, children=tuple(children))


def parallel(*children: ProcessTree) -> ProcessTree:
    return ProcessTree(operator=Operator.PARALLEL, children=tuple(children))


def loop(*children: ProcessTree) -> ProcessTree:
    return ProcessTree(operator=Operator.LOOP, children=tuple(children))


def flower(alphabet: Iterable[str]) -> ProcessTree:
    """The most permissive tree over an alphabet: loop(tau, a1, ..., an)."""
    labels = sorted(set(alphabet))
    if not labels:
        return tau()
    return loop(tau(), *(activity(a) for a in labels))


def tree_alphabet(tree: ProcessTree) -> frozenset[str]:
    if tree.label is not None:
        return frozenset((tree.label,))
    out: set[str] = set()
    for child in tree.children:
        out.update(tree_alphabet(child))
    return frozenset(out)


def tree_depth(tree: ProcessTree) -> int:
    if not tree.children:
        return 1
    return 1 + max(tree_depth(c) for c in tree.children)


def tree_admits(tree: ProcessTree, trace: Sequence[str]) -> bool:
    """True iff the trace is a word of the tree's language."""
    return _Matcher().admits(tree, tuple(trace))


class _Matcher:
    """Memoized recursive-descent membership check.

    Sequence and loop nodes are handled with reachable-position sets, so
    children that accept the empty word cannot cause unbounded recursion.
    Parallel nodes use alphabet projection when the child alphabets are
    disjoint and fall back to explicit interleaving search otherwise.
    """

    def __init__(self):
        self._memo: dict[tuple[int, tuple[str, ...]], bool] = {}
        self._alphabets: dict[int, frozenset[str]] = {}

    def admits(self, node: ProcessTree, word: tuple[str, ...]) -> bool:
        key = (id(node), word)
        cached = self._memo.get(key)
        if cached is not None:
            return cached
        if node.is_tau:
            result = word == ()
        elif node.label is not None:
            result = word == (node.label,)
        elif node.operator is Operator.CHOICE:
            result = any(self.admits(c, word) for c in node.children)
        elif node.operator is Operator.SEQUENCE:
            result = len(word) in self._concat_positions(node.children, word)
        elif node.operator is Operator.PARALLEL:
            result = self._admits_parallel(node.children, word)
        else:
            result = self._admits_loop(node, word)
        self._memo[key] = result
        return result

    def _concat_positions(
        self, children: Sequence[ProcessTree], word: tuple[str, ...]
    ) -> set[int]:
        """End positions reachable by matching the children in order."""
        n = len(word)
        positions = {0}
        for child in children:
            positions = {
                j
                for i in positions
                for j in range(i, n + 1)
                if self.admits(child, word[i:j])
            }
            if not positions:
                break
        return positions

    def _alphabet(self, node: ProcessTree) -> frozenset[str]:
        cached = self._alphabets.get(id(node))
        if cached is None:
            cached = tree_alphabet(node)
            self._alphabets[id(node)] = cached
        return cached

    def _admits_parallel(
        self, children: Sequence[ProcessTree], word: tuple[str, ...]
    ) -> bool:
        alphabets = [self._alphabet(c) for c in children]
        disjoint = all(
            not (alphabets[i] & alphabets[j])
            for i in range(len(alphabets))
            for j in range(i + 1, len(alphabets))
        )
        if disjoint:
            union = frozenset().union(*alphabets) if alphabets else frozenset()
            if any(symbol not in union for symbol in word):
                return False
            return all(
                self.admits(child, tuple(s for s in word if s in alpha))
                for child, alpha in zip(children, alphabets)
            )
        return self._interleave(children, word)

    def _interleave(
        self, children: Sequence[ProcessTree], word: tuple[str, ...]
    ) -> bool:
        if len(children) == 1:
            return self.admits(children[0], word)
        head, rest = children[0], children[1:]
        indices = range(len(word))
        for size in range(len(word) + 1):
            for picked in combinations(indices, size):
                chosen = set(picked)
                sub = tuple(word[i] for i in picked)
                if not self.admits(head, sub):
                    continue
                remainder = tuple(w for i, w in enumerate(word) if i not in chosen)
                if self._interleave(rest, remainder):
                    return True
        return False

    def _admits_loop(self, node: ProcessTree, word: tuple[str, ...]) -> bool:
        body, redos = node.children[0], node.children[1:]
        n = len(word)
        done = {j for j in range(n + 1) if self.admits(body, word[:j])}
        queue = sorted(done)
        while queue:
            i = queue.pop()
            for j in range(i, n + 1):
                if not any(self.admits(r, word[i:j]) for r in redos):
                    continue
                for k in range(j, n + 1):
                    if k not in done and self.admits(body, word[j:k]):
                        done.add(k)
                        queue.append(k)
        return n in done
