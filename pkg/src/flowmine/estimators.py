"""Estimator-style wrappers around sessionization and the two miners.

These follow the scikit-learn conventions (``fit`` returns ``self``,
learned state lands in trailing-underscore attributes, ``get_params`` and
``set_params`` come from ``BaseEstimator``) so the miners drop into
pipelines and parameter sweeps without glue code.
"""

from __future__ import annotations

import logging

import numpy as np
from sklearn.base import BaseEstimator, TransformerMixin
from sklearn.utils.validation import check_is_fitted

from .conformance import DEFAULT_SILENT_DEPTH, fitness
from .dfg import build_dfg, dfg_from_traces
from .flows import EventLog, packets_to_event_log
from .fuzzy import FuzzyParams, fuzzy_admits, mine_fuzzy
from .inductive import mine_inductive
from .petri import tree_to_petri
from .trees import tree_admits, tree_alphabet

LOGGER = logging.getLogger(__name__)

__all__ = ["FlowSessionizer", "InductiveMiner", "FuzzyMiner"]


def _as_traces(X) -> list[tuple[str, ...]]:
    if isinstance(X, EventLog):
        return [case.trace for case in X.cases]
    return [tuple(trace) for trace in X]


class FlowSessionizer(TransformerMixin, BaseEstimator):
    """Turn parsed packets into an event log of per-connection cases.

    Stateless: ``fit`` only records how many packets it saw. ``transform``
    groups packets into socket-pair flows, labels packet direction, and
    (by default) keeps only complete connections.
    """

    def __init__(self, complete_only: bool = True):
        self.complete_only = complete_only

    def fit(self, X, y=None):
        self.n_packets_ = len(list(X))
        return self

    def transform(self, X) -> EventLog:
        log, stats = packets_to_event_log(list(X), complete_only=self.complete_only)
        LOGGER.debug(
            "sessionized %d packets into %d cases", stats.input_packets, len(log)
        )
        return log


class InductiveMiner(BaseEstimator):
    """Discover a process tree and its workflow net from an event log.

    ``predict`` reports language membership per trace; ``score`` is the
    aggregate token-replay fitness of the given log against the mined
    net, so scoring the training log returns exactly 1.0.
    """

    def __init__(self, silent_depth: int = DEFAULT_SILENT_DEPTH):
        self.silent_depth = silent_depth

    def fit(self, X, y=None):
        self.tree_ = mine_inductive(X)
        self.net_ = tree_to_petri(self.tree_)
        self.alphabet_ = tuple(sorted(tree_alphabet(self.tree_)))
        return self

    def predict(self, X) -> np.ndarray:
        check_is_fitted(self)
        return np.array(
            [tree_admits(self.tree_, trace) for trace in _as_traces(X)], dtype=bool
        )

    def score(self, X, y=None) -> float:
        check_is_fitted(self)
        return fitness(self.net_, X, silent_depth=self.silent_depth).fitness


class FuzzyMiner(BaseEstimator):
    """Discover a frequency-filtered dependency model from an event log.

    ``predict`` reports whether each trace walks only retained edges;
    ``score`` is the fraction of traces admitted.
    """

    def __init__(self, activity_cutoff: float = 0.0, path_cutoff: float = 0.0):
        self.activity_cutoff = activity_cutoff
        self.path_cutoff = path_cutoff

    def fit(self, X, y=None):
        if isinstance(X, EventLog):
            self.dfg_ = build_dfg(X)
        else:
            self.dfg_ = dfg_from_traces(_as_traces(X))
        params = FuzzyParams(
            activity_cutoff=self.activity_cutoff, path_cutoff=self.path_cutoff
        )
        self.model_ = mine_fuzzy(self.dfg_, params)
        return self

    def predict(self, X) -> np.ndarray:
        check_is_fitted(self)
        return np.array(
            [bool(fuzzy_admits(self.model_, trace)) for trace in _as_traces(X)],
            dtype=bool,
        )

    def score(self, X, y=None) -> float:
        check_is_fitted(self)
        verdicts = self.predict(X)
        return float(verdicts.mean()) if len(verdicts) else 0.0
