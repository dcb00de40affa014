"""Acceptance gate: one test per criterion, one verdict line each.

Each test prints ``criterion N: PASS`` or ``criterion N: FAIL`` with a
short detail before asserting, so a red run still reports every verdict
it reached. Tolerances are pinned in the assertions, not configurable.
"""

from __future__ import annotations

import random
import time

from flowmine.conformance import fitness, replay_trace
from flowmine.dfg import build_dfg, dfg_from_traces, log_stats, subsample
from flowmine.errors import EmptyModel
from flowmine.fuzzy import END, START, FuzzyParams, fuzzy_admits, mine_fuzzy
from flowmine.inductive import mine_inductive
from flowmine.packets import TcpFlags, parse_pcap, render_flag_string, write_pcap
from flowmine.petri import tree_to_petri
from flowmine.reference import SCENARIOS, bishop_matrix, rfc_strict_matrix, run_scenario_suite
from flowmine.synth import (
    ANOMALY_KINDS,
    TrafficProfile,
    generate_anomalous_log,
    generate_normal_log,
    profile_with_seed,
)
from flowmine.trees import activity, choice, loop, parallel, seq, tau, tree_admits

import _oracles
from conftest import random_record


def _verdict(number: int, passed: bool, detail: str) -> bool:
    status = "PASS" if passed else "FAIL"
    print(f"criterion {number}: {status} ({detail})")
    return passed


def test_criterion_1_inductive_fitness_guarantee():
    """Every mined model replays its own log with fitness exactly 1.0."""
    rng = random.Random(20230517)
    started = time.perf_counter()
    logs = 0
    worst = 1.0
    for _ in range(220):
        alphabet = "abcdefgh"[: rng.randint(1, 8)]
        traces = [
            tuple(rng.choice(alphabet) for _ in range(rng.randint(0, 12)))
            for _ in range(rng.randint(1, 20))
        ]
        if all(len(t) == 0 for t in traces):
            traces[0] = (alphabet[0],)
        net = tree_to_petri(mine_inductive(traces))
        report = fitness(net, traces)
        worst = min(worst, report.fitness)
        logs += 1
    elapsed = time.perf_counter() - started
    ok = logs >= 200 and worst == 1.0 and elapsed < 60.0
    assert _verdict(1, ok, f"{logs} logs, worst fitness {worst!r}, {elapsed:.1f}s")


def test_criterion_2_experiment_scale_all_ones():
    """20k-case training, disjoint 2k normal + three 500-case anomaly logs."""
    started = time.perf_counter()
    profile = TrafficProfile(seed=7)
    pool = generate_normal_log(20000, profile)
    heldout = generate_normal_log(2000, profile_with_seed(profile, 8))
    net = tree_to_petri(mine_inductive(pool))
    rows = [("normal-heldout", fitness(net, heldout))]
    for i, kind in enumerate(ANOMALY_KINDS):
        anomalies = generate_anomalous_log(kind, 500, seed=9 + i)
        rows.append((kind, fitness(net, anomalies)))
    elapsed = time.perf_counter() - started
    deviations = {name: abs(report.fitness - 1.0) for name, report in rows}
    ok = all(d <= 1e-9 for d in deviations.values()) and elapsed < 300.0
    detail = ", ".join(f"{name}={report.fitness:.9f}" for name, report in rows)
    assert _verdict(2, ok, f"{detail}, {elapsed:.1f}s")


def test_criterion_3_bishop_matrix_fidelity():
    """Encoded matrix equals the printed transition table cell for cell."""
    matrix = bishop_matrix()
    encoded = frozenset((s.value, t.value) for s, t in matrix.cells)
    cell_match = encoded == _oracles.BISHOP_CELLS
    spot = (
        ("SYN.", "ACK.") in encoded
        and ("ACK.", "SYN.") not in encoded
        and not any(source == "END" for source, _ in encoded)
    )
    ok = cell_match and spot and matrix.true_cell_count == 33
    assert _verdict(
        3, ok, f"cell-for-cell match={cell_match}, {matrix.true_cell_count} true cells"
    )


def test_criterion_4_token_replay_oracle():
    """Hand token count first, then the library, on <a,c> over seq(a,b,c)."""
    by_hand = _oracles.chain_token_replay(("a", "b", "c"), ("a", "c"))
    net = tree_to_petri(seq(activity("a"), activity("b"), activity("c")))
    counts = replay_trace(net, ("a", "c"))
    got = (counts.produced, counts.consumed, counts.missing, counts.remaining)
    ok = (
        by_hand == (3, 3, 1, 1)
        and got == by_hand
        and abs(counts.fitness - 2.0 / 3.0) <= 1e-12
    )
    assert _verdict(4, ok, f"p,c,m,r={got}, fitness={counts.fitness!r}")


def test_criterion_5_fuzzy_edges_are_observed():
    """Every retained model edge exists in the directly-follows graph."""
    rng = random.Random(5150)
    combos = 0
    violations = 0
    cutoffs = [0.0, 0.3, 0.6]
    path_levels = [0.0, 0.5, 1.0]
    for _ in range(15):
        traces = [
            tuple(rng.choice("abcdef") for _ in range(rng.randint(1, 10)))
            for _ in range(rng.randint(2, 15))
        ]
        dfg = dfg_from_traces(traces)
        for activity_cutoff in cutoffs:
            for path_cutoff in path_levels:
                params = FuzzyParams(
                    activity_cutoff=activity_cutoff, path_cutoff=path_cutoff
                )
                try:
                    model = mine_fuzzy(dfg, params)
                except EmptyModel:
                    continue
                combos += 1
                for source, target, count in model.all_edges():
                    if source == START:
                        observed = dfg.start_counts.get(target)
                    elif target == END:
                        observed = dfg.end_counts.get(source)
                    else:
                        observed = dfg.edges.get((source, target))
                    if observed != count:
                        violations += 1
    ok = combos >= 100 and violations == 0
    assert _verdict(5, ok, f"{combos} parameter combinations, {violations} violations")


def _build_tree(spec):
    if spec[0] == "tau":
        return tau()
    if spec[0] == "act":
        return activity(spec[1])
    operator = {"seq": seq, "xor": choice, "and": parallel, "loop": loop}[spec[0]]
    return operator(_build_tree(spec[1]), _build_tree(spec[2]))


def test_criterion_6_language_oracle_equivalence():
    """All depth-3 trees: admits equals enumeration, members replay clean."""
    started = time.perf_counter()
    specs = _oracles.enumerate_tree_specs(max_depth=3)
    admit_mismatches = 0
    replay_misses = 0
    words_checked = 0
    members_checked = 0
    for spec in specs:
        tree = _build_tree(spec)
        alphabet = _oracles.spec_alphabet(spec)
        lang = _oracles.language(spec, 6)
        for word in _oracles.words_over(alphabet, 6):
            words_checked += 1
            if tree_admits(tree, word) != (word in lang):
                admit_mismatches += 1
        net = tree_to_petri(tree)
        for word in lang:
            members_checked += 1
            if not replay_trace(net, word).fits:
                replay_misses += 1
    elapsed = time.perf_counter() - started
    ok = len(specs) == 3830 and admit_mismatches == 0 and replay_misses == 0
    assert _verdict(
        6,
        ok,
        f"{len(specs)} trees, {words_checked} words, {members_checked} members, "
        f"{admit_mismatches + replay_misses} disagreements, {elapsed:.1f}s",
    )


def test_criterion_7_parser_round_trip():
    """1000 synthesized records survive a capture round trip bit for bit."""
    rng = random.Random(19930401)
    records = [random_record(rng) for _ in range(1000)]
    data = write_pcap(records)
    parsed = parse_pcap(data)
    identical = parsed.records == records and write_pcap(parsed.records) == data
    rendered = render_flag_string((0x012 >> 9) & 0x7, TcpFlags(0x012 & 0x1FF))
    ok = identical and rendered == "000.ACK.SYN."
    assert _verdict(7, ok, f"bit-identical={identical}, 0x012 -> {rendered!r}")


def test_criterion_8_scenario_grid():
    """Matrix columns match the printed tables; mined columns are reported."""
    profile = TrafficProfile(seed=7)
    pool = generate_normal_log(20000, profile)
    models: dict[str, object] = {}
    fuzzy_columns = []
    for index, size in enumerate((5, 100, 20000)):
        train = subsample(pool, size, 107 + index)
        models[f"inductive-{size}"] = mine_inductive(train)
        fuzzy_name = f"fuzzy-{size}"
        models[fuzzy_name] = mine_fuzzy(build_dfg(train), FuzzyParams())
        fuzzy_columns.append(fuzzy_name)
    table = run_scenario_suite(models)
    matrix_mismatches = [
        (scenario.name, column)
        for scenario in SCENARIOS
        for column in ("bishop", "rfc-strict")
        if table.verdict(scenario.name, column) != scenario.expected[column]
    ]
    fuzzy_no_handshake = {
        column: table.verdict("Data transmission without handshake", column)
        for column in fuzzy_columns
    }
    print(table.to_csv(), end="")
    ok = not matrix_mismatches and all(v == "N" for v in fuzzy_no_handshake.values())
    assert _verdict(
        8,
        ok,
        f"matrix mismatches={matrix_mismatches or 'none'}, "
        f"fuzzy no-handshake row={fuzzy_no_handshake}",
    )


def test_criterion_9_dataset_figures_are_out_of_scope():
    """The published per-dataset counts need the original capture; what we
    guarantee is that log_stats exposes the same counts on any supplied
    log, so the figures are checkable when the data is."""
    log = generate_normal_log(500)
    stats = log_stats(log)
    five = log_stats(subsample(log, 5, 7))
    consistent = (
        stats.case_count == 500
        and five.case_count == 5
        and 0 < five.event_class_count <= stats.event_class_count
        and stats.event_class_count == len(log.alphabet())
    )
    print(
        "criterion 9: note: dataset-specific class counts (9 at 5 cases, 19 at "
        "20k) require the original capture; log_stats reports "
        f"{five.event_class_count} classes at 5 cases and "
        f"{stats.event_class_count} on the full synthetic log here"
    )
    assert _verdict(9, consistent, "log_stats counts are checkable on any input")
