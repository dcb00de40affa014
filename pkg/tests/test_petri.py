"""Tree-to-net translation, soundness helpers and PNML export."""

from __future__ import annotations

import xml.etree.ElementTree as ET
from collections import Counter

import pytest

from flowmine.petri import (
    PetriNet,
    is_workflow_net,
    reachable_markings,
    to_pnml,
    tree_to_petri,
)
from flowmine.trees import activity, choice, loop, parallel, seq, tau


@pytest.fixture()
def chain():
    return tree_to_petri(seq(activity("a"), activity("b"), activity("c")))


def test_chain_shape(chain):
    assert len(chain.places) == 4
    assert dict(sorted(chain.transitions.items())) == {
        "t0000": "a",
        "t0001": "b",
        "t0002": "c",
    }
    assert dict(chain.initial_marking) == {"p0000": 1}
    assert dict(chain.final_marking) == {"p0001": 1}
    # a chain of three transitions walks through four markings
    assert len(reachable_markings(chain)) == 4


def test_arc_helpers(chain):
    assert chain.inputs("t0001") == ("p0002",)
    assert chain.outputs("t0001") == ("p0003",)
    assert chain.labeled("b") == ["t0001"]
    assert chain.labeled("missing") == []
    assert chain.labels == {"a", "b", "c"}


def test_parallel_uses_silent_split_and_join():
    net = tree_to_petri(parallel(activity("a"), activity("b")))
    silent = [t for t, l in net.transitions.items() if l is None]
    assert len(silent) == 2
    # both orders are reachable; the interleaving diamond has 6 markings
    assert len(reachable_markings(net)) == 6
    assert is_workflow_net(net)


def test_loop_uses_silent_enter_and_leave():
    net = tree_to_petri(loop(activity("a"), activity("b")))
    assert sorted(net.transitions.values(), key=str) == [None, None, "a", "b"]
    assert is_workflow_net(net)


def test_choice_shares_places():
    net = tree_to_petri(choice(activity("a"), activity("b"), tau()))
    assert len(reachable_markings(net)) == 2


def test_workflow_net_rejects_dangling_place(chain):
    broken = PetriNet(
        places=set(chain.places) | {"stray"},
        transitions=dict(chain.transitions),
        arcs=set(chain.arcs),
        initial_marking=Counter(chain.initial_marking),
        final_marking=Counter(chain.final_marking),
    )
    assert not is_workflow_net(broken)


def test_workflow_net_rejects_wrong_marking(chain):
    moved = PetriNet(
        places=set(chain.places),
        transitions=dict(chain.transitions),
        arcs=set(chain.arcs),
        initial_marking=Counter({"p0002": 1}),
        final_marking=Counter(chain.final_marking),
    )
    assert not is_workflow_net(moved)


def test_reachable_markings_limit(chain):
    with pytest.raises(RuntimeError):
        reachable_markings(chain, limit=2)


def test_pnml_round_trippable(chain):
    xml = to_pnml(chain)
    root = ET.fromstring(xml)
    assert root.tag == "pnml"
    places = root.findall(".//place")
    transitions = root.findall(".//transition")
    assert {p.get("id") for p in places} == set(chain.places)
    assert {t.get("id") for t in transitions} == set(chain.transitions)
    marked = [
        p.get("id") for p in places if p.find("initialMarking/text") is not None
    ]
    assert marked == ["p0000"]


def test_pnml_marks_silent_and_escapes():
    net = tree_to_petri(seq(activity("a&b"), loop(activity("x"), tau())))
    xml = to_pnml(net)
    assert "$invisible$" in xml
    assert "a&amp;b" in xml
    labels = {
        t.get("id"): t.findtext("name/text")
        for t in ET.fromstring(xml).findall(".//transition")
    }
    assert "a&b" in labels.values()


def test_pnml_deterministic(chain):
    assert to_pnml(chain) == to_pnml(chain)
