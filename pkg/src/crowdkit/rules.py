"""Diffusion rule bits and their synchronous application.

A rule moves nodes from one type to another when its compartment fires.
``apply_rules`` evaluates every node against the state mapping it is given and
never mutates it, so all transitions within one iteration are decided from the
same frozen view; the caller applies the returned transition map afterwards.

Compartment kinds:

* ``NodeStochastic`` — eligible when the triggering status is absent or at
  least one neighbor holds it in the frozen view; fires with probability
  ``ratio`` (one Bernoulli draw per eligible node, rule, and iteration).
* ``CountDown`` — a per-node counter starts at ``iteration_count`` on the
  first evaluation after the node enters the rule's source type and is
  decremented on every evaluation, firing when it reaches zero. A node that
  entered the source type at iteration t therefore transitions at exactly
  t + iteration_count. Firing or leaving the source type clears the counter.
* ``NodeCategorical`` — eligible when the node's categorical attribute equals
  ``value``; fires with probability ``probability``. A missing attribute makes
  the node ineligible (logged once per attribute, never an exception).

For directed graphs the triggering-status check inspects in-neighbors:
influence flows along incoming edges.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass
from typing import Union

import numpy as np

from .errors import ConfigError
from .graph import AttributeTable, Graph

logger = logging.getLogger(__name__)

_warned_missing_attrs: set[str] = set()


@dataclass(frozen=True)
class NodeStochastic:
    ratio: float
    triggering_status: str | None = None


@dataclass(frozen=True)
class CountDown:
    name: str
    iteration_count: int


@dataclass(frozen=True)
class NodeCategorical:
    attribute: str
    value: str
    probability: float


Compartment = Union[NodeStochastic, CountDown, NodeCategorical]


@dataclass(frozen=True)
class Rule:
    from_type: str
    to_type: str
    compartment: Compartment
    compartment_id: str = ""


class CountdownLedger:
    """Pending count-down counters keyed by (node, compartment name)."""

    __slots__ = ("_counters",)

    def __init__(self):
        self._counters: dict[tuple[int, str], int] = {}

    def get(self, node: int, name: str) -> int | None:
        return self._counters.get((node, name))

    def set(self, node: int, name: str, value: int) -> None:
        self._counters[(node, name)] = value

    def pop(self, node: int, name: str) -> None:
        self._counters.pop((node, name), None)

    def clear_node(self, node: int, names) -> None:
        for name in names:
            self._counters.pop((node, name), None)

    def __len__(self) -> int:
        return len(self._counters)

    def items(self):
        return self._counters.items()


@dataclass
class FrozenView:
    """Iteration-start node types plus live topology and attributes."""

    graph: Graph
    states: dict[int, str]
    attrs: AttributeTable

    def state_of(self, node: int) -> str:
        return self.states[node]


def evaluate_compartment(
    node: int,
    compartment: Compartment,
    view: FrozenView,
    ledger: CountdownLedger,
    rng: np.random.Generator,
) -> bool:
    """Decide whether a compartment fires for ``node`` against the frozen view."""
    if type(compartment) is NodeStochastic:
        trigger = compartment.triggering_status
        if trigger is not None:
            states = view.states
            graph = view.graph
            nbrs = graph.in_neighbors(node) if graph.directed else graph._adj[node]
            if not any(states[u] == trigger for u in nbrs):
                return False
        return rng.random() < compartment.ratio

    if type(compartment) is CountDown:
        counter = ledger.get(node, compartment.name)
        if counter is None:
            counter = compartment.iteration_count
        counter -= 1
        if counter <= 0:
            ledger.pop(node, compartment.name)
            return True
        ledger.set(node, compartment.name, counter)
        return False

    if type(compartment) is NodeCategorical:
        value = view.attrs.get_node(node, compartment.attribute)
        if value is None:
            if compartment.attribute not in _warned_missing_attrs:
                _warned_missing_attrs.add(compartment.attribute)
                logger.warning(
                    "node %d lacks categorical attribute %r; treating as not eligible",
                    node,
                    compartment.attribute,
                )
            return False
        if value != compartment.value:
            return False
        return rng.random() < compartment.probability

    raise ConfigError(f"unknown compartment kind {type(compartment).__name__}")


def apply_rules(
    state: dict[int, str],
    graph: Graph,
    attrs: AttributeTable,
    rules: list[Rule],
    ledger: CountdownLedger,
    rng: np.random.Generator,
) -> dict[int, str]:
    """One synchronous rule pass. Returns the transition map without applying it.

    Nodes are visited in ascending id order and each node's rules in
    declaration order; the first firing rule wins. Count-down counters of
    nodes that leave a rule's source type are cleared.
    """
    by_type: dict[str, list[Rule]] = {}
    countdown_names_by_type: dict[str, list[str]] = {}
    for rule in rules:
        by_type.setdefault(rule.from_type, []).append(rule)
        if type(rule.compartment) is CountDown:
            countdown_names_by_type.setdefault(rule.from_type, []).append(rule.compartment.name)

    view = FrozenView(graph, state, attrs)
    transitions: dict[int, str] = {}
    for node in range(graph.num_nodes):
        node_rules = by_type.get(state[node])
        if not node_rules:
            continue
        for rule in node_rules:
            if evaluate_compartment(node, rule.compartment, view, ledger, rng):
                transitions[node] = rule.to_type
                break

    for node in transitions:
        names = countdown_names_by_type.get(state[node])
        if names:
            ledger.clear_node(node, names)
    return transitions
