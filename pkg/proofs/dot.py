"""Graphviz rendering of certificates."""

from __future__ import annotations

from typing import List

import networkx as nx

from proofs.certificates import Judgment, LiftItem, ProofGraph, RootStepItem, Split
from rewriting.rules import Direction


def _label(lines: List[str]) -> str:
    # networkx rejects unquoted values containing ':'
    return '"' + '\\n'.join(lines) + '"'


def _step_label(item: RootStepItem) -> str:
    arrow = '->' if item.direction is Direction.FWD else '<-'
    return f"{item.source} {arrow}eps[{item.rule_index}] {item.target}"


def to_graph(p: ProofGraph) -> nx.MultiDiGraph:
    """
    One box per judgment, labelled with the goal and the rule; split boxes
    also list their root steps. Marked lifts are dashed and red.
    """
    g = nx.MultiDiGraph(name='certificate')
    g.graph['node'] = {'shape': 'box', 'fontname': 'monospace'}
    for index, node in enumerate(p.nodes):
        lines = [f"{index}: {node}", f"[{node.rule.name}]"]
        if isinstance(node.rule, Split):
            lines += [_step_label(item) for item in node.rule.items if isinstance(item, RootStepItem)]
        attributes = {'label': _label(lines)}
        if node.judgment is Judgment.DOWN_FIN:
            attributes.update(style='dashed', color='red', xlabel='marked')
        elif index == p.root:
            attributes['penwidth'] = '2'
        g.add_node(f"n{index}", **attributes)
    for index, node in enumerate(p.nodes):
        if isinstance(node.rule, Split):
            for position, item in enumerate(node.rule.items):
                if isinstance(item, LiftItem):
                    g.add_edge(f"n{index}", f"n{item.node}", label=str(position + 1))
        else:
            for position, premise in enumerate(node.successors()):
                g.add_edge(f"n{index}", f"n{premise}", label=f"arg {position + 1}")
    return g


def to_dot(p: ProofGraph) -> str:
    return nx.nx_pydot.to_pydot(to_graph(p)).to_string()
