"""Frequent-subgraph mining over rewarded compute graphs, and abstraction
of mined templates into new registered operators.

A pattern is a rooted connected set of operator nodes; excluded children
become parameter placeholders.  Within one occurrence, syntactically
identical leaf subtrees share a placeholder (so a repeated variable leaf
becomes one parameter); placeholders are numbered in depth-first order of
first appearance.
"""

from __future__ import annotations

from dataclasses import dataclass
from itertools import product

from .graph import ComputeGraph
from .operators import OperatorSpec, Registry
from .values import OBJECT, is_subtype


@dataclass(frozen=True)
class TemplateNode:
    spec: OperatorSpec
    children: tuple  # each entry: int placeholder id or TemplateNode


def template_text(node, joiner: str = ",") -> str:
    if isinstance(node, int):
        return f"p{node}"
    parts = joiner.join(template_text(c, joiner) for c in node.children)
    return f"{node.spec.name}({parts})"


def template_size(node) -> int:
    if isinstance(node, int):
        return 0
    return 1 + sum(template_size(c) for c in node.children)


def _placeholder_slot_types(node, out):
    if isinstance(node, TemplateNode):
        for (_, ptype), child in zip(node.spec.params, node.children):
            if isinstance(child, int):
                out.setdefault(child, []).append(ptype)
            else:
                _placeholder_slot_types(child, out)
    return out


def _type_meet(tags) -> str | None:
    meet = OBJECT
    for t in tags:
        if is_subtype(t, meet):
            meet = t
        elif not is_subtype(meet, t):
            return None  # incomparable constraints
    return meet


@dataclass(frozen=True)
class MinedOperator:
    """A frequent rewarded subgraph abstracted into an operator template."""

    template: TemplateNode
    support: int
    size: int  # operator nodes in the template
    param_types: tuple  # type tag per placeholder
    return_type: str

    @property
    def arity(self) -> int:
        return len(self.param_types)

    @property
    def text(self) -> str:
        return template_text(self.template)

    def default_name(self) -> str:
        return f"{self.template.spec.name}_{self.size}"

    def eval_with(self, args) -> object:
        return _eval_template(self.template, args)

    def to_operator_spec(self, name: str | None = None) -> OperatorSpec:
        template = self.template
        params = tuple((f"p{i}", t) for i, t in enumerate(self.param_types))

        def fn(*args):
            return _eval_template(template, args)

        return OperatorSpec(
            name=name or self.default_name(),
            params=params,
            return_type=self.return_type,
            fn=fn,
            expansion=self.text,
        )


def _eval_template(node, args):
    child_values = [
        args[c] if isinstance(c, int) else _eval_template(c, args) for c in node.children
    ]
    return node.spec.eval(*child_values)


# ---------------------------------------------------------------------------
# enumeration and counting


def _subtree_key(graph: ComputeGraph, idx: int) -> str:
    return graph._node_text(idx, placeholder=None)


def _patterns_at(graph: ComputeGraph, idx: int):
    """All patterns rooted at operator node idx: (structure, leaves) pairs,
    where structure entries are ("leaf", child_idx) or nested tuples, and
    leaves is the DFS list of cut child indices."""
    node = graph.nodes[idx]
    per_child = []
    for child_idx in node.children:
        child = graph.nodes[child_idx]
        options = [("leaf", child_idx)]
        if child.is_operator:
            options.extend(_patterns_at(graph, child_idx))
        per_child.append(options)
    return [("node", idx, combo) for combo in product(*per_child)]


def _to_template(graph: ComputeGraph, structure, leaf_map: dict):
    kind = structure[0]
    if kind == "leaf":
        child_idx = structure[1]
        key = _subtree_key(graph, child_idx)
        if key not in leaf_map:
            leaf_map[key] = len(leaf_map)
        return leaf_map[key]
    _, idx, combo = structure
    children = tuple(_to_template(graph, c, leaf_map) for c in combo)
    return TemplateNode(graph.nodes[idx].spec, children)


def mine(rewarded_graphs, min_support: int = 10, min_size: int = 2) -> list:
    """Frequent templates over a corpus of complete rewarded graphs, ranked
    by support, then size, then text."""
    counts: dict = {}
    exemplar: dict = {}
    for graph in rewarded_graphs:
        for idx, node in enumerate(graph.nodes):
            if not node.is_operator:
                continue
            for structure in _patterns_at(graph, idx):
                template = _to_template(graph, structure, {})
                key = template_text(template)
                counts[key] = counts.get(key, 0) + 1
                exemplar.setdefault(key, template)
    out = []
    for key, support in counts.items():
        template = exemplar[key]
        size = template_size(template)
        if support < min_support or size < min_size:
            continue
        slot_types = _placeholder_slot_types(template, {})
        param_types = []
        ok = True
        for i in range(len(slot_types)):
            meet = _type_meet(slot_types[i])
            if meet is None:
                ok = False
                break
            param_types.append(meet)
        if not ok:
            continue
        out.append(
            MinedOperator(
                template=template,
                support=support,
                size=size,
                param_types=tuple(param_types),
                return_type=template.spec.return_type,
            )
        )
    out.sort(key=lambda m: (-m.support, -m.size, m.text))
    return out


MAX_MINED_ARITY = 2  # the action grammar supports the same arities as base operators


def register(mined: MinedOperator, registry: Registry, name: str | None = None):
    """Extend the registry with a mined operator at the next free index;
    returns (new registry, new spec)."""
    if mined.arity > MAX_MINED_ARITY:
        raise ValueError(
            f"template arity {mined.arity} exceeds the supported maximum of {MAX_MINED_ARITY}"
        )
    spec = mined.to_operator_spec(name)
    return registry.extend(spec), spec


def mine_episode_log(lines, registry: Registry, min_support: int = 10, min_size: int = 2) -> list:
    """Mine from structured episode-log JSON lines (reward-1 records only)."""
    import json

    from .graph import deserialize

    graphs = []
    for line in lines:
        line = line.strip()
        if not line:
            continue
        record = json.loads(line)
        if record.get("reward") == 1 and record.get("graph"):
            graphs.append(deserialize(record["graph"], registry))
    return mine(graphs, min_support=min_support, min_size=min_size)
