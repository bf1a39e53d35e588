"""Canonical N-Triples.

Blank nodes are relabelled ``_:b0, _:b1, ...`` independently of their input
labels: nodes are coloured by iterated hashing of their neighbourhoods,
remaining ties are broken by individualising each candidate in turn and
keeping the lexicographically smallest serialization. Labels are then
renumbered in order of first appearance in the sorted output.
"""

from __future__ import annotations

import hashlib
from collections.abc import Mapping

from ..graph import MAX_BLANK_NODES, BlankNode, CapacityError, Graph, Triple


def _digest(parts) -> str:
    h = hashlib.sha256()
    for part in parts:
        h.update(part.encode("utf-8"))
        h.update(b"\x00")
    return h.hexdigest()


def _text(term, colors: Mapping[BlankNode, str]) -> str:
    if isinstance(term, BlankNode):
        return "_:" + colors[term]
    return term.n3()


def _refine(triples: list[Triple], colors: dict[BlankNode, str]) -> dict[BlankNode, str]:
    """Iterate neighbourhood hashing until the partition stops splitting."""
    nodes = list(colors)
    while True:
        before = len(set(colors.values()))
        neighbourhood: dict[BlankNode, list[str]] = {n: [] for n in nodes}
        for t in triples:
            line = f"{_text(t.subject, colors)} {t.predicate.n3()} {_text(t.object, colors)}"
            if isinstance(t.subject, BlankNode):
                neighbourhood[t.subject].append("s:" + line)
            if isinstance(t.object, BlankNode):
                neighbourhood[t.object].append("o:" + line)
        colors = {n: _digest([colors[n], *sorted(neighbourhood[n])])[:16] for n in nodes}
        if len(set(colors.values())) == before:
            return colors


def _render(triples: list[Triple], order: list[BlankNode]) -> tuple[str, dict[BlankNode, str]]:
    labels = {n: f"b{i}" for i, n in enumerate(order)}
    lines = sorted(
        f"{_text(t.subject, labels)} {t.predicate.n3()} {_text(t.object, labels)} ." for t in triples
    )
    return "\n".join(lines), labels


def _twins(triples: list[Triple], a: BlankNode, b: BlankNode) -> bool:
    """True when swapping ``a`` and ``b`` maps the triple set onto itself."""
    swap = {a: b, b: a}
    ts = set(triples)
    for t in triples:
        s = swap.get(t.subject, t.subject)
        o = swap.get(t.object, t.object)
        if (s, o) != (t.subject, t.object) and Triple(s, t.predicate, o) not in ts:
            return False
    return True


def _search(triples: list[Triple], colors: dict[BlankNode, str]) -> tuple[str, dict[BlankNode, str]]:
    colors = _refine(triples, colors)
    classes: dict[str, list[BlankNode]] = {}
    for n, c in colors.items():
        classes.setdefault(c, []).append(n)
    ties = sorted((c, members) for c, members in classes.items() if len(members) > 1)
    if not ties:
        order = sorted(colors, key=lambda n: colors[n])
        return _render(triples, order)
    color, members = ties[0]
    members = sorted(members, key=lambda n: n.label)
    tried: list[BlankNode] = []
    best: tuple[str, dict[BlankNode, str]] | None = None
    for m in members:
        if any(_twins(triples, m, other) for other in tried):
            continue
        tried.append(m)
        split = dict(colors)
        split[m] = _digest([color, "individualised"])[:16]
        result = _search(triples, split)
        if best is None or result[0] < best[0]:
            best = result
    assert best is not None
    return best


def canonical_labels(graph: Graph, strict: bool = True) -> dict[BlankNode, str]:
    """Map each blank node of ``graph`` to its canonical label.

    Above the blank node cap this raises CapacityError, or with
    ``strict=False`` falls back to the graph's own labels.
    """
    nodes = graph.blank_nodes()
    if not nodes:
        return {}
    if len(nodes) > MAX_BLANK_NODES:
        if strict:
            raise CapacityError(f"canonicalization supports at most {MAX_BLANK_NODES} blank nodes, got {len(nodes)}")
        return {n: n.label for n in nodes}
    triples = [t for t in graph.triples if isinstance(t.subject, BlankNode) or isinstance(t.object, BlankNode)]
    _, labels = _search(triples, {n: "0" for n in nodes})
    return _renumber(graph, labels)


def _rows(graph: Graph, labels: Mapping[BlankNode, str]) -> list[tuple[str, list[BlankNode]]]:
    rows = []
    for t in graph.triples:
        line = f"{_text(t.subject, labels)} {t.predicate.n3()} {_text(t.object, labels)} ."
        rows.append((line, [x for x in (t.subject, t.object) if isinstance(x, BlankNode)]))
    rows.sort(key=lambda r: r[0])
    return rows


def _lines(graph: Graph, labels: Mapping[BlankNode, str]) -> list[str]:
    return [line for line, _ in _rows(graph, labels)]


def _renumber(graph: Graph, labels: dict[BlankNode, str]) -> dict[BlankNode, str]:
    """Rename labels to b0, b1, ... in order of first appearance in the sorted lines.

    Renaming can reorder lines, so the pass repeats until stable; if it
    cycles, the lexicographically smallest output in the cycle wins.
    Each step depends only on the previous output, so the result stays
    independent of the input labels.
    """
    seen: dict[str, dict[BlankNode, str]] = {}
    current = labels
    while True:
        rows = _rows(graph, current)
        text = "\n".join(line for line, _ in rows)
        if text in seen:
            break
        seen[text] = current
        order: dict[BlankNode, str] = {}
        for _, nodes in rows:
            for node in nodes:
                order.setdefault(node, f"b{len(order)}")
        nxt = {node: order[node] for node in current}
        if nxt == current:
            return current
        current = nxt
    # cycle detected: pick the best rendering among those visited
    return seen[min(seen)]


def serialize_ntriples_canonical(graph: Graph) -> str:
    """One triple per line, sorted, full IRIs, canonical blank node labels."""
    return "".join(line + "\n" for line in _lines(graph, canonical_labels(graph)))


def canonical_graph(graph: Graph) -> Graph:
    """``graph`` with blank nodes renamed to their canonical labels."""
    labels = canonical_labels(graph)

    def rn(term):
        return BlankNode(labels[term]) if isinstance(term, BlankNode) else term

    return Graph((Triple(rn(t.subject), t.predicate, rn(t.object)) for t in graph.triples), graph.prefixes)
