"""Text formats for instances and JSON documents for computed distributions.

Instance files are line oriented; ``#`` starts a comment. Three headers exist::

    dag <N>                       graph <nodes> <vars>        functionals <N>
    edge s <i>                    edge <u> <v> var=<k>        x <c_1> ... <c_N> [cost=<c>]
    edge <i> <j>                  access <u>
    edge <i> d

Graph nodes are numbered from 0; DAG inner nodes and edge variables from 1.
"""

import json

import numpy as np

from ..dag_dp import AccessExitDistribution, AccessGraph, ExitDistribution, SourceDrainDag
from ..model import FunctionalSet


class ParseError(ValueError):
    def __init__(self, msg, line, col=1):
        super().__init__(f"line {line}, column {col}: {msg}")
        self.line, self.col = line, col


def _tokens(text):
    for lineno, raw in enumerate(text.splitlines(), start=1):
        body = raw.split("#", 1)[0]
        toks, pos = [], 0
        for tok in body.split():
            pos = body.index(tok, pos)
            toks.append((tok, pos + 1))
            pos += len(tok)
        if toks:
            yield lineno, toks


def _int(tok, lineno, what):
    text, col = tok
    try:
        return int(text)
    except ValueError:
        raise ParseError(f"expected {what}, got {text!r}", lineno, col) from None


def _float(tok, lineno):
    text, col = tok
    try:
        return float(text)
    except ValueError:
        raise ParseError(f"expected a number, got {text!r}", lineno, col) from None


def parse_instance(text):
    """Parse a DAG, access graph or explicit functional set from its text form."""
    lines = list(_tokens(text))
    if not lines:
        raise ParseError("empty instance", 1)
    lineno, head = lines[0]
    kind = head[0][0]
    body = lines[1:]
    try:
        if kind == "dag":
            return _parse_dag(lineno, head, body)
        if kind == "graph":
            return _parse_graph(lineno, head, body)
        if kind == "functionals":
            return _parse_functionals(lineno, head, body)
    except ParseError:
        raise
    except ValueError as exc:
        last = body[-1][0] if body else lineno
        raise ParseError(str(exc), last) from None
    raise ParseError(f"unknown header {kind!r}", lineno, head[0][1])


def _expect_len(toks, n, lineno):
    if len(toks) != n:
        col = toks[min(n, len(toks)) - 1][1] if toks else 1
        raise ParseError(f"expected {n} fields, got {len(toks)}", lineno, col)


def _parse_dag(lineno, head, body):
    _expect_len(head, 2, lineno)
    n = _int(head[1], lineno, "an inner node count")
    edges = []
    for ln, toks in body:
        if toks[0][0] != "edge":
            raise ParseError(f"unexpected directive {toks[0][0]!r}", ln, toks[0][1])
        _expect_len(toks, 3, ln)
        ends = []
        for tok in toks[1:]:
            if tok[0] in ("s", "d"):
                ends.append(tok[0])
            else:
                v = _int(tok, ln, "a node")
                if not 1 <= v <= n:
                    raise ParseError(f"node {v} outside 1..{n}", ln, tok[1])
                ends.append(v)
        edges.append(tuple(ends))
    if not edges:
        raise ParseError("no source-drain path", lineno)
    try:
        return SourceDrainDag(n, edges)
    except ValueError as exc:
        raise ParseError(str(exc), body[-1][0]) from None


def _parse_graph(lineno, head, body):
    _expect_len(head, 3, lineno)
    n_nodes = _int(head[1], lineno, "a node count")
    n_vars = _int(head[2], lineno, "an edge-variable count")
    arcs, access = [], []
    for ln, toks in body:
        word = toks[0][0]
        if word == "edge":
            _expect_len(toks, 4, ln)
            u, v = _int(toks[1], ln, "a node"), _int(toks[2], ln, "a node")
            text, col = toks[3]
            if not text.startswith("var="):
                raise ParseError("expected var=<k>", ln, col)
            k = _int((text[4:], col + 4), ln, "a variable index")
            if not 1 <= k <= n_vars:
                raise ParseError(f"variable {k} outside 1..{n_vars}", ln, col)
            arcs.append((u, v, k - 1))
        elif word == "access":
            _expect_len(toks, 2, ln)
            access.append(_int(toks[1], ln, "a node"))
        else:
            raise ParseError(f"unexpected directive {word!r}", ln, toks[0][1])
    if not arcs:
        raise ParseError("no access-to-access path", lineno)
    if {k for _, _, k in arcs} != set(range(n_vars)):
        raise ParseError(f"header declares {n_vars} variables but arcs use a different set", lineno)
    try:
        return AccessGraph(n_nodes, arcs, access)
    except ValueError as exc:
        raise ParseError(str(exc), body[-1][0]) from None


def _parse_functionals(lineno, head, body):
    _expect_len(head, 2, lineno)
    n = _int(head[1], lineno, "a dimension")
    rows, costs = [], []
    for ln, toks in body:
        if toks[0][0] != "x":
            raise ParseError(f"unexpected directive {toks[0][0]!r}", ln, toks[0][1])
        vals = toks[1:]
        cost = 1.0
        if vals and vals[-1][0].startswith("cost="):
            text, col = vals.pop()
            cost = _float((text[5:], col + 5), ln)
        if len(vals) != n:
            raise ParseError(f"expected {n} coefficients, got {len(vals)}", ln, toks[0][1])
        rows.append([_float(t, ln) for t in vals])
        costs.append(cost)
    if not rows:
        raise ParseError("functional set is empty", lineno)
    try:
        return FunctionalSet(rows, costs)
    except ValueError as exc:
        raise ParseError(str(exc), body[-1][0]) from None


def _num(v):
    return format(float(v), ".17g")


def serialize_instance(obj):
    """Canonical text form; ``parse_instance`` inverts it."""
    if isinstance(obj, SourceDrainDag):
        lines = [f"dag {obj.n_inner}"] + [f"edge {u} {v}" for u, v in obj.edges]
    elif isinstance(obj, AccessGraph):
        lines = [f"graph {obj.n_nodes} {obj.n_vars}"]
        lines += [f"edge {u} {v} var={k + 1}" for u, v, k in sorted(obj.arcs)]
        lines += [f"access {a}" for a in obj.access]
    elif isinstance(obj, FunctionalSet):
        lines = [f"functionals {obj.dimension}"]
        for row, cost in zip(obj.matrix, obj.costs):
            tail = "" if cost == 1.0 else f" cost={_num(cost)}"
            lines.append("x " + " ".join(_num(v) for v in row) + tail)
    else:
        raise TypeError(f"cannot serialize {type(obj).__name__}")
    return "\n".join(lines) + "\n"


def _arc_name(graph, a):
    u, v, _ = graph.arcs[a]
    return f"{u}->{v}"


def alpha_to_json(alpha):
    if isinstance(alpha, ExitDistribution):
        return {str(u): [[str(v), p] for v, p in row.items()] for u, row in alpha.rows().items()}
    g = alpha.graph
    out = {}
    for block in [("start",)] + [("leave", u) for u in g.start_points] + [("arc", a) for a in range(len(g.arcs))]:
        opts = alpha.block_options(block)
        if not opts:
            continue
        vals = alpha.get_block(block)
        if block[0] == "start":
            key, names = "start", [str(u) for u in opts]
        elif block[0] == "leave":
            key, names = f"leave {block[1]}", [_arc_name(g, a) for a in opts]
        else:
            key = f"arc {_arc_name(g, block[1])}"
            names = [o if o == "stop" else _arc_name(g, o) for o in opts]
        out[key] = [[n, float(p)] for n, p in zip(names, vals)]
    return out


def alpha_from_json(graph, data):
    if isinstance(graph, SourceDrainDag):
        conv = lambda x: x if x in ("s", "d") else int(x)  # noqa: E731
        return ExitDistribution.from_rows(graph, {conv(u): {conv(v): p for v, p in row} for u, row in data.items()})
    index = {_arc_name(graph, a): a for a in range(len(graph.arcs))}
    alpha = AccessExitDistribution.uniform(graph)
    for key, pairs in data.items():
        if key == "start":
            block = ("start",)
        elif key.startswith("leave "):
            block = ("leave", int(key.split()[1]))
        elif key.startswith("arc "):
            block = ("arc", index[key.split()[1]])
        else:
            raise ValueError(f"unknown block {key!r}")
        opts = alpha.block_options(block)
        names = [p[0] for p in pairs]
        expected = [
            str(o) if block[0] == "start" else (o if o == "stop" else _arc_name(graph, o)) for o in opts
        ]
        if names != expected:
            raise ValueError(f"block {key!r} lists {names}, expected {expected}")
        alpha = alpha.with_block(block, [p[1] for p in pairs], validate=False)
    return AccessExitDistribution(graph, alpha.start_dist, alpha.start_rows, alpha.trans, alpha.stop, atol=1e-9)


def serialize_result(result, *, objective, instance=None, fset=None):
    """JSON document for a computed distribution.

    Explicit results carry ``functionals`` and ``weights``; product results carry
    the canonical ``instance`` text and ``alpha`` as ordered (exit, probability) pairs.
    """
    doc = {"objective": str(getattr(objective, "value", objective))}
    if fset is not None:
        doc["type"] = "explicit"
        doc["functionals"] = fset.matrix.tolist()
        if np.any(fset.costs != 1.0):
            doc["costs"] = fset.costs.tolist()
        doc["weights"] = np.asarray(result["weights"]).tolist()
    else:
        doc["type"] = "product"
        doc["instance"] = serialize_instance(instance)
        doc["alpha"] = alpha_to_json(result["alpha"])
    doc["value"] = float(result["value"])
    gap = result.get("certificate_gap")
    doc["certificate_gap"] = None if gap is None else float(gap)
    return json.dumps(doc, indent=2, sort_keys=False) + "\n"


def parse_result(text):
    """Inverse of :func:`serialize_result`; returns a dict with live objects."""
    doc = json.loads(text)
    out = dict(doc)
    if doc.get("type") == "explicit":
        out["fset"] = FunctionalSet(doc["functionals"], doc.get("costs"))
        out["weights"] = np.asarray(doc["weights"], dtype=float)
    elif doc.get("type") == "product":
        graph = parse_instance(doc["instance"])
        out["instance"] = graph
        out["alpha"] = alpha_from_json(graph, doc["alpha"])
    else:
        raise ValueError(f"unknown result type {doc.get('type')!r}")
    return out
