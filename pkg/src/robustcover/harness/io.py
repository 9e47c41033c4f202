"""Instance file reading and writing.

Set systems::

    setcover n m k lambda [nonuniform]
    cost elem elem ...          (uniform, m lines)
    b c elem elem ...           (nonuniform, m lines)

Graphs::

    graph n m
    u v cost                    (m lines)
    problem KIND                (optional: steiner_tree, steiner_tree_unrooted, steiner_forest, mincut, multicut)
    k K                         (optional, default 1)
    lambda L                    (optional, default 1)
    root r
    terminals t1 t2 ...
    pairs p
    s t                         (p lines)

Without a ``problem`` line, ``pairs`` means multicut, ``root`` plus
``terminals`` means minimum cut and bare ``terminals`` means unrooted Steiner
tree. Numbers may be integers, decimals or ``p/q`` rationals. Blank lines and
lines starting with ``#`` are ignored.
"""

from __future__ import annotations

from fractions import Fraction
from pathlib import Path

from ..cuts import MinCutProblem, MulticutProblem
from ..framework import RobustInstance
from ..graph_core import WeightedGraph
from ..setcover import SetSystem, UncoverableElementError
from ..steiner import SteinerForestProblem, SteinerTreeProblem

GRAPH_KINDS = ("steiner_tree", "steiner_tree_unrooted", "steiner_forest", "mincut", "multicut")


class InstanceParseError(ValueError):
    def __init__(self, message: str, line: int | None = None, column: int | None = None, path: str | None = None):
        self.message, self.line, self.column, self.path = message, line, column, path
        where = ""
        if path is not None:
            where += f"{path}:"
        if line is not None:
            where += f"{line}:"
            if column is not None:
                where += f"{column}:"
        super().__init__(f"{where} {message}".strip())


def _tokens(text: str):
    """(line number, [(column, token), ...]) for each meaningful line."""
    out = []
    for number, raw in enumerate(text.splitlines(), start=1):
        stripped = raw.split("#", 1)[0]
        if not stripped.strip():
            continue
        toks, col = [], 0
        for piece in stripped.split():
            col = stripped.index(piece, col)
            toks.append((col + 1, piece))
            col += len(piece)
        out.append((number, toks))
    return out


def _number(tok, line) -> Fraction:
    col, text = tok
    try:
        return Fraction(text)
    except (ValueError, ZeroDivisionError):
        raise InstanceParseError(f"expected a number, found {text!r}", line, col) from None


def _integer(tok, line) -> int:
    col, text = tok
    try:
        return int(text)
    except ValueError:
        raise InstanceParseError(f"expected an integer, found {text!r}", line, col) from None


def parse_instance_text(text: str, path: str | None = None, epsilon=None) -> RobustInstance:
    lines = _tokens(text)
    if not lines:
        raise InstanceParseError("empty instance file", path=path)
    head = lines[0][1][0][1]
    try:
        if head == "setcover":
            inst = _parse_setcover(lines)
        elif head == "graph":
            inst = _parse_graph(lines)
        else:
            raise InstanceParseError(f"unknown header {head!r}; expected 'setcover' or 'graph'", lines[0][0], 1)
    except InstanceParseError as err:
        if err.path is None and path is not None:
            raise InstanceParseError(err.message, err.line, err.column, path) from None
        raise
    if epsilon is not None:
        inst = inst.with_params(epsilon=epsilon)
    return inst


def parse_instance(path, epsilon=None) -> RobustInstance:
    path = Path(path)
    return parse_instance_text(path.read_text(), str(path), epsilon)


def _parse_setcover(lines) -> RobustInstance:
    number, header = lines[0]
    if len(header) not in (5, 6):
        raise InstanceParseError("setcover header must read 'setcover n m k lambda [nonuniform]'", number, 1)
    n, m, k = (_integer(t, number) for t in header[1:4])
    lam = _number(header[4], number)
    nonuniform = len(header) == 6
    if nonuniform and header[5][1] != "nonuniform":
        raise InstanceParseError(f"unknown header flag {header[5][1]!r}", number, header[5][0])
    body = lines[1:]
    if len(body) != m:
        raise InstanceParseError(f"header declares {m} sets but {len(body)} set lines follow", number)
    sets, first, second = [], [], []
    lead = 2 if nonuniform else 1
    for line, toks in body:
        if len(toks) < lead:
            raise InstanceParseError("set line is missing its cost", line, 1)
        costs = [_number(t, line) for t in toks[:lead]]
        members = []
        for tok in toks[lead:]:
            e = _integer(tok, line)
            if not 0 <= e < n:
                raise InstanceParseError(f"element {e} is outside 0..{n - 1}", line, tok[0])
            members.append(e)
        sets.append(members)
        first.append(costs[0])
        second.append(costs[-1])
        if nonuniform and costs[0] > costs[1]:
            raise InstanceParseError("first-stage cost exceeds second-stage cost", line, toks[0][0])
    try:
        system = SetSystem(n, sets, first, second if nonuniform else None)
    except UncoverableElementError as err:
        raise InstanceParseError(f"element {err.element} is covered by no set", number) from None
    return _instance(system, k, lam, number)


def _instance(problem, k, lam, line) -> RobustInstance:
    try:
        return RobustInstance(problem, k, lam)
    except ValueError as err:
        raise InstanceParseError(str(err), line) from None


def _parse_graph(lines) -> RobustInstance:
    number, header = lines[0]
    if len(header) != 3:
        raise InstanceParseError("graph header must read 'graph n m'", number, 1)
    n, m = _integer(header[1], number), _integer(header[2], number)
    if len(lines) < 1 + m:
        raise InstanceParseError(f"header declares {m} edges but only {len(lines) - 1} lines follow", number)
    edges = []
    for line, toks in lines[1 : 1 + m]:
        if len(toks) != 3:
            raise InstanceParseError("edge line must read 'u v cost'", line, 1)
        u, v = _integer(toks[0], line), _integer(toks[1], line)
        for tok, x in ((toks[0], u), (toks[1], v)):
            if not 0 <= x < n:
                raise InstanceParseError(f"vertex {x} is outside 0..{n - 1}", line, tok[0])
        if u == v:
            raise InstanceParseError(f"self-loop at vertex {u}", line, toks[0][0])
        cost = _number(toks[2], line)
        if cost < 0:
            raise InstanceParseError("edge cost must be nonnegative", line, toks[2][0])
        edges.append((u, v, cost))
    graph = WeightedGraph(n, edges)
    kind, k, lam, root, terminals, pairs = None, 1, Fraction(1), None, None, None
    rest = lines[1 + m :]
    i = 0
    while i < len(rest):
        line, toks = rest[i]
        key = toks[0][1]

        def vertex(tok):
            x = _integer(tok, line)
            if not 0 <= x < n:
                raise InstanceParseError(f"vertex {x} is outside 0..{n - 1}", line, tok[0])
            return x

        if key == "problem" and len(toks) == 2:
            kind = toks[1][1]
            if kind not in GRAPH_KINDS:
                raise InstanceParseError(f"unknown problem kind {kind!r}", line, toks[1][0])
        elif key == "k" and len(toks) == 2:
            k = _integer(toks[1], line)
        elif key == "lambda" and len(toks) == 2:
            lam = _number(toks[1], line)
        elif key == "root" and len(toks) == 2:
            root = vertex(toks[1])
        elif key == "terminals":
            terminals = [vertex(t) for t in toks[1:]]
            if not terminals:
                raise InstanceParseError("terminals section is empty", line, 1)
        elif key == "pairs" and len(toks) == 2:
            p = _integer(toks[1], line)
            block = rest[i + 1 : i + 1 + p]
            if len(block) != p:
                raise InstanceParseError(f"pairs section declares {p} pairs but fewer follow", line)
            pairs = []
            for pline, ptoks in block:
                if len(ptoks) != 2:
                    raise InstanceParseError("pair line must read 's t'", pline, 1)
                line = pline
                pairs.append((vertex(ptoks[0]), vertex(ptoks[1])))
            i += p
        else:
            raise InstanceParseError(f"unrecognized section {key!r}", rest[i][0], toks[0][0])
        i += 1
    if kind is None:
        if pairs is not None:
            kind = "multicut"
        elif terminals is not None:
            kind = "mincut" if root is not None else "steiner_tree_unrooted"
        else:
            raise InstanceParseError("graph file has no terminals or pairs section", number)
    try:
        if kind in ("steiner_forest", "multicut"):
            if pairs is None:
                raise InstanceParseError(f"{kind} needs a pairs section", number)
            problem = SteinerForestProblem(graph, pairs) if kind == "steiner_forest" else MulticutProblem(graph, pairs)
        else:
            if terminals is None:
                raise InstanceParseError(f"{kind} needs a terminals section", number)
            if kind == "mincut":
                if root is None:
                    raise InstanceParseError("mincut needs a root", number)
                problem = MinCutProblem(graph, root, terminals)
            elif kind == "steiner_tree":
                if root is None:
                    raise InstanceParseError("rooted steiner_tree needs a root", number)
                problem = SteinerTreeProblem(graph, terminals, root)
            else:
                problem = SteinerTreeProblem(graph, terminals)
    except InstanceParseError:
        raise
    except ValueError as err:
        raise InstanceParseError(str(err), number) from None
    return _instance(problem, k, lam, number)


def _fmt(x) -> str:
    x = Fraction(x)
    return str(x.numerator) if x.denominator == 1 else f"{x.numerator}/{x.denominator}"


def format_instance(instance: RobustInstance) -> str:
    """Serialize an instance in original (unscaled) cost units."""
    p = instance.problem
    k, lam = instance.k, _fmt(instance.lam)
    if isinstance(p, SetSystem):
        out = [f"setcover {p.n} {p.m} {k} {lam}" + ("" if p.uniform else " nonuniform")]
        for j, s in enumerate(p.sets):
            costs = [p.unscale(p.first_cost[j])] + ([] if p.uniform else [p.unscale(p.second_cost[j])])
            out.append(" ".join([_fmt(c) for c in costs] + [str(e) for e in sorted(s)]))
        return "\n".join(out) + "\n"
    g = p.graph
    out = [f"graph {g.n} {g.m}"] + [f"{u} {v} {_fmt(p.unscale(c))}" for u, v, c in g.edges]
    label = getattr(p, "kind_label", p.kind)
    out += [f"problem {label}", f"k {k}", f"lambda {lam}"]
    if isinstance(p, (SteinerForestProblem, MulticutProblem)):
        out.append(f"pairs {len(p.pairs)}")
        out += [f"{s} {t}" for s, t in p.pairs]
    else:
        if isinstance(p, MinCutProblem) or p.rooted:
            out.append(f"root {p.root}")
        out.append("terminals " + " ".join(str(t) for t in p.terminals))
    return "\n".join(out) + "\n"


def write_instance(instance: RobustInstance, path) -> None:
    Path(path).write_text(format_instance(instance))
