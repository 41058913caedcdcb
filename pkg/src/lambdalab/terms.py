"""De Bruijn λ-terms under the natural size model.

A term is one of three immutable node kinds:

* ``Index(v)`` — a de Bruijn index v̲ (v ≥ 0), written ``v`` in text form;
* ``Abs(body)`` — an abstraction, written ``\\body``;
* ``App(left, right)`` — an application, written by juxtaposition.

Natural size: an index v̲ weighs v+1 (v successor atoms plus one zero atom),
abstractions and applications weigh 1 plus their children.  Every traversal in
this module is iterative — sampled terms reach tens of thousands of nodes and
must not depend on the interpreter's recursion limit.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache
from typing import Iterator, Optional, Union


class TermError(ValueError):
    """Malformed term input (syntax error, bad index, bad JSON shape)."""

    def __init__(self, message: str, offset: Optional[int] = None):
        self.offset = offset
        if offset is not None:
            message = f"{message} (at byte {offset})"
        super().__init__(message)


# Largest index value the parser accepts.  Indices are sizes in disguise
# (v̲ weighs v+1), so anything near this bound is unusable anyway; the cap
# keeps hostile inputs from allocating giant integers.
MAX_INDEX = 2**63 - 1


class Term:
    """Base class; concrete nodes are Index, Abs, App."""

    __slots__ = ("_hash",)

    def __eq__(self, other):
        if self is other:
            return True
        if not isinstance(other, Term):
            return NotImplemented
        # Iterative structural comparison (hash first as a cheap filter).
        stack = [(self, other)]
        while stack:
            a, b = stack.pop()
            if a is b:
                continue
            if a._hash != b._hash or type(a) is not type(b):
                return False
            if type(a) is Index:
                if a.value != b.value:
                    return False
            elif type(a) is Abs:
                stack.append((a.body, b.body))
            else:
                stack.append((a.left, b.left))
                stack.append((a.right, b.right))
        return True

    def __ne__(self, other):
        result = self.__eq__(other)
        return result if result is NotImplemented else not result

    def __hash__(self):
        return self._hash

    def __repr__(self):
        text = to_text(self)
        if len(text) > 60:
            text = text[:57] + "..."
        return f"Term({text!r})"


class Index(Term):
    __slots__ = ("value",)

    def __init__(self, value: int):
        if value < 0:
            raise TermError(f"negative de Bruijn index {value}")
        self.value = value
        self._hash = hash((0, value))


class Abs(Term):
    __slots__ = ("body",)

    def __init__(self, body: Term):
        self.body = body
        self._hash = hash((1, body._hash))


class App(Term):
    __slots__ = ("left", "right")

    def __init__(self, left: Term, right: Term):
        self.left = left
        self.right = right
        self._hash = hash((2, left._hash, right._hash))


@dataclass(frozen=True)
class TermMetrics:
    """Atom-level counts plus openness data for a single term.

    size = variables + abstractions + applications + successors, and every
    binary tree satisfies applications = variables − 1.
    """

    size: int
    variables: int
    abstractions: int
    applications: int
    successors: int
    redexes: int
    head_abstractions: int
    openness: int
    generalized_openness: int


# ---------------------------------------------------------------------------
# structural measurements


def size(t: Term) -> int:
    total = 0
    stack = [t]
    while stack:
        node = stack.pop()
        kind = type(node)
        if kind is Index:
            total += node.value + 1
        elif kind is Abs:
            total += 1
            stack.append(node.body)
        else:
            total += 1
            stack.append(node.left)
            stack.append(node.right)
    return total


def _postorder_openness(t: Term) -> dict:
    """Map id(node) → openness for every node (shared nodes computed once)."""
    result: dict = {}
    stack = [t]
    while stack:
        node = stack.pop()
        if id(node) in result:
            continue
        kind = type(node)
        if kind is Index:
            result[id(node)] = node.value + 1
        elif kind is Abs:
            got = result.get(id(node.body))
            if got is None:
                stack.append(node)
                stack.append(node.body)
            else:
                result[id(node)] = got - 1 if got > 0 else 0
        else:
            gl = result.get(id(node.left))
            gr = result.get(id(node.right))
            if gl is None or gr is None:
                stack.append(node)
                if gr is None:
                    stack.append(node.right)
                if gl is None:
                    stack.append(node.left)
            else:
                result[id(node)] = gl if gl >= gr else gr
    return result


def openness(t: Term) -> int:
    """Minimal m such that prepending m abstractions closes the term."""
    return _postorder_openness(t)[id(t)]


def head_abstractions(t: Term) -> int:
    count = 0
    while type(t) is Abs:
        count += 1
        t = t.body
    return count


def generalized_openness(t: Term) -> int:
    """Openness for open terms; −k for closed terms, where k is the number
    of leading head abstractions that can be dropped leaving a closed term.
    """
    h = 0
    body = t
    while type(body) is Abs:
        h += 1
        body = body.body
    body_open = openness(body)
    if body_open > h:
        return body_open - h  # == openness(t) > 0
    return -(h - body_open)


def metrics(t: Term) -> TermMetrics:
    variables = abstractions = applications = successors = redexes = 0
    stack = [t]
    while stack:
        node = stack.pop()
        kind = type(node)
        if kind is Index:
            variables += 1
            successors += node.value
        elif kind is Abs:
            abstractions += 1
            stack.append(node.body)
        else:
            applications += 1
            if type(node.left) is Abs:
                redexes += 1
            stack.append(node.left)
            stack.append(node.right)
    return TermMetrics(
        size=variables + abstractions + applications + successors,
        variables=variables,
        abstractions=abstractions,
        applications=applications,
        successors=successors,
        redexes=redexes,
        head_abstractions=head_abstractions(t),
        openness=openness(t),
        generalized_openness=generalized_openness(t),
    )


def max_index_value(t: Term) -> int:
    """Largest de Bruijn index value occurring in t (−1 if none)."""
    best = -1
    stack = [t]
    while stack:
        node = stack.pop()
        kind = type(node)
        if kind is Index:
            if node.value > best:
                best = node.value
        elif kind is Abs:
            stack.append(node.body)
        else:
            stack.append(node.left)
            stack.append(node.right)
    return best


# ---------------------------------------------------------------------------
# text format
#
# Grammar: a term is a sequence of atoms (application, left-associative);
# an atom is a decimal index, a parenthesized term, or ``\`` whose body
# extends as far right as the enclosing scope allows.  Whitespace separates
# adjacent indices and is otherwise ignored.


def to_text(t: Term) -> str:
    out = []
    # frames: ("t", node, tail) to render, or ("s", literal) to emit.
    stack = [("t", t, True)]
    prev_digit = False
    while stack:
        frame = stack.pop()
        if frame[0] == "s":
            out.append(frame[1])
            prev_digit = False
            continue
        _, node, tail = frame
        kind = type(node)
        if kind is Index:
            if prev_digit:
                out.append(" ")
            out.append(str(node.value))
            prev_digit = True
        elif kind is Abs:
            if tail:
                out.append("\\")
                prev_digit = False
                stack.append(("t", node.body, True))
            else:
                out.append("(\\")
                prev_digit = False
                stack.append(("s", ")"))
                stack.append(("t", node.body, True))
        else:
            # Right child: parenthesize applications always (left
            # associativity) and abstractions unless in tail position.
            right = node.right
            rkind = type(right)
            if rkind is App or (rkind is Abs and not tail):
                stack.append(("s", ")"))
                stack.append(("t", right, True))
                stack.append(("s", "("))
            else:
                stack.append(("t", right, tail))
            stack.append(("t", node.left, False))
    return "".join(out)


def parse(text: str) -> Term:
    """Parse the canonical text format; raises TermError with a byte offset."""
    n = len(text)
    pos = 0
    # Each frame is [kind, current_term_or_None] with kind "top"/"paren"/"lam".
    frames = [["top", None]]

    def attach(node: Term):
        top = frames[-1]
        top[1] = node if top[1] is None else App(top[1], node)

    def close_lambdas(end_offset: int):
        while frames[-1][0] == "lam":
            kind, cur = frames.pop()
            if cur is None:
                raise TermError("abstraction with empty body", end_offset)
            attach(Abs(cur))

    while pos < n:
        ch = text[pos]
        if ch in " \t\r\n" or ch == "̲":  # combining underline: n̲ == n
            pos += 1
        elif ch == "\\" or ch == "λ":
            frames.append(["lam", None])
            pos += 1
        elif ch == "(":
            frames.append(["paren", None])
            pos += 1
        elif ch == ")":
            close_lambdas(pos)
            if frames[-1][0] != "paren":
                raise TermError("unbalanced ')'", pos)
            _, cur = frames.pop()
            if cur is None:
                raise TermError("empty parentheses", pos)
            attach(cur)
            pos += 1
        elif ch.isdigit():
            start = pos
            while pos < n and text[pos].isdigit():
                pos += 1
            value = int(text[start:pos])
            if value > MAX_INDEX:
                raise TermError(f"index {value} exceeds maximum", start)
            attach(Index(value))
        else:
            raise TermError(f"unexpected character {ch!r}", pos)

    close_lambdas(n)
    if frames[-1][0] == "paren":
        raise TermError("unclosed '('", n)
    top = frames.pop()
    if top[1] is None:
        raise TermError("empty input", 0)
    return top[1]


# ---------------------------------------------------------------------------
# JSON encoding: {"idx": v} | {"abs": t} | {"app": [l, r]}


def to_json_obj(t: Term):
    """Nested dict form of a term.

    Depth warning: the stdlib json encoder recurses; prefer the text format
    for terms nested deeper than ~1000 levels.
    """
    memo: dict = {}
    stack = [t]
    while stack:
        node = stack.pop()
        if id(node) in memo:
            continue
        kind = type(node)
        if kind is Index:
            memo[id(node)] = {"idx": node.value}
        elif kind is Abs:
            body = memo.get(id(node.body))
            if body is None:
                stack.append(node)
                stack.append(node.body)
            else:
                memo[id(node)] = {"abs": body}
        else:
            left = memo.get(id(node.left))
            right = memo.get(id(node.right))
            if left is None or right is None:
                stack.append(node)
                if right is None:
                    stack.append(node.right)
                if left is None:
                    stack.append(node.left)
            else:
                memo[id(node)] = {"app": [left, right]}
    return memo[id(t)]


def from_json_obj(obj) -> Term:
    # Iterative decode: expand to a worklist, then build bottom-up.
    build: list = []  # postorder of ("idx", v) / ("abs",) / ("app",)
    expand = [obj]
    order = []
    while expand:
        node = expand.pop()
        order.append(node)
        if not isinstance(node, dict) or len(node) != 1:
            raise TermError(f"bad term object: {node!r}")
        key, val = next(iter(node.items()))
        if key == "idx":
            if not isinstance(val, int) or val < 0:
                raise TermError(f"bad index value: {val!r}")
            if val > MAX_INDEX:
                raise TermError(f"index {val} exceeds maximum")
        elif key == "abs":
            expand.append(val)
        elif key == "app":
            if not isinstance(val, list) or len(val) != 2:
                raise TermError("'app' expects a pair")
            expand.extend(val)
        else:
            raise TermError(f"unknown term key {key!r}")
    results: list = []
    for node in reversed(order):
        key, val = next(iter(node.items()))
        if key == "idx":
            results.append(Index(val))
        elif key == "abs":
            results.append(Abs(results.pop()))
        else:
            right = results.pop()
            left = results.pop()
            results.append(App(left, right))
    assert len(results) == 1
    return results[0]


# ---------------------------------------------------------------------------
# exhaustive enumeration (the brute-force oracle)

_UNBOUNDED = -1  # cache key stand-in for m = ∞


@lru_cache(maxsize=None)
def _enumerate_cached(n: int, m: int) -> tuple:
    """All m-open terms of size n (m = _UNBOUNDED for no bound), in order:
    index case first, then abstractions, then applications by left size.
    Subterms are shared across the cached lists.
    """
    if n < 1:
        return ()
    out = []
    value = n - 1
    if m == _UNBOUNDED or value < m:
        out.append(Index(value))
    inner = m if m == _UNBOUNDED else m + 1
    for body in _enumerate_cached(n - 1, inner):
        out.append(Abs(body))
    for left_size in range(1, n - 1):
        rights = _enumerate_cached(n - 1 - left_size, m)
        if not rights:
            continue
        for left in _enumerate_cached(left_size, m):
            for right in rights:
                out.append(App(left, right))
    return tuple(out)


def enumerate_terms(n: int, m: Optional[int] = None) -> Iterator[Term]:
    """Yield every m-open term of size exactly n (m=None: all plain terms)."""
    if n < 1:
        return iter(())
    key = _UNBOUNDED if m is None else m
    if key != _UNBOUNDED and key < 0:
        raise ValueError("openness bound must be non-negative")
    return iter(_enumerate_cached(n, key))


def count_terms(n: int, m: Optional[int] = None) -> int:
    key = _UNBOUNDED if m is None else m
    return len(_enumerate_cached(n, key)) if n >= 1 else 0
