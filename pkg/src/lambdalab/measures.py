"""Per-term combinatorial parameters.

Everything here is a pure function of a single term: traversal cost of the
leftmost-outermost redex search, normal-form predicates, free-variable and
binding statistics, and height profiles.  All traversals are iterative.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Dict, Optional

from .terms import (
    Abs,
    App,
    Index,
    Term,
    TermMetrics,
    _postorder_openness,
    metrics,
    size,
)

Histogram = Dict[int, int]


@dataclass(frozen=True)
class HeightProfiles:
    """Node counts per level, split by node kind.

    An index occurrence counts as one node (its topmost atom); successor
    atoms do not appear.  Unary level = number of λ ancestors; natural
    level = number of λ-or-@ ancestors.
    """

    unary: Dict[str, Histogram]
    natural: Dict[str, Histogram]


@dataclass(frozen=True)
class ParameterReport:
    metrics: TermMetrics
    lo_cost: int
    free_variable_occurrences: int
    open_subterm_fraction: Fraction
    binding_abstraction_fraction: Optional[Fraction]
    max_bound_per_abstraction: int
    index_value_histogram: Histogram
    unary_height_histograms: Dict[str, Histogram]
    natural_height_histograms: Dict[str, Histogram]


def is_normal_form(t: Term) -> bool:
    """True iff the term contains no redex (λP)Q."""
    stack = [t]
    while stack:
        node = stack.pop()
        kind = type(node)
        if kind is Abs:
            stack.append(node.body)
        elif kind is App:
            if type(node.left) is Abs:
                return False
            stack.append(node.left)
            stack.append(node.right)
    return True


def is_neutral(t: Term) -> bool:
    """Normal form whose root is not an abstraction."""
    return type(t) is not Abs and is_normal_form(t)


def lo_cost(t: Term) -> int:
    """Atoms visited while locating the leftmost-outermost redex.

    An index costs its topmost atom.  A redex at an application head
    terminates the search after two atoms.  An application P Q with P not
    an abstraction descends into P unless P is already normal, in which
    case P's atoms have all been scanned and the search resumes in Q.
    The search follows a single root-to-leaf path, so this is a loop.
    """
    total = 0
    while True:
        kind = type(t)
        if kind is Index:
            return total + 1
        if kind is Abs:
            total += 1
            t = t.body
        elif type(t.left) is Abs:
            return total + 2
        elif is_normal_form(t.left):
            total += 1 + size(t.left)
            t = t.right
        else:
            total += 1
            t = t.left


def free_variable_occurrences(t: Term) -> int:
    """Index occurrences whose value reaches past every enclosing λ."""
    count = 0
    stack = [(t, 0)]
    while stack:
        node, depth = stack.pop()
        kind = type(node)
        if kind is Index:
            if node.value >= depth:
                count += 1
        elif kind is Abs:
            stack.append((node.body, depth + 1))
        else:
            stack.append((node.left, depth))
            stack.append((node.right, depth))
    return count


def open_subterm_fraction(t: Term) -> Fraction:
    """Fraction of subterm occurrences that are open.

    Indices are atomic: the subterm count is variables + abstractions +
    applications, and each occurrence of a shared subtree counts separately.
    """
    open_of = _postorder_openness(t)
    total = open_count = 0
    stack = [t]
    while stack:
        node = stack.pop()
        total += 1
        if open_of[id(node)] > 0:
            open_count += 1
        kind = type(node)
        if kind is Abs:
            stack.append(node.body)
        elif kind is App:
            stack.append(node.left)
            stack.append(node.right)
    return Fraction(open_count, total)


def binding_stats(t: Term) -> tuple:
    """(binding_fraction, max_bound) over the term's abstractions.

    An abstraction binds an occurrence n̲ when the occurrence sits under
    exactly n further λ's inside its body.  The fraction is None for terms
    without abstractions; max_bound is then 0.
    """
    cells = []  # one bound-occurrence counter per abstraction occurrence
    # chain: linked list (counter_cell, parent) of enclosing abstractions,
    # innermost first
    stack = [(t, None)]
    while stack:
        node, chain = stack.pop()
        kind = type(node)
        if kind is Index:
            link = chain
            steps = node.value
            while steps and link is not None:
                link = link[1]
                steps -= 1
            if link is not None and steps == 0:
                link[0][0] += 1
        elif kind is Abs:
            cell = [0]
            cells.append(cell)
            stack.append((node.body, (cell, chain)))
        else:
            stack.append((node.left, chain))
            stack.append((node.right, chain))
    if not cells:
        return None, 0
    binding = sum(1 for cell in cells if cell[0] > 0)
    return Fraction(binding, len(cells)), max(cell[0] for cell in cells)


def height_profiles(t: Term) -> HeightProfiles:
    unary = {"variable": {}, "abstraction": {}, "application": {}}
    natural = {"variable": {}, "abstraction": {}, "application": {}}
    stack = [(t, 0, 0)]
    while stack:
        node, u_level, n_level = stack.pop()
        kind = type(node)
        if kind is Index:
            name = "variable"
        elif kind is Abs:
            name = "abstraction"
            stack.append((node.body, u_level + 1, n_level + 1))
        else:
            name = "application"
            stack.append((node.left, u_level, n_level + 1))
            stack.append((node.right, u_level, n_level + 1))
        bucket = unary[name]
        bucket[u_level] = bucket.get(u_level, 0) + 1
        bucket = natural[name]
        bucket[n_level] = bucket.get(n_level, 0) + 1
    return HeightProfiles(unary=unary, natural=natural)


def index_value_histogram(t: Term) -> Histogram:
    hist: Histogram = {}
    stack = [t]
    while stack:
        node = stack.pop()
        kind = type(node)
        if kind is Index:
            hist[node.value] = hist.get(node.value, 0) + 1
        elif kind is Abs:
            stack.append(node.body)
        else:
            stack.append(node.left)
            stack.append(node.right)
    return hist


def measure(t: Term) -> ParameterReport:
    m = metrics(t)
    fraction, max_bound = binding_stats(t)
    profiles = height_profiles(t)
    return ParameterReport(
        metrics=m,
        lo_cost=lo_cost(t),
        free_variable_occurrences=free_variable_occurrences(t),
        open_subterm_fraction=open_subterm_fraction(t),
        binding_abstraction_fraction=fraction,
        max_bound_per_abstraction=max_bound,
        index_value_histogram=index_value_histogram(t),
        unary_height_histograms=profiles.unary,
        natural_height_histograms=profiles.natural,
    )


def report_to_json_obj(report: ParameterReport) -> dict:
    """JSON-ready dict: fractions become floats, None stays null."""
    m = report.metrics
    frac = report.binding_abstraction_fraction
    return {
        "size": m.size,
        "variables": m.variables,
        "abstractions": m.abstractions,
        "applications": m.applications,
        "successors": m.successors,
        "redexes": m.redexes,
        "head_abstractions": m.head_abstractions,
        "openness": m.openness,
        "generalized_openness": m.generalized_openness,
        "lo_cost": report.lo_cost,
        "free_variable_occurrences": report.free_variable_occurrences,
        "open_subterm_fraction": float(report.open_subterm_fraction),
        "binding_abstraction_fraction": None if frac is None else float(frac),
        "max_bound_per_abstraction": report.max_bound_per_abstraction,
        "index_value_histogram": {str(k): v for k, v in sorted(report.index_value_histogram.items())},
        "unary_height_histograms": {
            kind: {str(k): v for k, v in sorted(hist.items())}
            for kind, hist in report.unary_height_histograms.items()
        },
        "natural_height_histograms": {
            kind: {str(k): v for k, v in sorted(hist.items())}
            for kind, hist in report.natural_height_histograms.items()
        },
    }
