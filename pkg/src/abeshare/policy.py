"""Access-control policies: parsing, the on-ledger satisfaction judge, and
conversion of monotone formulas to linear secret-sharing matrices.

Policies are space-delimited infix expressions over attribute words with
binary ``AND``/``OR`` gates and parentheses, e.g.::

    ( level25@AUTH1 OR cityLA@AUTH2 ) AND female@AUTH3

``judge_attrs`` reproduces the contract's two-stack scan exactly, so there
is **no operator precedence**: ``a AND b OR c`` evaluates left to right as
``(a AND b) OR c``.  Parenthesize to override.  Attribute words are opaque
and matched byte-exactly; nothing here interprets comparative spellings
like ``level>=25``.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Optional, Union

from abeshare.algebra import GROUP_ORDER

__all__ = [
    "PolicyError",
    "EmptyPolicyError",
    "ParenMismatchError",
    "MisplacedTokenError",
    "Leaf",
    "Gate",
    "PolicyAst",
    "parse_policy",
    "policy_leaves",
    "judge_attrs",
    "eval_ast",
    "LsssMatrix",
    "policy_to_lsss",
    "reconstruction_coeffs",
]

_RESERVED = {"AND", "OR", "(", ")"}


class PolicyError(ValueError):
    """Base class for policy parse errors."""


class EmptyPolicyError(PolicyError):
    pass


class ParenMismatchError(PolicyError):
    pass


class MisplacedTokenError(PolicyError):
    """Adjacent operators, adjacent words, or an operator missing an operand."""


@dataclass(frozen=True)
class Leaf:
    word: str


@dataclass(frozen=True)
class Gate:
    op: str  # "AND" | "OR"
    left: "PolicyAst"
    right: "PolicyAst"


PolicyAst = Union[Leaf, Gate]


def _tokenize(text: str) -> list[str]:
    if text.strip() == "":
        raise EmptyPolicyError("empty policy")
    tokens = text.split(" ")
    if any(t == "" for t in tokens):
        raise MisplacedTokenError("tokens must be separated by single spaces")
    return tokens


def parse_policy(text: str) -> PolicyAst:
    """Parse a policy string into a binary AST.

    Evaluation order of the AST matches the stack scan of ``judge_attrs``:
    all operators share one precedence level and associate to the left.
    """
    tokens = _tokenize(text)
    ops: list[str] = []
    out: list[PolicyAst] = []

    def reduce_once():
        if len(out) < 2 or not ops:
            raise MisplacedTokenError("operator is missing an operand")
        op = ops.pop()
        if op == "(":
            raise ParenMismatchError("unmatched '('")
        right = out.pop()
        left = out.pop()
        out.append(Gate(op, left, right))

    expect_term = True
    for tok in tokens:
        if tok == "(":
            if not expect_term:
                raise MisplacedTokenError("'(' after a complete term")
            ops.append(tok)
        elif tok == ")":
            if expect_term:
                raise MisplacedTokenError("')' where a term was expected")
            while ops and ops[-1] != "(":
                reduce_once()
            if not ops:
                raise ParenMismatchError("unmatched ')'")
            ops.pop()
        elif tok in ("AND", "OR"):
            if expect_term:
                raise MisplacedTokenError(f"operator {tok!r} where a term was expected")
            while ops and ops[-1] != "(":
                reduce_once()
            ops.append(tok)
            expect_term = True
        else:
            if not expect_term:
                raise MisplacedTokenError(f"word {tok!r} where an operator was expected")
            out.append(Leaf(tok))
            expect_term = False
    if expect_term:
        raise MisplacedTokenError("policy ends with an operator")
    while ops:
        if ops[-1] == "(":
            raise ParenMismatchError("unmatched '('")
        reduce_once()
    assert len(out) == 1
    return out[0]


def policy_leaves(ast: PolicyAst) -> list[str]:
    """Leaf words in left-to-right order (duplicates kept)."""
    if isinstance(ast, Leaf):
        return [ast.word]
    return policy_leaves(ast.left) + policy_leaves(ast.right)


def eval_ast(attrs: frozenset | set, ast: PolicyAst) -> bool:
    """Recursive truth evaluation; the independent oracle for judge_attrs."""
    if isinstance(ast, Leaf):
        return ast.word in attrs
    if ast.op == "AND":
        return eval_ast(attrs, ast.left) and eval_ast(attrs, ast.right)
    return eval_ast(attrs, ast.left) or eval_ast(attrs, ast.right)


def judge_attrs(
    attrs: set | frozenset,
    policy: str,
    trace: Optional[Callable[[str, object], None]] = None,
) -> bool:
    """Decide whether ``attrs`` satisfies ``policy`` with the contract's scan.

    The two stacks (pending operators, intermediate results) and the
    pop-two-push-one ``calc`` step mirror the on-chain evaluator, with the
    stacks local to the call.  On a ``)`` the scan pops and calcs until the
    matching ``(`` is removed.  ``trace`` (used by tests) observes every
    stack transition as ``(event, value)`` pairs.
    """
    parse_policy(policy)  # malformed input fails here, before any evaluation

    words = policy.split(" ")
    ops: list[str] = []
    result: list[bool] = []

    def note(event: str, value):
        if trace is not None:
            trace(event, value)

    def calc():
        if len(result) < 2:
            return
        op = ops.pop()
        note("pop_op", op)
        t1 = result.pop()
        t2 = result.pop()
        note("pop_val", t1)
        note("pop_val", t2)
        if op == "AND":
            result.append(t1 and t2)
            note("push_val", t1 and t2)
        elif op == "OR":
            result.append(t1 or t2)
            note("push_val", t1 or t2)

    for word in words:
        if word == "AND" or word == "OR":
            if ops and ops[-1] != "(":
                calc()
            ops.append(word)
            note("push_op", word)
        elif word == "(":
            ops.append(word)
            note("push_op", word)
        elif word == ")":
            while ops[-1] != "(":
                calc()
            ops.pop()
            note("pop_op", "(")
        else:
            val = word in attrs
            result.append(val)
            note("push_val", val)
    while ops:
        calc()
    return result[0]


# ---------------------------------------------------------------------------
# Linear secret sharing
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class LsssMatrix:
    """Share matrix over Z_r with one row per policy leaf.

    A set S of attribute words can reconstruct the secret iff the rows
    labelled by S span the target vector (1, 0, ..., 0).
    """

    rows: tuple[tuple[int, ...], ...]
    row_attr: tuple[str, ...]

    @property
    def width(self) -> int:
        return len(self.rows[0]) if self.rows else 0


def policy_to_lsss(ast: PolicyAst) -> LsssMatrix:
    """Monotone-formula labelling: the root starts at (1); an OR copies its
    label to both children; an AND gives one child label||1 and the other
    (0,...,0,-1), growing the width by one."""
    labels: list[tuple[list[int], str]] = []
    width = 1

    def walk(node: PolicyAst, label: list[int]):
        nonlocal width
        if isinstance(node, Leaf):
            labels.append((label, node.word))
            return
        if node.op == "OR":
            walk(node.left, list(label))
            walk(node.right, list(label))
            return
        # AND
        padded = label + [0] * (width - len(label))
        left = padded + [1]
        right = [0] * width + [-1]
        width += 1
        walk(node.left, left)
        walk(node.right, right)

    walk(ast, [1])
    rows = tuple(
        tuple((row + [0] * (width - len(row)))[i] % GROUP_ORDER for i in range(width))
        for row, _ in labels
    )
    return LsssMatrix(rows=rows, row_attr=tuple(attr for _, attr in labels))


def reconstruction_coeffs(matrix: LsssMatrix, attrs: set | frozenset) -> Optional[dict[int, int]]:
    """Coefficients {row_index: c} with sum(c * row) = (1, 0, ..., 0) over Z_r,
    using only rows whose attribute is in ``attrs``; None if no combination
    exists."""
    idx = [i for i, a in enumerate(matrix.row_attr) if a in attrs]
    if not idx:
        return None
    n = matrix.width
    # solve A^T x = e1 by Gaussian elimination over Z_r
    cols = len(idx)
    aug = [[matrix.rows[r][i] for r in idx] for i in range(n)]
    target = [1] + [0] * (n - 1)
    for i in range(n):
        aug[i].append(target[i])

    rank = 0
    pivots = []
    for col in range(cols):
        pivot = next((r for r in range(rank, n) if aug[r][col] != 0), None)
        if pivot is None:
            continue
        aug[rank], aug[pivot] = aug[pivot], aug[rank]
        inv = pow(aug[rank][col], -1, GROUP_ORDER)
        aug[rank] = [v * inv % GROUP_ORDER for v in aug[rank]]
        for r in range(n):
            if r != rank and aug[r][col] != 0:
                f = aug[r][col]
                aug[r] = [(v - f * w) % GROUP_ORDER for v, w in zip(aug[r], aug[rank])]
        pivots.append(col)
        rank += 1
    # consistency: rows below the rank must be all-zero
    for r in range(rank, n):
        if aug[r][cols] != 0:
            return None
    x = [0] * cols
    for row_i, col in enumerate(pivots):
        x[col] = aug[row_i][cols]
    return {idx[i]: x[i] for i in range(cols) if x[i] != 0}
