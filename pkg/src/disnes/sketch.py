"""A tiny Rust-flavored program DSL with typed holes.

Programs are guarded-branch functions over 32-bit floats::

    fn name(x: f32) -> f32
    {
      if <expr> { return <expr>; }
      return <expr>;
    }

Expressions are binary-operator trees over input variables, decimal
literals and hole tokens.  Holes come in three kinds:

* ``[COND]`` -- a comparison operator, category set ``< <= > >= == !=``
* ``[OP]``   -- an arithmetic operator, category set ``+ - * /``
* ``[REAL]`` -- a real-valued constant

A hole may carry an explicit id (``[OP:op1]``); unnamed holes are
auto-numbered in source order (``cond0``, ``real1``, ...).  The category
sets are ordered as listed above and the index-to-operator mapping is part
of the file format.

Evaluation is IEEE 32-bit arithmetic with round-to-nearest-even, applied
elementwise, and is total: division by zero follows IEEE semantics and any
finite assignment yields an f32 result.
"""

from __future__ import annotations

import re
from dataclasses import dataclass

import numpy as np

from .distributions import CategoricalParams, GaussianParams, LOGITS, PROBS

COND = "COND"
OP = "OP"
REAL = "REAL"

COND_OPS = ("<", "<=", ">", ">=", "==", "!=")
OP_OPS = ("+", "-", "*", "/")


class SketchError(Exception):
    pass


class SketchSyntaxError(SketchError):
    def __init__(self, message, line, col):
        super().__init__(f"{message} at line {line}, column {col}")
        self.line = line
        self.col = col


# --- AST -------------------------------------------------------------------

@dataclass(frozen=True)
class Num:
    value: float  # the float64 image of an f32 constant


@dataclass(frozen=True)
class Var:
    name: str
    index: int


@dataclass(frozen=True)
class Hole:
    id: str
    kind: str
    named: bool = False

    @property
    def categories(self):
        if self.kind == COND:
            return COND_OPS
        if self.kind == OP:
            return OP_OPS
        raise ValueError(f"{self.kind} holes have no category set")


@dataclass(frozen=True)
class Neg:
    operand: object


@dataclass(frozen=True)
class BinOp:
    op: object  # operator symbol, or a COND/OP Hole
    left: object
    right: object


@dataclass(frozen=True)
class Program:
    name: str
    args: tuple
    branches: tuple  # of (condition expr, return expr)
    else_expr: object
    holes: tuple  # hole inventory in source order

    @property
    def arity(self):
        return len(self.args)

    def hole_ids(self):
        return [h.id for h in self.holes]


# --- Lexer -----------------------------------------------------------------

_TOKEN_RE = re.compile(
    r"""
    (?P<ws>\s+)
  | (?P<hole>\[(?:COND|OP|REAL)(?::[A-Za-z_][A-Za-z0-9_]*)?\])
  | (?P<num>\d+\.\d+|\d+\.|\.\d+|\d+)
  | (?P<ident>[A-Za-z_][A-Za-z0-9_]*)
  | (?P<sym>->|<=|>=|==|!=|[(){}<>,:;+\-*/])
    """,
    re.VERBOSE,
)


@dataclass(frozen=True)
class Token:
    kind: str
    text: str
    line: int
    col: int


def tokenize(text):
    tokens = []
    line, col = 1, 1
    pos = 0
    while pos < len(text):
        m = _TOKEN_RE.match(text, pos)
        if m is None:
            raise SketchSyntaxError(f"unexpected character {text[pos]!r}", line, col)
        kind = m.lastgroup
        tok = m.group()
        if kind != "ws":
            tokens.append(Token(kind, tok, line, col))
        newlines = tok.count("\n")
        if newlines:
            line += newlines
            col = len(tok) - tok.rfind("\n")
        else:
            col += len(tok)
        pos = m.end()
    tokens.append(Token("eof", "", line, col))
    return tokens


# --- Parser ----------------------------------------------------------------

def _f32_value(text):
    return float(np.float32(text))


class _Parser:
    """Recursive-descent parser.  Precedence, loosest first: comparison,
    additive (where operator holes also bind), multiplicative, unary."""

    def __init__(self, text):
        self.tokens = tokenize(text)
        self.pos = 0
        self.args = []
        self.holes = []
        self.hole_ids = set()

    def peek(self):
        return self.tokens[self.pos]

    def advance(self):
        tok = self.tokens[self.pos]
        self.pos += 1
        return tok

    def error(self, message, tok=None):
        tok = tok or self.peek()
        raise SketchSyntaxError(message, tok.line, tok.col)

    def expect(self, text):
        tok = self.peek()
        if tok.text != text:
            self.error(f"expected {text!r}, found {tok.text!r}")
        return self.advance()

    def expect_ident(self):
        tok = self.peek()
        if tok.kind != "ident":
            self.error(f"expected identifier, found {tok.text!r}")
        return self.advance()

    def make_hole(self, tok):
        body = tok.text[1:-1]
        if ":" in body:
            kind, hole_id = body.split(":", 1)
            named = True
            if hole_id in self.hole_ids:
                self.error(f"duplicate hole id {hole_id!r}", tok)
        else:
            kind = body
            hole_id = f"{kind.lower()}{len(self.holes)}"
            named = False
            if hole_id in self.hole_ids:
                self.error(f"duplicate hole id {hole_id!r}", tok)
        hole = Hole(hole_id, kind, named)
        self.holes.append(hole)
        self.hole_ids.add(hole_id)
        return hole

    def parse_program(self):
        self.expect("fn")
        name = self.expect_ident().text
        self.expect("(")
        while True:
            arg = self.expect_ident().text
            self.expect(":")
            self.expect("f32")
            self.args.append(arg)
            if self.peek().text == ",":
                self.advance()
                continue
            break
        self.expect(")")
        self.expect("->")
        self.expect("f32")
        self.expect("{")
        branches = []
        while self.peek().text == "if":
            self.advance()
            cond = self.comparison()
            self.expect("{")
            self.expect("return")
            expr = self.comparison()
            self.expect(";")
            self.expect("}")
            branches.append((cond, expr))
        self.expect("return")
        else_expr = self.comparison()
        self.expect(";")
        self.expect("}")
        if self.peek().kind != "eof":
            self.error(f"unexpected trailing input {self.peek().text!r}")
        return Program(name, tuple(self.args), tuple(branches), else_expr,
                       tuple(self.holes))

    def _operator_hole(self):
        """An operator-position hole of either discrete kind, or None."""
        tok = self.peek()
        if tok.kind == "hole" and not tok.text.startswith("[REAL"):
            return self.make_hole(self.advance())
        return None

    def comparison(self):
        left = self.additive()
        while True:
            tok = self.peek()
            if tok.text in COND_OPS:
                self.advance()
                left = BinOp(tok.text, left, self.additive())
            else:
                hole = None
                if tok.kind == "hole" and tok.text.startswith("[COND"):
                    hole = self.make_hole(self.advance())
                if hole is None:
                    return left
                left = BinOp(hole, left, self.additive())

    def additive(self):
        left = self.multiplicative()
        while True:
            tok = self.peek()
            if tok.text in ("+", "-"):
                self.advance()
                left = BinOp(tok.text, left, self.multiplicative())
            elif tok.kind == "hole" and tok.text.startswith("[OP"):
                hole = self.make_hole(self.advance())
                left = BinOp(hole, left, self.multiplicative())
            else:
                return left

    def multiplicative(self):
        left = self.unary()
        while self.peek().text in ("*", "/"):
            op = self.advance().text
            left = BinOp(op, left, self.unary())
        return left

    def unary(self):
        tok = self.peek()
        if tok.text == "-":
            self.advance()
            operand = self.unary()
            if isinstance(operand, Num):
                return Num(-operand.value)
            return Neg(operand)
        return self.primary()

    def primary(self):
        tok = self.peek()
        if tok.kind == "num":
            self.advance()
            return Num(_f32_value(tok.text))
        if tok.kind == "ident":
            self.advance()
            if tok.text not in self.args:
                self.error(f"unknown variable {tok.text!r}", tok)
            return Var(tok.text, self.args.index(tok.text))
        if tok.kind == "hole":
            if tok.text.startswith("[REAL"):
                return self.make_hole(self.advance())
            self.error(f"operator hole {tok.text} cannot stand as an operand", tok)
        if tok.text == "(":
            self.advance()
            expr = self.comparison()
            self.expect(")")
            return expr
        self.error(f"expected expression, found {tok.text!r}")


def parse(text):
    """Parse sketch source text into a :class:`Program`."""
    return _Parser(text).parse_program()


# --- Evaluation ------------------------------------------------------------

_APPLY = {
    "<": np.less, "<=": np.less_equal, ">": np.greater, ">=": np.greater_equal,
    "==": np.equal, "!=": np.not_equal,
    "+": np.add, "-": np.subtract, "*": np.multiply, "/": np.divide,
}


def _as_f32(value):
    """Comparison results feed back into arithmetic as 0.0 / 1.0."""
    if getattr(value, "dtype", None) == np.bool_:
        return value.astype(np.float32)
    return value


def eval_batch(program, hole_values, inputs):
    """Evaluate a population of assignments over all specification inputs.

    ``hole_values`` maps hole id to a length-``lam`` array (category index
    arrays for COND/OP holes, float arrays for REAL holes); ``inputs`` is
    an ``(n, arity)`` float32 array.  Returns a ``(lam, n)`` float32 array.
    """
    inputs = np.asarray(inputs, dtype=np.float32)
    lam = None
    for v in hole_values.values():
        lam = np.asarray(v).shape[0]
        break
    if lam is None:
        lam = 1

    def ev(node):
        if isinstance(node, Num):
            return np.float32(node.value)
        if isinstance(node, Var):
            return inputs[:, node.index]
        if isinstance(node, Neg):
            return np.negative(_as_f32(ev(node.operand)))
        if isinstance(node, Hole):
            values = np.asarray(hole_values[node.id], dtype=np.float32)
            return values[:, None]
        # BinOp
        left = ev(node.left)
        right = ev(node.right)
        if isinstance(node.op, Hole):
            idx = np.asarray(hole_values[node.op.id], dtype=np.int64)
            left = _as_f32(left)
            right = _as_f32(right)
            with np.errstate(divide="ignore", invalid="ignore"):
                choices = [_APPLY[sym](left, right) for sym in node.op.categories]
                choices = [np.broadcast_to(_coerce(c), (lam, inputs.shape[0]))
                           for c in choices]
            return np.choose(idx[:, None], choices)
        apply = _APPLY[node.op]
        if node.op in OP_OPS:
            left = _as_f32(left)
            right = _as_f32(right)
            with np.errstate(divide="ignore", invalid="ignore"):
                return apply(left, right)
        return apply(left, right)

    def _coerce(c):
        # bool comparisons selected by an OP-kind hole mix with arithmetic
        # candidates; keep everything f32 so np.choose sees one dtype
        return c.astype(np.float32) if getattr(c, "dtype", None) == np.bool_ \
            else np.asarray(c, dtype=np.float32)

    out = _as_f32(ev(program.else_expr))
    out = np.broadcast_to(np.asarray(out, dtype=np.float32),
                          (lam, inputs.shape[0]))
    for cond, expr in reversed(program.branches):
        c = ev(cond)
        if getattr(c, "dtype", None) != np.bool_:
            c = _as_f32(c) != np.float32(0.0)
        value = np.broadcast_to(np.asarray(_as_f32(ev(expr)), dtype=np.float32),
                                (lam, inputs.shape[0]))
        out = np.where(np.broadcast_to(c, (lam, inputs.shape[0])), value, out)
    return np.asarray(out, dtype=np.float32)


def eval_program(program, assignment, input_vector):
    """Evaluate one assignment on one input vector, in f32 semantics.

    ``assignment`` maps hole id to a category index (COND/OP) or real
    value (REAL).  Returns a ``numpy.float32``.
    """
    missing = [h.id for h in program.holes if h.id not in assignment]
    if missing:
        raise SketchError(f"assignment missing holes: {missing}")
    hole_values = {k: np.asarray([v]) for k, v in assignment.items()}
    inputs = np.asarray(input_vector, dtype=np.float32).reshape(1, -1)
    if inputs.shape[1] != program.arity:
        raise SketchError(
            f"input arity {inputs.shape[1]} != program arity {program.arity}")
    return eval_batch(program, hole_values, inputs)[0, 0]


# --- Specification and fitness ---------------------------------------------

@dataclass
class Specification:
    """Input/output pairs in 32-bit float semantics."""

    inputs: np.ndarray   # (n, arity) float32
    outputs: np.ndarray  # (n,) float32

    def __post_init__(self):
        self.inputs = np.atleast_2d(np.asarray(self.inputs, dtype=np.float32))
        self.outputs = np.asarray(self.outputs, dtype=np.float32).reshape(-1)
        if self.inputs.shape[0] == 0:
            raise ValueError("specification must be non-empty")
        if self.inputs.shape[0] != self.outputs.shape[0]:
            raise ValueError("inputs and outputs must have equal length")

    def __len__(self):
        return self.outputs.shape[0]


class SpecFitness:
    """Fitness = negated mean squared error against a specification.

    Callable on a single assignment (tuple of per-hole values in hole
    inventory order, or a dict keyed by hole id); also exposes the batched
    ``population`` path consumed by the estimators.  Squared errors are
    accumulated in 64-bit.
    """

    def __init__(self, program, spec):
        if spec.inputs.shape[1] != program.arity:
            raise SketchError(
                f"specification arity {spec.inputs.shape[1]} != "
                f"program arity {program.arity}")
        self.program = program
        self.spec = spec
        self.hole_ids = program.hole_ids()

    def _hole_values(self, draws):
        return {hid: np.asarray(d) for hid, d in zip(self.hole_ids, draws)}

    def population(self, draws):
        """Fitness of ``lam`` members given per-hole draw arrays."""
        out = eval_batch(self.program, self._hole_values(draws), self.spec.inputs)
        err = out.astype(np.float64) - self.spec.outputs.astype(np.float64)
        return -(err * err).mean(axis=1)

    def __call__(self, assignment):
        if isinstance(assignment, dict):
            draws = [np.asarray([assignment[hid]]) for hid in self.hole_ids]
        else:
            draws = [np.asarray([v]) for v in assignment]
        return float(self.population(draws)[0])

    def mse(self, assignment):
        return -self(assignment)

    def predicted_outputs(self, assignment):
        """f32 outputs of the assigned program on the specification inputs."""
        if not isinstance(assignment, dict):
            assignment = dict(zip(self.hole_ids, assignment))
        draws = [np.asarray([assignment[hid]]) for hid in self.hole_ids]
        return eval_batch(self.program, self._hole_values(draws),
                          self.spec.inputs)[0]


def fitness_from_spec(program, spec):
    return SpecFitness(program, spec)


# --- Rendering -------------------------------------------------------------

def format_f32(value):
    """Shortest decimal that round-trips to the same f32."""
    return np.format_float_positional(np.float32(value), unique=True, trim="0")


_PRECEDENCE = {"cmp": 0, "add": 1, "mul": 2}


def _op_level(op):
    if isinstance(op, Hole):
        return "cmp" if op.kind == COND else "add"
    if op in COND_OPS:
        return "cmp"
    if op in ("+", "-"):
        return "add"
    return "mul"


def _render_expr(node, assignment, parent_prec=0):
    if isinstance(node, Num):
        text = format_f32(node.value)
        return text
    if isinstance(node, Var):
        return node.name
    if isinstance(node, Neg):
        return "-" + _render_expr(node.operand, assignment, 3)
    if isinstance(node, Hole):
        if assignment is not None:
            return format_f32(assignment[node.id])
        return f"[{node.kind}:{node.id}]" if node.named else f"[{node.kind}]"
    op = node.op
    if isinstance(op, Hole):
        if assignment is not None:
            op_text = op.categories[int(assignment[op.id])]
        else:
            op_text = f"[{op.kind}:{op.id}]" if op.named else f"[{op.kind}]"
        level = _PRECEDENCE[_op_level(op)]
    else:
        op_text = op
        level = _PRECEDENCE[_op_level(op)]
    left = _render_expr(node.left, assignment, level)
    right = _render_expr(node.right, assignment, level + 1)
    text = f"{left} {op_text} {right}"
    if level < parent_prec:
        return f"({text})"
    return text


def render(program, assignment=None):
    """Render a program back to sketch source.

    Without an assignment, hole tokens are emitted verbatim; with one,
    concrete operators and shortest-round-trip f32 literals are emitted.
    """
    if assignment is not None:
        missing = [h.id for h in program.holes if h.id not in assignment]
        if missing:
            raise SketchError(f"assignment missing holes: {missing}")
    args = ", ".join(f"{a}: f32" for a in program.args)
    lines = [f"fn {program.name}({args}) -> f32", "{"]
    for cond, expr in program.branches:
        lines.append(f"  if {_render_expr(cond, assignment)}")
        lines.append("  {")
        lines.append(f"    return {_render_expr(expr, assignment)};")
        lines.append("  }")
        lines.append("")
    lines.append(f"  return {_render_expr(program.else_expr, assignment)};")
    lines.append("}")
    return "\n".join(lines) + "\n"


# --- Hole inventory to search distributions --------------------------------

def holes_to_distributions(program, categorical_mode=LOGITS):
    """One search distribution per hole, in inventory order.

    COND holes get a 6-way categorical, OP holes a 4-way categorical and
    REAL holes a standard Gaussian; categoricals start uniform and
    Gaussians at (mu=0, log_sigma=0).
    """
    params = []
    for hole in program.holes:
        if hole.kind == REAL:
            params.append(GaussianParams(0.0, 0.0))
        else:
            k = len(hole.categories)
            if categorical_mode == LOGITS:
                params.append(CategoricalParams(np.zeros(k), mode=LOGITS))
            else:
                params.append(CategoricalParams(np.full(k, 1.0 / k), mode=PROBS))
    return params


@dataclass
class SketchProblem:
    """A sketch plus the specification it must match."""

    program: Program
    spec: Specification

    def __post_init__(self):
        self.fitness = SpecFitness(self.program, self.spec)

    def params(self, categorical_mode=LOGITS):
        return holes_to_distributions(self.program, categorical_mode)

    def hole_ids(self):
        return self.program.hole_ids()

    def holes(self):
        return self.program.holes
