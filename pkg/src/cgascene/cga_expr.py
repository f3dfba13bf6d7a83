"""Parser/evaluator for the textual multivector expressions the LLM emits.

Grammar (documented in docs/cga-grammar.md and embedded in the prompts):

    expression := term { ("+" | "-") term }
    term       := unary { ("*" | "^" | "|") unary }
    unary      := "-" unary | atom
    atom       := number | blade | "(" expression ")"

* ``*`` is the geometric product, ``^`` the outer product, ``|`` the inner
  product (left contraction); the three share one precedence tier and are
  left-associative. Unary minus binds tighter than any product.
* Implicit multiplication is illegal: ``2e1`` is a syntax error, ``2*e1`` is
  required. Numbers are plain decimals (no exponent form) for the same reason.
* Blade symbols: canonical ascending-index blades e1 .. e12345 plus the null
  vectors ``einf`` and ``eo``.

Errors carry byte offsets into the UTF-8 source. Parenthesised groups shape
the tree but are not AST nodes, so printing an AST with minimal parentheses
and reparsing reproduces an equal AST.
"""
from __future__ import annotations

import math
import re
from dataclasses import dataclass

from .cga_core import BLADE_INDEX, BLADE_NAMES, EINF, EO, Multivector
from .errors import ExprSyntaxError, UnknownSymbol

MAX_SOURCE_BYTES = 64 * 1024
MAX_DEPTH = 200

_SYMBOLS = dict.fromkeys(BLADE_INDEX)
_SYMBOLS.update(dict.fromkeys(("einf", "eo")))

_TOKEN_RE = re.compile(r"[ \t\r\n]+|(?P<num>\d+(?:\.\d+)?)|(?P<sym>[A-Za-z_]\w*)|(?P<op>[-+*^|()])")

_ADD_OPS = frozenset("+-")
_MUL_OPS = frozenset("*^|")


# --- AST --------------------------------------------------------------------

@dataclass(frozen=True)
class Num:
    value: float


@dataclass(frozen=True)
class Blade:
    name: str


@dataclass(frozen=True)
class Neg:
    operand: "ExprAst"


@dataclass(frozen=True)
class BinOp:
    op: str  # one of + - * ^ |
    left: "ExprAst"
    right: "ExprAst"


ExprAst = Num | Blade | Neg | BinOp


# --- lexing -------------------------------------------------------------------

def _byte_offset(src: str, pos: int) -> int:
    return len(src[:pos].encode("utf-8"))


def _tokenize(src: str) -> list[tuple[str, object, int]]:
    """Yield (kind, value, char_pos) triples; kinds 'num', 'sym', 'op', 'end'."""
    tokens = []
    pos = 0
    n = len(src)
    while pos < n:
        m = _TOKEN_RE.match(src, pos)
        if m is None:
            raise ExprSyntaxError(
                f"unexpected character {src[pos]!r}", _byte_offset(src, pos),
                ("number", "blade", "operator", "'('"),
            )
        if (kind := m.lastgroup) is not None:
            text = m.group()
            if kind == "num":
                tokens.append(("num", float(text), pos))
            elif kind == "sym":
                if text not in _SYMBOLS:
                    raise UnknownSymbol(text, _byte_offset(src, pos))
                tokens.append(("sym", text, pos))
            else:
                tokens.append(("op", text, pos))
        pos = m.end()
    tokens.append(("end", "", n))
    return tokens


# --- parsing -------------------------------------------------------------------

class _Parser:
    def __init__(self, src: str):
        self.src = src
        self.tokens = _tokenize(src)
        self.i = 0

    def _peek(self):
        return self.tokens[self.i]

    def _fail(self, expected: tuple[str, ...]):
        kind, value, pos = self._peek()
        what = "end of input" if kind == "end" else repr(
            value if kind != "num" else self.src[pos:pos + 24].split()[0])
        raise ExprSyntaxError(
            f"unexpected {what}", _byte_offset(self.src, pos), expected)

    def parse(self) -> ExprAst:
        node = self._expression(0)
        if self._peek()[0] != "end":
            self._fail(("'+'", "'-'", "'*'", "'^'", "'|'", "end of input"))
        return node

    def _expression(self, depth: int) -> ExprAst:
        node = self._term(depth)
        while self._peek()[0] == "op" and self._peek()[1] in _ADD_OPS:
            op = self._peek()[1]
            self.i += 1
            node = BinOp(op, node, self._term(depth))
        return node

    def _term(self, depth: int) -> ExprAst:
        node = self._unary(depth)
        while self._peek()[0] == "op" and self._peek()[1] in _MUL_OPS:
            op = self._peek()[1]
            self.i += 1
            node = BinOp(op, node, self._unary(depth))
        return node

    def _unary(self, depth: int) -> ExprAst:
        flips = 0
        while self._peek()[0] == "op" and self._peek()[1] == "-":
            flips += 1
            self.i += 1
        node = self._atom(depth)
        for _ in range(flips):
            node = Neg(node)
        return node

    def _atom(self, depth: int) -> ExprAst:
        if depth >= MAX_DEPTH:
            raise ExprSyntaxError(
                "expression nested too deeply",
                _byte_offset(self.src, self._peek()[2]), ())
        kind, value, pos = self._peek()
        if kind == "num":
            self.i += 1
            return Num(float(value))
        if kind == "sym":
            self.i += 1
            return Blade(str(value))
        if kind == "op" and value == "(":
            self.i += 1
            node = self._expression(depth + 1)
            k2, v2, _ = self._peek()
            if k2 != "op" or v2 != ")":
                self._fail(("')'",))
            self.i += 1
            return node
        self._fail(("number", "blade", "'-'", "'('"))
        raise AssertionError("unreachable")


def parse(src: str) -> ExprAst:
    """Parse an expression into an AST, or raise ExprSyntaxError/UnknownSymbol."""
    if not isinstance(src, str):
        raise TypeError("expression source must be text")
    if not src:
        raise ExprSyntaxError("empty expression", 0, ("number", "blade", "'('"))
    if len(src) > MAX_SOURCE_BYTES or len(src.encode("utf-8")) > MAX_SOURCE_BYTES:
        raise ExprSyntaxError("input exceeds 64 KiB", MAX_SOURCE_BYTES, ())
    return _Parser(src).parse()


# --- evaluation ------------------------------------------------------------------

_BLADE_VALUES: dict[str, Multivector] = {
    name: Multivector.blade(idx) for name, idx in BLADE_INDEX.items()
}
_BLADE_VALUES["einf"] = EINF
_BLADE_VALUES["eo"] = EO


def evaluate(ast: ExprAst) -> Multivector:
    """Fold an AST into a Multivector through the kernel's products."""
    if isinstance(ast, Num):
        return Multivector.scalar(ast.value)
    if isinstance(ast, Blade):
        return _BLADE_VALUES[ast.name]
    if isinstance(ast, Neg):
        return -evaluate(ast.operand)
    if isinstance(ast, BinOp):
        left = evaluate(ast.left)
        right = evaluate(ast.right)
        if ast.op == "+":
            return left + right
        if ast.op == "-":
            return left - right
        if ast.op == "*":
            return left * right
        if ast.op == "^":
            return left ^ right
        if ast.op == "|":
            return left | right
    raise TypeError(f"not an AST node: {ast!r}")


def evaluate_text(src: str) -> Multivector:
    return evaluate(parse(src))


# --- printing --------------------------------------------------------------------

def format_number(value: float) -> str:
    """Grammar-safe decimal form (never exponent notation). Values whose repr
    needs an exponent get a full decimal expansion with 17 significant digits,
    which round-trips exactly."""
    if not math.isfinite(value):
        raise ValueError("cannot print non-finite number")
    s = repr(float(value))
    if "e" in s or "E" in s:
        decimals = max(1, 17 - math.floor(math.log10(abs(value))))
        s = format(value, f".{decimals}f").rstrip("0")
        if s.endswith("."):
            s += "0"
    return s


def _prec(node: ExprAst) -> int:
    if isinstance(node, BinOp):
        return 1 if node.op in _ADD_OPS else 2
    if isinstance(node, Neg):
        return 3
    return 4


def print_ast(node: ExprAst) -> str:
    """Minimal-parentheses rendering; reparsing yields an equal AST."""
    if isinstance(node, Num):
        return format_number(node.value)
    if isinstance(node, Blade):
        return node.name
    if isinstance(node, Neg):
        inner = print_ast(node.operand)
        if isinstance(node.operand, BinOp):
            inner = f"({inner})"
        return f"-{inner}"
    if isinstance(node, BinOp):
        p = _prec(node)
        left = print_ast(node.left)
        if _prec(node.left) < p:
            left = f"({left})"
        right = print_ast(node.right)
        if _prec(node.right) <= p and isinstance(node.right, BinOp):
            right = f"({right})"
        return f"{left} {node.op} {right}"
    raise TypeError(f"not an AST node: {node!r}")


def canonical_print(m: Multivector) -> str:
    """Parseable text form: coefficients against blades in index order.

    evaluate(parse(canonical_print(m))) reproduces m (exactly whenever every
    coefficient's repr is exponent-free, within 1e-12 otherwise).
    """
    parts: list[str] = []
    for i, c in enumerate(m.coeffs):
        if c == 0.0:
            continue
        mag = format_number(abs(c))
        term = mag if i == 0 else f"{mag}*{BLADE_NAMES[i]}"
        if not parts:
            parts.append(f"-{term}" if c < 0 else term)
        else:
            parts.append(f"- {term}" if c < 0 else f"+ {term}")
    return " ".join(parts) if parts else "0"
