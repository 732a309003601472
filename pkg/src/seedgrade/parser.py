"""Tokenizer and recursive-descent parser for the supported LaTeX subset.

The grammar is a closed whitelist (see docs/grammar.md); unknown commands
raise UnknownCommand instead of silently becoming symbols.
"""

from __future__ import annotations

import re
from fractions import Fraction

from .errors import ParseError, TypeMismatch, UnknownCommand
from .nodes import (
    AnswerType,
    Kind,
    MathNode,
    TypedAnswer,
    const,
    func,
    mul,
    neg,
    num,
    pow_,
    relation,
    sym,
)
from .preprocess import CleanLatex

GREEK_NAMES = {
    "alpha", "beta", "gamma", "delta", "epsilon", "varepsilon", "zeta",
    "eta", "theta", "vartheta", "iota", "kappa", "lambda", "mu", "nu",
    "xi", "rho", "varrho", "sigma", "varsigma", "tau", "upsilon", "phi",
    "varphi", "chi", "psi", "omega",
    "Gamma", "Delta", "Theta", "Lambda", "Xi", "Pi", "Sigma", "Upsilon",
    "Phi", "Psi", "Omega",
}

SYMBOL_COMMANDS = GREEK_NAMES | {"hbar", "ell", "infty", "partial", "nabla"}

FUNCTION_COMMANDS = {
    "sin", "cos", "tan", "exp", "log", "ln",
    "sinh", "cosh", "tanh", "arctan", "arcsin", "arccos",
}

MATRIX_ENVS = {"pmatrix", "bmatrix", "vmatrix", "Vmatrix", "matrix"}

_OPERAND_ENDERS = {"num", "sym", "const", "rparen", "rbrack", "rbrace", "bang", "prime"}
_OPERAND_STARTERS = {"num", "sym", "const", "lparen", "frac", "sqrt", "func", "begin"}

_NUM_RE = re.compile(r"\d+(?:\.\d+)?")


class Token:
    __slots__ = ("kind", "value", "pos")

    def __init__(self, kind: str, value=None, pos: int = -1):
        self.kind = kind
        self.value = value
        self.pos = pos

    def __repr__(self):
        return f"Token({self.kind}{'' if self.value is None else ':' + str(self.value)})"


def _command_token(name: str, pos: int) -> Token:
    if name == "pi":
        return Token("const", "pi", pos)
    if name in SYMBOL_COMMANDS:
        return Token("sym", name, pos)
    if name in FUNCTION_COMMANDS:
        return Token("func", name, pos)
    if name == "frac":
        return Token("frac", None, pos)
    if name == "sqrt":
        return Token("sqrt", None, pos)
    if name in ("cdot", "times"):
        return Token("star", None, pos)
    if name == "div":
        return Token("slash", None, pos)
    if name == "le":
        return Token("relop", "<=", pos)
    if name == "ge":
        return Token("relop", ">=", pos)
    raise UnknownCommand("\\" + name, pos)


def tokenize(src) -> list:
    """Longest-match tokenization of a clean LaTeX string.

    Adjacency that implies multiplication is made explicit with an `imul`
    token so the parser never guesses.
    """
    text = src.text if isinstance(src, CleanLatex) else src
    raw: list = []
    i = 0
    n = len(text)
    while i < n:
        ch = text[i]
        if ch == " ":
            i += 1
            continue
        if ch == "\\":
            if i + 1 < n and text[i + 1] == "\\":
                raw.append(Token("rowsep", None, i))
                i += 2
                continue
            j = i + 1
            while j < n and text[j].isalpha():
                j += 1
            if j == i + 1:
                raise UnknownCommand(text[i : i + 2], i)
            name = text[i + 1 : j]
            if name in ("begin", "end"):
                m = re.match(r"\s*\{([a-zA-Z*]+)\}", text[j:])
                if not m:
                    raise UnknownCommand("\\" + name, i)
                raw.append(Token(name, m.group(1), i))
                i = j + m.end()
                continue
            raw.append(_command_token(name, i))
            i = j
            continue
        if ch.isdigit():
            m = _NUM_RE.match(text, i)
            raw.append(Token("num", Fraction(m.group(0)), i))
            i = m.end()
            continue
        if ch.isalpha():
            if ch == "e":
                raw.append(Token("const", "e", i))
            elif ch == "i":
                raw.append(Token("const", "i", i))
            else:
                raw.append(Token("sym", ch, i))
            i += 1
            continue
        simple = {
            "+": "plus", "-": "minus", "*": "star", "/": "slash",
            "^": "caret", "_": "under", "!": "bang", "'": "prime",
            "(": "lparen", ")": "rparen", "[": "lbrack", "]": "rbrack",
            "{": "lbrace", "}": "rbrace", ",": "comma", "&": "amp",
            "=": "relop", "<": "relop", ">": "relop",
        }
        if ch in simple:
            kind = simple[ch]
            value = ch if kind == "relop" else None
            raw.append(Token(kind, value, i))
            i += 1
            continue
        raise UnknownCommand(ch, i)

    glued = _glue_subscripts(raw)
    return _insert_implicit_mul(glued)


def _glue_subscripts(tokens: list) -> list:
    """Fold `_` subscripts (and \\Delta-prefixed symbols) into atomic names."""
    out: list = []
    i = 0
    n = len(tokens)
    while i < n:
        t = tokens[i]
        if t.kind in ("sym", "const") and i + 1 < n and tokens[i + 1].kind == "under":
            base = str(t.value)
            j = i + 2
            if j < n and tokens[j].kind in ("sym", "const", "num"):
                out.append(Token("sym", f"{base}_{tokens[j].value}", t.pos))
                i = j + 1
                continue
            if j < n and tokens[j].kind == "lbrace":
                depth = 0
                parts = []
                k = j
                while k < n:
                    tk = tokens[k]
                    if tk.kind == "lbrace":
                        depth += 1
                    elif tk.kind == "rbrace":
                        depth -= 1
                        if depth == 0:
                            break
                    elif tk.value is not None:
                        parts.append(str(tk.value))
                    elif tk.kind == "minus":
                        parts.append("-")
                    elif tk.kind == "plus":
                        parts.append("+")
                    k += 1
                if k == n:
                    raise ParseError(t.pos, "closing brace of subscript")
                out.append(Token("sym", f"{base}_{''.join(parts)}", t.pos))
                i = k + 1
                continue
            raise ParseError(t.pos, "subscript after '_'")
        if (
            t.kind == "sym"
            and t.value == "Delta"
            and i + 1 < n
            and tokens[i + 1].kind in ("sym", "const")
            and "_" not in str(tokens[i + 1].value)
        ):
            # a difference quantity like \Delta E is one physical symbol
            out.append(Token("sym", f"Delta_{tokens[i + 1].value}", t.pos))
            i += 2
            continue
        out.append(t)
        i += 1
    return out


def _insert_implicit_mul(tokens: list) -> list:
    out: list = []
    for t in tokens:
        if out and out[-1].kind in _OPERAND_ENDERS and t.kind in _OPERAND_STARTERS:
            out.append(Token("imul", None, t.pos))
        out.append(t)
    return out


_DIFFERENTIAL = sym("d")


class _Parser:
    def __init__(self, tokens: list):
        self.tokens = tokens
        self.pos = 0

    def peek(self) -> Token | None:
        return self.tokens[self.pos] if self.pos < len(self.tokens) else None

    def next(self) -> Token | None:
        t = self.peek()
        if t is not None:
            self.pos += 1
        return t

    def expect(self, kind: str) -> Token:
        t = self.peek()
        if t is None or t.kind != kind:
            raise ParseError(self.pos, kind)
        self.pos += 1
        return t

    # relation := additive (relop additive)?
    def relation(self) -> MathNode:
        lhs = self.additive()
        t = self.peek()
        if t is not None and t.kind == "relop":
            self.next()
            rhs = self.additive()
            t2 = self.peek()
            if t2 is not None and t2.kind == "relop":
                raise ParseError(self.pos, "at most one relation operator")
            return relation(t.value, lhs, rhs)
        return lhs

    def additive(self) -> MathNode:
        terms = [self.multive()]
        while True:
            t = self.peek()
            if t is None or t.kind not in ("plus", "minus"):
                break
            self.next()
            term = self.multive()
            terms.append(neg(term) if t.kind == "minus" else term)
        if len(terms) == 1:
            return terms[0]
        return MathNode(Kind.ADD, None, tuple(terms))

    def multive(self) -> MathNode:
        factors = [self.unary()]
        while True:
            t = self.peek()
            if t is None or t.kind not in ("star", "slash", "imul"):
                break
            self.next()
            f = self.unary()
            if t.kind == "slash":
                f = pow_(f, num(-1))
            factors.append(f)
        if len(factors) == 1:
            return factors[0]
        return MathNode(Kind.MUL, None, tuple(factors))

    def unary(self) -> MathNode:
        t = self.peek()
        if t is not None and t.kind == "minus":
            self.next()
            return neg(self.unary())
        if t is not None and t.kind == "plus":
            self.next()
            return self.unary()
        return self.power()

    def power(self) -> MathNode:
        base = self.postfix()
        t = self.peek()
        if t is not None and t.kind == "caret":
            self.next()
            return pow_(base, self.exponent())
        return base

    def exponent(self) -> MathNode:
        """Exponent operand: brace group, signed atom, or parenthesized expr."""
        t = self.peek()
        if t is None:
            raise ParseError(self.pos, "exponent")
        if t.kind == "lbrace":
            self.next()
            e = self.additive()
            self.expect("rbrace")
        elif t.kind == "minus":
            self.next()
            e = neg(self.exponent())
            return e
        elif t.kind in ("num", "sym", "const"):
            self.next()
            e = _leaf(t)
        elif t.kind == "lparen":
            self.next()
            e = self.additive()
            self.expect("rparen")
        else:
            raise ParseError(self.pos, "exponent")
        t = self.peek()
        if t is not None and t.kind == "caret":
            self.next()
            e = pow_(e, self.exponent())
        return e

    def postfix(self) -> MathNode:
        node = self.atom()
        while True:
            t = self.peek()
            if t is not None and t.kind == "bang":
                self.next()
                node = func("factorial", node)
            elif t is not None and t.kind == "prime":
                self.next()
                node = func("prime", node)
            else:
                return node

    def brace_group(self) -> MathNode:
        self.expect("lbrace")
        node = self.additive()
        self.expect("rbrace")
        return node

    def atom(self) -> MathNode:
        t = self.peek()
        if t is None:
            raise ParseError(self.pos, "operand")
        if t.kind in ("num", "sym", "const"):
            self.next()
            return _leaf(t)
        if t.kind == "lparen":
            self.next()
            node = self.additive()
            self.expect("rparen")
            return node
        if t.kind == "lbrack":
            self.next()
            node = self.additive()
            self.expect("rbrack")
            return node
        if t.kind == "lbrace":
            return self.brace_group()
        if t.kind == "frac":
            self.next()
            return self.frac_tail()
        if t.kind == "sqrt":
            self.next()
            index = None
            t2 = self.peek()
            if t2 is not None and t2.kind == "lbrack":
                self.next()
                index = self.additive()
                self.expect("rbrack")
            arg = self.brace_group()
            if index is None:
                return pow_(arg, num(Fraction(1, 2)))
            if index.kind is Kind.NUMBER and index.payload != 0:
                return pow_(arg, num(Fraction(1, 1) / index.payload))
            return pow_(arg, pow_(index, num(-1)))
        if t.kind == "func":
            self.next()
            return self.function_tail(t.value)
        if t.kind == "begin":
            self.next()
            return self.matrix_tail(t.value)
        raise ParseError(self.pos, "operand")

    def frac_tail(self) -> MathNode:
        a = self.brace_group()
        b = self.brace_group()
        deriv = self._derivative_pattern(a, b)
        if deriv is not None:
            expr, var = deriv
            if expr is None:
                t = self.peek()
                if t is not None and t.kind == "imul":
                    self.next()
                expr = self.unary()
            return MathNode(Kind.DERIVATIVE, None, (expr, sym(var)))
        return mul(a, pow_(b, num(-1)))

    @staticmethod
    def _derivative_pattern(a: MathNode, b: MathNode):
        """Recognize \\frac{d}{dx} and \\frac{df}{dx} forms."""
        def d_times(node):
            if (
                node.kind is Kind.MUL
                and len(node.children) == 2
                and node.children[0] == _DIFFERENTIAL
            ):
                return node.children[1]
            return None

        den = d_times(b)
        if den is None or den.kind is not Kind.SYMBOL:
            return None
        if a == _DIFFERENTIAL:
            return (None, den.payload)
        numr = d_times(a)
        if numr is not None:
            return (numr, den.payload)
        return None

    def function_tail(self, name: str) -> MathNode:
        exp = None
        t = self.peek()
        if t is not None and t.kind == "caret":
            self.next()
            exp = self.exponent()
        t = self.peek()
        if t is not None and t.kind == "imul":
            # adjacency after \sin^2 etc. is application, not multiplication
            self.next()
            t = self.peek()
        if t is not None and t.kind == "lparen":
            self.next()
            arg = self.additive()
            self.expect("rparen")
        elif t is not None and t.kind == "lbrace":
            arg = self.brace_group()
        else:
            arg = self.power()
        node = func(name, arg)
        if exp is not None:
            node = pow_(node, exp)
        return node

    def matrix_tail(self, env: str) -> MathNode:
        if env not in MATRIX_ENVS:
            raise ParseError(self.pos, f"supported matrix environment, got {env}")
        rows = [[]]
        while True:
            rows[-1].append(self.additive())
            t = self.peek()
            if t is None:
                raise ParseError(self.pos, f"\\end{{{env}}}")
            if t.kind == "amp":
                self.next()
                continue
            if t.kind == "rowsep":
                self.next()
                rows.append([])
                continue
            if t.kind == "end":
                if t.value != env:
                    raise ParseError(self.pos, f"\\end{{{env}}}")
                self.next()
                break
            raise ParseError(self.pos, "'&', row separator, or \\end")
        if rows and not rows[-1]:
            rows.pop()
        if not rows:
            raise ParseError(self.pos, "nonempty matrix")
        ncols = len(rows[0])
        if any(len(r) != ncols for r in rows):
            raise ParseError(self.pos, "rectangular matrix")
        cells = tuple(cell for row in rows for cell in row)
        return MathNode(Kind.MATRIX, (len(rows), ncols), cells)


def _leaf(t: Token) -> MathNode:
    if t.kind == "num":
        return num(t.value)
    if t.kind == "const":
        return const(t.value)
    return sym(t.value)


def parse_expression(tokens) -> MathNode:
    """Parse a full token sequence (or string/CleanLatex) to one tree."""
    if not isinstance(tokens, list):
        tokens = tokenize(tokens)
    p = _Parser(tokens)
    node = p.relation()
    if p.peek() is not None:
        raise ParseError(p.pos, "end of input")
    return node


def _split_top_level(text: str) -> list:
    """Split on commas at bracket depth zero."""
    parts = []
    depth = 0
    cur = []
    for ch in text:
        if ch in "([{":
            depth += 1
        elif ch in ")]}":
            depth -= 1
        if ch == "," and depth == 0:
            parts.append("".join(cur))
            cur = []
        else:
            cur.append(ch)
    parts.append("".join(cur))
    return parts


def _strip_outer(text: str) -> str:
    text = text.strip()
    while len(text) >= 2 and text[0] in "({" and text[-1] in ")}":
        depth = 0
        wraps = True
        for i, ch in enumerate(text):
            if ch in "([{":
                depth += 1
            elif ch in ")]}":
                depth -= 1
                if depth == 0 and i != len(text) - 1:
                    wraps = False
                    break
        if not wraps:
            break
        text = text[1:-1].strip()
    return text


def parse_answer(src: CleanLatex, declared: AnswerType) -> TypedAnswer:
    """Parse a clean answer string under the dataset-declared type."""
    text = src.text if isinstance(src, CleanLatex) else str(src)
    text = text.strip()
    if not text:
        raise TypeMismatch("empty answer text")

    if declared is AnswerType.EXPRESSION:
        node = parse_expression(CleanLatex(text))
        if node.kind is Kind.RELATION:
            if node.payload == "=":
                # answers often restate the symbol being solved for
                node = node.children[1]
            else:
                raise TypeMismatch("inequality given for expression answer")
        return TypedAnswer(AnswerType.EXPRESSION, (node,))

    if declared is AnswerType.EQUATION:
        node = parse_expression(CleanLatex(text))
        if node.kind is not Kind.RELATION:
            raise TypeMismatch("equation answer contains no relation operator")
        return TypedAnswer(AnswerType.EQUATION, (node,))

    if declared is AnswerType.TUPLE:
        inner = _strip_outer(text)
        parts = [p.strip() for p in _split_top_level(inner)]
        if len(parts) < 2 or any(not p for p in parts):
            raise TypeMismatch("tuple answer has no top-level comma")
        trees = []
        for p in parts:
            node = parse_expression(CleanLatex(p))
            if node.kind is Kind.RELATION and node.payload == "=":
                node = node.children[1]
            trees.append(node)
        return TypedAnswer(AnswerType.TUPLE, tuple(trees))

    if declared is AnswerType.INTERVAL:
        t = text
        eq = _find_top_level_eq(t)
        if eq is not None:
            t = t[eq + 1 :].strip()
        if len(t) < 2 or t[0] not in "([" or t[-1] not in ")]":
            raise TypeMismatch("interval answer lacks interval delimiters")
        lower_open = t[0] == "("
        upper_open = t[-1] == ")"
        parts = _split_top_level(t[1:-1])
        if len(parts) != 2:
            raise TypeMismatch("interval answer needs exactly two endpoints")
        lo = parse_expression(CleanLatex(parts[0].strip()))
        hi = parse_expression(CleanLatex(parts[1].strip()))
        node = MathNode(Kind.INTERVAL, (lower_open, upper_open), (lo, hi))
        return TypedAnswer(AnswerType.INTERVAL, (node,))

    if declared is AnswerType.NUMERIC:
        from .units import parse_quantity

        t = text
        eq = _find_top_level_eq(t)
        if eq is not None:
            t = t[eq + 1 :].strip()
        quantity = parse_quantity(t)
        node = MathNode(Kind.UNIT, (float(quantity.magnitude), quantity.dimension))
        return TypedAnswer(AnswerType.NUMERIC, (node,), quantity=quantity)

    raise AssertionError(declared)


def _find_top_level_eq(text: str):
    depth = 0
    last = None
    for i, ch in enumerate(text):
        if ch in "([{":
            depth += 1
        elif ch in ")]}":
            depth -= 1
        elif ch == "=" and depth == 0:
            last = i
    return last


# -- serialization -----------------------------------------------------------

_FUNC_LATEX = {name: "\\" + name for name in FUNCTION_COMMANDS}


def _sym_latex(name: str) -> str:
    base, _, sub = name.partition("_")
    if base in SYMBOL_COMMANDS:
        base = "\\" + base + " "
    if sub:
        return f"{base.rstrip()}_{{{sub}}}"
    return base


def _needs_parens_in_mul(node: MathNode) -> bool:
    return node.kind in (Kind.ADD, Kind.RELATION) or (
        node.kind is Kind.NUMBER and node.payload < 0
    )


def serialize(node: MathNode) -> str:
    """Render a tree back to parseable LaTeX."""
    k = node.kind
    if k is Kind.NUMBER:
        v = node.payload
        if v.denominator == 1:
            return str(v.numerator)
        s = f"\\frac{{{abs(v.numerator)}}}{{{v.denominator}}}"
        return "-" + s if v < 0 else s
    if k is Kind.SYMBOL:
        return _sym_latex(node.payload)
    if k is Kind.CONSTANT:
        return "\\pi" if node.payload == "pi" else node.payload
    if k is Kind.ADD:
        out = serialize(node.children[0])
        for c in node.children[1:]:
            s = serialize(c)
            if s.startswith("-"):
                out += " - " + s[1:]
            else:
                out += " + " + s
        return out
    if k is Kind.MUL:
        parts = []
        for c in node.children:
            s = serialize(c)
            if _needs_parens_in_mul(c):
                s = "(" + s + ")"
            parts.append(s)
        return " \\cdot ".join(parts)
    if k is Kind.POW:
        base, exp = node.children
        bs = serialize(base)
        if base.kind not in (Kind.SYMBOL, Kind.CONSTANT, Kind.FUNCTION) and not (
            base.kind is Kind.NUMBER
            and base.payload >= 0
            and base.payload.denominator == 1
        ):
            bs = "(" + bs + ")"
        return f"{bs}^{{{serialize(exp)}}}"
    if k is Kind.FUNCTION:
        if node.payload == "factorial":
            return "(" + serialize(node.children[0]) + ")!"
        if node.payload == "prime":
            return "(" + serialize(node.children[0]) + ")'"
        return _FUNC_LATEX.get(node.payload, "\\" + node.payload) + "(" + serialize(node.children[0]) + ")"
    if k is Kind.RELATION:
        op = {"<=": "\\le", ">=": "\\ge"}.get(node.payload, node.payload)
        return f"{serialize(node.children[0])} {op} {serialize(node.children[1])}"
    if k is Kind.DERIVATIVE:
        expr, var = node.children
        return f"\\frac{{d}}{{d {serialize(var)}}}({serialize(expr)})"
    if k is Kind.MATRIX:
        rows, cols = node.payload
        lines = []
        for r in range(rows):
            lines.append(
                " & ".join(serialize(node.children[r * cols + c]) for c in range(cols))
            )
        return "\\begin{pmatrix} " + " \\\\ ".join(lines) + " \\end{pmatrix}"
    if k is Kind.TUPLE:
        return "(" + ", ".join(serialize(c) for c in node.children) + ")"
    if k is Kind.INTERVAL:
        lo, hi = node.payload
        return (
            ("(" if lo else "[")
            + serialize(node.children[0])
            + ", "
            + serialize(node.children[1])
            + (")" if hi else "]")
        )
    if k is Kind.UNIT:
        return str(node.payload[0])
    raise AssertionError(k)
