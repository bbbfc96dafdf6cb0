"""Parser and writer for the qasm-subset interchange format.

Accepted statements::

    OPENQASM 2.0;               // optional header
    qreg q[3];                  // one quantum register
    creg c[3];                  // one classical register
    input float theta;          // free parameter declaration
    h q[0];
    rz(theta+0.5) q[1];         // params: literal | pi forms | symbol +/- literal
    cx q[0],q[1];
    measure q[0] -> c[0];
    barrier q[0], q[1];         // or bare `barrier;` for all qubits

Parameter expressions are limited to a float literal, `k*pi/d` (with optional
k and /d, optional leading minus), a declared symbol, or symbol +/- literal.
`//` starts a comment. Everything is case-sensitive.
"""

from __future__ import annotations

import math
import re

from .ir import (
    GATES_1Q,
    GATES_2Q,
    KNOWN_GATES,
    ROTATION_GATES,
    Circuit,
    Instruction,
    Param,
    SymbolRef,
)


class QasmError(ValueError):
    def __init__(self, line: int, col: int, message: str):
        super().__init__(f"line {line}, col {col}: {message}")
        self.line = line
        self.col = col
        self.message = message


class QasmSyntaxError(QasmError):
    """The text does not match the subset grammar."""


class QasmSemanticError(QasmError):
    """Grammatically valid but meaningless: bad indices, arity, symbols."""


_TOKEN_RE = re.compile(
    r"""
    (?P<ws>\s+)
  | (?P<comment>//[^\n]*)
  | (?P<number>\d+\.\d*(?:[eE][-+]?\d+)?|\.\d+(?:[eE][-+]?\d+)?|\d+(?:[eE][-+]?\d+)?)
  | (?P<name>[A-Za-z_][A-Za-z0-9_]*)
  | (?P<arrow>->)
  | (?P<punct>[\[\],;()+\-*/])
    """,
    re.VERBOSE,
)


class _Token:
    __slots__ = ("kind", "text", "line", "col")

    def __init__(self, kind: str, text: str, line: int, col: int):
        self.kind = kind
        self.text = text
        self.line = line
        self.col = col


def _tokenize(text: str) -> list[_Token]:
    tokens: list[_Token] = []
    line, col = 1, 1
    pos = 0
    while pos < len(text):
        m = _TOKEN_RE.match(text, pos)
        if m is None:
            raise QasmSyntaxError(line, col, f"unexpected character {text[pos]!r}")
        kind = m.lastgroup or ""
        raw = m.group()
        if kind not in ("ws", "comment"):
            tokens.append(_Token(kind, raw, line, col))
        newlines = raw.count("\n")
        if newlines:
            line += newlines
            col = len(raw) - raw.rfind("\n")
        else:
            col += len(raw)
        pos = m.end()
    return tokens


class _Parser:
    def __init__(self, tokens: list[_Token], end_line: int):
        self.tokens = tokens
        self.pos = 0
        self.end_line = end_line

    def _err(self, message: str, semantic: bool = False) -> QasmError:
        if self.pos < len(self.tokens):
            tok = self.tokens[self.pos]
            line, col = tok.line, tok.col
        else:
            line, col = self.end_line, 1
        cls = QasmSemanticError if semantic else QasmSyntaxError
        return cls(line, col, message)

    def peek(self) -> _Token | None:
        return self.tokens[self.pos] if self.pos < len(self.tokens) else None

    def advance(self) -> _Token:
        tok = self.peek()
        if tok is None:
            raise self._err("unexpected end of input")
        self.pos += 1
        return tok

    def expect(self, text: str) -> _Token:
        tok = self.peek()
        if tok is None or tok.text != text:
            got = "end of input" if tok is None else repr(tok.text)
            raise self._err(f"expected {text!r}, got {got}")
        return self.advance()

    def expect_name(self, what: str = "identifier") -> _Token:
        tok = self.peek()
        if tok is None or tok.kind != "name":
            got = "end of input" if tok is None else repr(tok.text)
            raise self._err(f"expected {what}, got {got}")
        return self.advance()

    def expect_int(self) -> int:
        tok = self.peek()
        if tok is None or tok.kind != "number" or not tok.text.isdigit():
            got = "end of input" if tok is None else repr(tok.text)
            raise self._err(f"expected integer, got {got}")
        self.advance()
        return int(tok.text)


def _parse_number(parser: _Parser) -> float:
    """Literal: optional '-', then float or k*pi/d, pi/d, k*pi, pi."""
    sign = 1.0
    tok = parser.peek()
    if tok is not None and tok.text == "-":
        parser.advance()
        sign = -1.0
    tok = parser.peek()
    if tok is None:
        raise parser._err("expected number")
    if tok.kind == "number":
        parser.advance()
        value = float(tok.text)
        nxt = parser.peek()
        if nxt is not None and nxt.text == "*":
            parser.advance()
            parser_pi = parser.expect_name("'pi'")
            if parser_pi.text != "pi":
                raise parser._err("only 'pi' may follow '*' in a parameter")
            value *= math.pi
            nxt = parser.peek()
        if nxt is not None and nxt.text == "/":
            parser.advance()
            denom = parser.advance()
            if denom.kind != "number":
                raise parser._err("expected a number after '/'")
            d = float(denom.text)
            if d == 0:
                raise parser._err("division by zero in parameter", semantic=True)
            value /= d
        return sign * value
    if tok.kind == "name" and tok.text == "pi":
        parser.advance()
        value = math.pi
        nxt = parser.peek()
        if nxt is not None and nxt.text == "/":
            parser.advance()
            denom = parser.advance()
            if denom.kind != "number":
                raise parser._err("expected a number after '/'")
            d = float(denom.text)
            if d == 0:
                raise parser._err("division by zero in parameter", semantic=True)
            value /= d
        return sign * value
    raise parser._err(f"expected number or 'pi', got {tok.text!r}")


def _parse_param(parser: _Parser, symbols: set[str]) -> Param:
    tok = parser.peek()
    if tok is None:
        raise parser._err("expected parameter expression")
    if tok.kind == "name" and tok.text != "pi":
        name_tok = parser.advance()
        if name_tok.text not in symbols:
            raise QasmSemanticError(name_tok.line, name_tok.col, f"undeclared parameter '{name_tok.text}'")
        nxt = parser.peek()
        if nxt is not None and nxt.text in ("+", "-"):
            op = parser.advance().text
            lit = _parse_number(parser)
            return SymbolRef(name_tok.text, lit if op == "+" else -lit)
        return SymbolRef(name_tok.text, 0.0)
    return _parse_number(parser)


def parse(text: str) -> Circuit:
    """Parse qasm-subset source into a Circuit.

    Raises QasmSyntaxError for grammar problems and QasmSemanticError for
    out-of-range indices, undeclared symbols, wrong arity, or duplicate
    register declarations; both carry (line, col).
    """
    if isinstance(text, bytes):
        try:
            text = text.decode("utf-8")
        except UnicodeDecodeError as exc:
            raise QasmSyntaxError(1, 1, f"input is not valid UTF-8: {exc}") from None
    end_line = text.count("\n") + 1
    parser = _Parser(_tokenize(text), end_line)

    qreg: tuple[str, int] | None = None
    creg: tuple[str, int] | None = None
    symbols: set[str] = set()
    instructions: list[Instruction] = []

    def qubit_index(parser: _Parser) -> int:
        reg = parser.expect_name("quantum register")
        if qreg is None:
            raise QasmSemanticError(reg.line, reg.col, "no quantum register declared")
        if reg.text != qreg[0]:
            raise QasmSemanticError(reg.line, reg.col, f"unknown register '{reg.text}'")
        parser.expect("[")
        idx_tok = parser.peek()
        idx = parser.expect_int()
        parser.expect("]")
        if idx >= qreg[1]:
            raise QasmSemanticError(idx_tok.line, idx_tok.col, f"qubit index {idx} out of range (size {qreg[1]})")
        return idx

    def clbit_index(parser: _Parser) -> int:
        reg = parser.expect_name("classical register")
        if creg is None:
            raise QasmSemanticError(reg.line, reg.col, "no classical register declared")
        if reg.text != creg[0]:
            raise QasmSemanticError(reg.line, reg.col, f"unknown register '{reg.text}'")
        parser.expect("[")
        idx_tok = parser.peek()
        idx = parser.expect_int()
        parser.expect("]")
        if idx >= creg[1]:
            raise QasmSemanticError(idx_tok.line, idx_tok.col, f"clbit index {idx} out of range (size {creg[1]})")
        return idx

    while parser.peek() is not None:
        tok = parser.peek()
        if tok.kind != "name":
            raise parser._err(f"expected a statement, got {tok.text!r}")
        word = tok.text

        if word == "OPENQASM":
            parser.advance()
            version = parser.advance()
            if version.text != "2.0":
                raise parser._err(f"unsupported version {version.text!r}")
            parser.expect(";")
            continue

        if word == "qreg":
            kw = parser.advance()
            name = parser.expect_name("register name")
            parser.expect("[")
            size = parser.expect_int()
            parser.expect("]")
            parser.expect(";")
            if qreg is not None:
                raise QasmSemanticError(kw.line, kw.col, "quantum register already declared")
            qreg = (name.text, size)
            continue

        if word == "creg":
            kw = parser.advance()
            name = parser.expect_name("register name")
            parser.expect("[")
            size = parser.expect_int()
            parser.expect("]")
            parser.expect(";")
            if creg is not None:
                raise QasmSemanticError(kw.line, kw.col, "classical register already declared")
            creg = (name.text, size)
            continue

        if word == "input":
            parser.advance()
            kind = parser.expect_name("'float'")
            if kind.text != "float":
                raise parser._err("only 'input float' declarations are supported")
            name = parser.expect_name("parameter name")
            parser.expect(";")
            if name.text in symbols:
                raise QasmSemanticError(name.line, name.col, f"parameter '{name.text}' already declared")
            symbols.add(name.text)
            continue

        if word == "measure":
            parser.advance()
            q = qubit_index(parser)
            parser.expect("->")
            c = clbit_index(parser)
            parser.expect(";")
            instructions.append(Instruction("measure", (q,), (), (c,)))
            continue

        if word == "barrier":
            kw = parser.advance()
            qubits: list[int] = []
            if parser.peek() is not None and parser.peek().text != ";":
                qubits.append(qubit_index(parser))
                while parser.peek() is not None and parser.peek().text == ",":
                    parser.advance()
                    qubits.append(qubit_index(parser))
            parser.expect(";")
            if not qubits:
                if qreg is None:
                    raise QasmSemanticError(kw.line, kw.col, "no quantum register declared")
                qubits = list(range(qreg[1]))
            if len(set(qubits)) != len(qubits):
                raise QasmSemanticError(kw.line, kw.col, "barrier qubits must be distinct")
            instructions.append(Instruction("barrier", tuple(qubits)))
            continue

        if word in GATES_1Q or word in GATES_2Q:
            gate_tok = parser.advance()
            params: tuple[Param, ...] = ()
            if parser.peek() is not None and parser.peek().text == "(":
                parser.advance()
                params = (_parse_param(parser, symbols),)
                parser.expect(")")
            if (word in ROTATION_GATES) != bool(params):
                want = "exactly one parameter" if word in ROTATION_GATES else "no parameters"
                raise QasmSemanticError(gate_tok.line, gate_tok.col, f"gate '{word}' takes {want}")
            qubits = [qubit_index(parser)]
            while parser.peek() is not None and parser.peek().text == ",":
                parser.advance()
                qubits.append(qubit_index(parser))
            parser.expect(";")
            arity = 1 if word in GATES_1Q else 2
            if len(qubits) != arity:
                raise QasmSemanticError(
                    gate_tok.line, gate_tok.col, f"gate '{word}' expects {arity} qubit(s), got {len(qubits)}"
                )
            if arity == 2 and qubits[0] == qubits[1]:
                raise QasmSemanticError(gate_tok.line, gate_tok.col, f"gate '{word}' qubits must be distinct")
            instructions.append(Instruction(word, tuple(qubits), params))
            continue

        if word in KNOWN_GATES:
            raise parser._err(f"'{word}' statement is malformed")
        raise parser._err(f"unknown gate or statement '{word}'")

    num_qubits = qreg[1] if qreg else 0
    num_clbits = creg[1] if creg else 0
    return Circuit(num_qubits, num_clbits, tuple(instructions), frozenset(symbols))


def _format_float(x: float) -> str:
    return repr(float(x))


def _format_param(p: Param) -> str:
    if isinstance(p, SymbolRef):
        if p.offset == 0:
            return p.name
        if p.offset > 0:
            return f"{p.name}+{_format_float(p.offset)}"
        return f"{p.name}-{_format_float(-p.offset)}"
    return _format_float(p)


def serialize(circuit: Circuit, qreg_name: str = "q", creg_name: str = "c") -> str:
    """Write a Circuit back out as qasm-subset text.

    parse(serialize(c)) is structurally equal to c for any valid circuit;
    float literals are emitted at full precision to keep the round trip exact.
    """
    lines = ["OPENQASM 2.0;"]
    if circuit.num_qubits:
        lines.append(f"qreg {qreg_name}[{circuit.num_qubits}];")
    if circuit.num_clbits:
        lines.append(f"creg {creg_name}[{circuit.num_clbits}];")
    for sym in sorted(circuit.symbols):
        lines.append(f"input float {sym};")
    for ins in circuit.instructions:
        if ins.gate == "measure":
            lines.append(f"measure {qreg_name}[{ins.qubits[0]}] -> {creg_name}[{ins.clbits[0]}];")
        elif ins.gate == "barrier":
            args = ", ".join(f"{qreg_name}[{q}]" for q in ins.qubits)
            lines.append(f"barrier {args};")
        else:
            head = ins.gate
            if ins.params:
                head += f"({_format_param(ins.params[0])})"
            args = ",".join(f"{qreg_name}[{q}]" for q in ins.qubits)
            lines.append(f"{head} {args};")
    return "\n".join(lines) + "\n"
