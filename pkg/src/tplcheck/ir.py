"""Textual three-address IR for decompiled app/library code.

The IR is line oriented: one statement per line, ``#`` starts a comment,
classes and method bodies are brace delimited.  Example::

    # entry <com.app.Main: void onCreate()>
    class com.app.Main {
      public void onCreate() {
        r = invoke <android.telephony.TelephonyManager: java.lang.String getDeviceId()>()
        invoke <com.lib.Log: void d(java.lang.String)>(r)
        return
      }
    }

Statement forms:

    v = param <i>          parameter binding
    v = const <literal>    integer or double-quoted string constant
    v = w                  copy
    v = invoke <sig>(...)  call, result assigned
    invoke <sig>(...)      call, result dropped
    if v goto L            conditional branch (fallthrough + target)
    goto L                 unconditional branch
    return [v]             method exit
    L: <stmt>              any statement may carry a label

Method signatures are canonical Soot-style strings:
``<com.foo.Bar: java.lang.String getId(int,java.lang.String)>``.
"""

from __future__ import annotations

import logging
import re
from dataclasses import dataclass, field
from typing import Iterator, Optional, Union

log = logging.getLogger(__name__)

__all__ = [
    "Arg",
    "AssignConst",
    "AssignCopy",
    "AssignInvoke",
    "AssignParam",
    "Const",
    "DuplicateClass",
    "Goto",
    "If",
    "Invoke",
    "IrClass",
    "IrMethod",
    "IrProgram",
    "IrStmt",
    "MethodSig",
    "ParseError",
    "Return",
    "UnknownVariable",
    "UnresolvedLabel",
    "Var",
    "defs_of_at",
    "parse_program",
    "parse_sig",
    "render_program",
    "successors",
    "uses_of",
]

VISIBILITIES = frozenset({"public", "protected", "private", "package"})


class ParseError(Exception):
    """Raised when IR text does not conform to the grammar."""

    def __init__(self, msg: str, line: int = 0, col: int = 0, source: str = "<ir>"):
        self.line = line
        self.col = col
        self.source = source
        if line:
            msg = f"{source}:{line}:{col}: {msg}"
        super().__init__(msg)


class DuplicateClass(ParseError):
    """Two class declarations share a fully qualified name."""


class UnresolvedLabel(ParseError):
    """A branch targets a label that no statement in the method carries."""


class UnknownVariable(Exception):
    """A dataflow query names a variable that never appears in the method."""


# ---------------------------------------------------------------------------
# data model


@dataclass(frozen=True)
class MethodSig:
    """Canonical method signature: declaring class, return type, name, params."""

    clazz: str
    return_type: str
    name: str
    params: tuple[str, ...] = ()

    def __str__(self) -> str:
        return f"<{self.clazz}: {self.return_type} {self.name}({','.join(self.params)})>"


@dataclass(frozen=True)
class Var:
    name: str

    def __str__(self) -> str:
        return self.name


@dataclass(frozen=True)
class Const:
    value: Union[int, str]

    def __str__(self) -> str:
        if isinstance(self.value, str):
            return '"%s"' % self.value.replace("\\", "\\\\").replace('"', '\\"')
        return str(self.value)


Arg = Union[Var, Const]


@dataclass(frozen=True)
class AssignParam:
    var: str
    index: int


@dataclass(frozen=True)
class AssignConst:
    var: str
    value: Union[int, str]


@dataclass(frozen=True)
class AssignCopy:
    dst: str
    src: str


@dataclass(frozen=True)
class AssignInvoke:
    dst: str
    sig: MethodSig
    args: tuple[Arg, ...] = ()


@dataclass(frozen=True)
class Invoke:
    sig: MethodSig
    args: tuple[Arg, ...] = ()


@dataclass(frozen=True)
class If:
    cond: str
    target_label: str


@dataclass(frozen=True)
class Goto:
    target_label: str


@dataclass(frozen=True)
class Return:
    var: Optional[str] = None


Op = Union[AssignParam, AssignConst, AssignCopy, AssignInvoke, Invoke, If, Goto, Return]


@dataclass(frozen=True)
class IrStmt:
    """One statement: position in the body, optional label, resolved branch target."""

    index: int
    op: Op
    label: Optional[str] = None
    target: Optional[int] = None  # resolved index for If/Goto

    def defined_var(self) -> Optional[str]:
        op = self.op
        if isinstance(op, (AssignParam, AssignConst)):
            return op.var
        if isinstance(op, AssignCopy):
            return op.dst
        if isinstance(op, AssignInvoke):
            return op.dst
        return None

    def used_vars(self) -> tuple[str, ...]:
        op = self.op
        if isinstance(op, AssignCopy):
            return (op.src,)
        if isinstance(op, (AssignInvoke, Invoke)):
            return tuple(a.name for a in op.args if isinstance(a, Var))
        if isinstance(op, If):
            return (op.cond,)
        if isinstance(op, Return):
            return (op.var,) if op.var else ()
        return ()

    def callee(self) -> Optional[MethodSig]:
        op = self.op
        if isinstance(op, (AssignInvoke, Invoke)):
            return op.sig
        return None


@dataclass
class IrMethod:
    clazz: str
    visibility: str
    is_abstract: bool
    return_type: str
    name: str
    params: tuple[str, ...]
    body: tuple[IrStmt, ...] = ()

    @property
    def sig(self) -> MethodSig:
        return MethodSig(self.clazz, self.return_type, self.name, self.params)

    @property
    def is_public(self) -> bool:
        return self.visibility == "public"


@dataclass
class IrClass:
    name: str
    methods: tuple[IrMethod, ...] = ()


@dataclass
class IrProgram:
    classes: tuple[IrClass, ...] = ()
    declared_entries: tuple[MethodSig, ...] = ()
    warnings: tuple[str, ...] = field(default=(), compare=False, repr=False)

    def methods(self) -> Iterator[IrMethod]:
        for cls in self.classes:
            yield from cls.methods

    def method_by_sig(self, sig: MethodSig) -> Optional[IrMethod]:
        table = getattr(self, "_by_sig", None)
        if table is None:
            table = self._by_sig = {m.sig: m for m in self.methods()}
        return table.get(sig)


# ---------------------------------------------------------------------------
# rendering

_STR_UNESCAPE = {"\\\\": "\\", '\\"': '"', "\\n": "\n", "\\t": "\t"}


def render_op(op: Op) -> str:
    if isinstance(op, AssignParam):
        return f"{op.var} = param {op.index}"
    if isinstance(op, AssignConst):
        return f"{op.var} = const {Const(op.value)}"
    if isinstance(op, AssignCopy):
        return f"{op.dst} = {op.src}"
    if isinstance(op, AssignInvoke):
        return f"{op.dst} = invoke {op.sig}({', '.join(map(str, op.args))})"
    if isinstance(op, Invoke):
        return f"invoke {op.sig}({', '.join(map(str, op.args))})"
    if isinstance(op, If):
        return f"if {op.cond} goto {op.target_label}"
    if isinstance(op, Goto):
        return f"goto {op.target_label}"
    if isinstance(op, Return):
        return f"return {op.var}" if op.var else "return"
    raise TypeError(f"not an op: {op!r}")


def render_stmt(stmt: IrStmt) -> str:
    text = render_op(stmt.op)
    return f"{stmt.label}: {text}" if stmt.label else text


def render_program(program: IrProgram) -> str:
    lines: list[str] = []
    for sig in program.declared_entries:
        lines.append(f"# entry {sig}")
    if program.declared_entries:
        lines.append("")
    for cls in program.classes:
        lines.append(f"class {cls.name} {{")
        for method in cls.methods:
            mods = method.visibility + (" abstract" if method.is_abstract else "")
            head = f"  {mods} {method.return_type} {method.name}({','.join(method.params)})"
            if method.is_abstract:
                lines.append(head + ";")
                continue
            lines.append(head + " {")
            for stmt in method.body:
                lines.append(f"    {render_stmt(stmt)}")
            lines.append("  }")
        lines.append("}")
    return "\n".join(lines) + "\n"


# ---------------------------------------------------------------------------
# parsing

_TOKEN_RE = re.compile(
    r"""[ \t]+
      | (?P<string>"(?:[^"\\\n]|\\.)*")
      | (?P<int>-?\d+)
      | (?P<ident>[A-Za-z_$][A-Za-z0-9_$.\[\]]*)
      | (?P<punct>[<>{}():;,=])
    """,
    re.VERBOSE,
)

_VAR_RE = re.compile(r"[A-Za-z_$][A-Za-z0-9_$]*\Z")
_ENTRY_RE = re.compile(r"^\s*#\s*entry\s+(<[^>]+>)\s*$")


@dataclass(frozen=True)
class _Tok:
    kind: str  # string | int | ident | punct | eol
    text: str
    line: int
    col: int


def _lex_line(line: str, lineno: int, source: str) -> list[_Tok]:
    toks: list[_Tok] = []
    pos = 0
    while pos < len(line):
        if line[pos] == "#":
            break
        m = _TOKEN_RE.match(line, pos)
        if not m:
            raise ParseError(f"bad character {line[pos]!r}", lineno, pos + 1, source)
        pos = m.end()
        kind = m.lastgroup
        if kind:
            toks.append(_Tok(kind, m.group(), lineno, m.start() + 1))
    toks.append(_Tok("eol", "", lineno, len(line) + 1))
    return toks


def _unquote(text: str) -> str:
    body = text[1:-1]
    out = []
    i = 0
    while i < len(body):
        if body[i] == "\\" and i + 1 < len(body):
            out.append(_STR_UNESCAPE.get(body[i : i + 2], body[i + 1]))
            i += 2
        else:
            out.append(body[i])
            i += 1
    return "".join(out)


class _Parser:
    """Recursive descent over a token stream with explicit end-of-line tokens."""

    def __init__(self, text: str, source: str):
        self.source = source
        self.toks: list[_Tok] = []
        self.entries: list[MethodSig] = []
        for lineno, line in enumerate(text.splitlines(), 1):
            m = _ENTRY_RE.match(line)
            if m:
                self.entries.append(parse_sig(m.group(1), source=source, line=lineno))
                continue
            self.toks.extend(_lex_line(line, lineno, source))
        self.pos = 0

    # --- token plumbing

    def _peek(self, skip_eol: bool = False) -> Optional[_Tok]:
        pos = self.pos
        while pos < len(self.toks):
            tok = self.toks[pos]
            if skip_eol and tok.kind == "eol":
                pos += 1
                continue
            return tok
        return None

    def _next(self, skip_eol: bool = False) -> _Tok:
        while self.pos < len(self.toks):
            tok = self.toks[self.pos]
            self.pos += 1
            if skip_eol and tok.kind == "eol":
                continue
            return tok
        raise ParseError("unexpected end of input", self._last_line(), 1, self.source)

    def _last_line(self) -> int:
        return self.toks[-1].line if self.toks else 1

    def _expect(self, text: str, skip_eol: bool = False) -> _Tok:
        tok = self._next(skip_eol=skip_eol)
        if tok.text != text:
            got = tok.text or "end of line"
            raise ParseError(f"expected {text!r}, got {got!r}", tok.line, tok.col, self.source)
        return tok

    def _expect_ident(self, what: str, skip_eol: bool = False) -> _Tok:
        tok = self._next(skip_eol=skip_eol)
        if tok.kind != "ident":
            got = tok.text or "end of line"
            raise ParseError(f"expected {what}, got {got!r}", tok.line, tok.col, self.source)
        return tok

    def _expect_eol(self) -> None:
        tok = self._peek()
        if tok is None:
            return
        if tok.kind == "eol":
            self.pos += 1
            return
        if tok.text == "}":
            return
        raise ParseError(f"trailing tokens: {tok.text!r}", tok.line, tok.col, self.source)

    # --- grammar

    def program(self) -> IrProgram:
        classes: list[IrClass] = []
        seen: set[str] = set()
        while True:
            tok = self._peek(skip_eol=True)
            if tok is None:
                break
            cls = self.clazz()
            if cls.name in seen:
                raise DuplicateClass(f"duplicate class {cls.name}", tok.line, tok.col, self.source)
            seen.add(cls.name)
            classes.append(cls)
        program = IrProgram(classes=tuple(classes), declared_entries=tuple(self.entries))
        program.warnings = tuple(_undefined_use_warnings(program))
        return program

    def clazz(self) -> IrClass:
        kw = self._expect_ident("'class'", skip_eol=True)
        if kw.text != "class":
            raise ParseError(f"expected 'class', got {kw.text!r}", kw.line, kw.col, self.source)
        name = self._expect_ident("class name").text
        self._expect("{")
        methods: list[IrMethod] = []
        sigs: set[MethodSig] = set()
        while True:
            tok = self._peek(skip_eol=True)
            if tok is None:
                raise ParseError(f"unterminated class {name}", kw.line, kw.col, self.source)
            if tok.text == "}":
                self._next(skip_eol=True)
                break
            method = self.method(name)
            if method.sig in sigs:
                raise ParseError(
                    f"duplicate method {method.sig} in {name}", tok.line, tok.col, self.source
                )
            sigs.add(method.sig)
            methods.append(method)
        return IrClass(name=name, methods=tuple(methods))

    def method(self, clazz: str) -> IrMethod:
        vis = self._expect_ident("visibility", skip_eol=True)
        if vis.text not in VISIBILITIES:
            raise ParseError(
                f"expected visibility, got {vis.text!r}", vis.line, vis.col, self.source
            )
        is_abstract = False
        tok = self._expect_ident("return type")
        if tok.text == "abstract":
            is_abstract = True
            tok = self._expect_ident("return type")
        return_type = tok.text
        name = self._expect_ident("method name").text
        self._expect("(")
        params = self._type_list()
        tail = self._next()
        if tail.text == ";":
            if not is_abstract:
                raise ParseError(
                    f"method {name} has no body; only abstract methods may",
                    tail.line,
                    tail.col,
                    self.source,
                )
            self._expect_eol()
            return IrMethod(clazz, vis.text, True, return_type, name, params)
        if tail.text != "{" or is_abstract:
            raise ParseError(
                f"expected method body, got {tail.text!r}", tail.line, tail.col, self.source
            )
        body = self._body(clazz, name, params)
        return IrMethod(clazz, vis.text, False, return_type, name, params, body)

    def _type_list(self) -> tuple[str, ...]:
        types: list[str] = []
        tok = self._peek()
        if tok is not None and tok.text == ")":
            self._next()
            return ()
        while True:
            types.append(self._expect_ident("type").text)
            tok = self._next()
            if tok.text == ")":
                return tuple(types)
            if tok.text != ",":
                raise ParseError(
                    f"expected ',' or ')', got {tok.text!r}", tok.line, tok.col, self.source
                )

    def _body(self, clazz: str, name: str, params: tuple[str, ...]) -> tuple[IrStmt, ...]:
        raw: list[tuple[Optional[str], Op, _Tok]] = []
        labels: dict[str, int] = {}
        while True:
            tok = self._peek(skip_eol=True)
            if tok is None:
                raise ParseError(f"unterminated method {name}", self._last_line(), 1, self.source)
            if tok.text == "}":
                self._next(skip_eol=True)
                break
            label, op = self._stmt(params, name)
            if label is not None:
                if label in labels:
                    raise ParseError(f"duplicate label {label}", tok.line, tok.col, self.source)
                labels[label] = len(raw)
            raw.append((label, op, tok))
        stmts: list[IrStmt] = []
        for index, (label, op, tok) in enumerate(raw):
            target = None
            if isinstance(op, (If, Goto)):
                target = labels.get(op.target_label)
                if target is None:
                    raise UnresolvedLabel(
                        f"label {op.target_label} not defined in {name}",
                        tok.line,
                        tok.col,
                        self.source,
                    )
            stmts.append(IrStmt(index=index, op=op, label=label, target=target))
        return tuple(stmts)

    def _stmt(self, params: tuple[str, ...], method_name: str) -> tuple[Optional[str], Op]:
        tok = self._next(skip_eol=True)
        label: Optional[str] = None
        nxt = self._peek()
        if tok.kind == "ident" and nxt is not None and nxt.text == ":":
            label = tok.text
            self._next()
            tok = self._next()
        op = self._core(tok, params, method_name)
        self._expect_eol()
        return label, op

    def _core(self, tok: _Tok, params: tuple[str, ...], method_name: str) -> Op:
        if tok.kind != "ident":
            got = tok.text or "end of line"
            raise ParseError(f"expected statement, got {got!r}", tok.line, tok.col, self.source)
        if tok.text == "invoke":
            sig, args = self._call()
            return Invoke(sig, args)
        if tok.text == "if":
            cond = self._var("condition variable")
            self._expect("goto")
            target = self._expect_ident("label").text
            return If(cond, target)
        if tok.text == "goto":
            return Goto(self._expect_ident("label").text)
        if tok.text == "return":
            nxt = self._peek()
            if nxt is not None and nxt.kind == "ident":
                return Return(self._var("return variable"))
            return Return()
        # assignment forms
        if not _VAR_RE.match(tok.text):
            raise ParseError(f"bad variable name {tok.text!r}", tok.line, tok.col, self.source)
        dst = tok.text
        self._expect("=")
        rhs = self._next()
        if rhs.kind == "ident" and rhs.text == "param":
            idx_tok = self._next()
            if idx_tok.kind != "int" or int(idx_tok.text) < 0:
                raise ParseError("expected parameter index", idx_tok.line, idx_tok.col, self.source)
            index = int(idx_tok.text)
            if index >= len(params):
                raise ParseError(
                    f"param {index} out of range for {method_name}/{len(params)}",
                    idx_tok.line,
                    idx_tok.col,
                    self.source,
                )
            return AssignParam(dst, index)
        if rhs.kind == "ident" and rhs.text == "const":
            lit = self._next()
            if lit.kind == "int":
                return AssignConst(dst, int(lit.text))
            if lit.kind == "string":
                return AssignConst(dst, _unquote(lit.text))
            raise ParseError("expected literal after 'const'", lit.line, lit.col, self.source)
        if rhs.kind == "ident" and rhs.text == "invoke":
            sig, args = self._call()
            return AssignInvoke(dst, sig, args)
        if rhs.kind == "ident":
            if not _VAR_RE.match(rhs.text):
                raise ParseError(f"bad variable name {rhs.text!r}", rhs.line, rhs.col, self.source)
            return AssignCopy(dst, rhs.text)
        got = rhs.text or "end of line"
        raise ParseError(f"expected assignment source, got {got!r}", rhs.line, rhs.col, self.source)

    def _var(self, what: str) -> str:
        tok = self._expect_ident(what)
        if not _VAR_RE.match(tok.text):
            raise ParseError(f"bad variable name {tok.text!r}", tok.line, tok.col, self.source)
        return tok.text

    def _call(self) -> tuple[MethodSig, tuple[Arg, ...]]:
        self._expect("<")
        clazz = self._expect_ident("class name").text
        self._expect(":")
        return_type = self._expect_ident("return type").text
        name = self._expect_ident("method name").text
        self._expect("(")
        params = self._type_list()
        self._expect(">")
        self._expect("(")
        args: list[Arg] = []
        tok = self._peek()
        if tok is not None and tok.text == ")":
            self._next()
            return MethodSig(clazz, return_type, name, params), ()
        while True:
            tok = self._next()
            if tok.kind == "ident":
                if not _VAR_RE.match(tok.text):
                    raise ParseError(
                        f"bad variable name {tok.text!r}", tok.line, tok.col, self.source
                    )
                args.append(Var(tok.text))
            elif tok.kind == "int":
                args.append(Const(int(tok.text)))
            elif tok.kind == "string":
                args.append(Const(_unquote(tok.text)))
            else:
                got = tok.text or "end of line"
                raise ParseError(f"expected argument, got {got!r}", tok.line, tok.col, self.source)
            tok = self._next()
            if tok.text == ")":
                return MethodSig(clazz, return_type, name, params), tuple(args)
            if tok.text != ",":
                raise ParseError(
                    f"expected ',' or ')', got {tok.text!r}", tok.line, tok.col, self.source
                )


def parse_sig(text: str, source: str = "<sig>", line: int = 0) -> MethodSig:
    """Parse a canonical signature string ``<cls: ret name(t1,t2)>``."""
    m = re.match(
        r"\s*<\s*([A-Za-z_$][\w$.]*)\s*:\s*([A-Za-z_$][\w$.\[\]]*)\s+"
        r"([A-Za-z_$][\w$]*)\s*\(([^)]*)\)\s*>\s*\Z",
        text,
    )
    if not m:
        raise ParseError(f"bad method signature {text!r}", line, 1, source)
    clazz, return_type, name, raw_params = m.groups()
    params = tuple(p.strip() for p in raw_params.split(",") if p.strip())
    return MethodSig(clazz, return_type, name, params)


def parse_program(text: str, source: str = "<ir>") -> IrProgram:
    """Parse IR text into a program.

    Raises ParseError (and subclasses DuplicateClass / UnresolvedLabel) on
    malformed input.  Uses of variables that are never defined in their method
    are collected as warnings on the returned program, not rejected.
    """
    return _Parser(text, source).program()


def _undefined_use_warnings(program: IrProgram) -> list[str]:
    warnings: list[str] = []
    for method in program.methods():
        defined = {s.defined_var() for s in method.body} - {None}
        for stmt in method.body:
            for var in stmt.used_vars():
                if var not in defined:
                    warnings.append(
                        f"{method.sig}: possibly undefined use of {var!r} at statement {stmt.index}"
                    )
    for warning in warnings:
        log.warning("%s", warning)
    return warnings


# ---------------------------------------------------------------------------
# CFG and def/use queries


def successors(method: IrMethod) -> list[tuple[int, ...]]:
    """Successor indices per statement; falling off the end exits the method."""
    n = len(method.body)
    succ: list[tuple[int, ...]] = []
    for stmt in method.body:
        op = stmt.op
        if isinstance(op, Return):
            succ.append(())
        elif isinstance(op, Goto):
            succ.append((stmt.target,))  # type: ignore[arg-type]
        elif isinstance(op, If):
            out = []
            if stmt.index + 1 < n:
                out.append(stmt.index + 1)
            if stmt.target not in out:
                out.append(stmt.target)
            succ.append(tuple(out))  # type: ignore[arg-type]
        else:
            succ.append((stmt.index + 1,) if stmt.index + 1 < n else ())
    return succ


def _check_var_known(method: IrMethod, var: str) -> None:
    for stmt in method.body:
        if stmt.defined_var() == var or var in stmt.used_vars():
            return
    raise UnknownVariable(f"variable {var!r} never appears in {method.sig}")


def defs_of_at(method: IrMethod, at: int, var: str) -> set[int]:
    """Indices of definitions of ``var`` that reach the point just before ``at``.

    Standard forward kill/gen fixpoint over the statement level CFG.  The
    result is empty when no definition reaches ``at`` on any path; it is an
    error (UnknownVariable) to ask about a variable foreign to the method.
    """
    if not 0 <= at < len(method.body):
        raise IndexError(f"statement index {at} out of range for {method.sig}")
    _check_var_known(method, var)
    defs = {s.index for s in method.body if s.defined_var() == var}
    if not defs:
        return set()
    succ = successors(method)
    # reaching definitions range over paths from the method entry, so dead
    # statements (and cycles among them) contribute nothing
    reachable: set[int] = set()
    frontier = [0]
    while frontier:
        i = frontier.pop()
        if i in reachable:
            continue
        reachable.add(i)
        frontier.extend(succ[i])
    if at not in reachable:
        return set()
    preds: list[list[int]] = [[] for _ in method.body]
    for i in reachable:
        for j in succ[i]:
            preds[j].append(i)
    n = len(method.body)
    in_sets: list[set[int]] = [set() for _ in range(n)]
    out_sets: list[set[int]] = [set() for _ in range(n)]
    changed = True
    while changed:
        changed = False
        for i in sorted(reachable):
            new_in: set[int] = set()
            for p in preds[i]:
                new_in |= out_sets[p]
            new_out = {i} if i in defs else set(new_in)
            if new_in != in_sets[i] or new_out != out_sets[i]:
                in_sets[i] = new_in
                out_sets[i] = new_out
                changed = True
    return in_sets[at]


def uses_of(method: IrMethod, var: str) -> list[int]:
    """Indices of statements that read ``var`` (copy source, call argument,
    branch condition, or return operand), in body order."""
    _check_var_known(method, var)
    return [s.index for s in method.body if var in s.used_vars()]
