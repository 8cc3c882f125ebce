"""Lexer, AST and recursive-descent parser for the Java-like subset.

One type per compilation unit; no generics, lambdas, nested types or
annotation arguments. Method bodies support local declarations, ``new``,
calls, field reads, assignment, ``if``/``while``/``return``/``throw`` and
``try``/``catch``/``finally``.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from typing import Union

PRIMITIVE_TYPES = {"boolean", "byte", "char", "short", "int", "long", "float", "double"}
MODIFIERS = {
    "public", "private", "protected", "static", "final", "abstract",
    "synchronized", "transient", "volatile", "native", "default",
}
KEYWORDS = MODIFIERS | PRIMITIVE_TYPES | {
    "package", "import", "class", "interface", "extends", "implements", "void",
    "new", "return", "if", "else", "while", "try", "catch", "finally", "throw",
    "throws", "this", "null", "true", "false",
}


class SubsetParseError(ValueError):
    def __init__(self, message: str, file: str = "<string>", line: int = 0, column: int = 0):
        self.file, self.line, self.column = file, line, column
        super().__init__(f"{file}:{line}:{column}: {message}")


@dataclass(frozen=True)
class Tok:
    kind: str  # ident | keyword | number | string | char | op | eof
    text: str
    line: int
    col: int


_LEX = re.compile(
    r"(?P<ws>\s+)"
    r"|(?P<line_comment>//[^\n]*)"
    r"|(?P<block_comment>/\*.*?\*/)"
    r"|(?P<ident>[A-Za-z_$][\w$]*)"
    r"|(?P<number>\d+(?:\.\d+)?[LlFfDd]?)"
    r'|(?P<string>"(?:[^"\\\n]|\\.)*")'
    r"|(?P<char>'(?:[^'\\\n]|\\.)')"
    r"|(?P<op>==|!=|<=|>=|&&|\|\||\+\+|--|[{}()\[\];,.=@+\-*/%<>!&|?:])",
    re.S,
)


def tokenize(text: str, file: str = "<string>") -> list[Tok]:
    toks: list[Tok] = []
    pos, line, line_start = 0, 1, 0
    while pos < len(text):
        m = _LEX.match(text, pos)
        if m is None:
            raise SubsetParseError(f"unexpected character {text[pos]!r}", file, line, pos - line_start + 1)
        kind = m.lastgroup
        if kind not in ("ws", "line_comment", "block_comment"):
            if kind == "ident" and m.group() in KEYWORDS:
                kind = "keyword"
            toks.append(Tok(kind, m.group(), line, pos - line_start + 1))
        chunk = m.group()
        nl = chunk.count("\n")
        if nl:
            line += nl
            line_start = pos + chunk.rfind("\n") + 1
        pos = m.end()
    toks.append(Tok("eof", "", line, pos - line_start + 1))
    return toks


# --- AST ---------------------------------------------------------------------

Pos = tuple[int, int]


@dataclass
class TypeRef:
    name: str  # simple, dotted, primitive or "void"
    pos: Pos


@dataclass
class Lit:
    type: str  # primitive keyword, "String" or "null"
    pos: Pos


@dataclass
class Name:
    ident: str
    pos: Pos


@dataclass
class This:
    pos: Pos


@dataclass
class New:
    type: TypeRef
    args: list["Expr"]
    pos: Pos


@dataclass
class Call:
    target: Union["Expr", None]
    name: str
    args: list["Expr"]
    pos: Pos


@dataclass
class FieldRead:
    target: "Expr"
    name: str
    pos: Pos


@dataclass
class Assign:
    target: "Expr"
    value: "Expr"
    pos: Pos


@dataclass
class Binary:
    op: str
    left: "Expr"
    right: "Expr"
    pos: Pos


@dataclass
class Unary:
    op: str
    operand: "Expr"
    pos: Pos


Expr = Union[Lit, Name, This, New, Call, FieldRead, Assign, Binary, Unary]


@dataclass
class LocalDecl:
    type: TypeRef
    name: str
    init: Expr | None
    pos: Pos


@dataclass
class ExprStmt:
    expr: Expr


@dataclass
class Return:
    value: Expr | None


@dataclass
class Throw:
    value: Expr


@dataclass
class If:
    cond: Expr
    then: "Stmt"
    other: "Stmt | None"


@dataclass
class While:
    cond: Expr
    body: "Stmt"


@dataclass
class Block:
    stmts: list["Stmt"]


@dataclass
class Catch:
    type: TypeRef
    var: str
    body: Block
    pos: Pos


@dataclass
class Try:
    body: Block
    catches: list[Catch]
    final: Block | None


Stmt = Union[LocalDecl, ExprStmt, Return, Throw, If, While, Block, Try]


@dataclass
class Annotation:
    type: TypeRef
    pos: Pos


@dataclass
class Param:
    type: TypeRef
    name: str
    pos: Pos


@dataclass
class FieldDecl:
    annotations: list[Annotation]
    static: bool
    type: TypeRef
    name: str
    init: Expr | None
    pos: Pos


@dataclass
class MethodDecl:
    annotations: list[Annotation]
    static: bool
    return_type: TypeRef | None  # None for constructors
    name: str
    params: list[Param]
    throws: list[TypeRef]
    body: Block | None
    pos: Pos


@dataclass
class TypeDecl:
    annotations: list[Annotation]
    kind: str  # class | interface | annotation
    name: str
    extends: list[TypeRef]
    implements: list[TypeRef]
    fields: list[FieldDecl] = field(default_factory=list)
    methods: list[MethodDecl] = field(default_factory=list)
    pos: Pos = (0, 0)


@dataclass
class Import:
    name: str
    wildcard: bool
    pos: Pos


@dataclass
class CompilationUnit:
    file: str
    package: str
    imports: list[Import]
    type: TypeDecl


# --- parser ------------------------------------------------------------------


class Parser:
    def __init__(self, text: str, file: str = "<string>"):
        self.file = file
        self.toks = tokenize(text, file)
        self.i = 0

    @property
    def tok(self) -> Tok:
        return self.toks[self.i]

    def peek(self, n: int = 1) -> Tok:
        return self.toks[min(self.i + n, len(self.toks) - 1)]

    def at(self, text: str) -> bool:
        return self.tok.text == text and self.tok.kind in ("keyword", "op")

    def error(self, message: str, tok: Tok | None = None) -> SubsetParseError:
        tok = tok or self.tok
        return SubsetParseError(message, self.file, tok.line, tok.col)

    def advance(self) -> Tok:
        t = self.tok
        self.i += 1
        return t

    def expect(self, text: str) -> Tok:
        if not self.at(text):
            raise self.error(f"expected {text!r}, found {self.tok.text or 'end of file'!r}")
        return self.advance()

    def accept(self, text: str) -> bool:
        if self.at(text):
            self.advance()
            return True
        return False

    def ident(self) -> Tok:
        if self.tok.kind != "ident":
            raise self.error(f"expected identifier, found {self.tok.text or 'end of file'!r}")
        return self.advance()

    def qname(self) -> str:
        parts = [self.ident().text]
        while self.at(".") and self.peek().kind == "ident":
            self.advance()
            parts.append(self.advance().text)
        return ".".join(parts)

    # compilation unit

    def compilation_unit(self) -> CompilationUnit:
        package = ""
        if self.accept("package"):
            package = self.qname()
            self.expect(";")
        imports = []
        while self.at("import"):
            t = self.advance()
            if self.accept("static"):
                raise self.error("static imports are not supported", t)
            name = self.qname()
            wildcard = False
            if self.accept("."):
                self.expect("*")
                wildcard = True
            self.expect(";")
            imports.append(Import(name, wildcard, (t.line, t.col)))
        decl = self.type_decl()
        if self.tok.kind != "eof":
            raise self.error("only one type declaration per file is supported")
        return CompilationUnit(self.file, package, imports, decl)

    def annotations(self) -> list[Annotation]:
        out = []
        while self.at("@") and not (self.peek().kind == "keyword" and self.peek().text == "interface"):
            t = self.advance()
            ref = self.type_ref_name()
            if self.at("("):
                raise self.error("annotation arguments are not supported")
            out.append(Annotation(ref, (t.line, t.col)))
        return out

    def modifiers(self) -> set[str]:
        mods = set()
        while self.tok.kind == "keyword" and self.tok.text in MODIFIERS:
            mods.add(self.advance().text)
        return mods

    def type_decl(self) -> TypeDecl:
        annotations = self.annotations()
        self.modifiers()
        if self.accept("class"):
            kind = "class"
        elif self.accept("interface"):
            kind = "interface"
        elif self.at("@") and self.peek().text == "interface":
            self.advance()
            self.advance()
            kind = "annotation"
        else:
            raise self.error(f"expected a type declaration, found {self.tok.text or 'end of file'!r}")
        name_tok = self.ident()
        extends, implements = [], []
        if self.accept("extends"):
            extends = self.type_list()
        if kind == "class" and self.accept("implements"):
            implements = self.type_list()
        if kind == "class" and len(extends) > 1:
            raise self.error("a class extends at most one class", name_tok)
        decl = TypeDecl(annotations, kind, name_tok.text, extends, implements, pos=(name_tok.line, name_tok.col))
        self.expect("{")
        while not self.at("}"):
            if self.tok.kind == "eof":
                raise self.error("unterminated type body")
            self.member(decl)
        self.advance()
        return decl

    def type_list(self) -> list[TypeRef]:
        refs = [self.type_ref_name()]
        while self.accept(","):
            refs.append(self.type_ref_name())
        return refs

    def type_ref_name(self) -> TypeRef:
        t = self.tok
        return TypeRef(self.qname(), (t.line, t.col))

    def type_ref(self) -> TypeRef:
        t = self.tok
        if t.kind == "keyword" and (t.text in PRIMITIVE_TYPES or t.text == "void"):
            self.advance()
            ref = TypeRef(t.text, (t.line, t.col))
        else:
            ref = self.type_ref_name()
        while self.at("[") and self.peek().text == "]":
            self.advance()
            self.advance()
        return ref

    def member(self, decl: TypeDecl) -> None:
        annotations = self.annotations()
        mods = self.modifiers()
        static = "static" in mods
        start = self.tok
        if start.kind == "ident" and start.text == decl.name and self.peek().text == "(":
            self.advance()
            params = self.params()
            throws = self.throws()
            body = self.block()
            decl.methods.append(MethodDecl(annotations, False, None, "<init>", params, throws, body, (start.line, start.col)))
            return
        rtype = self.type_ref()
        name = self.ident()
        if self.at("("):
            params = self.params()
            throws = self.throws()
            body = None if self.accept(";") else self.block()
            decl.methods.append(MethodDecl(annotations, static, rtype, name.text, params, throws, body, (name.line, name.col)))
            return
        if rtype.name == "void":
            raise self.error("fields cannot be void", name)
        while True:
            init = self.expr() if self.accept("=") else None
            decl.fields.append(FieldDecl(annotations, static, rtype, name.text, init, (name.line, name.col)))
            if not self.accept(","):
                break
            name = self.ident()
        self.expect(";")

    def params(self) -> list[Param]:
        self.expect("(")
        out = []
        if not self.at(")"):
            while True:
                self.modifiers()
                ref = self.type_ref()
                name = self.ident()
                out.append(Param(ref, name.text, (name.line, name.col)))
                if not self.accept(","):
                    break
        self.expect(")")
        return out

    def throws(self) -> list[TypeRef]:
        return self.type_list() if self.accept("throws") else []

    # statements

    def block(self) -> Block:
        self.expect("{")
        stmts = []
        while not self.at("}"):
            if self.tok.kind == "eof":
                raise self.error("unterminated block")
            stmts.append(self.statement())
        self.advance()
        return Block(stmts)

    def statement(self) -> Stmt:
        t = self.tok
        if self.at("{"):
            return self.block()
        if self.accept(";"):
            return Block([])
        if self.accept("return"):
            value = None if self.at(";") else self.expr()
            self.expect(";")
            return Return(value)
        if self.accept("throw"):
            value = self.expr()
            self.expect(";")
            return Throw(value)
        if self.accept("if"):
            self.expect("(")
            cond = self.expr()
            self.expect(")")
            then = self.statement()
            other = self.statement() if self.accept("else") else None
            return If(cond, then, other)
        if self.accept("while"):
            self.expect("(")
            cond = self.expr()
            self.expect(")")
            return While(cond, self.statement())
        if self.accept("try"):
            body = self.block()
            catches = []
            while self.at("catch"):
                c = self.advance()
                self.expect("(")
                self.modifiers()
                ref = self.type_ref_name()
                var = self.ident().text
                self.expect(")")
                catches.append(Catch(ref, var, self.block(), (c.line, c.col)))
            final = self.block() if self.accept("finally") else None
            if not catches and final is None:
                raise self.error("try needs a catch or finally", t)
            return Try(body, catches, final)
        decl = self.try_local_decl()
        if decl is not None:
            return decl
        expr = self.expr()
        self.expect(";")
        return ExprStmt(expr)

    def try_local_decl(self) -> LocalDecl | None:
        t = self.tok
        if self.at("final"):
            self.advance()
        elif not (t.kind == "ident" or (t.kind == "keyword" and t.text in PRIMITIVE_TYPES)):
            return None
        save = self.i
        try:
            ref = self.type_ref()
        except SubsetParseError:
            self.i = save
            return None
        if self.tok.kind != "ident":
            self.i = save
            return None
        name = self.advance()
        init = self.expr() if self.accept("=") else None
        self.expect(";")
        return LocalDecl(ref, name.text, init, (name.line, name.col))

    # expressions (precedence is irrelevant for fact extraction)

    _BINOPS = {"==", "!=", "<", ">", "<=", ">=", "&&", "||", "+", "-", "*", "/", "%", "&", "|"}

    def expr(self) -> Expr:
        left = self.binary()
        if self.at("="):
            t = self.advance()
            if not isinstance(left, (Name, FieldRead)):
                raise self.error("invalid assignment target", t)
            return Assign(left, self.expr(), (t.line, t.col))
        return left

    def binary(self) -> Expr:
        left = self.unary()
        while self.tok.kind == "op" and self.tok.text in self._BINOPS:
            t = self.advance()
            left = Binary(t.text, left, self.unary(), (t.line, t.col))
        return left

    def unary(self) -> Expr:
        t = self.tok
        if t.kind == "op" and t.text in ("!", "-", "+"):
            self.advance()
            return Unary(t.text, self.unary(), (t.line, t.col))
        return self.postfix(self.primary())

    def primary(self) -> Expr:
        t = self.tok
        pos = (t.line, t.col)
        if t.kind == "number":
            self.advance()
            text = t.text.lower()
            kind = "long" if text.endswith("l") else "float" if text.endswith("f") else "double" if ("." in text or text.endswith("d")) else "int"
            return Lit(kind, pos)
        if t.kind == "string":
            self.advance()
            return Lit("String", pos)
        if t.kind == "char":
            self.advance()
            return Lit("char", pos)
        if t.kind == "keyword":
            if t.text in ("true", "false"):
                self.advance()
                return Lit("boolean", pos)
            if t.text == "null":
                self.advance()
                return Lit("null", pos)
            if t.text == "this":
                self.advance()
                return This(pos)
            if t.text == "new":
                self.advance()
                ref = self.type_ref_name()
                return New(ref, self.args(), pos)
        if self.accept("("):
            inner = self.expr()
            self.expect(")")
            return inner
        if t.kind == "ident":
            self.advance()
            if self.at("("):
                return Call(None, t.text, self.args(), pos)
            return Name(t.text, pos)
        raise self.error(f"unexpected {t.text or 'end of file'!r} in expression")

    def postfix(self, expr: Expr) -> Expr:
        while self.at("."):
            self.advance()
            name = self.ident()
            pos = (name.line, name.col)
            if self.at("("):
                expr = Call(expr, name.text, self.args(), pos)
            else:
                expr = FieldRead(expr, name.text, pos)
        return expr

    def args(self) -> list[Expr]:
        self.expect("(")
        out = []
        if not self.at(")"):
            out.append(self.expr())
            while self.accept(","):
                out.append(self.expr())
        self.expect(")")
        return out


def parse_unit(text: str, file: str = "<string>") -> CompilationUnit:
    return Parser(text, file).compilation_unit()
