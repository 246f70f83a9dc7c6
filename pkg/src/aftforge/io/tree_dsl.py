"""Parser and printer for the tree definition language.

One textual form serves fault trees, attack trees, AFTs and fragment
definitions, distinguished by the leading keyword::

    faulttree "Drone operator is injured" {
      OR top: "Drone behaves unexpectedly" {
        basic "Mechanical malfunction"
        attack "VRPN data is not transmitted" ref=channel:vrpn_pose cia=(L,N,N)
      }
    }

Grammar (whitespace-insensitive, `#` starts a line comment)::

    document   := kind STRING "{" node "}"
    kind       := "faulttree" | "attacktree" | "aft" | "fragment"
    node       := gate | leaf
    gate       := ("AND"|"OR"|"SAND"|"PAND") [ident ":"] STRING "{" node+ "}"
    leaf       := ("basic" | "attack" | "step") [ident ":"] STRING attrs
    attrs      := { "ref=" refspec | "cia=(" lvl "," lvl "," lvl ")"
                  | "cve=" ident | "cwe=" ident | "cvss=" STRING }
    refspec    := ("component:"|"channel:"|"deploy:") ident | "$" ident
    lvl        := "*" | "L" | "N" | "H"

Fragment documents replace the single node with::

    [ "capec" ident ]
    "pattern" "{" clause (";" clause)* [";"] "}"
    "provides" "cia=(" lvl "," lvl "," lvl ")"
    "body" "{" node "}"

where a clause is `predicate(arg, ...)` and an argument is a `$variable`,
a bare identifier, a quoted string, or a value set `{"UDP", "TCP/IP"}`.

Node ids are optional; missing ids are assigned as n1, n2, ... in document
order.  The printer always writes explicit ids, 2-space indentation, and a
stable attribute order, so structurally equal trees print byte-identically
and `parse(print(t))` reproduces `t`.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Union

from ..cia import ANY_TRIPLE, CiaTriple
from ..errors import (
    DuplicateNodeId,
    ParseError,
    SchemaError,
    UnknownGateType,
    UnreachableNode,
)
from ..model import ElementRef, RefKind
from ..tree import GateType, NodeKind, TreeKind, TreeModel, TreeNode
from ..aftgen.fragments import Fragment, PatternClause, ValueSet, Var

_DOC_KINDS = {
    "faulttree": TreeKind.FAULT_TREE,
    "attacktree": TreeKind.ATTACK_TREE,
    "aft": TreeKind.AFT,
}
_GATE_WORDS = {g.value for g in GateType}
_LEAF_WORDS = {
    "basic": NodeKind.BASIC_EVENT,
    "attack": NodeKind.ATTACK_EVENT,
    "step": NodeKind.ATTACK_STEP,
}
_LEVEL_WORDS = {"*", "L", "N", "H"}


# --- tokenizer -------------------------------------------------------------

_PUNCT = {
    "{": "LBRACE",
    "}": "RBRACE",
    "(": "LPAREN",
    ")": "RPAREN",
    ",": "COMMA",
    ":": "COLON",
    ";": "SEMI",
    "=": "EQUALS",
    "*": "STAR",
}
_IDENT_CHARS = set("abcdefghijklmnopqrstuvwxyzABCDEFGHIJKLMNOPQRSTUVWXYZ0123456789_.+/-")


@dataclass(frozen=True)
class Token:
    type: str  # IDENT, STRING, VAR, one of _PUNCT values, EOF
    value: str
    line: int
    col: int


def _tokenize(text: str) -> list[Token]:
    tokens: list[Token] = []
    line, col = 1, 1
    i, n = 0, len(text)
    while i < n:
        ch = text[i]
        if ch == "\n":
            line += 1
            col = 1
            i += 1
            continue
        if ch in " \t\r":
            i += 1
            col += 1
            continue
        if ch == "#":
            while i < n and text[i] != "\n":
                i += 1
            continue
        if ch in _PUNCT:
            tokens.append(Token(_PUNCT[ch], ch, line, col))
            i += 1
            col += 1
            continue
        if ch == '"':
            start_line, start_col = line, col
            i += 1
            col += 1
            buf = []
            while True:
                if i >= n:
                    raise ParseError("unterminated string", start_line, start_col)
                c = text[i]
                if c == "\n":
                    raise ParseError("unterminated string", start_line, start_col)
                if c == "\\":
                    if i + 1 >= n:
                        raise ParseError("unterminated escape", line, col)
                    nxt = text[i + 1]
                    if nxt == "n":
                        buf.append("\n")
                    elif nxt in ('"', "\\"):
                        buf.append(nxt)
                    else:
                        raise ParseError(f"unknown escape \\{nxt}", line, col)
                    i += 2
                    col += 2
                    continue
                if c == '"':
                    i += 1
                    col += 1
                    break
                buf.append(c)
                i += 1
                col += 1
            tokens.append(Token("STRING", "".join(buf), start_line, start_col))
            continue
        if ch == "$":
            start_col = col
            i += 1
            col += 1
            buf = []
            while i < n and text[i] in _IDENT_CHARS:
                buf.append(text[i])
                i += 1
                col += 1
            if not buf:
                raise ParseError("expected variable name after $", line, start_col)
            tokens.append(Token("VAR", "".join(buf), line, start_col))
            continue
        if ch in _IDENT_CHARS:
            start_col = col
            buf = []
            while i < n and text[i] in _IDENT_CHARS:
                buf.append(text[i])
                i += 1
                col += 1
            tokens.append(Token("IDENT", "".join(buf), line, start_col))
            continue
        raise ParseError(f"unexpected character {ch!r}", line, col)
    tokens.append(Token("EOF", "", line, col))
    return tokens


# --- parser ----------------------------------------------------------------


class _Parser:
    def __init__(self, text: str):
        self.tokens = _tokenize(text)
        self.pos = 0
        self.auto_counter = 0
        self.nodes: dict[str, TreeNode] = {}
        self.explicit_ids: set[str] = set()

    def peek(self, offset: int = 0) -> Token:
        return self.tokens[min(self.pos + offset, len(self.tokens) - 1)]

    def next(self) -> Token:
        token = self.tokens[self.pos]
        if token.type != "EOF":
            self.pos += 1
        return token

    def expect(self, token_type: str, what: str | None = None) -> Token:
        token = self.next()
        if token.type != token_type:
            expected = what or token_type
            raise ParseError(
                f"expected {expected}, got {token.value!r}", token.line, token.col
            )
        return token

    def expect_word(self, word: str) -> Token:
        token = self.next()
        if token.type != "IDENT" or token.value != word:
            raise ParseError(f"expected {word!r}, got {token.value!r}", token.line, token.col)
        return token

    def fail(self, message: str) -> ParseError:
        token = self.peek()
        return ParseError(message, token.line, token.col)

    # document

    def parse_document(self) -> Union[TreeModel, Fragment]:
        head = self.expect("IDENT", "document kind")
        if head.value == "fragment":
            result: Union[TreeModel, Fragment] = self._parse_fragment()
        elif head.value in _DOC_KINDS:
            result = self._parse_tree(_DOC_KINDS[head.value])
        else:
            raise ParseError(
                f"unknown document kind {head.value!r}", head.line, head.col
            )
        trailing = self.peek()
        if trailing.type != "EOF":
            raise ParseError(
                f"trailing input after document: {trailing.value!r}",
                trailing.line,
                trailing.col,
            )
        return result

    def _parse_tree(self, kind: TreeKind) -> TreeModel:
        name = self.expect("STRING", "document name").value
        self.expect("LBRACE")
        root_id = self._parse_node()
        self.expect("RBRACE")
        return TreeModel(kind=kind, name=name, root_id=root_id, nodes=self.nodes)

    # nodes

    def _parse_node(self) -> str:
        token = self.peek()
        if token.type != "IDENT":
            raise self.fail(f"expected a node, got {token.value!r}")
        if token.value in _GATE_WORDS:
            return self._parse_gate()
        if token.value in _LEAF_WORDS:
            return self._parse_leaf()
        if token.value.isupper():
            raise UnknownGateType(f"unknown gate type {token.value!r}", token.line, token.col)
        raise self.fail(f"expected a node, got {token.value!r}")

    def _take_id_and_label(self) -> tuple[str | None, str]:
        explicit = None
        if self.peek().type == "IDENT" and self.peek(1).type == "COLON":
            explicit = self.next().value
            self.next()  # colon
        label = self.expect("STRING", "node label").value
        return explicit, label

    def _register(self, node: TreeNode, explicit: bool, token: Token) -> str:
        if node.id in self.nodes:
            raise DuplicateNodeId(f"node id {node.id!r} defined twice", token.line, token.col)
        self.nodes[node.id] = node
        if explicit:
            self.explicit_ids.add(node.id)
        return node.id

    def _auto_id(self) -> str:
        while True:
            self.auto_counter += 1
            candidate = f"n{self.auto_counter}"
            if candidate not in self.nodes and candidate not in self.explicit_ids:
                return candidate

    def _parse_gate(self) -> str:
        head = self.next()
        gate = GateType(head.value)
        explicit, label = self._take_id_and_label()
        node_id = explicit if explicit is not None else self._auto_id()
        node = TreeNode(id=node_id, label=label, kind=NodeKind.GATE, gate=gate)
        self._register(node, explicit is not None, head)
        self.expect("LBRACE")
        while self.peek().type != "RBRACE":
            node.children.append(self._parse_node())
        if not node.children:
            raise ParseError(
                f"gate {node_id!r} must contain at least one node", head.line, head.col
            )
        self.expect("RBRACE")
        return node_id

    def _parse_leaf(self) -> str:
        head = self.next()
        kind = _LEAF_WORDS[head.value]
        explicit, label = self._take_id_and_label()
        node_id = explicit if explicit is not None else self._auto_id()
        node = TreeNode(id=node_id, label=label, kind=kind)
        self._register(node, explicit is not None, head)
        self._parse_attrs(node, head)
        if kind is NodeKind.ATTACK_EVENT and node.required_cia is None:
            node.required_cia = ANY_TRIPLE
        if kind is NodeKind.ATTACK_STEP and node.provided_cia is None:
            node.provided_cia = ANY_TRIPLE
        return node_id

    def _parse_attrs(self, node: TreeNode, head: Token) -> None:
        seen: set[str] = set()
        while self.peek().type == "IDENT" and self.peek(1).type == "EQUALS":
            name_token = self.next()
            self.next()  # equals
            name = name_token.value
            if name in seen:
                raise ParseError(f"duplicate attribute {name!r}", name_token.line, name_token.col)
            seen.add(name)
            if name == "ref":
                self._parse_ref_attr(node, name_token)
            elif name == "cia":
                triple = self._parse_cia_value()
                if node.kind is NodeKind.ATTACK_EVENT:
                    node.required_cia = triple
                elif node.kind is NodeKind.ATTACK_STEP:
                    node.provided_cia = triple
                else:
                    raise ParseError(
                        "cia is only valid on attack events and steps",
                        name_token.line,
                        name_token.col,
                    )
            elif name == "cve":
                node.cve_id = self.expect("IDENT", "CVE id").value
            elif name == "cwe":
                node.cwe_id = self.expect("IDENT", "CWE id").value
            elif name == "cvss":
                node.cvss_vector = self.expect("STRING", "CVSS vector string").value
            else:
                raise ParseError(f"unknown attribute {name!r}", name_token.line, name_token.col)
        if node.kind is not NodeKind.ATTACK_EVENT and (node.ref or node.ref_var):
            raise ParseError("ref is only valid on attack events", head.line, head.col)
        if node.kind is not NodeKind.ATTACK_STEP and (
            node.cve_id or node.cwe_id or node.cvss_vector
        ):
            raise ParseError("cve/cwe/cvss are only valid on steps", head.line, head.col)

    def _parse_ref_attr(self, node: TreeNode, name_token: Token) -> None:
        if node.kind is not NodeKind.ATTACK_EVENT:
            raise ParseError("ref is only valid on attack events", name_token.line, name_token.col)
        token = self.next()
        if token.type == "VAR":
            node.ref_var = token.value
            return
        if token.type != "IDENT":
            raise ParseError(f"expected a reference, got {token.value!r}", token.line, token.col)
        try:
            kind = RefKind.from_prefix(token.value)
        except ValueError:
            raise ParseError(
                f"unknown reference kind {token.value!r}", token.line, token.col
            ) from None
        self.expect("COLON")
        target = self.expect("IDENT", "referenced element id").value
        node.ref = ElementRef(kind, target)

    def _parse_cia_value(self) -> CiaTriple:
        self.expect("LPAREN")
        levels = []
        for position in range(3):
            if position:
                self.expect("COMMA")
            token = self.next()
            if token.type == "STAR":
                levels.append("*")
            elif token.type == "IDENT" and token.value in _LEVEL_WORDS:
                levels.append(token.value)
            else:
                raise ParseError(
                    f"expected an impact level (* L N H), got {token.value!r}",
                    token.line,
                    token.col,
                )
        self.expect("RPAREN")
        return CiaTriple.of(*levels)

    # fragments

    def _parse_fragment(self) -> Fragment:
        name = self.expect("STRING", "fragment name").value
        self.expect("LBRACE")
        capec = None
        if self.peek().type == "IDENT" and self.peek().value == "capec":
            self.next()
            capec = self.expect("IDENT", "CAPEC id").value
        self.expect_word("pattern")
        self.expect("LBRACE")
        clauses = []
        while self.peek().type != "RBRACE":
            clauses.append(self._parse_clause())
            if self.peek().type == "SEMI":
                self.next()
        self.expect("RBRACE")
        self.expect_word("provides")
        self.expect_word("cia")
        self.expect("EQUALS")
        provides = self._parse_cia_value()
        self.expect_word("body")
        self.expect("LBRACE")
        root_id = self._parse_node()
        self.expect("RBRACE")
        self.expect("RBRACE")
        body = TreeModel(
            kind=TreeKind.FRAGMENT_BODY, name=name, root_id=root_id, nodes=self.nodes
        )
        fragment = Fragment(
            name=name,
            capec_ref=capec,
            pattern=tuple(clauses),
            provides_cia=provides,
            body=body,
        )
        problem = fragment.check()
        if problem:
            raise SchemaError(f"fragment {name!r}: {problem}")
        return fragment

    def _parse_clause(self) -> PatternClause:
        predicate = self.expect("IDENT", "pattern predicate").value
        self.expect("LPAREN")
        args = []
        while True:
            args.append(self._parse_clause_arg())
            if self.peek().type == "COMMA":
                self.next()
                continue
            break
        self.expect("RPAREN")
        return PatternClause(predicate=predicate, args=tuple(args))

    def _parse_clause_arg(self):
        token = self.next()
        if token.type == "VAR":
            return Var(token.value)
        if token.type in ("IDENT", "STRING"):
            return token.value
        if token.type == "LBRACE":
            values = []
            while True:
                values.append(self.expect("STRING", "value-set member").value)
                if self.peek().type == "COMMA":
                    self.next()
                    continue
                break
            self.expect("RBRACE")
            return ValueSet(tuple(values))
        raise ParseError(f"expected a clause argument, got {token.value!r}", token.line, token.col)


def parse_tree_dsl(text: str) -> Union[TreeModel, Fragment]:
    """Parse one document; returns a TreeModel or, for fragments, a Fragment."""
    return _Parser(text).parse_document()


# --- printer ---------------------------------------------------------------


def _quote(text: str) -> str:
    return '"' + text.replace("\\", "\\\\").replace('"', '\\"') + '"'


def _leaf_attrs(node: TreeNode) -> str:
    parts = []
    if node.ref is not None:
        parts.append(f"ref={node.ref.kind.value}:{node.ref.id}")
    elif node.ref_var is not None:
        parts.append(f"ref=${node.ref_var}")
    if node.kind is NodeKind.ATTACK_EVENT and node.required_cia is not None:
        if node.required_cia != ANY_TRIPLE:
            parts.append(f"cia={node.required_cia.format()}")
    if node.kind is NodeKind.ATTACK_STEP:
        if node.cve_id:
            parts.append(f"cve={node.cve_id}")
        if node.cwe_id:
            parts.append(f"cwe={node.cwe_id}")
        if node.cvss_vector:
            parts.append(f"cvss={_quote(node.cvss_vector)}")
        if node.provided_cia is not None and node.provided_cia != ANY_TRIPLE:
            parts.append(f"cia={node.provided_cia.format()}")
    return (" " + " ".join(parts)) if parts else ""


def _print_node(tree: TreeModel, node_id: str, indent: int, out: list[str]) -> None:
    node = tree.nodes[node_id]
    pad = "  " * indent
    if node.kind is NodeKind.GATE:
        out.append(f"{pad}{node.gate.value} {node.id}: {_quote(node.label)} {{")
        for child in node.children:
            _print_node(tree, child, indent + 1, out)
        out.append(f"{pad}}}")
    else:
        keyword = node.kind.value
        out.append(f"{pad}{keyword} {node.id}: {_quote(node.label)}{_leaf_attrs(node)}")


def print_tree_dsl(tree: TreeModel) -> str:
    """Deterministic textual form; parse(print(t)) is structurally equal to t."""
    keyword = {
        TreeKind.FAULT_TREE: "faulttree",
        TreeKind.ATTACK_TREE: "attacktree",
        TreeKind.AFT: "aft",
        TreeKind.FRAGMENT_BODY: None,
    }[tree.kind]
    if keyword is None:
        raise ValueError("fragment bodies are printed via print_fragment_dsl")
    reachable = sum(1 for _ in tree.iter_preorder())
    if reachable != len(tree.nodes):
        raise UnreachableNode(
            f"{len(tree.nodes) - reachable} nodes are not reachable from the root"
        )
    out = [f"{keyword} {_quote(tree.name)} {{"]
    _print_node(tree, tree.root_id, 1, out)
    out.append("}")
    return "\n".join(out) + "\n"


def _format_clause_arg(arg) -> str:
    if isinstance(arg, Var):
        return f"${arg.name}"
    if isinstance(arg, ValueSet):
        return "{" + ", ".join(_quote(v) for v in arg.values) + "}"
    if isinstance(arg, str):
        if arg and all(c in _IDENT_CHARS for c in arg):
            return arg
        return _quote(arg)
    raise TypeError(f"unexpected clause argument: {arg!r}")


def print_fragment_dsl(fragment: Fragment) -> str:
    out = [f"fragment {_quote(fragment.name)} {{"]
    if fragment.capec_ref:
        out.append(f"  capec {fragment.capec_ref}")
    out.append("  pattern {")
    for clause in fragment.pattern:
        args = ", ".join(_format_clause_arg(a) for a in clause.args)
        out.append(f"    {clause.predicate}({args});")
    out.append("  }")
    out.append(f"  provides cia={fragment.provides_cia.format()}")
    out.append("  body {")
    _print_node(fragment.body, fragment.body.root_id, 2, out)
    out.append("  }")
    out.append("}")
    return "\n".join(out) + "\n"
