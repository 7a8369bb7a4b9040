"""Policy text format: parser and canonical serializer.

The format is line-oriented only by convention; the grammar is free-form
over tokens:

    policy   := section*
    section  := "Roles" ident+ ";"
              | "Users" ident+ ";"
              | "UA"    pair*  ";"
              | "CR"    pair*  ";"
              | "CA"    caent* ";"
              | "RH"    pair*  ";"
              | "ADMIN" ident+ ";"
              | "SPEC"  ident ident ";"
    pair     := "<" ident "," ident ">"
    caent    := "<" ident "," cond "," ident ">"
    cond     := "TRUE" | lit ("&" lit)*
    lit      := "-"? ident
    ident    := [A-Za-z_][A-Za-z0-9_@-]*  (not a section keyword, not TRUE)

``//`` starts a comment that runs to end of line. Sections may repeat;
their contents concatenate in order. Input must be 7-bit ASCII.

``serialize_policy`` emits the canonical form: fixed section order
(Roles, Users, UA, CR, CA, RH, ADMIN, then one SPEC section per query),
one entry per line for UA/CR/CA/RH, precondition literals sorted with
positives before negatives, LF line endings, and a trailing newline.
Parsing the canonical form reproduces the policy exactly, so
serialization is a bijection between well-formed policies and their
canonical texts.
"""

from __future__ import annotations

from dataclasses import dataclass

from .model import (
    RESERVED_WORDS,
    ArbacError,
    CanAssignRule,
    CanRevokeRule,
    InvalidPolicy,
    Policy,
    Precondition,
    RoleHierarchy,
    SafetyQuery,
    validation_errors,
)

__all__ = [
    "SourceSpan",
    "ParseError",
    "parse_policy",
    "serialize_policy",
    "format_ca_rule",
]

_SECTION_KEYWORDS = ("Roles", "Users", "UA", "CR", "CA", "RH", "ADMIN", "SPEC")

_PUNCT = {"<": "<", ">": ">", ",": ",", ";": ";", "&": "&", "-": "-"}

_IDENT_START = frozenset(
    "ABCDEFGHIJKLMNOPQRSTUVWXYZabcdefghijklmnopqrstuvwxyz_"
)
_IDENT_CONT = _IDENT_START | frozenset("0123456789-@")


@dataclass(frozen=True)
class SourceSpan:
    """1-based position of a token in the input text."""

    line: int
    column: int
    length: int


class ParseError(ArbacError):
    """Syntax error with the offending location and what was expected."""

    def __init__(self, span: SourceSpan, message: str, expected: tuple[str, ...] = ()):
        self.span = span
        self.message = message
        self.expected = expected
        suffix = ""
        if expected:
            suffix = " (expected " + " or ".join(expected) + ")"
        super().__init__(f"{span.line}:{span.column}: {message}{suffix}")


@dataclass(frozen=True)
class _Token:
    kind: str  # "ident", one of the punctuation chars, or "eof"
    text: str
    span: SourceSpan


def _tokenize(text: str) -> list[_Token]:
    tokens: list[_Token] = []
    i = 0
    line = 1
    col = 1
    n = len(text)
    while i < n:
        ch = text[i]
        if ch == "\n":
            i += 1
            line += 1
            col = 1
            continue
        if ch in " \t\r":
            i += 1
            col += 1
            continue
        if ch == "/" and text.startswith("//", i):
            while i < n and text[i] != "\n":
                i += 1
                col += 1
            continue
        if ch in _IDENT_START:
            start = i
            start_col = col
            while i < n and text[i] in _IDENT_CONT:
                i += 1
                col += 1
            word = text[start:i]
            tokens.append(_Token("ident", word, SourceSpan(line, start_col, len(word))))
            continue
        if ch in _PUNCT:
            tokens.append(_Token(ch, ch, SourceSpan(line, col, 1)))
            i += 1
            col += 1
            continue
        raise ParseError(SourceSpan(line, col, 1), f"unexpected character {ch!r}")
    tokens.append(_Token("eof", "", SourceSpan(line, col, 0)))
    return tokens


class _Parser:
    def __init__(self, tokens: list[_Token]):
        self.tokens = tokens
        self.pos = 0

    def peek(self) -> _Token:
        return self.tokens[self.pos]

    def advance(self) -> _Token:
        tok = self.tokens[self.pos]
        if tok.kind != "eof":
            self.pos += 1
        return tok

    def fail(self, tok: _Token, expected: tuple[str, ...]) -> ParseError:
        got = "end of input" if tok.kind == "eof" else repr(tok.text)
        return ParseError(tok.span, f"unexpected {got}", expected)

    def expect(self, kind: str) -> _Token:
        tok = self.peek()
        if tok.kind != kind:
            raise self.fail(tok, (f"'{kind}'",))
        return self.advance()

    def ident(self) -> str:
        tok = self.peek()
        if tok.kind != "ident":
            raise self.fail(tok, ("identifier",))
        if tok.text in RESERVED_WORDS:
            raise ParseError(
                tok.span, f"{tok.text!r} is reserved and cannot be used as a name"
            )
        self.advance()
        return tok.text

    def ident_list(self) -> list[str]:
        names = [self.ident()]
        while self.peek().kind == "ident":
            names.append(self.ident())
        return names

    def pair(self) -> tuple[str, str]:
        self.expect("<")
        first = self.ident()
        self.expect(",")
        second = self.ident()
        self.expect(">")
        return first, second

    def pair_list(self) -> list[tuple[str, str]]:
        pairs = []
        while self.peek().kind == "<":
            pairs.append(self.pair())
        return pairs

    def condition(self) -> Precondition:
        tok = self.peek()
        if tok.kind == "ident" and tok.text == "TRUE":
            self.advance()
            return Precondition()
        positive: list[str] = []
        negative: list[str] = []
        while True:
            if self.peek().kind == "-":
                self.advance()
                negative.append(self.ident())
            else:
                positive.append(self.ident())
            if self.peek().kind != "&":
                break
            self.advance()
        return Precondition(frozenset(positive), frozenset(negative))

    def ca_entry(self) -> CanAssignRule:
        self.expect("<")
        admin = self.ident()
        self.expect(",")
        pre = self.condition()
        self.expect(",")
        target = self.ident()
        self.expect(">")
        return CanAssignRule(admin, pre, target)

    def policy(self) -> Policy:
        roles: list[str] = []
        users: list[str] = []
        ua: list[tuple[str, str]] = []
        cr: list[CanRevokeRule] = []
        ca: list[CanAssignRule] = []
        rh: list[tuple[str, str]] = []
        admin: list[str] = []
        queries: list[SafetyQuery] = []
        while True:
            tok = self.peek()
            if tok.kind == "eof":
                break
            if tok.kind != "ident" or tok.text not in _SECTION_KEYWORDS:
                raise self.fail(
                    tok, tuple(f"'{k}'" for k in _SECTION_KEYWORDS)
                )
            self.advance()
            section = tok.text
            if section == "Roles":
                roles.extend(self.ident_list())
            elif section == "Users":
                users.extend(self.ident_list())
            elif section == "ADMIN":
                admin.extend(self.ident_list())
            elif section == "UA":
                ua.extend(self.pair_list())
            elif section == "RH":
                rh.extend(self.pair_list())
            elif section == "CR":
                cr.extend(CanRevokeRule(a, t) for a, t in self.pair_list())
            elif section == "CA":
                while self.peek().kind == "<":
                    ca.append(self.ca_entry())
            else:  # SPEC
                user = self.ident()
                target = self.ident()
                queries.append(SafetyQuery(user, target))
            self.expect(";")
        return Policy(
            roles=tuple(roles),
            users=tuple(users),
            ua=tuple(ua),
            ca=tuple(ca),
            cr=tuple(cr),
            hierarchy=RoleHierarchy(tuple(rh)),
            admin_roles=tuple(admin),
            queries=tuple(queries),
        )


def parse_policy(text: str) -> Policy:
    """Parse policy text into a Policy.

    Raises ParseError on any syntax problem; no other exception escapes.
    The result is not validated: structural violations (undeclared roles
    and the like) are left for ``model.validate`` so that one pass can
    report them all.
    """
    if not text.isascii():
        bad_line = 1
        bad_col = 1
        for ch in text:
            if ord(ch) > 127:
                break
            if ch == "\n":
                bad_line += 1
                bad_col = 1
            else:
                bad_col += 1
        raise ParseError(
            SourceSpan(bad_line, bad_col, 1), "input is not 7-bit ASCII"
        )
    return _Parser(_tokenize(text)).policy()


def _format_condition(pre: Precondition) -> str:
    if pre.is_unconditional:
        return "TRUE"
    lits = sorted(pre.positive) + ["-" + r for r in sorted(pre.negative)]
    return "&".join(lits)


def format_ca_rule(rule: CanAssignRule) -> str:
    """Canonical one-line form of a can_assign rule."""
    return f"<{rule.admin}, {_format_condition(rule.pre)}, {rule.target}>"


def serialize_policy(policy: Policy) -> str:
    """Serialize a well-formed policy to its canonical text.

    Raises InvalidPolicy if the policy has error-level diagnostics, since
    such policies have no faithful textual form (reserved-word names,
    duplicate declarations and so on would not parse back).
    """
    errors = validation_errors(policy)
    if errors:
        raise InvalidPolicy(
            "cannot serialize an ill-formed policy: " + str(errors[0]),
            tuple(errors),
        )
    lines: list[str] = []
    if policy.roles:
        lines.append("Roles " + " ".join(policy.roles) + " ;")
    if policy.users:
        lines.append("Users " + " ".join(policy.users) + " ;")

    def block(header: str, entries: list[str]) -> None:
        if not entries:
            lines.append(f"{header} ;")
            return
        lines.append(header)
        lines.extend(entries)
        lines.append(";")

    block("UA", [f"<{u}, {r}>" for u, r in policy.ua])
    block("CR", [f"<{rule.admin}, {rule.target}>" for rule in policy.cr])
    block("CA", [format_ca_rule(rule) for rule in policy.ca])
    block("RH", [f"<{s}, {j}>" for s, j in policy.hierarchy.edges])
    if policy.admin_roles:
        lines.append("ADMIN " + " ".join(policy.admin_roles) + " ;")
    for q in policy.queries:
        lines.append(f"SPEC {q.user} {q.target} ;")
    return "\n".join(lines) + "\n"
