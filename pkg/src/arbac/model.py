"""Core ARBAC domain model.

Defines the immutable policy objects (roles, a role hierarchy, can_assign
and can_revoke rules, user-to-role assignments, safety queries) and the
operational semantics of administrative actions under separate
administration: the state of the single user under analysis is just the
set of roles explicitly assigned to them, an action either adds or removes
one role, and preconditions are evaluated against the downward closure of
that set under the hierarchy.

Structural well-formedness is checked by :func:`validate`, which returns
diagnostics instead of raising so that callers (parser, CLI) can report
every problem at once. Constructors deliberately do not enforce the
cross-object invariants; a ``Policy`` can represent an ill-formed input.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from enum import Enum
from typing import Iterable, Iterator

__all__ = [
    "ROLE_NAME_RE",
    "RESERVED_WORDS",
    "ArbacError",
    "InvalidPolicy",
    "PreconditionUnsatisfied",
    "AlreadyAssigned",
    "NotAssigned",
    "RoleHierarchy",
    "EMPTY_HIERARCHY",
    "Precondition",
    "TRUE_PRECONDITION",
    "CanAssignRule",
    "CanRevokeRule",
    "SafetyQuery",
    "UserState",
    "Policy",
    "ActionKind",
    "ActionStep",
    "Severity",
    "Diagnostic",
    "authorized_roles",
    "satisfies",
    "apply_assign",
    "apply_revoke",
    "applicable_actions",
    "validate",
    "validation_errors",
]

# Identifier shape shared by role and user names in the text format.
# '@' is allowed after the first character for branch-suffixed names
# like FA-Clerk@3.
ROLE_NAME_RE = re.compile(r"[A-Za-z_][A-Za-z0-9_@-]*\Z")

# Section keywords and the TRUE literal cannot be used as identifiers,
# otherwise the text format could not be parsed back deterministically.
RESERVED_WORDS = frozenset(
    {"Roles", "Users", "UA", "CR", "CA", "RH", "ADMIN", "SPEC", "TRUE"}
)


class ArbacError(Exception):
    """Base class for errors raised by this package."""


class InvalidPolicy(ArbacError):
    """A policy with error-level diagnostics was passed where a
    well-formed one is required."""

    def __init__(self, message: str, diagnostics: tuple["Diagnostic", ...] = ()):
        super().__init__(message)
        self.diagnostics = diagnostics


class PreconditionUnsatisfied(ArbacError):
    """apply_assign was called in a state that fails the rule's precondition."""


class AlreadyAssigned(ArbacError):
    """apply_assign was called with the target role already assigned."""


class NotAssigned(ArbacError):
    """apply_revoke was called with the target role not assigned."""


def _as_str_tuple(items: Iterable[str]) -> tuple[str, ...]:
    return tuple(items)


@dataclass(frozen=True)
class RoleHierarchy:
    """Seniority relation as explicit (senior, junior) edges.

    Membership of a senior role grants every junior role transitively.
    Edge order is preserved so that policies round-trip through the text
    format byte for byte.
    """

    edges: tuple[tuple[str, str], ...] = ()
    _children: dict = field(
        init=False, repr=False, compare=False, default_factory=dict
    )

    def __post_init__(self) -> None:
        object.__setattr__(self, "edges", tuple((s, j) for s, j in self.edges))
        children: dict[str, list[str]] = {}
        for senior, junior in self.edges:
            children.setdefault(senior, []).append(junior)
        object.__setattr__(self, "_children", children)

    def is_empty(self) -> bool:
        return not self.edges

    def juniors(self, role: str) -> tuple[str, ...]:
        """Direct juniors of ``role``, in edge order."""
        return tuple(self._children.get(role, ()))

    def downward_closure(self, roles: Iterable[str]) -> frozenset[str]:
        """All roles granted by holding ``roles``: the roles themselves
        plus every role reachable through senior-to-junior edges."""
        seen = set(roles)
        stack = list(seen)
        while stack:
            for junior in self._children.get(stack.pop(), ()):
                if junior not in seen:
                    seen.add(junior)
                    stack.append(junior)
        return frozenset(seen)


EMPTY_HIERARCHY = RoleHierarchy()


@dataclass(frozen=True)
class Precondition:
    """Conjunction of role literals: every role in ``positive`` must be
    authorized and no role in ``negative`` may be. Both sets empty means
    the unconditional precondition (TRUE)."""

    positive: frozenset[str] = frozenset()
    negative: frozenset[str] = frozenset()

    def __post_init__(self) -> None:
        object.__setattr__(self, "positive", frozenset(self.positive))
        object.__setattr__(self, "negative", frozenset(self.negative))

    @property
    def is_unconditional(self) -> bool:
        return not self.positive and not self.negative

    def roles(self) -> frozenset[str]:
        return self.positive | self.negative


TRUE_PRECONDITION = Precondition()


@dataclass(frozen=True)
class CanAssignRule:
    """<admin, precondition, target>: a member of ``admin`` may assign
    ``target`` to a user whose authorized roles satisfy the precondition."""

    admin: str
    pre: Precondition
    target: str


@dataclass(frozen=True)
class CanRevokeRule:
    """<admin, target>: a member of ``admin`` may revoke ``target``
    unconditionally."""

    admin: str
    target: str


@dataclass(frozen=True)
class SafetyQuery:
    """Role-reachability question: can ``user`` ever be authorized for
    ``target``?"""

    user: str
    target: str


@dataclass(frozen=True)
class UserState:
    """Roles explicitly assigned to the user under analysis."""

    assigned: frozenset[str] = frozenset()

    def __post_init__(self) -> None:
        object.__setattr__(self, "assigned", frozenset(self.assigned))


@dataclass(frozen=True)
class Policy:
    """A complete ARBAC policy.

    Declaration order of every component is preserved (tuples, not sets):
    the text serializer relies on it, rule indices in witnesses refer to
    it, and the search enumerates actions in it.
    """

    roles: tuple[str, ...] = ()
    users: tuple[str, ...] = ()
    ua: tuple[tuple[str, str], ...] = ()
    ca: tuple[CanAssignRule, ...] = ()
    cr: tuple[CanRevokeRule, ...] = ()
    hierarchy: RoleHierarchy = EMPTY_HIERARCHY
    admin_roles: tuple[str, ...] = ()
    queries: tuple[SafetyQuery, ...] = ()

    def __post_init__(self) -> None:
        object.__setattr__(self, "roles", _as_str_tuple(self.roles))
        object.__setattr__(self, "users", _as_str_tuple(self.users))
        object.__setattr__(self, "ua", tuple((u, r) for u, r in self.ua))
        object.__setattr__(self, "ca", tuple(self.ca))
        object.__setattr__(self, "cr", tuple(self.cr))
        object.__setattr__(self, "admin_roles", _as_str_tuple(self.admin_roles))
        object.__setattr__(self, "queries", tuple(self.queries))

    @property
    def role_set(self) -> frozenset[str]:
        return frozenset(self.roles)

    @property
    def user_set(self) -> frozenset[str]:
        return frozenset(self.users)

    def initial_roles(self, user: str) -> frozenset[str]:
        """Roles assigned to ``user`` in the initial state (UA)."""
        return frozenset(r for u, r in self.ua if u == user)


class ActionKind(str, Enum):
    ASSIGN = "assign"
    REVOKE = "revoke"


@dataclass(frozen=True)
class ActionStep:
    """One administrative action: the rule (by index into ``Policy.ca``
    or ``Policy.cr``) and the role it assigned or revoked."""

    kind: ActionKind
    rule_index: int
    role: str


class Severity(str, Enum):
    ERROR = "error"
    INFO = "info"


@dataclass(frozen=True)
class Diagnostic:
    severity: Severity
    location: str
    message: str

    def __str__(self) -> str:
        return f"{self.severity.value}: {self.location}: {self.message}"


def authorized_roles(state: UserState, hierarchy: RoleHierarchy) -> frozenset[str]:
    """Roles the user is authorized for: the downward closure of the
    explicitly assigned set."""
    if hierarchy.is_empty():
        return state.assigned
    return hierarchy.downward_closure(state.assigned)


def satisfies(pre: Precondition, authorized: frozenset[str]) -> bool:
    """Whether an authorized-role set meets a precondition."""
    return pre.positive <= authorized and not (pre.negative & authorized)


def apply_assign(
    state: UserState, rule: CanAssignRule, hierarchy: RoleHierarchy = EMPTY_HIERARCHY
) -> UserState:
    """Apply a can_assign rule, returning the successor state.

    The precondition is checked against authorized roles (closure), while
    the no-op guard is on the explicit assignment: assigning a role the
    user already holds explicitly is rejected, but assigning one they only
    inherit is allowed.
    """
    if not satisfies(rule.pre, authorized_roles(state, hierarchy)):
        raise PreconditionUnsatisfied(
            f"precondition of rule targeting {rule.target} not satisfied"
        )
    if rule.target in state.assigned:
        raise AlreadyAssigned(f"{rule.target} is already assigned")
    return UserState(state.assigned | {rule.target})


def apply_revoke(state: UserState, rule: CanRevokeRule) -> UserState:
    """Apply a can_revoke rule, returning the successor state."""
    if rule.target not in state.assigned:
        raise NotAssigned(f"{rule.target} is not assigned")
    return UserState(state.assigned - {rule.target})


def applicable_actions(policy: Policy, state: UserState) -> list[ActionStep]:
    """Every action applicable in ``state``, in deterministic order: all
    can_assign rules in declaration order, then all can_revoke rules in
    declaration order. The search and the witness tie-break both follow
    this order."""
    auth = authorized_roles(state, policy.hierarchy)
    steps: list[ActionStep] = []
    for i, rule in enumerate(policy.ca):
        if rule.target not in state.assigned and satisfies(rule.pre, auth):
            steps.append(ActionStep(ActionKind.ASSIGN, i, rule.target))
    for i, rule in enumerate(policy.cr):
        if rule.target in state.assigned:
            steps.append(ActionStep(ActionKind.REVOKE, i, rule.target))
    return steps


def _check_name(kind: str, name: str, location: str) -> Iterator[Diagnostic]:
    if not ROLE_NAME_RE.match(name):
        yield Diagnostic(
            Severity.ERROR, location, f"invalid {kind} name {name!r}"
        )
    elif name in RESERVED_WORDS:
        yield Diagnostic(
            Severity.ERROR, location, f"{kind} name {name!r} is a reserved word"
        )


def _find_cycle_roles(hierarchy: RoleHierarchy) -> list[str]:
    """Roles on at least one hierarchy cycle, found by stripping nodes
    with no remaining incoming edge (Kahn's algorithm residue)."""
    indeg: dict[str, int] = {}
    out: dict[str, list[str]] = {}
    for s, j in hierarchy.edges:
        indeg.setdefault(s, 0)
        indeg[j] = indeg.get(j, 0) + 1
        out.setdefault(s, []).append(j)
    ready = [n for n, d in indeg.items() if d == 0]
    while ready:
        n = ready.pop()
        for j in out.get(n, ()):
            indeg[j] -= 1
            if indeg[j] == 0:
                ready.append(j)
    return sorted(n for n, d in indeg.items() if d > 0)


def validate(policy: Policy) -> list[Diagnostic]:
    """Check structural well-formedness, returning every problem found.

    Error-level diagnostics mark violations that make the policy
    meaningless or non-serializable (undeclared references, bad names,
    duplicate role declarations, overlapping precondition literals, a
    rule target inside its own precondition, hierarchy cycles). Exact
    duplicates of rules, UA pairs, users, or hierarchy edges are merely
    redundant and are reported at info level.
    """
    diags: list[Diagnostic] = []
    roles = policy.role_set
    users = policy.user_set

    seen_roles: set[str] = set()
    for i, r in enumerate(policy.roles):
        loc = f"Roles[{i}]"
        diags.extend(_check_name("role", r, loc))
        if r in seen_roles:
            diags.append(
                Diagnostic(Severity.ERROR, loc, f"duplicate role declaration {r!r}")
            )
        seen_roles.add(r)

    seen_users: set[str] = set()
    for i, u in enumerate(policy.users):
        loc = f"Users[{i}]"
        diags.extend(_check_name("user", u, loc))
        if u in seen_users:
            diags.append(Diagnostic(Severity.INFO, loc, f"duplicate user declaration {u!r}"))
        seen_users.add(u)

    seen_ua: set[tuple[str, str]] = set()
    for i, (u, r) in enumerate(policy.ua):
        loc = f"UA[{i}]"
        if u not in users:
            diags.append(Diagnostic(Severity.ERROR, loc, f"undeclared user {u!r}"))
        if r not in roles:
            diags.append(Diagnostic(Severity.ERROR, loc, f"undeclared role {r!r}"))
        if (u, r) in seen_ua:
            diags.append(Diagnostic(Severity.INFO, loc, f"duplicate assignment <{u}, {r}>"))
        seen_ua.add((u, r))

    seen_ca: set[CanAssignRule] = set()
    for i, rule in enumerate(policy.ca):
        loc = f"CA[{i}]"
        for name in (rule.admin, rule.target, *sorted(rule.pre.roles())):
            if name not in roles:
                diags.append(Diagnostic(Severity.ERROR, loc, f"undeclared role {name!r}"))
        overlap = rule.pre.positive & rule.pre.negative
        if overlap:
            diags.append(
                Diagnostic(
                    Severity.ERROR,
                    loc,
                    "precondition uses roles both positively and negatively: "
                    + ", ".join(sorted(overlap)),
                )
            )
        if rule.target in rule.pre.roles():
            diags.append(
                Diagnostic(
                    Severity.ERROR, loc, f"target {rule.target!r} appears in its own precondition"
                )
            )
        if rule in seen_ca:
            diags.append(Diagnostic(Severity.INFO, loc, "duplicate can_assign rule"))
        seen_ca.add(rule)

    seen_cr: set[CanRevokeRule] = set()
    for i, rule in enumerate(policy.cr):
        loc = f"CR[{i}]"
        for name in (rule.admin, rule.target):
            if name not in roles:
                diags.append(Diagnostic(Severity.ERROR, loc, f"undeclared role {name!r}"))
        if rule in seen_cr:
            diags.append(Diagnostic(Severity.INFO, loc, "duplicate can_revoke rule"))
        seen_cr.add(rule)

    seen_edges: set[tuple[str, str]] = set()
    for i, (s, j) in enumerate(policy.hierarchy.edges):
        loc = f"RH[{i}]"
        for name in (s, j):
            if name not in roles:
                diags.append(Diagnostic(Severity.ERROR, loc, f"undeclared role {name!r}"))
        if (s, j) in seen_edges:
            diags.append(Diagnostic(Severity.INFO, loc, f"duplicate edge <{s}, {j}>"))
        seen_edges.add((s, j))
    cycle = _find_cycle_roles(policy.hierarchy)
    if cycle:
        diags.append(
            Diagnostic(
                Severity.ERROR,
                "RH",
                "hierarchy contains a cycle involving: " + ", ".join(cycle),
            )
        )

    seen_admin: set[str] = set()
    for i, r in enumerate(policy.admin_roles):
        loc = f"ADMIN[{i}]"
        if r not in roles:
            diags.append(Diagnostic(Severity.ERROR, loc, f"undeclared role {r!r}"))
        if r in seen_admin:
            diags.append(Diagnostic(Severity.INFO, loc, f"duplicate admin role {r!r}"))
        seen_admin.add(r)

    for i, q in enumerate(policy.queries):
        loc = f"SPEC[{i}]"
        if q.user not in users:
            diags.append(Diagnostic(Severity.ERROR, loc, f"undeclared user {q.user!r}"))
        if q.target not in roles:
            diags.append(Diagnostic(Severity.ERROR, loc, f"undeclared role {q.target!r}"))

    return diags


def validation_errors(policy: Policy) -> list[Diagnostic]:
    """Only the error-level diagnostics; empty means well-formed."""
    return [d for d in validate(policy) if d.severity is Severity.ERROR]
