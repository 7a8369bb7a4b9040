"""Safety-query analysis: exact reachability search with relevance
slicing, a deliberately naive oracle for differential testing, and
witness replay for certifying Reachable verdicts.

The search explores the analyzed user's possible role sets breadth
first, so the first hit is a shortest witness, with ties broken by the
policy's action enumeration order (can_assign rules in declaration
order, then can_revoke rules). Unreachable is claimed only after the
whole reachable space was visited within the given limits; any
truncation degrades the verdict to Unknown.

Slicing first shrinks the policy to the query's relevance cone: the
fixpoint of "the target is relevant; preconditions of rules targeting a
relevant role are relevant", extended upward through the hierarchy
(anything senior to a relevant role can grant it). Revoke rules survive
only if revoking their target can clear some kept negative literal.
Dropped rules can never occur on a path that changes the verdict, and
removing a revoke of a role no kept rule tests negatively can only
shorten witnesses never enable them, so verdicts and shortest witness
lengths are preserved; the differential tests check this against the
unsliced search and the oracle.
"""

from __future__ import annotations

from collections import defaultdict
from dataclasses import dataclass
from enum import Enum

from . import _engine
from .model import (
    ActionKind,
    ActionStep,
    ArbacError,
    CanAssignRule,
    CanRevokeRule,
    InvalidPolicy,
    Policy,
    RoleHierarchy,
    SafetyQuery,
    UserState,
    applicable_actions,
    apply_assign,
    apply_revoke,
    authorized_roles,
    validation_errors,
)

__all__ = [
    "ORACLE_ROLE_CAP",
    "InvalidQuery",
    "TooLarge",
    "SearchLimits",
    "Outcome",
    "Witness",
    "Verdict",
    "engine_for",
    "reach",
    "slice_policy",
    "oracle_reach",
    "replay",
]

ORACLE_ROLE_CAP = 20


class InvalidQuery(ArbacError):
    """The query references names the policy does not declare."""


class TooLarge(ArbacError):
    """The policy exceeds the oracle's role cap."""


@dataclass(frozen=True)
class SearchLimits:
    """Caps on the search; None means unlimited."""

    max_states: int | None = None
    max_depth: int | None = None

    def __post_init__(self) -> None:
        for name in ("max_states", "max_depth"):
            value = getattr(self, name)
            if value is not None and value < 1:
                raise ValueError(f"{name} must be positive when finite, got {value}")


class Outcome(str, Enum):
    REACHABLE = "reachable"
    UNREACHABLE = "unreachable"
    UNKNOWN = "unknown"


@dataclass(frozen=True)
class Witness:
    steps: tuple[ActionStep, ...]

    def __len__(self) -> int:
        return len(self.steps)


@dataclass(frozen=True)
class Verdict:
    outcome: Outcome
    witness: Witness | None
    states_explored: int
    exhausted: bool
    sliced_role_count: int


def _check_query(policy: Policy, query: SafetyQuery) -> None:
    problems = []
    if query.user not in policy.user_set:
        problems.append(f"user {query.user!r}")
    if query.target not in policy.role_set:
        problems.append(f"role {query.target!r}")
    if problems:
        raise InvalidQuery("query references undeclared " + " and ".join(problems))


def _require_well_formed(policy: Policy) -> None:
    errors = validation_errors(policy)
    if errors:
        raise InvalidPolicy(
            "policy has validation errors: " + str(errors[0]), tuple(errors)
        )


def engine_for(role_count: int, impl: str | None) -> str:
    """Resolve the engine label used for ``role_count`` roles.

    ``impl`` may be "bitset", "python", or None/"auto" to pick the jitted
    bitset engine whenever it fits (at most 63 roles) and fall back to
    the unbounded-int Python twin otherwise.
    """
    if impl in (None, "auto"):
        if _engine.HAVE_NUMBA and role_count <= _engine.BITSET_MAX_ROLES:
            return "bitset"
        return "python"
    if impl not in ("bitset", "python"):
        raise ValueError(f"unknown engine {impl!r}")
    return impl


def _relevant_roles(policy: Policy, target: str) -> set[str]:
    if policy.hierarchy.is_empty():
        seniors_of: dict[str, set[str]] | None = None
    else:
        seniors_of = defaultdict(set)
        for role in policy.roles:
            for junior in policy.hierarchy.downward_closure({role}):
                seniors_of[junior].add(role)
    rules_by_target: dict[str, list[CanAssignRule]] = defaultdict(list)
    for rule in policy.ca:
        rules_by_target[rule.target].append(rule)

    relevant: set[str] = set()
    stack = [target]
    while stack:
        role = stack.pop()
        if role in relevant:
            continue
        relevant.add(role)
        if seniors_of is not None:
            stack.extend(seniors_of.get(role, ()))
        for rule in rules_by_target.get(role, ()):
            stack.extend(rule.pre.positive)
            stack.extend(rule.pre.negative)
    return relevant


def _slice_with_maps(
    policy: Policy, query: SafetyQuery
) -> tuple[Policy, list[int], list[int]]:
    """Slice plus the mapping from sliced rule indices back to the
    original policy, so witnesses always refer to original rules."""
    relevant = _relevant_roles(policy, query.target)

    ca_map = [i for i, rule in enumerate(policy.ca) if rule.target in relevant]
    kept_ca = tuple(policy.ca[i] for i in ca_map)

    negatives: set[str] = set()
    for rule in kept_ca:
        negatives |= rule.pre.negative

    hierarchy = policy.hierarchy
    if hierarchy.is_empty():
        cr_map = [i for i, rule in enumerate(policy.cr) if rule.target in negatives]
    else:
        cr_map = [
            i
            for i, rule in enumerate(policy.cr)
            if hierarchy.downward_closure({rule.target}) & negatives
        ]
    kept_cr = tuple(policy.cr[i] for i in cr_map)

    kept_roles = set(relevant)
    kept_roles.update(r for _, r in policy.ua)
    kept_roles.update(rule.admin for rule in kept_ca)
    kept_roles.update(rule.admin for rule in kept_cr)
    kept_roles.update(policy.admin_roles)

    sliced = Policy(
        roles=tuple(r for r in policy.roles if r in kept_roles),
        users=policy.users,
        ua=policy.ua,
        ca=kept_ca,
        cr=kept_cr,
        hierarchy=RoleHierarchy(
            tuple(
                (s, j)
                for s, j in hierarchy.edges
                if s in kept_roles and j in kept_roles
            )
        ),
        admin_roles=policy.admin_roles,
        queries=(query,),
    )
    return sliced, ca_map, cr_map


def slice_policy(policy: Policy, query: SafetyQuery) -> Policy:
    """Restrict ``policy`` to the parts that can influence ``query``.

    Verdict-preserving: reach on the slice equals reach on the original,
    including shortest witness lengths.
    """
    _require_well_formed(policy)
    _check_query(policy, query)
    sliced, _, _ = _slice_with_maps(policy, query)
    return sliced


def _compile_masks(
    policy: Policy,
) -> tuple[list[tuple[bool, int, int, int]], list[int] | None, dict[str, int]]:
    index = {role: i for i, role in enumerate(policy.roles)}

    def mask(roles) -> int:
        m = 0
        for r in roles:
            m |= 1 << index[r]
        return m

    actions: list[tuple[bool, int, int, int]] = []
    for rule in policy.ca:
        actions.append(
            (True, mask(rule.pre.positive), mask(rule.pre.negative), mask((rule.target,)))
        )
    for rule in policy.cr:
        actions.append((False, 0, 0, mask((rule.target,))))

    closure: list[int] | None = None
    if not policy.hierarchy.is_empty():
        closure = [
            mask(policy.hierarchy.downward_closure({role})) for role in policy.roles
        ]
    return actions, closure, index


def reach(
    policy: Policy,
    query: SafetyQuery,
    limits: SearchLimits | None = None,
    use_slicing: bool = True,
    impl: str | None = None,
) -> Verdict:
    """Decide ``query`` by breadth-first search from the user's initial
    assignments.

    Returns Reachable with a shortest witness, Unreachable only when the
    reachable space was exhausted, or Unknown when ``limits`` truncated
    the search first. With ``use_slicing`` the search runs on
    ``slice_policy(policy, query)``; states_explored and
    sliced_role_count describe the instance actually searched, while
    witness rule indices always refer to ``policy``.
    """
    _require_well_formed(policy)
    _check_query(policy, query)
    if limits is None:
        limits = SearchLimits()

    if use_slicing:
        sliced, ca_map, cr_map = _slice_with_maps(policy, query)
    else:
        sliced, ca_map, cr_map = (
            policy,
            list(range(len(policy.ca))),
            list(range(len(policy.cr))),
        )

    actions, closure, index = _compile_masks(sliced)
    init = 0
    for role in sliced.initial_roles(query.user):
        init |= 1 << index[role]

    engine = engine_for(len(sliced.roles), impl)
    run = _engine.run_bitset if engine == "bitset" else _engine.run_python
    result = run(
        init,
        len(sliced.roles),
        actions,
        closure,
        index[query.target],
        limits.max_states,
        limits.max_depth,
    )

    if result.found:
        steps = []
        n_ca = len(sliced.ca)
        for action_id in result.action_ids or []:
            if action_id < n_ca:
                steps.append(
                    ActionStep(
                        ActionKind.ASSIGN,
                        ca_map[action_id],
                        sliced.ca[action_id].target,
                    )
                )
            else:
                steps.append(
                    ActionStep(
                        ActionKind.REVOKE,
                        cr_map[action_id - n_ca],
                        sliced.cr[action_id - n_ca].target,
                    )
                )
        outcome = Outcome.REACHABLE
        witness = Witness(tuple(steps))
    elif result.truncated:
        outcome = Outcome.UNKNOWN
        witness = None
    else:
        outcome = Outcome.UNREACHABLE
        witness = None

    return Verdict(
        outcome=outcome,
        witness=witness,
        states_explored=result.popped,
        exhausted=outcome is Outcome.UNREACHABLE,
        sliced_role_count=len(sliced.roles),
    )


def oracle_reach(
    policy: Policy, query: SafetyQuery, max_roles: int = ORACLE_ROLE_CAP
) -> Verdict:
    """Reference implementation for differential testing.

    Explores every reachable role set with the plain model operations
    (no slicing, no bit packing, no early exit), then reads the answer
    off the completed exploration. Kept intentionally simple; the role
    cap bounds the cost.
    """
    _require_well_formed(policy)
    _check_query(policy, query)
    if len(policy.roles) > max_roles:
        raise TooLarge(
            f"{len(policy.roles)} roles exceed the oracle cap of {max_roles}"
        )

    initial = UserState(policy.initial_roles(query.user))
    states = [initial]
    seen = {initial.assigned}
    parents: list[tuple[int, ActionStep | None]] = [(-1, None)]
    head = 0
    while head < len(states):
        state = states[head]
        for step in applicable_actions(policy, state):
            if step.kind is ActionKind.ASSIGN:
                child = apply_assign(
                    state, policy.ca[step.rule_index], policy.hierarchy
                )
            else:
                child = apply_revoke(state, policy.cr[step.rule_index])
            if child.assigned not in seen:
                seen.add(child.assigned)
                states.append(child)
                parents.append((head, step))
        head += 1

    found = -1
    for i, state in enumerate(states):
        if query.target in authorized_roles(state, policy.hierarchy):
            found = i
            break

    if found < 0:
        return Verdict(
            Outcome.UNREACHABLE, None, len(states), True, len(policy.roles)
        )
    steps = []
    cur = found
    while parents[cur][0] >= 0:
        steps.append(parents[cur][1])
        cur = parents[cur][0]
    steps.reverse()
    return Verdict(
        Outcome.REACHABLE,
        Witness(tuple(steps)),
        len(states),
        True,
        len(policy.roles),
    )


def replay(policy: Policy, query: SafetyQuery, witness: Witness) -> bool:
    """Whether ``witness`` replays legally from the initial state and
    ends with the target authorized. Never raises; every Reachable
    verdict should pass this check."""
    state = UserState(policy.initial_roles(query.user))
    for step in witness.steps:
        try:
            if step.kind is ActionKind.ASSIGN:
                if not 0 <= step.rule_index < len(policy.ca):
                    return False
                rule_a = policy.ca[step.rule_index]
                if rule_a.target != step.role:
                    return False
                state = apply_assign(state, rule_a, policy.hierarchy)
            elif step.kind is ActionKind.REVOKE:
                if not 0 <= step.rule_index < len(policy.cr):
                    return False
                rule_r = policy.cr[step.rule_index]
                if rule_r.target != step.role:
                    return False
                state = apply_revoke(state, rule_r)
            else:
                return False
        except ArbacError:
            return False
    return query.target in authorized_roles(state, policy.hierarchy)
