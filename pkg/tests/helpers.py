"""Shared test fixtures: seeded random policy corpus, the single-division
micro policy, and the clerk-rule mutation used by the detection tests."""

from __future__ import annotations

import random

from arbac.model import (
    CanAssignRule,
    CanRevokeRule,
    Policy,
    Precondition,
    RoleHierarchy,
    SafetyQuery,
    validation_errors,
)
from arbac.sop import SopConstraint, compile_sop, compile_sop_monitor

# Mix of plain, hyphenated, underscored and suffixed names to keep the
# parser honest in round-trip tests.
_NAME_POOL = (
    "boss",
    "r0",
    "r1",
    "r2",
    "r3",
    "r4",
    "acct-mgr",
    "dev_ops",
    "aud@2",
    "Z9-k",
    "_tmp",
    "lead",
)


def random_policy(seed: int) -> tuple[Policy, SafetyQuery]:
    """Small random policy plus a query against it, deterministic in the
    seed. Always well-formed: at most 8 roles, 12 can_assign rules,
    4 can_revoke rules, occasionally a hierarchy and a second user."""
    rng = random.Random(seed)
    n_roles = rng.randint(2, 8)
    roles = tuple(rng.sample(_NAME_POOL, n_roles))
    users = ("u0", "u1") if rng.random() < 0.3 else ("u0",)

    ua = []
    for user in users:
        for role in roles:
            if rng.random() < 0.15:
                ua.append((user, role))

    ca = []
    for _ in range(rng.randint(0, 12)):
        target = rng.choice(roles)
        rest = [r for r in roles if r != target]
        pos_k = rng.randint(0, min(2, len(rest)))
        neg_k = rng.randint(0, min(2, len(rest) - pos_k))
        picked = rng.sample(rest, pos_k + neg_k)
        ca.append(
            CanAssignRule(
                rng.choice(roles),
                Precondition(frozenset(picked[:pos_k]), frozenset(picked[pos_k:])),
                target,
            )
        )

    cr = [
        CanRevokeRule(rng.choice(roles), rng.choice(roles))
        for _ in range(rng.randint(0, 4))
    ]

    edges = []
    if rng.random() < 0.25:
        # edges always point from lower to higher index, hence acyclic
        for i in range(n_roles):
            for j in range(i + 1, n_roles):
                if rng.random() < 0.15:
                    edges.append((roles[i], roles[j]))

    ca_targets = [rule.target for rule in ca]
    if ca_targets and rng.random() < 0.6:
        target = rng.choice(ca_targets)
    else:
        target = rng.choice(roles)
    query = SafetyQuery("u0", target)

    policy = Policy(
        roles=roles,
        users=users,
        ua=tuple(ua),
        ca=tuple(ca),
        cr=tuple(cr),
        hierarchy=RoleHierarchy(tuple(edges)),
        admin_roles=(),
        queries=(query,),
    )
    assert not validation_errors(policy), f"seed {seed} built an ill-formed policy"
    return policy, query


FA_NON_MANAGERIAL = ("FA-Asst", "FA-Special", "FA-Senior", "FA-Junior", "FA-Clerk")


def single_division_policy(mutated: bool = False) -> Policy:
    """One division in isolation: bootstraps, the full SOP family, the
    five monitor rules, and revokes. Small enough for the oracle.

    With ``mutated`` the clerk rule that admits the Asst+Special pair
    loses its FA-Junior prohibition, opening a path to four held roles.
    """
    constraint = SopConstraint(FA_NON_MANAGERIAL, 3)
    ca = [
        CanAssignRule("Admin", Precondition(), "Employee"),
        CanAssignRule("Admin", Precondition(frozenset({"Employee"})), "FA"),
    ]
    ca.extend(compile_sop(constraint, guard=frozenset({"FA"}), admin="Admin").rules)
    ca.extend(compile_sop_monitor(constraint, monitor="AnyFour", admin="Admin"))
    if mutated:
        ca = [drop_junior_prohibition(rule, "") for rule in ca]
    cr = [CanRevokeRule("Admin", r) for r in ("Employee", "FA", *FA_NON_MANAGERIAL)]
    return Policy(
        roles=("Admin", "Employee", "FA", *FA_NON_MANAGERIAL, "AnyFour"),
        users=("newUser",),
        ua=(),
        ca=tuple(ca),
        cr=tuple(cr),
        admin_roles=("Admin",),
        queries=(SafetyQuery("newUser", "AnyFour"),),
    )


def _clerk_pair_rule_parts(suffix: str):
    pos = frozenset({f"FA{suffix}", f"FA-Asst{suffix}", f"FA-Special{suffix}"})
    neg = frozenset({f"FA-Senior{suffix}", f"FA-Junior{suffix}"})
    return f"FA-Clerk{suffix}", pos, neg


def drop_junior_prohibition(rule: CanAssignRule, suffix: str) -> CanAssignRule:
    """Strip ``-FA-Junior`` from the clerk rule guarded by the
    Asst+Special pair; leave every other rule untouched."""
    target, pos, neg = _clerk_pair_rule_parts(suffix)
    if rule.target != target or rule.pre.positive != pos or rule.pre.negative != neg:
        return rule
    return CanAssignRule(
        rule.admin,
        Precondition(pos, frozenset({f"FA-Senior{suffix}"})),
        target,
    )


def mutate_bank(policy: Policy, branch: int) -> Policy:
    """Weaken one clerk rule of ``branch``; exactly one rule changes."""
    suffix = f"@{branch}"
    new_ca = tuple(drop_junior_prohibition(rule, suffix) for rule in policy.ca)
    changed = sum(1 for a, b in zip(policy.ca, new_ca) if a != b)
    assert changed == 1, f"expected exactly one mutated rule, got {changed}"
    return Policy(
        roles=policy.roles,
        users=policy.users,
        ua=policy.ua,
        ca=new_ca,
        cr=policy.cr,
        hierarchy=policy.hierarchy,
        admin_roles=policy.admin_roles,
        queries=policy.queries,
    )
