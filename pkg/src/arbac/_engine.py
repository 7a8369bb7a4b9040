"""Search engines for role-set reachability.

Two interchangeable implementations of the same breadth-first search
over bit-packed user states:

* a numba-jitted kernel over uint64 states (at most 63 roles, so a state
  never collides with the hash table's all-ones empty sentinel), using
  an open-addressing visited set and flat queue/parent arrays;
* a plain Python twin over unbounded ints for larger role counts or when
  numba is unavailable.

Both enumerate actions in identical order and insert children in
identical FIFO order, so they return identical results state for state;
the test suite holds them to that.

States are bit masks over the (already sliced) policy's role list. An
action is (is_assign, positive mask, negative mask, target bit). The
authorized set is the state itself for flat policies, or the union of
per-role downward-closure masks otherwise. The target test happens when
a state is popped, so `popped` counts exactly the states whose target
membership was checked.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

try:
    from numba import njit

    HAVE_NUMBA = True
except ImportError:  # pragma: no cover - exercised only without numba
    HAVE_NUMBA = False

BITSET_MAX_ROLES = 63

_EMPTY = np.uint64(0xFFFFFFFFFFFFFFFF)
_ONE = np.uint64(1)
_ZERO = np.uint64(0)


@dataclass
class SearchResult:
    found: bool
    action_ids: list[int] | None  # rule-array positions along the witness path
    popped: int
    truncated: bool


if HAVE_NUMBA:

    @njit(cache=True)
    def _mix64(x):
        # splitmix64 finalizer; full-avalanche hash for the visited set
        x = (x ^ (x >> np.uint64(30))) * np.uint64(0xBF58476D1CE4E5B9)
        x = (x ^ (x >> np.uint64(27))) * np.uint64(0x94D049BB133111EB)
        return x ^ (x >> np.uint64(31))

    @njit(cache=True)
    def _bfs_bitset(
        init,
        n_roles,
        is_assign,
        pos,
        neg,
        tbit,
        rbit,
        closure,
        use_closure,
        target_bit,
        max_states,
        max_depth,
    ):
        cap = np.int64(1) << 16
        keys = np.full(cap, _EMPTY, np.uint64)
        mask = np.uint64(cap - 1)

        qcap = np.int64(1) << 16
        queue = np.empty(qcap, np.uint64)
        parent = np.empty(qcap, np.int64)
        pact = np.empty(qcap, np.int32)

        queue[0] = init
        parent[0] = np.int64(-1)
        pact[0] = np.int32(-1)
        keys[_mix64(init) & mask] = init
        size = np.int64(1)
        head = np.int64(0)

        n_act = is_assign.shape[0]
        found = np.int64(-1)
        truncated = False
        depth = np.int64(0)
        level_end = np.int64(1)

        while head < size:
            if max_states >= 0 and head >= max_states:
                truncated = True
                break
            if head == level_end:
                depth += 1
                level_end = size
            s = queue[head]
            if use_closure:
                auth = _ZERO
                for i in range(n_roles):
                    if s & rbit[i] != _ZERO:
                        auth |= closure[i]
            else:
                auth = s
            if auth & target_bit != _ZERO:
                found = head
                break
            expand = max_depth < 0 or depth < max_depth
            for a in range(n_act):
                if is_assign[a]:
                    if s & tbit[a] != _ZERO:
                        continue
                    if auth & pos[a] != pos[a]:
                        continue
                    if auth & neg[a] != _ZERO:
                        continue
                    c = s | tbit[a]
                else:
                    if s & tbit[a] == _ZERO:
                        continue
                    c = s & ~tbit[a]
                h = _mix64(c) & mask
                present = False
                while keys[h] != _EMPTY:
                    if keys[h] == c:
                        present = True
                        break
                    h = (h + _ONE) & mask
                if present:
                    continue
                if not expand:
                    truncated = True
                    continue
                keys[h] = c
                if size == qcap:
                    qcap = qcap * 2
                    nq = np.empty(qcap, np.uint64)
                    nq[:size] = queue[:size]
                    queue = nq
                    npar = np.empty(qcap, np.int64)
                    npar[:size] = parent[:size]
                    parent = npar
                    npa = np.empty(qcap, np.int32)
                    npa[:size] = pact[:size]
                    pact = npa
                queue[size] = c
                parent[size] = head
                pact[size] = np.int32(a)
                size += 1
                if size * np.int64(2) > cap:
                    ncap = cap * 2
                    nkeys = np.full(ncap, _EMPTY, np.uint64)
                    nmask = np.uint64(ncap - 1)
                    for j in range(size):
                        v = queue[j]
                        hh = _mix64(v) & nmask
                        while nkeys[hh] != _EMPTY:
                            hh = (hh + _ONE) & nmask
                        nkeys[hh] = v
                    keys = nkeys
                    cap = ncap
                    mask = nmask
            head += 1

        popped = head + np.int64(1) if found >= 0 else head
        return found, popped, truncated, parent[:size], pact[:size]


def _trace(found: int, parent, pact) -> list[int]:
    ids: list[int] = []
    cur = found
    while parent[cur] >= 0:
        ids.append(int(pact[cur]))
        cur = parent[cur]
    ids.reverse()
    return ids


def run_bitset(
    init: int,
    n_roles: int,
    actions: list[tuple[bool, int, int, int]],
    closure: list[int] | None,
    target_idx: int,
    max_states: int | None,
    max_depth: int | None,
) -> SearchResult:
    if not HAVE_NUMBA:
        raise RuntimeError("numba is not available; use the python engine")
    if n_roles > BITSET_MAX_ROLES:
        raise ValueError(
            f"bitset engine supports at most {BITSET_MAX_ROLES} roles, got {n_roles}"
        )
    n_act = len(actions)
    is_assign = np.zeros(n_act, np.bool_)
    pos = np.zeros(n_act, np.uint64)
    neg = np.zeros(n_act, np.uint64)
    tbit = np.zeros(n_act, np.uint64)
    for i, (asg, p, n, t) in enumerate(actions):
        is_assign[i] = asg
        pos[i] = p
        neg[i] = n
        tbit[i] = t
    rbit = np.array([1 << i for i in range(n_roles)], np.uint64)
    if closure is None:
        closure_arr = rbit
        use_closure = False
    else:
        closure_arr = np.array(closure, np.uint64)
        use_closure = True
    found, popped, truncated, parent, pact = _bfs_bitset(
        np.uint64(init),
        np.int64(n_roles),
        is_assign,
        pos,
        neg,
        tbit,
        rbit,
        closure_arr,
        use_closure,
        np.uint64(1 << target_idx),
        np.int64(-1 if max_states is None else max_states),
        np.int64(-1 if max_depth is None else max_depth),
    )
    trace = _trace(int(found), parent, pact) if found >= 0 else None
    return SearchResult(found >= 0, trace, int(popped), bool(truncated))


def run_python(
    init: int,
    n_roles: int,
    actions: list[tuple[bool, int, int, int]],
    closure: list[int] | None,
    target_idx: int,
    max_states: int | None,
    max_depth: int | None,
) -> SearchResult:
    target_bit = 1 << target_idx
    visited = {init}
    queue = [init]
    parent = [-1]
    pact = [-1]
    head = 0
    found = -1
    truncated = False
    depth = 0
    level_end = 1
    while head < len(queue):
        if max_states is not None and head >= max_states:
            truncated = True
            break
        if head == level_end:
            depth += 1
            level_end = len(queue)
        s = queue[head]
        if closure is not None:
            auth = 0
            for i in range(n_roles):
                if s >> i & 1:
                    auth |= closure[i]
        else:
            auth = s
        if auth & target_bit:
            found = head
            break
        expand = max_depth is None or depth < max_depth
        for a, (is_assign, pos, neg, tbit) in enumerate(actions):
            if is_assign:
                if s & tbit or (auth & pos) != pos or auth & neg:
                    continue
                c = s | tbit
            else:
                if not s & tbit:
                    continue
                c = s & ~tbit
            if c in visited:
                continue
            if not expand:
                truncated = True
                continue
            visited.add(c)
            queue.append(c)
            parent.append(head)
            pact.append(a)
        head += 1
    popped = head + 1 if found >= 0 else head
    trace = _trace(found, parent, pact) if found >= 0 else None
    return SearchResult(found >= 0, trace, popped, truncated)
