"""Hot numeric kernels: ant construction, feasibility, local search.

Every function here operates on flat numpy arrays so that the whole inner
loop of a run compiles under numba. The backend is picked once at import
time from the ``DCSSP_BACKEND`` environment variable:

* ``numba`` (default when numba is importable): kernels are ``@njit``-compiled.
* ``numpy``: the same source runs as plain Python over numpy scalars/arrays.

Both backends draw from the same splitmix64 generator and execute identical
arithmetic, so results are bit-for-bit equal; the numpy path exists as a
debuggable reference and for machines without a working numba.

Status codes returned by :func:`construct_tree`:

==== =========================================================
0    success
1    starved: a non-leaf device type has no child ports
2    degenerate selection weights (all zero or non-finite)
3    starved: no leaf has channel capacity for a loop
4    starved: no level admits processing a loop
5    node capacity of the work arrays exceeded
==== =========================================================

:func:`solution_feasible` returns 0 for a feasible solution, the violated
constraint number 1..9 otherwise, or 10 for structurally malformed input.
"""

from __future__ import annotations

import math
import os
from functools import wraps

import numpy as np

_FLAG = os.environ.get("DCSSP_BACKEND", "").strip().lower()
if _FLAG not in ("", "numba", "numpy"):
    raise RuntimeError(f"DCSSP_BACKEND must be 'numba' or 'numpy', got {_FLAG!r}")

if _FLAG == "numpy":
    BACKEND = "numpy"
else:
    try:
        import numba

        BACKEND = "numba"
    except ImportError:
        if _FLAG == "numba":
            raise
        BACKEND = "numpy"


def _jit(fn):
    if BACKEND == "numba":
        return numba.njit(cache=True)(fn)

    # Reference path: identical source over numpy scalars. uint64 wraparound is
    # intended, so silence the scalar overflow warnings numba never emits.
    @wraps(fn)
    def wrapper(*args):
        with np.errstate(over="ignore"):
            return fn(*args)

    return wrapper


_GOLDEN = np.uint64(0x9E3779B97F4A7C15)
_MIX1 = np.uint64(0xBF58476D1CE4E5B9)
_MIX2 = np.uint64(0x94D049BB133111EB)
_U53 = 1.0 / 9007199254740992.0  # 2**-53


def _splitmix(state):
    """One splitmix64 step: returns (next_state, 64 random bits).

    The entry cast keeps the arithmetic unsigned even when a caller hands the
    state back as a plain integer (shifts on a signed state would diverge).
    """
    state = np.uint64(state) + _GOLDEN
    z = state
    z = (z ^ (z >> np.uint64(30))) * _MIX1
    z = (z ^ (z >> np.uint64(27))) * _MIX2
    z = z ^ (z >> np.uint64(31))
    return state, z


def _pick(w, m, state):
    """Draw an index in [0, m) with probability w[i]/sum(w).

    Returns (-1, state) when any weight is negative or non-finite, or when the
    total is not a positive finite number.
    """
    state = np.uint64(state)
    total = 0.0
    for i in range(m):
        wi = w[i]
        if math.isnan(wi) or wi < 0.0 or math.isinf(wi):
            return np.int64(-1), state
        total += wi
    if total <= 0.0 or math.isinf(total):
        return np.int64(-1), state
    state, z = _splitmix(state)
    u = np.float64(z >> np.uint64(11)) * _U53
    threshold = u * total
    acc = 0.0
    for i in range(m):
        acc += w[i]
        if acc > threshold:
            return np.int64(i), state
    return np.int64(m - 1), state


def _construct_tree(cost, channels, memory, fail_prob, instr_time, mode,
                    max_children, relay_delay,
                    loop_signals, loop_mem, loop_instr,
                    n_levels, max_cycle_time, min_reliability, max_forward_delay,
                    type_table, count_table, loop_level_table,
                    alpha, beta, seed, node_cap):
    """Build one candidate tree root-to-leaves and place every loop.

    The ant's step is split into separate decisions: root type, child count
    per node, each child's type, then per loop a connect leaf and a processing
    level. Pheromone-weighted choices trace their table cells for later
    deposit; the leaf choice has no table (pheromone mass 1) and is untraced.
    """
    U = cost.shape[0]
    A = loop_signals.shape[0]
    S = n_levels
    Mmax = count_table.shape[2]

    node_type = np.full(node_cap, -1, np.int64)
    node_level = np.zeros(node_cap, np.int64)
    node_parent = np.full(node_cap, -1, np.int64)
    loop_leaf = np.full(A, -1, np.int64)
    loop_proc = np.full(A, -1, np.int64)
    trace_cap = 2 * node_cap + A + 1
    trace_table = np.zeros(trace_cap, np.int64)
    trace_cell = np.zeros(trace_cap, np.int64)
    ntrace = 0

    buf = U
    if Mmax > buf:
        buf = Mmax
    if node_cap > buf:
        buf = node_cap
    if S > buf:
        buf = S
    w = np.zeros(buf, np.float64)
    cand = np.zeros(buf, np.int64)

    state = np.uint64(seed)

    # Root: processors only, desirability 1/cost, pheromone from the root context.
    m = 0
    for c in range(U):
        if mode[c] == 0:
            cand[m] = c
            w[m] = type_table[0, U, c] ** alpha * (1.0 / cost[c]) ** beta
            m += 1
    idx, state = _pick(w, m, state)
    if idx < 0:
        return (np.int64(2), np.int64(0), node_type, node_level, node_parent,
                loop_leaf, loop_proc, trace_table, trace_cell, np.int64(0))
    root_t = cand[idx]
    node_type[0] = root_t
    node_level[0] = 1
    nn = 1
    trace_table[ntrace] = 0
    trace_cell[ntrace] = (0 * (U + 1) + U) * U + root_t
    ntrace += 1

    # Breadth-first over levels: pick a child count, then each child's type.
    lev_start = 0
    lev_end = 1
    for lvl in range(1, S):
        for v in range(lev_start, lev_end):
            t = node_type[v]
            M = max_children[t]
            if M < 1:
                return (np.int64(1), nn, node_type, node_level, node_parent,
                        loop_leaf, loop_proc, trace_table, trace_cell, np.int64(ntrace))
            for k in range(M):
                w[k] = count_table[lvl - 1, t, k] ** alpha
            idx, state = _pick(w, M, state)
            if idx < 0:
                return (np.int64(2), nn, node_type, node_level, node_parent,
                        loop_leaf, loop_proc, trace_table, trace_cell, np.int64(ntrace))
            n_kids = idx + 1
            trace_table[ntrace] = 1
            trace_cell[ntrace] = (lvl - 1) * U * Mmax + t * Mmax + idx
            ntrace += 1
            for _kid in range(n_kids):
                m = 0
                for c in range(U):
                    if mode[t] == 1 and mode[c] == 0:
                        continue  # repeaters may only have repeater descendants
                    cand[m] = c
                    w[m] = type_table[lvl, t, c] ** alpha * (1.0 / cost[c]) ** beta
                    m += 1
                idx, state = _pick(w, m, state)
                if idx < 0:
                    return (np.int64(2), nn, node_type, node_level, node_parent,
                            loop_leaf, loop_proc, trace_table, trace_cell, np.int64(ntrace))
                c = cand[idx]
                if nn >= node_cap:
                    return (np.int64(5), nn, node_type, node_level, node_parent,
                            loop_leaf, loop_proc, trace_table, trace_cell, np.int64(ntrace))
                node_type[nn] = c
                node_level[nn] = lvl + 1
                node_parent[nn] = v
                nn += 1
                trace_table[ntrace] = 0
                trace_cell[ntrace] = (lvl * (U + 1) + t) * U + c
                ntrace += 1
        lev_start = lev_end
        lev_end = nn

    leaf_lo = lev_start
    leaf_hi = lev_end

    rem = np.zeros(leaf_hi - leaf_lo, np.int64)
    for li in range(leaf_lo, leaf_hi):
        rem[li - leaf_lo] = channels[node_type[li]]
    used_mem = np.zeros(nn, np.float64)
    used_instr = np.zeros(nn, np.int64)

    order = np.arange(A)
    for i in range(A - 1, 0, -1):
        state, z = _splitmix(state)
        j = np.int64(z % np.uint64(i + 1))
        tmp = order[i]
        order[i] = order[j]
        order[j] = tmp

    for oi in range(A):
        j = order[oi]
        nj = loop_signals[j]
        # Connect leaf: any leaf with room, weighted by remaining capacity.
        m = 0
        for li in range(leaf_lo, leaf_hi):
            r = rem[li - leaf_lo]
            if r >= nj:
                cand[m] = li
                w[m] = (np.float64(r) + 1.0) ** beta
                m += 1
        if m == 0:
            return (np.int64(3), nn, node_type, node_level, node_parent,
                    loop_leaf, loop_proc, trace_table, trace_cell, np.int64(ntrace))
        idx, state = _pick(w, m, state)
        if idx < 0:
            return (np.int64(2), nn, node_type, node_level, node_parent,
                    loop_leaf, loop_proc, trace_table, trace_cell, np.int64(ntrace))
        leaf = cand[idx]

        # Processing level: walk the ancestor chain, keeping processors whose
        # remaining memory and cycle-time slack admit this loop and whose path
        # already satisfies the reliability floor and delay cap.
        rel = 1.0
        dly = 0.0
        v = leaf
        m = 0
        while v >= 0:
            t = node_type[v]
            rel *= 1.0 - fail_prob[t]
            if mode[t] == 0:
                if (used_mem[v] + loop_mem[j] <= memory[t]
                        and instr_time[t] * (used_instr[v] + loop_instr[j]) <= max_cycle_time
                        and rel >= min_reliability
                        and dly <= max_forward_delay):
                    cand[m] = v
                    w[m] = loop_level_table[j, node_level[v] - 1] ** alpha
                    m += 1
            dly += relay_delay[t]
            v = node_parent[v]
        if m == 0:
            return (np.int64(4), nn, node_type, node_level, node_parent,
                    loop_leaf, loop_proc, trace_table, trace_cell, np.int64(ntrace))
        idx, state = _pick(w, m, state)
        if idx < 0:
            return (np.int64(2), nn, node_type, node_level, node_parent,
                    loop_leaf, loop_proc, trace_table, trace_cell, np.int64(ntrace))
        p = cand[idx]
        trace_table[ntrace] = 2
        trace_cell[ntrace] = j * S + (node_level[p] - 1)
        ntrace += 1
        loop_leaf[j] = leaf
        loop_proc[j] = p
        rem[leaf - leaf_lo] -= nj
        used_mem[p] += loop_mem[j]
        used_instr[p] += loop_instr[j]

    return (np.int64(0), np.int64(nn), node_type, node_level, node_parent,
            loop_leaf, loop_proc, trace_table, trace_cell, np.int64(ntrace))


def _solution_feasible(node_type, node_level, node_parent, nn,
                       loop_leaf, loop_proc,
                       cost, channels, memory, fail_prob, instr_time, mode,
                       max_children, relay_delay,
                       loop_signals, loop_mem, loop_instr,
                       n_levels, max_cycle_time, min_reliability, max_forward_delay):
    """Array twin of the reference constraint checker; see module docstring."""
    A = loop_signals.shape[0]
    S = n_levels
    n_roots = 0
    for v in range(nn):
        p = node_parent[v]
        if p < 0:
            n_roots += 1
            if node_level[v] != 1:
                return np.int64(8)
        else:
            if p >= nn:
                return np.int64(10)
            if node_level[v] != node_level[p] + 1:
                return np.int64(8)
    if n_roots != 1:
        return np.int64(10)

    child_count = np.zeros(nn, np.int64)
    for v in range(nn):
        if node_parent[v] >= 0:
            child_count[node_parent[v]] += 1
    for v in range(nn):
        t = node_type[v]
        if child_count[v] == 0 and node_level[v] != S:
            return np.int64(8)
        if child_count[v] > max_children[t]:
            return np.int64(2)
        if child_count[v] < 1 and node_level[v] < S:
            return np.int64(2)
        p = node_parent[v]
        if p >= 0 and mode[node_type[p]] == 1 and mode[t] == 0:
            return np.int64(9)

    sig = np.zeros(nn, np.int64)
    used_mem = np.zeros(nn, np.float64)
    used_instr = np.zeros(nn, np.int64)
    for j in range(A):
        lf = loop_leaf[j]
        pr = loop_proc[j]
        if lf < 0 or lf >= nn or pr < 0 or pr >= nn:
            return np.int64(10)
        if child_count[lf] != 0:
            return np.int64(10)
        sig[lf] += loop_signals[j]
        used_mem[pr] += loop_mem[j]
        used_instr[pr] += loop_instr[j]
    for v in range(nn):
        t = node_type[v]
        if child_count[v] == 0 and sig[v] > channels[t]:
            return np.int64(1)
        if mode[t] == 0:
            if used_mem[v] > memory[t]:
                return np.int64(3)
            if instr_time[t] * used_instr[v] > max_cycle_time:
                return np.int64(4)
    for j in range(A):
        pr = loop_proc[j]
        if mode[node_type[pr]] == 1:
            return np.int64(7)
        rel = 1.0
        dly = 0.0
        v = loop_leaf[j]
        found = False
        while v >= 0:
            t = node_type[v]
            rel *= 1.0 - fail_prob[t]
            if v == pr:
                found = True
                break
            dly += relay_delay[t]
            v = node_parent[v]
        if not found:
            return np.int64(10)
        if rel < min_reliability:
            return np.int64(5)
        if dly > max_forward_delay:
            return np.int64(6)
    return np.int64(0)


def _tree_cost(node_type, nn, cost):
    total = 0.0
    for v in range(nn):
        total += cost[node_type[v]]
    return total


def _improve_types(node_type, node_level, node_parent, nn,
                   loop_leaf, loop_proc,
                   cost, channels, memory, fail_prob, instr_time, mode,
                   max_children, relay_delay,
                   loop_signals, loop_mem, loop_instr,
                   n_levels, max_cycle_time, min_reliability, max_forward_delay,
                   budget):
    """Descend on device types, first-improvement, until a fixed point.

    Move M1 replaces one node's type with a strictly cheaper same-mode type;
    move M2 swaps the types of two different-type same-mode nodes (cost
    neutral) and is only kept when it enables an M1 acceptance at one of the
    swapped nodes within the same composite step. ``node_type`` is modified in
    place; placements never move. Accepted M1 counts as one move, an accepted
    composite as two. Returns (total cost, moves used).
    """
    U = cost.shape[0]
    moves = np.int64(0)
    total = _tree_cost(node_type, nn, cost)

    improved = True
    while improved:
        improved = False
        # M1 passes to a fixed point.
        changed = True
        while changed:
            changed = False
            for v in range(nn):
                if moves + 1 > budget:
                    return total, moves
                t = node_type[v]
                for c in range(U):
                    if c == t or mode[c] != mode[t] or cost[c] >= cost[t]:
                        continue
                    node_type[v] = c
                    ok = _solution_feasible(
                        node_type, node_level, node_parent, nn, loop_leaf, loop_proc,
                        cost, channels, memory, fail_prob, instr_time, mode,
                        max_children, relay_delay, loop_signals, loop_mem, loop_instr,
                        n_levels, max_cycle_time, min_reliability, max_forward_delay)
                    if ok == 0:
                        total += cost[c] - cost[t]
                        moves += 1
                        changed = True
                        improved = True
                        break
                    node_type[v] = t
        # One M2 composite, then back to M1.
        if moves + 2 > budget:
            return total, moves
        accepted = False
        for u in range(nn):
            if accepted:
                break
            for v2 in range(u + 1, nn):
                tu = node_type[u]
                tv = node_type[v2]
                if tu == tv or mode[tu] != mode[tv]:
                    continue
                node_type[u] = tv
                node_type[v2] = tu
                ok = _solution_feasible(
                    node_type, node_level, node_parent, nn, loop_leaf, loop_proc,
                    cost, channels, memory, fail_prob, instr_time, mode,
                    max_children, relay_delay, loop_signals, loop_mem, loop_instr,
                    n_levels, max_cycle_time, min_reliability, max_forward_delay)
                if ok != 0:
                    node_type[u] = tu
                    node_type[v2] = tv
                    continue
                for wi in range(2):
                    node_w = u if wi == 0 else v2
                    tw = node_type[node_w]
                    for c in range(U):
                        if c == tw or mode[c] != mode[tw] or cost[c] >= cost[tw]:
                            continue
                        node_type[node_w] = c
                        ok = _solution_feasible(
                            node_type, node_level, node_parent, nn, loop_leaf, loop_proc,
                            cost, channels, memory, fail_prob, instr_time, mode,
                            max_children, relay_delay, loop_signals, loop_mem, loop_instr,
                            n_levels, max_cycle_time, min_reliability, max_forward_delay)
                        if ok == 0:
                            total += cost[c] - cost[tw]
                            moves += 2
                            accepted = True
                            break
                        node_type[node_w] = tw
                    if accepted:
                        break
                if accepted:
                    improved = True
                    break
                node_type[u] = tu
                node_type[v2] = tv
    return total, moves


_splitmix = _jit(_splitmix)
_pick = _jit(_pick)
_tree_cost = _jit(_tree_cost)
_solution_feasible = _jit(_solution_feasible)
_construct_tree = _jit(_construct_tree)
_improve_types = _jit(_improve_types)

# Public names. Keeping the jitted objects separate from the defs above lets
# the numba path resolve kernel-to-kernel calls at compile time.
splitmix = _splitmix
pick_weighted = _pick
tree_cost = _tree_cost
solution_feasible = _solution_feasible
construct_tree = _construct_tree
improve_types = _improve_types


def derive_seed(*parts: int) -> int:
    """Fold integers into one 64-bit seed (pure Python, backend-independent)."""
    mask = (1 << 64) - 1
    s = 0x8A5CD789635D2DFF
    for p in parts:
        s = (s ^ (p & mask)) & mask
        # splitmix64 finalizer
        s = (s + 0x9E3779B97F4A7C15) & mask
        z = s
        z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & mask
        z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & mask
        s = z ^ (z >> 31)
    return s
