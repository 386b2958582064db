"""Hot loops over integer tick arrays.

All kernels take ``exec_ticks`` (tasks x sites, int64) and an assignment vector
(task -> site index). Callers precompute two orderings, ties on lower index:
``recv_order[t]`` lists sites nearest-first for task t, and ``task_order[s]``
lists all tasks by descending execution time on site s.
"""

import numpy as np

from ._accel import jit

TICKS = 1_000_000.0

OBJ_SCORE = 0
OBJ_MAKESPAN = 1
OBJ_BLOCKS = 2


@jit
def _blocks(load, dt, block):
    if load <= 0:
        return 0
    return (load + dt + block - 1) // block


@jit
def _running(load, dt):
    if load <= 0:
        return 0
    return load + dt


@jit
def _loads_counts(exec_ticks, assign, n_sites):
    loads = np.zeros(n_sites, np.int64)
    counts = np.zeros(n_sites, np.int64)
    for t in range(assign.shape[0]):
        s = assign[t]
        loads[s] += exec_ticks[t, s]
        counts[s] += 1
    return loads, counts


@jit
def reduce_blocks(exec_ticks, recv_order, task_order, assign, dt, block, min_tb, ledger):
    """Move tasks off high-waste sites while no receiver gains a block.

    Mutates ``assign`` and ``ledger`` in place; returns the number of moves.
    """
    n_sites = exec_ticks.shape[1]
    loads, counts = _loads_counts(exec_ticks, assign, n_sites)
    waste = np.empty(n_sites, np.int64)
    moves = 0
    while True:
        total = 0
        for s in range(n_sites):
            total += _blocks(loads[s], dt, block)
        if total <= min_tb:
            break
        for s in range(n_sites):
            rem = _running(loads[s], dt) % block
            waste[s] = block - rem if rem != 0 else 0
        donors = np.argsort(-waste, kind="mergesort")
        moved = False
        for k in range(n_sites):
            c0 = donors[k]
            if counts[c0] == 0:
                continue
            for t0 in task_order[c0]:
                if assign[t0] != c0:
                    continue
                for j in range(n_sites):
                    c1 = recv_order[t0, j]
                    if c1 == c0 or ledger[t0, c0, c1]:
                        continue
                    grown = loads[c1] + exec_ticks[t0, c1]
                    if _blocks(grown, dt, block) == _blocks(loads[c1], dt, block):
                        loads[c0] -= exec_ticks[t0, c0]
                        counts[c0] -= 1
                        loads[c1] = grown
                        counts[c1] += 1
                        assign[t0] = c1
                        ledger[t0, c0, c1] = True
                        moves += 1
                        moved = True
                        break
                if moved:
                    break
            if moved:
                break
        if not moved:
            break
    return moves


@jit
def balance(exec_ticks, recv_order, task_order, assign, dt, block, fill_idle, block_cap, ledger):
    """Shift the longest tasks off the slowest site while the receiver stays faster.

    A move is taken only if the receiver's new running time is strictly below
    the donor's current one. Idle sites receive tasks only when ``fill_idle``.
    With ``block_cap >= 0`` a move may not push the total block count above
    ``max(block_cap, current total)``. Mutates ``assign`` and ``ledger``.
    """
    n_sites = exec_ticks.shape[1]
    loads, counts = _loads_counts(exec_ticks, assign, n_sites)
    moves = 0
    while True:
        c0 = -1
        for s in range(n_sites):
            if counts[s] > 0 and (c0 < 0 or loads[s] > loads[c0]):
                c0 = s
        if c0 < 0:
            break
        run0 = _running(loads[c0], dt)
        total = 0
        for s in range(n_sites):
            total += _blocks(loads[s], dt, block)
        limit = max(block_cap, total)
        moved = False
        for t0 in task_order[c0]:
            if assign[t0] != c0:
                continue
            shrunk = loads[c0] - exec_ticks[t0, c0]
            for j in range(n_sites):
                c1 = recv_order[t0, j]
                if c1 == c0 or ledger[t0, c0, c1]:
                    continue
                if counts[c1] == 0 and not fill_idle:
                    continue
                grown = loads[c1] + exec_ticks[t0, c1]
                if _running(grown, dt) >= run0:
                    continue
                if block_cap >= 0:
                    after = (total
                             - _blocks(loads[c0], dt, block) - _blocks(loads[c1], dt, block)
                             + _blocks(shrunk, dt, block) + _blocks(grown, dt, block))
                    if after > limit:
                        continue
                loads[c0] = shrunk
                counts[c0] -= 1
                loads[c1] = grown
                counts[c1] += 1
                assign[t0] = c1
                ledger[t0, c0, c1] = True
                moves += 1
                moved = True
                break
            if moved:
                break
        if not moved:
            break
    return moves


# -- exhaustive enumeration ----------------------------------------------------------


@jit
def _objective(loads, dt, block, objective, beta, max_exec, max_blocks):
    peak = 0
    total = 0
    for s in range(loads.shape[0]):
        if loads[s] > peak:
            peak = loads[s]
        total += _blocks(loads[s], dt, block)
    if objective == OBJ_MAKESPAN:
        return float(peak)
    if objective == OBJ_BLOCKS:
        return float(total)
    exec_term = 0.0
    if max_exec > 0:
        exec_term = (peak / TICKS) / max_exec
    block_term = 0.0
    if max_blocks > 0:
        block_term = total / max_blocks
    return beta * exec_term + (1.0 - beta) * block_term


@jit
def enumerate_maxima(exec_ticks, dt, block):
    """Largest makespan (ticks) and block total over every assignment."""
    n_tasks, n_sites = exec_ticks.shape
    assign = np.full(n_tasks, -1, np.int64)
    loads = np.zeros(n_sites, np.int64)
    max_peak = 0
    max_total = 0
    count = 0
    d = 0
    while d >= 0:
        if assign[d] >= 0:
            loads[assign[d]] -= exec_ticks[d, assign[d]]
        assign[d] += 1
        if assign[d] == n_sites:
            assign[d] = -1
            d -= 1
            continue
        loads[assign[d]] += exec_ticks[d, assign[d]]
        if d < n_tasks - 1:
            d += 1
            continue
        count += 1
        total = 0
        for s in range(n_sites):
            if loads[s] > max_peak:
                max_peak = loads[s]
            total += _blocks(loads[s], dt, block)
        if total > max_total:
            max_total = total
    return max_peak, max_total, count


@jit
def enumerate_best(exec_ticks, dt, block, objective, beta, max_exec, max_blocks, prune, best):
    """Depth-first lexicographic search for the minimum objective.

    Writes the winning assignment into ``best``; returns (value, leaves visited).
    Partial objectives never decrease as tasks are added, so cutting a branch
    whose partial value already reaches the incumbent loses nothing; strict
    improvement keeps the lexicographically smallest optimum.
    """
    n_tasks, n_sites = exec_ticks.shape
    assign = np.full(n_tasks, -1, np.int64)
    loads = np.zeros(n_sites, np.int64)
    incumbent = np.inf
    count = 0
    d = 0
    while d >= 0:
        if assign[d] >= 0:
            loads[assign[d]] -= exec_ticks[d, assign[d]]
        assign[d] += 1
        if assign[d] == n_sites:
            assign[d] = -1
            d -= 1
            continue
        loads[assign[d]] += exec_ticks[d, assign[d]]
        if d < n_tasks - 1:
            if prune and _objective(loads, dt, block, objective, beta, max_exec, max_blocks) >= incumbent:
                continue
            d += 1
            continue
        count += 1
        value = _objective(loads, dt, block, objective, beta, max_exec, max_blocks)
        if value < incumbent:
            incumbent = value
            best[:] = assign
    return incumbent, count
