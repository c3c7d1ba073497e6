"""Compiled run-to-absorption engine.

Flat-array translation of the python engine: adjacency rows and the
discordant pool use the same dense-array-plus-position-map layout as
graph.IndexedSet, and every append/swap-remove happens in the same order
the python structures perform it, against the same random stream.  A
(params, seed) pair therefore produces the identical run in both engines;
a test asserts field-for-field equality of the outcomes.

Layout, for n vertices (1-based, m = n + 1):
  adj_list[x, i]  i-th neighbor of x          int32[m, n]
  adj_len[x]      degree of x                 int32[m]
  adj_pos[x, y]   index of y in adj_list[x]   int32[m, m], -1 if absent
  disc_items[i]   packed edge key a*m + b     int64[n(n-1)/2]
  disc_pos[key]   index in disc_items         int32[m*m], -1 if absent
"""

from __future__ import annotations

import numpy as np
from numba import njit

from .rng import rand_below, rand_unit, seed_state


@njit(cache=True, nogil=True)
def _run_core(n, k, q, opinion, edges, complete, state):
    m = n + 1
    adj_list = np.zeros((m, n), np.int32)
    adj_len = np.zeros(m, np.int32)
    adj_pos = np.full((m, m), -1, np.int32)
    disc_items = np.zeros(n * (n - 1) // 2 + 1, np.int64)
    disc_pos = np.full(m * m, -1, np.int32)
    counts = np.zeros(k, np.int64)
    for x in range(1, m):
        counts[opinion[x]] += 1

    n_disc = 0
    n_edges = 0
    if complete:
        for a in range(1, m):
            for b in range(a + 1, m):
                adj_pos[a, b] = adj_len[a]
                adj_list[a, adj_len[a]] = b
                adj_len[a] += 1
                adj_pos[b, a] = adj_len[b]
                adj_list[b, adj_len[b]] = a
                adj_len[b] += 1
                n_edges += 1
                if opinion[a] != opinion[b]:
                    key = a * m + b
                    disc_pos[key] = n_disc
                    disc_items[n_disc] = key
                    n_disc += 1
    else:
        for i in range(edges.shape[0]):
            a = np.int64(edges[i, 0])
            b = np.int64(edges[i, 1])
            adj_pos[a, b] = adj_len[a]
            adj_list[a, adj_len[a]] = b
            adj_len[a] += 1
            adj_pos[b, a] = adj_len[b]
            adj_list[b, adj_len[b]] = a
            adj_len[b] += 1
            n_edges += 1
            if opinion[a] != opinion[b]:
                key = a * m + b
                disc_pos[key] = n_disc
                disc_items[n_disc] = key
                n_disc += 1

    s_op = 0
    s_del = 0
    while n_disc > 0:
        idx = rand_below(state, n_disc)
        key = disc_items[idx]
        a = key // m
        b = key - a * m
        if rand_unit(state) < q:
            oa = opinion[a]
            ob = opinion[b]
            if rand_unit(state) < 0.5:
                winner = oa if oa > ob else ob
            else:
                winner = oa if oa < ob else ob
            loser = a if oa != winner else b
            old = opinion[loser]
            opinion[loser] = winner
            counts[old] -= 1
            counts[winner] += 1
            deg = adj_len[loser]
            for j in range(deg):
                t = np.int64(adj_list[loser, j])
                ot = opinion[t]
                if loser < t:
                    ekey = loser * m + t
                else:
                    ekey = t * m + loser
                if ot != old:
                    if ot == winner:
                        # was discordant, now concordant: swap-remove
                        p = disc_pos[ekey]
                        lastk = disc_items[n_disc - 1]
                        disc_items[p] = lastk
                        disc_pos[lastk] = p
                        disc_pos[ekey] = -1
                        n_disc -= 1
                elif ot != winner:
                    # was concordant, now discordant: append
                    disc_pos[ekey] = n_disc
                    disc_items[n_disc] = ekey
                    n_disc += 1
            s_op += 1
        else:
            # delete edge (a, b): swap-remove in both adjacency rows
            p = adj_pos[a, b]
            lastv = adj_list[a, adj_len[a] - 1]
            adj_list[a, p] = lastv
            adj_pos[a, lastv] = p
            adj_pos[a, b] = -1
            adj_len[a] -= 1
            p = adj_pos[b, a]
            lastv = adj_list[b, adj_len[b] - 1]
            adj_list[b, p] = lastv
            adj_pos[b, lastv] = p
            adj_pos[b, a] = -1
            adj_len[b] -= 1
            p = disc_pos[key]
            lastk = disc_items[n_disc - 1]
            disc_items[p] = lastk
            disc_pos[lastk] = p
            disc_pos[key] = -1
            n_disc -= 1
            n_edges -= 1
            s_del += 1

    return s_op, s_del, n_edges, counts, adj_list, adj_len


@njit(cache=True, nogil=True)
def _analyze_graph(n, adj_list, adj_len, opinion):
    """Component sizes (descending), min degree, and the number of
    present edges with differing endpoint opinions (must be 0 at
    absorption; returned so the wrapper can hard-assert it)."""
    seen = np.zeros(n + 1, np.uint8)
    stack = np.empty(n, np.int64)
    sizes = np.zeros(n, np.int64)
    n_comp = 0
    for start in range(1, n + 1):
        if seen[start] == 1:
            continue
        seen[start] = 1
        stack[0] = start
        top = 1
        size = 0
        while top > 0:
            top -= 1
            v = stack[top]
            size += 1
            for j in range(adj_len[v]):
                w = np.int64(adj_list[v, j])
                if seen[w] == 0:
                    seen[w] = 1
                    stack[top] = w
                    top += 1
        sizes[n_comp] = size
        n_comp += 1
    out = np.sort(sizes[:n_comp])[::-1].copy()
    min_deg = np.int64(adj_len[1])
    for v in range(2, n + 1):
        if adj_len[v] < min_deg:
            min_deg = np.int64(adj_len[v])
    discordant_left = 0
    for v in range(1, n + 1):
        for j in range(adj_len[v]):
            w = np.int64(adj_list[v, j])
            if v < w and opinion[v] != opinion[w]:
                discordant_left += 1
    return out, min_deg, discordant_left


@njit(cache=True, nogil=True)
def bernoulli_race_tail(state, k, m, q, trials):
    """Trials of: flip Bernoulli(q) coins until k successes; count how
    often the failures seen meanwhile reach m.  Used as the simulation
    route for the deletion-count bound."""
    hits = 0
    for _ in range(trials):
        successes = 0
        failures = 0
        while successes < k:
            if rand_unit(state) < q:
                successes += 1
            else:
                failures += 1
        if failures >= m:
            hits += 1
    return hits


def run_compiled(params, seed: int):
    """Kernel-backed twin of run_to_absorption's python path."""
    from .model import _build_outcome

    opinion = np.array(params.opinion_of(), dtype=np.int64)
    if params.init_graph == "complete":
        edges = np.zeros((0, 2), dtype=np.int32)
        complete = True
    else:
        edges = np.array(params.init_graph, dtype=np.int32).reshape(-1, 2)
        complete = False
    state = seed_state(np.uint64(seed & ((1 << 64) - 1)))
    s_op, s_del, n_edges, counts, adj_list, adj_len = _run_core(
        params.n, params.k, float(params.q), opinion, edges, complete, state)
    sizes, min_deg, discordant_left = _analyze_graph(
        params.n, adj_list, adj_len, opinion)
    if discordant_left != 0:
        raise AssertionError("%d discordant edges present after absorption"
                             % discordant_left)
    return _build_outcome(params, seed, int(s_op), int(s_del), counts,
                          sizes, int(n_edges), int(min_deg))
