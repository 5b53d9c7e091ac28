"""Compiled event loops.

All kernels take a ``numpy.random.Generator`` and draw from it in a fixed
order, so a run is a pure function of its inputs and seed.
"""
import numpy as np
from numba import njit

SUSCEPTIBLE = 0
INFECTED = 1
REMOVED = 2

# exploration stop status
DONE = 0
TIME_LIMIT = 1
ITER_LIMIT = 2
DEAD = 3


@njit(cache=True)
def _set_add(items, pos, count, x):
    pos[x] = count
    items[count] = x
    return count + 1


@njit(cache=True)
def _set_remove(items, pos, count, x):
    i = pos[x]
    last = items[count - 1]
    items[i] = last
    pos[last] = i
    pos[x] = -1
    return count - 1


@njit(cache=True, nogil=True)
def boundary_run(offsets, nbrs, rev, node_class, class_weight, class_start,
                 innov_rate, remove_rate, rng, initial, max_adopt, t_max):
    """Gillespie direct method over adopter->susceptible slots.

    A slot from an infected node of class ``c`` to a susceptible neighbour
    fires at ``class_weight[c]`` (contact rate times success probability);
    slots pointing at adopters or removed nodes can never change the state, so
    they are left out of the race.
    """
    n = len(offsets) - 1
    n_classes = len(class_weight)
    state = np.zeros(n, dtype=np.int8)
    bslots = np.empty(len(nbrs), dtype=np.int64)
    bpos = np.full(len(nbrs), -1, dtype=np.int64)
    bcount = np.zeros(n_classes, dtype=np.int64)
    s_items = np.arange(n, dtype=np.int64)
    s_pos = np.arange(n, dtype=np.int64)
    s_count = n
    i_items = np.empty(n, dtype=np.int64)
    i_pos = np.full(n, -1, dtype=np.int64)
    i_count = 0

    times = np.empty(2 * n, dtype=np.float64)
    who = np.empty(2 * n, dtype=np.int64)
    kinds = np.empty(2 * n, dtype=np.int8)
    n_events = 0
    adopted = 0
    t = 0.0
    v = initial
    while True:
        # adopt v at time t
        state[v] = INFECTED
        s_count = _set_remove(s_items, s_pos, s_count, v)
        i_count = _set_add(i_items, i_pos, i_count, v)
        c = node_class[v]
        for s in range(offsets[v], offsets[v + 1]):
            w = nbrs[s]
            if state[w] == SUSCEPTIBLE:
                k = class_start[c] + bcount[c]
                bslots[k] = s
                bpos[s] = k
                bcount[c] += 1
            else:
                r = rev[s]
                if bpos[r] >= 0:
                    cw = node_class[w]
                    k = bpos[r]
                    last = bslots[class_start[cw] + bcount[cw] - 1]
                    bslots[k] = last
                    bpos[last] = k
                    bpos[r] = -1
                    bcount[cw] -= 1
        times[n_events] = t
        who[n_events] = v
        kinds[n_events] = 0
        n_events += 1
        adopted += 1
        if adopted >= max_adopt:
            break

        while True:
            contact = 0.0
            for c in range(n_classes):
                contact += class_weight[c] * bcount[c]
            innov = innov_rate * s_count
            total = contact + innov + remove_rate * i_count
            if total <= 0.0:
                break
            t += rng.standard_exponential() / total
            if t > t_max:
                total = 0.0
                break
            u = rng.random() * total
            if u < contact:
                acc = 0.0
                chosen = -1
                for c in range(n_classes):
                    w_c = class_weight[c] * bcount[c]
                    if bcount[c] > 0:
                        chosen = c
                        if u < acc + w_c:
                            break
                    acc += w_c
                c = chosen
                idx = int((u - acc) / class_weight[c])
                if idx >= bcount[c] or idx < 0:
                    idx = bcount[c] - 1
                v = nbrs[bslots[class_start[c] + idx]]
                break
            if u < contact + innov:
                idx = int((u - contact) / innov_rate)
                if idx >= s_count:
                    idx = s_count - 1
                v = s_items[idx]
                break
            idx = int((u - contact - innov) / remove_rate)
            if idx >= i_count:
                idx = i_count - 1
            x = i_items[idx]
            state[x] = REMOVED
            i_count = _set_remove(i_items, i_pos, i_count, x)
            for s in range(offsets[x], offsets[x + 1]):
                if bpos[s] >= 0:
                    cx = node_class[x]
                    k = bpos[s]
                    last = bslots[class_start[cx] + bcount[cx] - 1]
                    bslots[k] = last
                    bpos[last] = k
                    bpos[s] = -1
                    bcount[cx] -= 1
            times[n_events] = t
            who[n_events] = x
            kinds[n_events] = 1
            n_events += 1
        if total <= 0.0:
            break
    return times[:n_events], who[:n_events], kinds[:n_events]


@njit(cache=True, nogil=True)
def contact_run(n, complete, offsets, nbrs, node_rate, p, innov_rate, remove_rate,
                rng, initial, max_adopt, t_max):
    """Simulate every contact, including adopter->adopter ones.

    Every non-removed adopter rings at ``node_rate`` and calls a uniform
    neighbour entry; a call on a susceptible node converts it with
    probability ``p``.  On ``complete`` graphs neighbours are drawn
    arithmetically and ``offsets``/``nbrs`` are ignored.
    """
    state = np.zeros(n, dtype=np.int8)
    s_items = np.arange(n, dtype=np.int64)
    s_pos = np.arange(n, dtype=np.int64)
    s_count = n
    i_items = np.empty(n, dtype=np.int64)
    i_pos = np.full(n, -1, dtype=np.int64)
    i_count = 0
    times = np.empty(2 * n, dtype=np.float64)
    who = np.empty(2 * n, dtype=np.int64)
    kinds = np.empty(2 * n, dtype=np.int8)
    n_events = 0
    adopted = 0
    t = 0.0
    v = initial
    while True:
        state[v] = INFECTED
        s_count = _set_remove(s_items, s_pos, s_count, v)
        i_count = _set_add(i_items, i_pos, i_count, v)
        times[n_events] = t
        who[n_events] = v
        kinds[n_events] = 0
        n_events += 1
        adopted += 1
        if adopted >= max_adopt:
            break
        v = -1
        while v < 0:
            contact = node_rate * i_count
            innov = innov_rate * s_count
            total = contact + innov + remove_rate * i_count
            if total <= 0.0:
                break
            t += rng.standard_exponential() / total
            if t > t_max:
                break
            u = rng.random() * total
            if u < contact:
                x = i_items[min(int(u / node_rate), i_count - 1)]
                if complete:
                    w = int(rng.random() * (n - 1))
                    if w >= x:
                        w += 1
                else:
                    d = offsets[x + 1] - offsets[x]
                    if d == 0:
                        continue
                    w = nbrs[offsets[x] + int(rng.random() * d)]
                if state[w] == SUSCEPTIBLE and (p >= 1.0 or rng.random() < p):
                    v = w
            elif u < contact + innov:
                v = s_items[min(int((u - contact) / innov_rate), s_count - 1)]
            else:
                x = i_items[min(int((u - contact - innov) / remove_rate), i_count - 1)]
                state[x] = REMOVED
                i_count = _set_remove(i_items, i_pos, i_count, x)
                times[n_events] = t
                who[n_events] = x
                kinds[n_events] = 1
                n_events += 1
        if v < 0:
            break
    return times[:n_events], who[:n_events], kinds[:n_events]


@njit(cache=True, nogil=True)
def explore_run(deg, n_sleep, init_class, weight, innov_rate, rng,
                max_adopt, t_max, max_iter, record):
    """Configuration-model exploration coupled to exponential holding times.

    Degree class ``c`` has ``n_sleep[c]`` sleeping nodes of degree
    ``deg[c]``; one node of ``init_class`` is woken at time 0.  Each event is
    either an innovator wake-up (rate ``innov_rate`` per sleeping node) or a
    pairing iteration started by an active clone of class ``c`` (rate
    ``weight[c]`` per clone).  The partner clone is uniform over the other
    unpaired clones.

    Returns ``(status, adopt_times, j, first_cycle, hist)`` where ``hist`` is
    a tuple of per-event arrays ``(j, N, A, t, woke, N_by_class)`` (empty
    unless ``record``).
    """
    n_classes = len(deg)
    N = n_sleep.copy()
    A = np.zeros(n_classes, dtype=np.int64)
    L = 0
    for c in range(n_classes):
        L += deg[c] * N[c]
    n_total = 0
    for c in range(n_classes):
        n_total += N[c]

    cap = min(max_adopt, n_total)
    adopt_times = np.empty(cap, dtype=np.float64)
    hcap = 1
    if record:
        hcap = min(L // 2 + n_total + 1, max_iter + n_total + 1)
    h_j = np.empty(hcap, dtype=np.int64)
    h_N = np.empty(hcap, dtype=np.int64)
    h_A = np.empty(hcap, dtype=np.int64)
    h_t = np.empty(hcap, dtype=np.float64)
    h_woke = np.empty(hcap, dtype=np.int8)
    h_Nc = np.empty((hcap, n_classes), dtype=np.int64)

    N[init_class] -= 1
    A[init_class] += deg[init_class]
    adopted = 1
    adopt_times[0] = 0.0
    t = 0.0
    j = 0
    first_cycle = -1
    n_hist = 0
    sleeping = n_total - 1
    if record:
        h_j[0] = 0
        h_N[0] = sleeping
        h_A[0] = deg[init_class]
        h_t[0] = 0.0
        h_woke[0] = 1
        for c in range(n_classes):
            h_Nc[0, c] = N[c]
        n_hist = 1
    status = DONE
    while adopted < max_adopt:
        if j >= max_iter:
            status = ITER_LIMIT
            break
        clone_rate = 0.0
        for c in range(n_classes):
            clone_rate += weight[c] * A[c]
        total = clone_rate + innov_rate * sleeping
        if total <= 0.0:
            if sleeping > 0:
                status = DEAD
            break
        t += rng.standard_exponential() / total
        if t > t_max:
            status = TIME_LIMIT
            break
        u = rng.random() * total
        woke = 0
        if u >= clone_rate:
            # innovator: uniform sleeping node wakes with all clones active
            x = (u - clone_rate) / innov_rate
            acc = 0
            chosen = -1
            for c in range(n_classes):
                if N[c] > 0:
                    chosen = c
                    if x < acc + N[c]:
                        break
                acc += N[c]
            c = chosen
            N[c] -= 1
            A[c] += deg[c]
            woke = 1
        else:
            acc_f = 0.0
            chosen = -1
            for c in range(n_classes):
                if A[c] > 0:
                    chosen = c
                    if u < acc_f + weight[c] * A[c]:
                        break
                acc_f += weight[c] * A[c]
            c = chosen
            A[c] -= 1
            # partner uniform over the L - 1 other unpaired clones
            x = int(rng.random() * (L - 1))
            acc = 0
            hit = -1
            for d in range(n_classes):
                acc += deg[d] * N[d]
                if x < acc:
                    hit = d
                    break
            if hit >= 0:
                N[hit] -= 1
                A[hit] += deg[hit] - 1
                woke = 1
            else:
                for e in range(n_classes):
                    acc += A[e]
                    if x < acc or e == n_classes - 1:
                        break
                A[e] -= 1
                if first_cycle < 0:
                    first_cycle = j
            L -= 2
            j += 1
        if woke:
            sleeping -= 1
            adopt_times[adopted] = t
            adopted += 1
        if record:
            h_j[n_hist] = j
            h_N[n_hist] = sleeping
            a_tot = 0
            for c in range(n_classes):
                a_tot += A[c]
                h_Nc[n_hist, c] = N[c]
            h_A[n_hist] = a_tot
            h_t[n_hist] = t
            h_woke[n_hist] = woke
            n_hist += 1
    hist = (h_j[:n_hist], h_N[:n_hist], h_A[:n_hist], h_t[:n_hist],
            h_woke[:n_hist], h_Nc[:n_hist])
    return status, adopt_times[:adopted], j, first_cycle, hist
