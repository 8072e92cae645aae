"""Compiled fast path for Go-Right trials with hand-coded models.

The desk-scale experiment reproductions run hundreds of thousands of
planning steps per trial; this module executes a whole trial (alternating
training and greedy-evaluation interactions) in one nopython call over the
enumeration tables.  It consumes random draws in exactly the same order and
form as the pure-python runner (offsets, initial status pair, behavior
actions, then per-simulated-step status and indicator draws), so the two
paths stay interchangeable; an equivalence test pins this.
"""
from __future__ import annotations

import numpy as np
from numba import njit

from ..core import rng_from_seed
from ..handcoded_models import goright_tables

MODE_IDS = {
    "none": 0,
    "one-step-variance": 1,
    "one-step-range": 2,
    "mc-variance": 3,
    "mc-range": 4,
    "box": 5,
}
MODEL_IDS = {"none": -1, "perfect": 0, "expect": 1, "sample": 2}

STATUS_VARIANCE = 50.0 / 3.0
ONE_THIRD = 1.0 / 3.0
ENTRY_INDICATOR_VARIANCE = 2.0 / 9.0


@njit(cache=True)
def _draw_index(rng, n):
    i = int(rng.random() * n)
    if i >= n:
        i = n - 1
    return i


@njit(cache=True)
def _greedy(q, key):
    return 0 if q[key, 0] >= q[key, 1] else 1


@njit(cache=True)
def _maxq(q, key):
    a = q[key, 0]
    b = q[key, 1]
    return a if a >= b else b


@njit(cache=True)
def _plan_perfect(q, u1, r1, gamma, h, u_next, u_reward, u_key, targets):
    run = r1
    targets[0] = r1 + gamma * _maxq(q, u_key[u1])
    u = u1
    for i in range(2, h + 1):
        key = u_key[u]
        a = _greedy(q, key)
        r = u_reward[u, a]
        u = u_next[u, a]
        run += gamma ** (i - 1) * r
        targets[i - 1] = run + gamma**i * _maxq(q, u_key[u])


@njit(cache=True)
def _plan_expect(q, key1, r1, gamma, h, exp_next, exp_rew, targets, keys_buf, acts_buf):
    run = r1
    targets[0] = r1 + gamma * _maxq(q, key1)
    key = key1
    for i in range(2, h + 1):
        a = _greedy(q, key)
        keys_buf[i - 2] = key
        acts_buf[i - 2] = a
        r = exp_rew[key, a]
        key = exp_next[key, a]
        run += gamma ** (i - 1) * r
        targets[i - 1] = run + gamma**i * _maxq(q, key)


@njit(cache=True)
def _plan_sample(
    q, key1, r1, gamma, h, key_pos, key_mask, adv_mask, n_ind, full_mask, rng, targets
):
    run = r1
    targets[0] = r1 + gamma * _maxq(q, key1)
    key = key1
    for i in range(2, h + 1):
        a = _greedy(q, key)
        pos = key_pos[key]
        mask = key_mask[key]
        if a == 0:
            r = 0.0
            npos = pos - 1 if pos > 0 else 0
        else:
            r = 3.0 if (pos == 10 and mask == full_mask) else -1.0
            npos = pos + 1 if pos < 10 else 10
        status2 = _draw_index(rng, 3)
        sampled = 0
        for d in range(n_ind):
            if rng.random() < ONE_THIRD:
                sampled |= 1 << d
        if pos == 9 and a == 1:
            nmask = sampled
        elif npos != 10:
            nmask = 0
        elif mask == full_mask:
            nmask = full_mask
        else:
            nmask = adv_mask[mask]
        key = ((npos * 3 + status2) << n_ind) | nmask
        run += gamma ** (i - 1) * r
        targets[i - 1] = run + gamma**i * _maxq(q, key)


@njit(cache=True)
def _one_step_stat(key, a, entry, n_ind, use_variance):
    if use_variance:
        s = STATUS_VARIANCE
        if entry[key, a]:
            s += n_ind * ENTRY_INDICATOR_VARIANCE
    else:
        s = 10.0
        if entry[key, a]:
            s += float(n_ind)
    return s


@njit(cache=True)
def _box_greedy(
    q, vlist, vcount, key_pos, key_st, key_mask,
    pos_lo, pos_hi, st_lo, st_hi, ind0, ind1, n_ind, his, los,
):
    prod = 1
    for d in range(n_ind):
        prod *= int(ind0[d]) + int(ind1[d])
    total = (pos_hi - pos_lo + 1) * (st_hi - st_lo + 1) * prod
    for a in range(2):
        hi = -1.0e300
        lo = 1.0e300
        cnt = 0
        for i in range(vcount):
            key = vlist[i]
            p = key_pos[key]
            if p < pos_lo or p > pos_hi:
                continue
            s = key_st[key]
            if s < st_lo or s > st_hi:
                continue
            m = key_mask[key]
            ok = True
            for d in range(n_ind):
                if (m >> d) & 1 == 1:
                    if ind1[d] == 0:
                        ok = False
                        break
                elif ind0[d] == 0:
                    ok = False
                    break
            if not ok:
                continue
            cnt += 1
            v = q[key, a]
            if v > hi:
                hi = v
            if v < lo:
                lo = v
        if cnt < total:
            if hi < 0.0:
                hi = 0.0
            if lo > 0.0:
                lo = 0.0
        his[a] = hi
        los[a] = lo
    v_up = his[0] if his[0] >= his[1] else his[1]
    v_lo = los[0] if los[0] >= los[1] else los[1]
    amask = 0
    if his[0] >= v_lo:
        amask |= 1
    if his[1] >= v_lo:
        amask |= 2
    return v_up, v_lo, amask


@njit(cache=True)
def _box_step(
    u_next, u_reward, u_key, key_pos, key_st, key_mask, num_configs, n_ind,
    pos_lo, pos_hi, st_lo, st_hi, ind0, ind1, amask, valid_cfg, nind0, nind1,
):
    # Which indicator configurations lie inside the box.
    zeros_blocked = 0
    blocked_dim = -1
    for d in range(n_ind):
        if ind0[d] == 0:
            zeros_blocked += 1
            blocked_dim = d
    all_on_ok = True
    for d in range(n_ind):
        if ind1[d] == 0:
            all_on_ok = False
            break
    valid_cfg[0] = 1 if zeros_blocked == 0 else 0
    for c in range(1, num_configs - 1):
        d0 = c - 1
        ok = ind1[d0] == 1 and (zeros_blocked == 0 or (zeros_blocked == 1 and blocked_dim == d0))
        valid_cfg[c] = 1 if ok else 0
    valid_cfg[num_configs - 1] = 1 if all_on_ok else 0

    np_lo, np_hi = 127, -1
    ns_lo, ns_hi = 127, -1
    for d in range(n_ind):
        nind0[d] = 0
        nind1[d] = 0
    r_lo = 1.0e300
    r_hi = -1.0e300
    for p in range(pos_lo, pos_hi + 1):
        for pair in range(9):
            cur = pair % 3
            if cur < st_lo or cur > st_hi:
                continue
            for cfg in range(num_configs):
                if valid_cfg[cfg] == 0:
                    continue
                if p != 10 and cfg != 0:
                    continue
                u = (p * 9 + pair) * num_configs + cfg
                for a in range(2):
                    if amask & (1 << a) == 0:
                        continue
                    u2 = u_next[u, a]
                    r = u_reward[u, a]
                    if r < r_lo:
                        r_lo = r
                    if r > r_hi:
                        r_hi = r
                    k2 = u_key[u2]
                    p2 = key_pos[k2]
                    s2 = key_st[k2]
                    m2 = key_mask[k2]
                    if p2 < np_lo:
                        np_lo = p2
                    if p2 > np_hi:
                        np_hi = p2
                    if s2 < ns_lo:
                        ns_lo = s2
                    if s2 > ns_hi:
                        ns_hi = s2
                    for d in range(n_ind):
                        if (m2 >> d) & 1 == 1:
                            nind1[d] = 1
                        else:
                            nind0[d] = 1
    return np_lo, np_hi, ns_lo, ns_hi, r_lo, r_hi


@njit(cache=True)
def _box_uncertainties(
    q, vlist, vcount,
    u_next, u_reward, u_key, key_pos, key_st, key_mask, num_configs, n_ind,
    key1, r1, gamma, h, u_out, ind0, ind1, valid_cfg, nind0, nind1, his, los,
):
    pos_lo = key_pos[key1]
    pos_hi = pos_lo
    st_lo = key_st[key1]
    st_hi = st_lo
    m = key_mask[key1]
    for d in range(n_ind):
        if (m >> d) & 1 == 1:
            ind0[d] = 0
            ind1[d] = 1
        else:
            ind0[d] = 1
            ind1[d] = 0
    run_hi = r1
    run_lo = r1
    for i in range(1, h + 1):
        v_up, v_lo, amask = _box_greedy(
            q, vlist, vcount, key_pos, key_st, key_mask,
            pos_lo, pos_hi, st_lo, st_hi, ind0, ind1, n_ind, his, los,
        )
        u_out[i - 1] = (run_hi + gamma**i * v_up) - (run_lo + gamma**i * v_lo)
        if i < h:
            np_lo, np_hi, ns_lo, ns_hi, r_lo, r_hi = _box_step(
                u_next, u_reward, u_key, key_pos, key_st, key_mask, num_configs, n_ind,
                pos_lo, pos_hi, st_lo, st_hi, ind0, ind1, amask, valid_cfg, nind0, nind1,
            )
            pos_lo, pos_hi, st_lo, st_hi = np_lo, np_hi, ns_lo, ns_hi
            for d in range(n_ind):
                ind0[d] = nind0[d]
                ind1[d] = nind1[d]
            run_hi += gamma**i * r_hi
            run_lo += gamma**i * r_lo
    u_out[0] = 0.0


@njit(cache=True)
def _softmin(u, h, tau, w):
    umin = u[0]
    for i in range(1, h):
        if u[i] < umin:
            umin = u[i]
    total = 0.0
    for i in range(h):
        w[i] = np.exp(-(u[i] - umin) / tau)
        total += w[i]
    for i in range(h):
        w[i] /= total


@njit(cache=True)
def run_trial_kernel(
    u_next, u_reward, u_key, key_pos, key_st, key_mask,
    exp_next, exp_rew, entry, adv_mask,
    n_ind, num_configs, full_mask,
    episodes, steps, gamma, alpha, tau, h, k, mode, model_id,
    q, visited, vlist, rng,
    train_out, eval_out,
):
    vcount = 0
    targets = np.zeros(h)
    tbuf = np.zeros(h)
    u_arr = np.zeros(h)
    w = np.empty(h)
    sums = np.zeros(h)
    sumsq = np.zeros(h)
    mins = np.zeros(h)
    maxs = np.zeros(h)
    keys_buf = np.zeros(h, dtype=np.int64)
    acts_buf = np.zeros(h, dtype=np.int64)
    ind0 = np.zeros(n_ind, dtype=np.uint8)
    ind1 = np.zeros(n_ind, dtype=np.uint8)
    nind0 = np.zeros(n_ind, dtype=np.uint8)
    nind1 = np.zeros(n_ind, dtype=np.uint8)
    valid_cfg = np.zeros(num_configs, dtype=np.uint8)
    his = np.empty(2)
    los = np.empty(2)
    use_variance = mode == 1

    for ep in range(episodes):
        # Training interaction: uniform-random behavior, planning every step.
        for _ in range(n_ind + 2):
            rng.random()
        pair = _draw_index(rng, 9)
        u = pair * num_configs
        g_train = 0.0
        disc = 1.0
        for _ in range(steps):
            a = _draw_index(rng, 2)
            key_t = u_key[u]
            u2 = u_next[u, a]
            r = u_reward[u, a]
            key2 = u_key[u2]
            if h == 1:
                target = r + gamma * _maxq(q, key2)
            else:
                if mode == 0:
                    if model_id == 0:
                        _plan_perfect(q, u2, r, gamma, h, u_next, u_reward, u_key, targets)
                    elif model_id == 2:
                        _plan_sample(
                            q, key2, r, gamma, h, key_pos, key_mask, adv_mask,
                            n_ind, full_mask, rng, targets,
                        )
                    else:
                        _plan_expect(q, key2, r, gamma, h, exp_next, exp_rew, targets, keys_buf, acts_buf)
                    target = 0.0
                    for i in range(h):
                        target += targets[i]
                    target /= h
                else:
                    if mode == 1 or mode == 2:
                        _plan_expect(q, key2, r, gamma, h, exp_next, exp_rew, targets, keys_buf, acts_buf)
                        acc = _one_step_stat(key_t, a, entry, n_ind, use_variance)
                        u_arr[0] = 0.0
                        for i in range(2, h + 1):
                            acc += _one_step_stat(keys_buf[i - 2], acts_buf[i - 2], entry, n_ind, use_variance)
                            u_arr[i - 1] = acc
                    elif mode == 3 or mode == 4:
                        for i in range(h):
                            sums[i] = 0.0
                            sumsq[i] = 0.0
                            mins[i] = 1.0e300
                            maxs[i] = -1.0e300
                        for _j in range(k):
                            _plan_sample(
                                q, key2, r, gamma, h, key_pos, key_mask, adv_mask,
                                n_ind, full_mask, rng, tbuf,
                            )
                            for i in range(h):
                                v = tbuf[i]
                                sums[i] += v
                                sumsq[i] += v * v
                                if v < mins[i]:
                                    mins[i] = v
                                if v > maxs[i]:
                                    maxs[i] = v
                        for i in range(h):
                            targets[i] = sums[i] / k
                            if mode == 3:
                                var = (sumsq[i] - k * targets[i] * targets[i]) / (k - 1)
                                u_arr[i] = var if var > 0.0 else 0.0
                            else:
                                u_arr[i] = maxs[i] - mins[i]
                        u_arr[0] = 0.0
                    else:
                        _plan_expect(q, key2, r, gamma, h, exp_next, exp_rew, targets, keys_buf, acts_buf)
                        _box_uncertainties(
                            q, vlist, vcount,
                            u_next, u_reward, u_key, key_pos, key_st, key_mask, num_configs, n_ind,
                            key2, r, gamma, h, u_arr, ind0, ind1, valid_cfg, nind0, nind1, his, los,
                        )
                    _softmin(u_arr, h, tau, w)
                    target = 0.0
                    for i in range(h):
                        target += w[i] * targets[i]
            q[key_t, a] += alpha * (target - q[key_t, a])
            if visited[key_t] == 0:
                visited[key_t] = 1
                vlist[vcount] = key_t
                vcount += 1
            g_train += disc * r
            disc *= gamma
            u = u2
        train_out[ep] = g_train

        # Greedy evaluation interaction: no learning, no planning.
        for _ in range(n_ind + 2):
            rng.random()
        pair = _draw_index(rng, 9)
        ue = pair * num_configs
        g_eval = 0.0
        disc = 1.0
        for _ in range(steps):
            keye = u_key[ue]
            ae = _greedy(q, keye)
            g_eval += disc * u_reward[ue, ae]
            disc *= gamma
            ue = u_next[ue, ae]
        eval_out[ep] = g_eval
    return vcount


def run_fast_goright_trial(
    num_prize_indicators: int,
    episodes: int,
    steps: int,
    gamma: float,
    alpha: float,
    tau: float,
    horizon: int,
    rollouts: int,
    mode: str,
    model: str,
    seed: int,
):
    """One full trial on the compiled path; returns (train, eval, q) arrays."""
    t = goright_tables(num_prize_indicators)
    nk = t.codec.num_keys
    q = np.zeros((nk, 2))
    visited = np.zeros(nk, dtype=np.uint8)
    vlist = np.zeros(nk, dtype=np.int64)
    train_out = np.zeros(episodes)
    eval_out = np.zeros(episodes)
    rng = rng_from_seed(seed)
    run_trial_kernel(
        t.u_next, t.u_reward, t.u_key, t.key_pos, t.key_status, t.key_mask,
        t.exp_next_key, t.exp_reward, t.entry, t.adv_mask,
        t.n, t.num_configs, (1 << t.n) - 1,
        episodes, steps, gamma, alpha, tau, horizon, rollouts,
        MODE_IDS[mode], MODEL_IDS[model],
        q, visited, vlist, rng,
        train_out, eval_out,
    )
    return train_out, eval_out, q
