"""Numba kernels behind the vantage-point tree: popcount, deterministic
build, and exact k-nearest-neighbor traversal over 64-bit codes.

Everything here is integer arithmetic on preallocated arrays so results are
bit-identical across platforms and runs. The vantage/pivot generator is
splitmix64 seeded by the caller.
"""

import numpy as np
from numba import njit

_U1 = np.uint64(1)
_SM_GAMMA = np.uint64(0x9E3779B97F4A7C15)
_SM_M1 = np.uint64(0xBF58476D1CE4E5B9)
_SM_M2 = np.uint64(0x94D049BB133111EB)

_P1 = np.uint64(0x5555555555555555)
_P2 = np.uint64(0x3333333333333333)
_P3 = np.uint64(0x0F0F0F0F0F0F0F0F)
_P4 = np.uint64(0x0101010101010101)


@njit(cache=True, inline="always")
def _popcount64(x):
    x = x - ((x >> np.uint64(1)) & _P1)
    x = (x & _P2) + ((x >> np.uint64(2)) & _P2)
    x = (x + (x >> np.uint64(4))) & _P3
    return np.int64((x * _P4) >> np.uint64(56))


@njit(cache=True, inline="always")
def _splitmix64(state):
    state = state + _SM_GAMMA
    z = state
    z = (z ^ (z >> np.uint64(30))) * _SM_M1
    z = (z ^ (z >> np.uint64(27))) * _SM_M2
    z = z ^ (z >> np.uint64(31))
    return state, z


@njit(cache=True)
def _select_kth(dist, order, lo, hi, k):
    """Quickselect with 3-way partitioning so dist[k] holds the k-th smallest
    of dist[lo:hi]; `order` is co-permuted with `dist`."""
    while hi - lo > 1:
        pivot = dist[lo + ((hi - lo) >> 1)]
        i = lo
        lt = lo
        gt = hi - 1
        while i <= gt:
            d = dist[i]
            if d < pivot:
                dist[i] = dist[lt]
                dist[lt] = d
                o = order[i]
                order[i] = order[lt]
                order[lt] = o
                lt += 1
                i += 1
            elif d > pivot:
                dist[i] = dist[gt]
                dist[gt] = d
                o = order[i]
                order[i] = order[gt]
                order[gt] = o
                gt -= 1
            else:
                i += 1
        if k < lt:
            hi = lt
        elif k <= gt:
            return
        else:
            lo = gt + 1


@njit(cache=True)
def build_tree(codes, order, dist, leaf_size, seed,
               vantage, radius, left, right, seg_lo, seg_hi,
               st_lo, st_hi, st_parent, st_side, st_depth):
    """Build the tree over codes[order]; returns (node_count, max_depth) or
    (-1, -1) when the preallocated node capacity is too small.

    Node layout: internal nodes carry a vantage ordinal and median radius;
    left child holds distances < radius, right child the rest (ties right).
    Leaves carry a [seg_lo, seg_hi) slice of `order`. The vantage item itself
    stays in the segment, so every code ends up in exactly one leaf.
    """
    cap = vantage.shape[0]
    state = np.uint64(seed)
    node_count = 0
    max_depth = 0
    st_lo[0] = 0
    st_hi[0] = order.shape[0]
    st_parent[0] = -1
    st_side[0] = 0
    st_depth[0] = 0
    sp = 1
    while sp > 0:
        sp -= 1
        lo = st_lo[sp]
        hi = st_hi[sp]
        parent = st_parent[sp]
        side = st_side[sp]
        depth = st_depth[sp]
        if node_count >= cap:
            return -1, -1
        nid = node_count
        node_count += 1
        if parent >= 0:
            if side == 0:
                left[parent] = nid
            else:
                right[parent] = nid
        if depth > max_depth:
            max_depth = depth
        seg_lo[nid] = lo
        seg_hi[nid] = hi
        left[nid] = -1
        right[nid] = -1
        n = hi - lo
        if n <= leaf_size:
            vantage[nid] = -1
            radius[nid] = 0
            continue
        state, z = _splitmix64(state)
        vord = order[lo + np.int64(z % np.uint64(n))]
        vcode = codes[vord]
        for i in range(lo, hi):
            dist[i] = np.int32(_popcount64(codes[order[i]] ^ vcode))
        kpos = lo + (n >> 1)
        _select_kth(dist, order, lo, hi, kpos)
        r = dist[kpos]
        i = lo
        j = hi - 1
        while i <= j:
            if dist[i] < r:
                i += 1
            else:
                d = dist[i]
                dist[i] = dist[j]
                dist[j] = d
                o = order[i]
                order[i] = order[j]
                order[j] = o
                j -= 1
        mid = i
        if mid == lo or mid == hi:
            # more than half the segment ties the median (duplicate-heavy);
            # an oversized leaf keeps the partition invariant intact
            vantage[nid] = -1
            radius[nid] = 0
            continue
        vantage[nid] = vord
        radius[nid] = r
        st_lo[sp] = mid
        st_hi[sp] = hi
        st_parent[sp] = nid
        st_side[sp] = 1
        st_depth[sp] = depth + 1
        sp += 1
        st_lo[sp] = lo
        st_hi[sp] = mid
        st_parent[sp] = nid
        st_side[sp] = 0
        st_depth[sp] = depth + 1
        sp += 1
    return node_count, max_depth


@njit(cache=True, inline="always")
def _heap_offer(hd, ho, hn, k, d, o):
    """Bounded max-heap of (distance, ordinal) under lexicographic order;
    keeps the k smallest pairs seen."""
    if hn < k:
        hd[hn] = d
        ho[hn] = o
        c = hn
        hn += 1
        while c > 0:
            p = (c - 1) >> 1
            if hd[p] < hd[c] or (hd[p] == hd[c] and ho[p] < ho[c]):
                td = hd[p]
                hd[p] = hd[c]
                hd[c] = td
                to = ho[p]
                ho[p] = ho[c]
                ho[c] = to
                c = p
            else:
                break
    elif d < hd[0] or (d == hd[0] and o < ho[0]):
        hd[0] = d
        ho[0] = o
        c = 0
        while True:
            l = 2 * c + 1
            r = l + 1
            big = c
            if l < hn and (hd[l] > hd[big] or (hd[l] == hd[big] and ho[l] > ho[big])):
                big = l
            if r < hn and (hd[r] > hd[big] or (hd[r] == hd[big] and ho[r] > ho[big])):
                big = r
            if big == c:
                break
            td = hd[big]
            hd[big] = hd[c]
            hd[c] = td
            to = ho[big]
            ho[big] = ho[c]
            ho[c] = to
            c = big
    return hn


@njit(cache=True)
def knn64(codes, order, vantage, radius, left, right, seg_lo, seg_hi,
          q, k, stack, hd, ho, prune):
    """Exact kNN by Hamming distance; ties broken by ascending ordinal.

    Fills hd/ho (capacity k) and returns (found, nodes_visited, codes_scanned).
    On return hd[:found]/ho[:found] are sorted ascending by (distance, ordinal).
    Pruning skips a subtree only when its triangle-inequality lower bound
    strictly exceeds the current k-th best distance; prune=False visits all.
    """
    visited = np.int64(0)
    scanned = np.int64(0)
    hn = 0
    stack[0] = 0
    sp = 1
    while sp > 0:
        sp -= 1
        nid = stack[sp]
        visited += 1
        v = vantage[nid]
        if v < 0:
            for t in range(seg_lo[nid], seg_hi[nid]):
                o = order[t]
                d = np.int32(_popcount64(codes[o] ^ q))
                scanned += 1
                hn = _heap_offer(hd, ho, hn, k, d, o)
            continue
        dvq = np.int32(_popcount64(codes[v] ^ q))
        r = radius[nid]
        visit_l = True
        visit_r = True
        if prune and hn >= k:
            tau = hd[0]
            if dvq >= tau + r:
                visit_l = False
            if dvq + tau < r:
                visit_r = False
        if dvq < r:
            if visit_r:
                stack[sp] = right[nid]
                sp += 1
            if visit_l:
                stack[sp] = left[nid]
                sp += 1
        else:
            if visit_l:
                stack[sp] = left[nid]
                sp += 1
            if visit_r:
                stack[sp] = right[nid]
                sp += 1
    # in-place heapsort: extracting from the max-heap leaves ascending order
    found = hn
    end = hn - 1
    while end > 0:
        td = hd[0]
        hd[0] = hd[end]
        hd[end] = td
        to = ho[0]
        ho[0] = ho[end]
        ho[end] = to
        c = 0
        while True:
            l = 2 * c + 1
            rr = l + 1
            big = c
            if l < end and (hd[l] > hd[big] or (hd[l] == hd[big] and ho[l] > ho[big])):
                big = l
            if rr < end and (hd[rr] > hd[big] or (hd[rr] == hd[big] and ho[rr] > ho[big])):
                big = rr
            if big == c:
                break
            td = hd[big]
            hd[big] = hd[c]
            hd[c] = td
            to = ho[big]
            ho[big] = ho[c]
            ho[c] = to
            c = big
        end -= 1
    return found, visited, scanned
