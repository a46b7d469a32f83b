"""Dense-array inner loops for aggregation and boundary-exit runs.

Direction codes follow :class:`combrotor.geometry.Direction`: 0=E, 1=S, 2=W,
3=N.  Arrays are indexed ``[x + ox, y + oy]``.  On the backbone a toppling
turns the rotor one quarter clockwise; on a tooth it flips between S and N,
which is ``d -> 4 - d``.

The functions are compiled with numba when it is importable and run as plain
Python otherwise (same results, much slower).
"""

from __future__ import annotations

try:
    from numba import njit
except ImportError:  # pragma: no cover
    def njit(*args, **kwargs):
        if args and callable(args[0]):
            return args[0]
        return lambda f: f

OK = 0
GROW = 1
CAP = 2
BUDGET = 3


@njit(cache=True)
def aggregate_kernel(rot, odo, occ, ox, oy, n_target, n_done, settle, steps, budget):
    """Release particles at the origin until ``n_target`` have settled.

    Returns ``(status, n_done, steps)``.  ``GROW`` means the last settled
    vertex is within two cells of the array edge; the state is consistent and
    the caller may enlarge the arrays and continue.  ``BUDGET`` leaves the
    current walker in flight.
    """
    W = occ.shape[0]
    H = occ.shape[1]
    while n_done < n_target:
        x = ox
        y = oy
        while occ[x, y]:
            d = rot[x, y]
            if y == oy:
                d = (d + 1) & 3
            else:
                d = 4 - d
            rot[x, y] = d
            odo[x, y] += 1
            steps += 1
            if d == 0:
                x += 1
            elif d == 1:
                y -= 1
            elif d == 2:
                x -= 1
            else:
                y += 1
            if steps > budget:
                return BUDGET, n_done, steps
        occ[x, y] = True
        settle[n_done, 0] = x - ox
        settle[n_done, 1] = y - oy
        n_done += 1
        if x <= 1 or x >= W - 2 or y <= 1 or y >= H - 2:
            return GROW, n_done, steps
    return OK, n_done, steps


@njit(cache=True)
def exit_kernel(rot, odo, kind, ox, oy, n_done, cap, exits, mismatch, steps, budget):
    """Route particles from the origin to the boundary, one at a time.

    ``kind`` is 1 on interior cells and 2 on boundary cells.  ``mismatch``
    counts interior cells whose odometer is not a multiple of the degree, i.e.
    whose rotor differs from its starting direction.  Stops with ``OK`` as
    soon as that count is zero after a completed particle, with ``CAP`` after
    ``cap`` particles.  Returns ``(status, n_done, mismatch, steps)``.
    """
    while n_done < cap:
        x = ox
        y = oy
        while kind[x, y] == 1:
            d = rot[x, y]
            if y == oy:
                d = (d + 1) & 3
                deg = 4
            else:
                d = 4 - d
                deg = 2
            rot[x, y] = d
            before = odo[x, y] % deg
            odo[x, y] += 1
            after = odo[x, y] % deg
            if before == 0:
                mismatch += 1
            if after == 0:
                mismatch -= 1
            steps += 1
            if d == 0:
                x += 1
            elif d == 1:
                y -= 1
            elif d == 2:
                x -= 1
            else:
                y += 1
            if steps > budget:
                return BUDGET, n_done, mismatch, steps
        exits[x, y] += 1
        n_done += 1
        if mismatch == 0:
            return OK, n_done, mismatch, steps
    return CAP, n_done, mismatch, steps


@njit(cache=True)
def random_walk_kernel(kind, ox, oy, size, rng, counts):
    """Run ``size`` simple random walks from the origin until ``kind == 2``.

    Each uniform double from ``rng`` supplies sixteen 2-bit choices.  On the
    backbone the choice picks E, S, W or N; on a tooth 0/1 step down and 2/3
    step up.  Exit cells are tallied in ``counts``.  Returns the total number
    of steps.
    """
    total = 0
    for _ in range(size):
        x = ox
        y = oy
        bits = 0
        left = 0
        while kind[x, y] != 2:
            if left == 0:
                bits = int(rng.random() * 4294967296.0)
                left = 16
            r = bits & 3
            bits >>= 2
            left -= 1
            total += 1
            if y == oy:
                if r == 0:
                    x += 1
                elif r == 1:
                    y -= 1
                elif r == 2:
                    x -= 1
                else:
                    y += 1
            elif r < 2:
                y -= 1
            else:
                y += 1
        counts[x, y] += 1
    return total
