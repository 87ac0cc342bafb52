"""
Compiled hot loops for the lattice updates.

Every kernel reads its randomness from a block of doubles reserved on the
caller's RngStream and returns how many it used, consuming them in exactly the
order the scalar operations in ``interaction`` and ``dynamics`` do.
"""
import math

from numba import njit

LONER = 4
# x selection + 4 plays for x + neighbor selection + 4 plays for y + Fermi draw
MAX_DRAWS_PER_ASYNC_UPDATE = 19
MAX_DRAWS_PER_PLAY = 2


@njit(cache=True)
def participates(level, max_level, uniforms, cursor):
    if level == 0:
        return True, cursor
    if level == max_level:
        return False, cursor
    return uniforms[cursor] < 1.0 - level / max_level, cursor + 1


@njit(cache=True)
def play_categories(sx, lx, sy, ly, max_level, uniforms, cursor):
    """Payoff categories (x, y) of one play; y's draw is skipped once x abstained."""
    px, cursor = participates(lx, max_level, uniforms, cursor)
    if not px:
        return LONER, LONER, cursor
    py, cursor = participates(ly, max_level, uniforms, cursor)
    if not py:
        return LONER, LONER, cursor
    return 2 * sx + sy, 2 * sy + sx, cursor


@njit(cache=True)
def sync_edge_plays(strategy, level, max_level, uniforms, categories):
    """One shared play per undirected edge; row-major sites, right edge then down edge."""
    height, width = strategy.shape
    cursor = 0
    for r in range(height):
        for c in range(width):
            rc = (c + 1) % width
            cx, cy, cursor = play_categories(
                strategy[r, c], level[r, c], strategy[r, rc], level[r, rc], max_level, uniforms, cursor
            )
            categories[r, c, 3] = cx
            categories[r, rc, 2] = cy
            rd = (r + 1) % height
            cx, cy, cursor = play_categories(
                strategy[r, c], level[r, c], strategy[rd, c], level[rd, c], max_level, uniforms, cursor
            )
            categories[r, c, 1] = cx
            categories[rd, c, 0] = cy
    return cursor


@njit(cache=True)
def sync_directed_plays(strategy, level, max_level, uniforms, categories):
    """Every agent plays its own game with each neighbor, in (up, down, left, right) order."""
    height, width = strategy.shape
    cursor = 0
    for r in range(height):
        for c in range(width):
            for slot in range(4):
                if slot == 0:
                    nr, nc = (r - 1) % height, c
                elif slot == 1:
                    nr, nc = (r + 1) % height, c
                elif slot == 2:
                    nr, nc = r, (c - 1) % width
                else:
                    nr, nc = r, (c + 1) % width
                cx, cy, cursor = play_categories(
                    strategy[r, c], level[r, c], strategy[nr, nc], level[nr, nc], max_level, uniforms, cursor
                )
                categories[r, c, slot] = cx
    return cursor


@njit(cache=True)
def site_utility(site, strategy, level, neighbors, max_level, payoffs, uniforms, cursor):
    n0 = 0
    n1 = 0
    n2 = 0
    n3 = 0
    n4 = 0
    for slot in range(4):
        other = neighbors[site, slot]
        cx, cy, cursor = play_categories(
            strategy[site], level[site], strategy[other], level[other], max_level, uniforms, cursor
        )
        if cx == 0:
            n0 += 1
        elif cx == 1:
            n1 += 1
        elif cx == 2:
            n2 += 1
        elif cx == 3:
            n3 += 1
        else:
            n4 += 1
    utility = n0 * payoffs[0] + n1 * payoffs[1] + n2 * payoffs[2] + n3 * payoffs[3] + n4 * payoffs[4]
    return utility, cursor


@njit(cache=True)
def fermi(u_x, u_y, scale):
    z = (u_x - u_y) / scale
    if z >= 0.0:
        e = math.exp(-z)
        return e / (1.0 + e)
    return 1.0 / (1.0 + math.exp(z))


@njit(cache=True)
def async_updates(strategy, level, neighbors, max_level, payoffs, scale, uniforms, n_updates):
    """
    Up to n_updates elementary updates on flat grids, stopping early when the
    reserved block might not cover another update. Returns (done, used).
    """
    n = strategy.shape[0]
    limit = uniforms.shape[0]
    cursor = 0
    done = 0
    while done < n_updates and cursor + MAX_DRAWS_PER_ASYNC_UPDATE <= limit:
        x = int(uniforms[cursor] * n)
        if x > n - 1:
            x = n - 1
        cursor += 1
        u_x, cursor = site_utility(x, strategy, level, neighbors, max_level, payoffs, uniforms, cursor)
        slot = int(uniforms[cursor] * 4)
        if slot > 3:
            slot = 3
        cursor += 1
        y = neighbors[x, slot]
        u_y, cursor = site_utility(y, strategy, level, neighbors, max_level, payoffs, uniforms, cursor)
        if u_y > u_x:
            w = fermi(u_x, u_y, scale)
            draw = uniforms[cursor]
            cursor += 1
            if draw < w:
                strategy[x] = strategy[y]
                level[x] = level[y]
        done += 1
    return done, cursor


@njit(cache=True)
def play_edge_batch(sx, lx, sy, ly, max_level, payoffs, uniforms, n_plays, out_x, out_y, offset):
    """Repeated plays of one fixed pair; fills out_x/out_y from offset. Returns (done, used)."""
    limit = uniforms.shape[0]
    cursor = 0
    done = 0
    while done < n_plays and cursor + MAX_DRAWS_PER_PLAY <= limit:
        cx, cy, cursor = play_categories(sx, lx, sy, ly, max_level, uniforms, cursor)
        out_x[offset + done] = payoffs[cx]
        out_y[offset + done] = payoffs[cy]
        done += 1
    return done, cursor

