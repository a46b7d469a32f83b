"""Closed forms for the cluster shape and its odometer.

Coordinates in ``u_prime`` are shifted: ``x`` is the distance from the
nearest backbone tip, so the cluster centre sits at ``x = m``.
"""

from __future__ import annotations

from math import isqrt

from .errors import DomainError, FormulaConsistencyError
from .geometry import ClusterShape, Vertex, cardinality_Bm, h_cluster

h = h_cluster


def e_lin(y: int) -> int:
    return 2 * y + 1


def f_quad(y: int) -> int:
    return y * (y + 1)


def h_branch(x: int) -> int:
    """Cluster tooth height from its congruence-class polynomials."""
    k, i = divmod(x, 3)
    return (3 * k * k + 2 * k, 3 * k * k + 4 * k + 1, 3 * k * k + 6 * k + 3)[i]


def r_of_x(x: int) -> int:
    """Number of inward-pointing rotors on the tooth at shifted coordinate ``x``."""
    if x < 0:
        raise DomainError("x must be non-negative")
    if x in (0, 1):
        return 0
    if x % 3 == 2:
        num, den = x * x - 7 * x + 10, 18
    else:
        num, den = x * x - x + 6, 6
    q, rem = divmod(num, den)
    if rem:
        raise FormulaConsistencyError(f"r({x}) = {num}/{den} is not an integer")
    return q


def u_tilde(h: int, r: int, y: int) -> int:
    """Half-line odometer template with ``h`` sites and ``r`` inward rotors."""
    if not 0 <= r <= h:
        raise DomainError(f"need 0 <= r <= h, got r={r}, h={h}")
    if 1 <= y <= r:
        return f_quad(h - y) + e_lin(r - y)
    if r < y <= h:
        return f_quad(h - y)
    return 0


def u_prime(x: int, y: int) -> int:
    """Comb odometer in shifted coordinates, ``x, y >= 0``."""
    hx, rx = h(x), r_of_x(x)
    if y > 0:
        return u_tilde(hx, rx, y)
    return 2 * f_quad(hx) + 2 * e_lin(rx) - 2 - (1 if x == 2 else 0)


def u_m(m: int, x: int, y: int) -> int:
    """Odometer of the ``m``-th fully symmetric configuration.

    Matches the aggregation for ``m >= 3``; smaller ``m`` are outside the
    range where this formula holds.
    """
    if abs(x) > m or abs(y) > h(m - abs(x)):
        return 0
    return u_prime(m - abs(x), abs(y))


def u_m_table(m: int) -> dict[Vertex, int]:
    """All non-zero values of :func:`u_m` as a sparse mapping."""
    table = {}
    for v in ClusterShape(m, h).vertices():
        k = u_m(m, *v)
        if k:
            table[v] = k
    return table


def halfline_h_r(n: int) -> tuple[int, int]:
    """Extent and inward frontier of the half-line process after ``n`` particles."""
    if n < 1:
        raise DomainError("n must be positive")
    k = (isqrt(8 * n + 1) - 1) // 2
    return k, n - k * (k + 1) // 2


def halfline_odometer(n: int) -> dict[int, int]:
    hn, rn = halfline_h_r(n)
    return {y: u_tilde(hn, rn, y) for y in range(1, hn + 1)}


def backbone_inflow(x: int) -> int:
    """Particles entering backbone site ``x > 0`` under the closed forms.

    Assumes the two backbone neighbours toppled a multiple of 4 times, which
    holds except next to ``x = 2``.
    """
    return u_prime(x - 1, 0) // 4 + u_prime(x + 1, 0) // 4 + 2 * ((u_prime(x, 1) + 1) // 2)


def tooth_inflow(x: int) -> int:
    """Particles entering ``(x, 1)``: a quarter of the backbone sends plus the downward half of ``(x, 2)``."""
    return u_prime(x, 0) // 4 + (u_prime(x, 2) + 1) // 2


def center_balance(m: int) -> int:
    """Final particle count at the centre predicted by the closed forms."""
    return (
        cardinality_Bm(m)
        + 2 * (u_prime(m - 1, 0) // 4)
        + 2 * ((u_prime(m, 1) + 1) // 2)
        - u_prime(m, 0)
    )
