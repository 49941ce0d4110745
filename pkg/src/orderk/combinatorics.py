"""Counting cells inside relaxed intervals.

An interval type is a triple ``(v, u, g)``: ``u`` is the dimension of the
upper-bound simplex, ``v + 1`` the number of its vertices lying on every
visible facet, and ``g`` the generation. Critical vertices have type
``(u, u, u + 1)``.
"""

from __future__ import annotations

from itertools import product
from math import comb

from .errors import InvalidType


def admissible(v: int, u: int, g: int, k: int) -> bool:
    """Whether the interval-intensity formula applies to type ``(v, u, g)`` at order ``k``.

    Critical vertices ``v == u == g - 1`` pass for every ``k``; their
    intensity vanishes through the ``1/(k - g)!`` factor when ``g > k``.
    """
    if v == u == g - 1:
        return u >= 0
    return 1 <= v <= u and 1 <= g <= min(k, u)


def _check_type(v, g, u):
    ok = u >= 1 and 1 <= v <= u and (1 <= g <= u or g == v + 1 == u + 1)
    if not (ok or (u, v, g) == (0, 0, 1)):
        raise InvalidType(f"inadmissible interval type (v={v}, u={u}, g={g})")


def n_faces(v: int, g: int, u: int, j: int) -> int:
    """Number of ``j``-cells in a relaxed interval of type ``(v, u, g)``."""
    _check_type(v, g, u)
    if not 0 <= j <= u:
        return 0
    if j == 0:
        return int(g == v + 1)
    t0 = max(0, v - j, g - j)
    t1 = min(v + 1, u - j, g - 1)
    return sum(comb(u - v, t + j - v) * comb(v + 1, t) for t in range(t0, t1 + 1))


def interval_cell_total(v: int, g: int, u: int) -> int:
    return sum(n_faces(v, g, u, j) for j in range(u + 1))


def interval_types(n: int, k: int):
    """All admissible ``(v, u, g)`` with ``1 <= u <= n`` at order ``k``, plus ``(0, 0, 1)`` if ``k == 1``."""
    out = [(0, 0, 1)] if k == 1 else []
    for u in range(1, n + 1):
        for v in range(1, u + 1):
            for g in range(1, min(k, u + 1) + 1):
                if admissible(v, u, g, k):
                    out.append((v, u, g))
    return out


def brute_force_faces(v: int, g: int, u: int, j: int) -> int:
    """Count admissible partitions ``U = Uin | Uon | Uout`` by exhaustion.

    ``V`` is taken to be the first ``v + 1`` vertices. Used as an oracle
    for :func:`n_faces`.
    """
    V = set(range(v + 1))
    count = 0
    for colors in product((0, 1, 2), repeat=u + 1):  # 0 in, 1 on, 2 out
        Uin = {i for i, c in enumerate(colors) if c == 0}
        Uon = {i for i, c in enumerate(colors) if c == 1}
        if not (Uin <= V <= Uin | Uon):
            continue
        if j == 0:
            count += not Uon and len(Uin) == g
        elif len(Uon) == j + 1 and g - j <= len(Uin) <= g - 1:
            count += 1
    return count
