"""Reference rank profiles used to check campaign output."""

from __future__ import annotations

from .spectra import RankProfile, max_rank_profile

# Profiles with r(rho) = N+1 ruled out as extremal by the constraint-counting bound.
NON_EXTREMAL_PROFILES = {
    4: {(5, 7, 9), (5, 8, 8), (5, 8, 9)},
    5: {(6, 9, 12), (6, 10, 11), (6, 10, 12)},
    6: {(7, 10, 15, 16), (7, 11, 15, 16), (7, 12, 14, 16), (7, 12, 15, 15), (7, 12, 15, 16)},
}

REFERENCE_MAX_N = 23


def _deficits(n: int) -> list[tuple[int, int]]:
    """Deficits (from the maximal ranks) of the last two views for extremal entangled states."""
    if n == 4:
        return [(1, 1)]
    if n % 2:
        return [(0, 2)]
    if n in (6, 8):
        return [(1, 2), (1, 3)]
    return [(1, 2), (1, 3), (0, 4)]


def expected_extremal_profiles(n: int) -> set[tuple[int, ...]]:
    """Rank profiles of the extremal PPT entangled states reported for 4 <= N <= 23."""
    if not 4 <= n <= REFERENCE_MAX_N:
        raise ValueError(f"no reference row for N={n}")
    mx = list(max_rank_profile(n).ranks)
    out = set()
    for d_prev, d_last in _deficits(n):
        row = mx.copy()
        row[-2] -= d_prev
        row[-1] -= d_last
        out.add(tuple(row))
    return out


def odd_pattern(n: int) -> tuple[int, ...]:
    mx = list(max_rank_profile(n).ranks)
    mx[-1] -= 2
    return tuple(mx)


def matches_reference(profile: RankProfile | tuple, n: int) -> bool:
    return tuple(profile) in expected_extremal_profiles(n)
