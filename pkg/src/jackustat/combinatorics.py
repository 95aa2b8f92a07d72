"""Exact integer combinatorics and nearest-neighbour ordering oracles.

Everything here works with Python integers and :class:`fractions.Fraction`
so results are exact. The ordering oracles count distance orderings of
i.i.d. continuous observations: every one of the ``m!`` orderings of ``m``
distinct points is equally likely, so probabilities of nearest-neighbour
events are ratios of counts.
"""

from __future__ import annotations

import enum
import itertools
from collections.abc import Iterator, Sequence
from fractions import Fraction
from math import comb, factorial

import numpy as np

from .errors import EnumerationTooLargeError, InvalidOrderError

#: largest number of points whose distance orderings we enumerate
MAX_ORDERING_POINTS = 12


def binom(n: int, k: int) -> int:
    """Binomial coefficient C(n, k); 0 when ``k > n``."""
    if n < 0 or k < 0:
        raise InvalidOrderError(f"binom needs nonnegative arguments, got ({n}, {k})")
    return comb(n, k)


def subsets(n: int, s: int) -> Iterator[tuple[int, ...]]:
    """Yield the strictly increasing 1-based ``s``-tuples of ``[n]`` in lexicographic order."""
    if s < 0 or s > n:
        raise InvalidOrderError(f"need 0 <= s <= n, got s={s}, n={n}")
    return itertools.combinations(range(1, n + 1), s)


def unrank_subset(n: int, s: int, rank: int) -> tuple[int, ...]:
    """Return the ``rank``-th (0-based) tuple of ``subsets(n, s)``.

    Uses the combinatorial number system so ``rank`` may be far beyond what
    enumeration could reach.
    """
    total = binom(n, s)
    if not 0 <= rank < total:
        raise IndexError(f"rank {rank} outside [0, {total})")
    out = []
    lo = 1
    for remaining in range(s, 0, -1):
        v = lo
        while True:
            block = comb(n - v, remaining - 1)
            if rank < block:
                break
            rank -= block
            v += 1
        out.append(v)
        lo = v + 1
    return tuple(out)


def combinations_array(n: int, s: int) -> np.ndarray:
    """All 0-based ``s``-subsets of ``range(n)`` as a ``(C(n, s), s)`` array, lexicographic."""
    total = binom(n, s)
    dtype = np.int32 if n < 2**31 else np.int64
    flat = np.fromiter(
        itertools.chain.from_iterable(itertools.combinations(range(n), s)),
        dtype=dtype,
        count=total * s,
    )
    return flat.reshape(total, s)


def chu_vandermonde_check(m: int, n: int, r: int) -> bool:
    """True iff C(m+n, r) equals the Vandermonde convolution sum."""
    rhs = sum(comb(m, k) * comb(n, r - k) for k in range(r + 1))
    return comb(m + n, r) == rhs


class Variant(enum.Enum):
    """Which observations the two nearest-neighbour indicators point at.

    ``SHARED_SHARED``: both indicators target the same shared observation.
    ``SHARED_NEW``: one targets a shared observation, the other a fresh one
    that only belongs to the second subsample.
    ``NEW_NEW``: each targets a fresh observation of its own subsample.
    """

    SHARED_SHARED = "shared-shared"
    SHARED_NEW = "shared-new"
    NEW_NEW = "new-new"


# A labelled ordering problem: ``counts[label]`` points carry each label, and
# each of the two subsamples is a set of labels plus the label its nearest
# point must carry.
_Problem = tuple[dict[str, int], frozenset, str, frozenset, str]


def _ordering_problem(s: int, c: int, variant: Variant) -> _Problem:
    if not 1 <= c <= s:
        raise InvalidOrderError(f"need 1 <= c <= s, got c={c}, s={s}")
    fresh = s - c
    if variant is Variant.SHARED_SHARED:
        counts = {"T": 1, "S": c - 1, "P": fresh, "Q": fresh}
        return counts, frozenset("TSP"), "T", frozenset("TSQ"), "T"
    if fresh == 0:
        raise InvalidOrderError(f"variant {variant.value} needs c < s, got c=s={s}")
    if variant is Variant.SHARED_NEW:
        counts = {"T": 1, "S": c - 1, "P": fresh, "J": 1, "Q": fresh - 1}
        return counts, frozenset("TSP"), "T", frozenset("TSJQ"), "J"
    counts = {"I": 1, "P": fresh - 1, "S": c, "J": 1, "Q": fresh - 1}
    return counts, frozenset("IPS"), "I", frozenset("SJQ"), "J"


def _count_by_placement(problem: _Problem) -> int:
    """Number of orderings (of distinct points) in which both events hold.

    Walks label sequences from the nearest point outward and stops as soon as
    both subsamples have met their nearest point; the undecided tail is
    counted in closed form as a multinomial.
    """
    counts, first_set, first_target, second_set, second_target = problem
    labels = [k for k, v in counts.items() if v > 0]
    weight = 1
    for v in counts.values():
        weight *= factorial(v)

    def multinomial(rem: dict[str, int]) -> int:
        total = factorial(sum(rem.values()))
        for v in rem.values():
            total //= factorial(v)
        return total

    def walk(rem: dict[str, int], first_done: bool, second_done: bool) -> int:
        if first_done and second_done:
            return multinomial(rem)
        acc = 0
        for lab in labels:
            if rem[lab] == 0:
                continue
            fd, sd = first_done, second_done
            if not fd and lab in first_set:
                if lab != first_target:
                    continue
                fd = True
            if not sd and lab in second_set:
                if lab != second_target:
                    continue
                sd = True
            rem[lab] -= 1
            acc += walk(rem, fd, sd)
            rem[lab] += 1
        return acc

    return weight * walk(dict(counts), False, False)


def kernel_product_probability(s: int, c: int, variant: Variant | str) -> Fraction:
    """Exact E[kappa_i(D) * kappa_j(D')] for two size-``s`` subsamples sharing ``c`` points.

    Counted over all ``(2s - c)!`` equally likely distance orderings of the
    ``2s - c`` distinct observations.
    """
    variant = Variant(variant)
    m = 2 * s - c
    if m > MAX_ORDERING_POINTS:
        raise EnumerationTooLargeError(
            f"{m} points exceeds the ordering cap of {MAX_ORDERING_POINTS}"
        )
    hits = _count_by_placement(_ordering_problem(s, c, variant))
    return Fraction(hits, factorial(m))


def kernel_product_probability_bruteforce(s: int, c: int, variant: Variant | str) -> Fraction:
    """Same quantity as :func:`kernel_product_probability` by raw permutations.

    Only usable for ``2s - c <= 9``; kept as an independent cross-check.
    """
    variant = Variant(variant)
    m = 2 * s - c
    if m > 9:
        raise EnumerationTooLargeError(f"raw permutation oracle capped at 9 points, got {m}")
    _ordering_problem(s, c, variant)
    # points 0..c-1 shared, c..s-1 only in D, s..m-1 only in D'
    first = list(range(s))
    second = list(range(c)) + list(range(s, m))
    i, j = {
        Variant.SHARED_SHARED: (0, 0),
        Variant.SHARED_NEW: (0, s),
        Variant.NEW_NEW: (c, s),
    }[variant]
    hits = 0
    for perm in itertools.permutations(range(m)):
        rank = {p: r for r, p in enumerate(perm)}
        if min(first, key=rank.__getitem__) == i and min(second, key=rank.__getitem__) == j:
            hits += 1
    return Fraction(hits, factorial(m))


def kernel_product_closed_form(
    s: int, c: int, variant: Variant | str, *, top_offset: int = 2
) -> Fraction:
    """Closed-form expressions for :func:`kernel_product_probability`.

    The NEW_NEW sum divides by ``C(2s - c - top_offset, s - 1 + i)``. The
    default offset 2 is what the counting argument gives; offset 1 is a
    commonly quoted variant that the ordering oracle refutes.
    """
    variant = Variant(variant)
    _ordering_problem(s, c, variant)
    m = 2 * s - c
    if variant is Variant.SHARED_SHARED:
        return Fraction(1, m)
    if variant is Variant.SHARED_NEW:
        tail = sum(Fraction(comb(s - c - 1, i), comb(m - 2, i)) for i in range(s - c))
        return Fraction(1, m * (m - 1)) * tail
    if top_offset not in (1, 2):
        raise ValueError(f"top_offset must be 1 or 2, got {top_offset}")
    top = m - top_offset
    tail = sum(Fraction(comb(s - c - 1, i), comb(top, s - 1 + i)) for i in range(s - c))
    return Fraction(2, m * (m - 1)) * tail


def kernel_product_total(s: int, c: int) -> Fraction:
    """Sum of E[kappa_i kappa_j'] over all index pairs, weighted by multiplicity.

    Both subsamples select exactly one nearest point, so this is always 1.
    Pairs of two distinct shared points contribute 0.
    """
    total = c * kernel_product_probability(s, c, Variant.SHARED_SHARED)
    if c < s:
        total += 2 * c * (s - c) * kernel_product_probability(s, c, Variant.SHARED_NEW)
        total += (s - c) ** 2 * kernel_product_probability(s, c, Variant.NEW_NEW)
    return total


def nearest_probability(s: int, target: int = 0) -> Fraction:
    """E[kappa(x; Z_target, D_[s])] by exhaustive ordering of ``s`` points."""
    if s > MAX_ORDERING_POINTS - 4:
        raise EnumerationTooLargeError(f"raw ordering oracle capped at 8 points, got {s}")
    if not 0 <= target < s:
        raise InvalidOrderError(f"target {target} outside subsample of size {s}")
    hits = sum(1 for perm in itertools.permutations(range(s)) if perm[0] == target)
    return Fraction(hits, factorial(s))


def is_index_tuple(t: Sequence[int], n: int, s: int) -> bool:
    """Check the index-tuple invariants: strictly increasing, in ``[1, n]``, length ``s``."""
    return (
        len(t) == s
        and all(1 <= v <= n for v in t)
        and all(a < b for a, b in zip(t, t[1:]))
    )
