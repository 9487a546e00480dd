"""Hypercube flag-pattern sequences.

Two families of Hamming paths through {0,1}^a: the reflected Gray code, and
the maximal path whose interior vertices all have weight at least two. The
second is what makes slow-reset flag circuits safe against single flag
measurement errors: only the first and last patterns may have weight one,
because only those may carry weight-one corrections.

Bit order: index 1 is the leftmost character, and vertices are plain strings
serialized exactly as printed.
"""

from __future__ import annotations

from dataclasses import dataclass


class InvalidDimension(Exception):
    pass


@dataclass(frozen=True)
class FlagSequence:
    a: int
    vertices: tuple

    def __post_init__(self):
        object.__setattr__(self, "vertices", tuple(self.vertices))

    def __len__(self):
        return len(self.vertices)

    def __iter__(self):
        return iter(self.vertices)

    def __getitem__(self, i):
        return self.vertices[i]


def _ones(a: int, idxs) -> str:
    """Vertex with 1s exactly at the given 1-based indices."""
    bits = ["0"] * a
    for i in idxs:
        bits[i - 1] = "1"
    return "".join(bits)


def gray_code(a: int) -> FlagSequence:
    """Reflected Gray code: length-2^a Hamming path visiting every vertex.

    Built by running the (a-1)-sequence with 0s appended, then backwards
    with 1s appended, so the leftmost bit toggles most often.
    """
    if a < 1:
        raise InvalidDimension("gray_code needs a >= 1")
    seq = ["0", "1"]
    for _ in range(a - 1):
        seq = [v + "0" for v in seq] + [v + "1" for v in reversed(seq)]
    return FlagSequence(a, seq)


def weight2_path(a: int) -> FlagSequence:
    """Maximal path 10^{a-1} .. 0^{a-1}1 with interior weights >= 2.

    Length is 2^a - 2a + 3, which is optimal: the path must alternate odd
    and even weights, and only 2^{a-1} - a odd-weight vertices of weight
    above one exist.
    """
    if a < 2:
        raise InvalidDimension("weight2_path needs a >= 2")
    if a == 2:
        return FlagSequence(2, ("10", "11", "01"))
    seq = ["100", "110", "111", "011", "001"]
    for dim in range(4, a + 1):
        seq = _extend_weight2(seq, dim)
    return FlagSequence(a, seq)


def _extend_weight2(prev: list, a: int) -> list:
    """One induction step: build the dimension-a path from dimension a-1.

    Run the previous sequence with 0s appended, stopping before its last
    vertex; run it backward with 1s appended and coordinates 2 and a-1
    swapped; then finish through the remaining weight-two vertices of the
    top hyperplane, weight-three stepping stones interposed.
    """
    head = prev[:-1]
    part_a = [v + "0" for v in head]
    part_b = [_swap_bits(v, 2, a - 1) + "1" for v in reversed(head)]
    if a == 4:
        tail = [_ones(a, {1, 2, a}), _ones(a, {2, a}), _ones(a, {a})]
    else:
        tail = [_ones(a, {1, 3, a}), _ones(a, {3, a})]
        for j in range(3, a - 2):
            tail += [_ones(a, {j, j + 1, a}), _ones(a, {j + 1, a})]
        tail += [_ones(a, {2, a - 2, a}), _ones(a, {2, a}), _ones(a, {a})]
    return part_a + part_b + tail


def _swap_bits(v: str, i: int, j: int) -> str:
    bits = list(v)
    bits[i - 1], bits[j - 1] = bits[j - 1], bits[i - 1]
    return "".join(bits)


@dataclass
class ValidationReport:
    adjacent: bool
    distinct: bool
    endpoint_weights: tuple
    min_interior_weight: int
    passed: bool
    failures: tuple


def validate_sequence(seq, require_interior_weight2: bool = False) -> ValidationReport:
    """Check the Hamming-path invariants, optionally the weight-2 interior."""
    vertices = list(seq)
    failures = []
    widths = {len(v) for v in vertices}
    if len(widths) > 1:
        failures.append("mixed widths")
    adjacent = all(
        sum(x != y for x, y in zip(u, v)) == 1
        for u, v in zip(vertices, vertices[1:])
    ) and not failures
    if not adjacent:
        failures.append("adjacency")
    distinct = len(set(vertices)) == len(vertices)
    if not distinct:
        failures.append("repeats")
    weights = [v.count("1") for v in vertices]
    endpoint_weights = (weights[0], weights[-1]) if weights else (0, 0)
    interior = weights[1:-1]
    min_interior = min(interior) if interior else 0
    if require_interior_weight2:
        if min_interior < 2 and interior:
            failures.append("interior weight below two")
        if endpoint_weights != (1, 1):
            failures.append("endpoints not weight one")
    return ValidationReport(
        adjacent=adjacent,
        distinct=distinct,
        endpoint_weights=endpoint_weights,
        min_interior_weight=min_interior,
        passed=not failures,
        failures=tuple(failures),
    )


def unvisited_vertices(path: FlagSequence) -> set:
    """Hypercube vertices the path skips."""
    a = path.a
    everything = {format(i, f"0{a}b") for i in range(2 ** a)}
    return everything - set(path.vertices)


def longest_weight2_path_length(a: int) -> int:
    """Exhaustive search for the longest interior-weight->=2 path.

    Depth-first over all paths from 10^{a-1}; only feasible for small a.
    Used to confirm maximality of weight2_path.
    """
    if a < 2 or a > 4:
        raise InvalidDimension("exhaustive search is for 2 <= a <= 4")
    n = 2 ** a
    start = 1 << (a - 1)  # 10^{a-1} with index 1 = most significant
    end = 1
    good = [i == start or i == end or bin(i).count("1") >= 2 for i in range(n)]
    neighbors = [[i ^ (1 << b) for b in range(a)] for i in range(n)]
    best = 0

    def walk(v: int, visited: int, length: int):
        nonlocal best
        if v == end:
            best = max(best, length)
            return
        for u in neighbors[v]:
            if good[u] and not visited & (1 << u):
                walk(u, visited | (1 << u), length + 1)

    walk(start, 1 << start, 1)
    return best
