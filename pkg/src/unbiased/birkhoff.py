"""Exact lattice certificates for the Birkhoff polytope.

Coordinates are the shifted lattice coordinates l = n*lambda - 1 in which the
doubly stochastic constraint becomes "integer matrices with zero row and
column sums", permutation matrices have entries in {-1, n-1}, and the center
is the zero matrix. Everything here is exact integer arithmetic; nothing in
this module touches floating point.
"""

from __future__ import annotations

from dataclasses import dataclass
from itertools import permutations

from .errors import SizeGuard

VERTEX_GUARD = 8
ENUMERATION_GUARD = 5
NEWTON_GUARD = 7


@dataclass(frozen=True)
class LatticeMatrixPoint:
    """An integer matrix point in the shifted lattice coordinates.

    Row and column sums vanish; points inside the polytope have entries >= -1.
    """

    n: int
    entries: tuple

    def __post_init__(self):
        rows = tuple(tuple(int(x) for x in row) for row in self.entries)
        if len(rows) != self.n or any(len(r) != self.n for r in rows):
            raise ValueError(f"entries must form an {self.n} x {self.n} matrix")
        if any(sum(r) != 0 for r in rows) or any(sum(col) != 0 for col in zip(*rows)):
            raise ValueError("row and column sums must vanish")
        object.__setattr__(self, "entries", rows)

    def to_json(self) -> dict:
        return {"n": self.n, "entries": [list(r) for r in self.entries]}


@dataclass(frozen=True)
class FacetFunctional:
    """A coordinate functional l[i, j] supporting the polytope at value -1.

    ``positions`` lists every matrix position inducing this functional on the
    zero-sum subspace (they collapse pairwise for n = 2).
    """

    representative: tuple
    positions: tuple

    def evaluate(self, point: LatticeMatrixPoint) -> int:
        i, j = self.representative
        return point.entries[i][j]


@dataclass(frozen=True)
class ReflexivityCertificate:
    """Per-facet evaluation summary over the vertex set.

    ``value_counts`` maps each facet representative to the multiset of its
    values on the vertices; reflexivity requires each facet's minimum to be
    exactly -1 (so each facet functional is an integer vertex of the dual).
    """

    n: int
    value_counts: tuple
    table: tuple | None

    @property
    def reflexive(self) -> bool:
        return all(min(counts) == -1 for _, counts in self.value_counts)


@dataclass(frozen=True)
class PolytopeReport:
    n: int
    vertex_count: int
    facet_count: int
    dimension: int
    reflexive: bool
    lattice_point_count: int
    terminal: bool

    def to_json(self) -> dict:
        return {
            "n": self.n,
            "vertex_count": self.vertex_count,
            "facet_count": self.facet_count,
            "dimension": self.dimension,
            "reflexive": self.reflexive,
            "lattice_point_count": self.lattice_point_count,
            "terminal": self.terminal,
        }


def _perm_sign(perm) -> int:
    sign = 1
    seen = [False] * len(perm)
    for start in range(len(perm)):
        if seen[start]:
            continue
        length = 0
        k = start
        while not seen[k]:
            seen[k] = True
            k = perm[k]
            length += 1
        if length % 2 == 0:
            sign = -sign
    return sign


def _vertex_from_permutation(n: int, perm) -> LatticeMatrixPoint:
    entries = [[-1] * n for _ in range(n)]
    for i, j in enumerate(perm):
        entries[i][j] = n - 1
    return LatticeMatrixPoint(n=n, entries=tuple(tuple(r) for r in entries))


def permutation_vertices(n: int) -> list:
    """All n! permutation matrices in shifted coordinates, in lexicographic
    permutation order.

    Each is a genuine vertex: the pairing of two permutation matrices counts
    the positions where they agree, so every vertex uniquely maximizes the
    functional given by itself (certified exhaustively in the test suite).
    """
    if n > VERTEX_GUARD:
        raise SizeGuard(n, VERTEX_GUARD)
    if n < 1:
        raise ValueError("n must be positive")
    return [_vertex_from_permutation(n, p) for p in permutations(range(n))]


def vertex_pairing(a: LatticeMatrixPoint, b: LatticeMatrixPoint) -> int:
    """Entrywise pairing of the underlying 0/1 permutation matrices."""
    total = 0
    for i in range(a.n):
        for j in range(a.n):
            if a.entries[i][j] > 0 and b.entries[i][j] > 0:
                total += 1
    return total


def facet_enumerate(n: int) -> list:
    """Distinct coordinate functionals l[i, j] on the zero-sum subspace.

    Functionals are deduplicated by their exact values on the integer basis
    (e_r - e_n)(e_c - e_n)^T of the subspace; the count is n^2 for n >= 3 but
    collapses to 2 on the one-dimensional polytope at n = 2.
    """
    if n < 2:
        raise ValueError("n must be at least 2")
    groups: dict = {}
    for i in range(n):
        for j in range(n):
            values = []
            for r in range(n - 1):
                for c in range(n - 1):
                    values.append((1 if r == i else -1 if i == n - 1 else 0)
                                  * (1 if c == j else -1 if j == n - 1 else 0))
            groups.setdefault(tuple(values), []).append((i, j))
    facets = []
    for positions in groups.values():
        facets.append(FacetFunctional(representative=positions[0], positions=tuple(positions)))
    facets.sort(key=lambda f: f.representative)
    return facets


def reflexive_check(n: int):
    """Certify reflexivity: every facet functional takes minimum exactly -1
    on the vertex set (its values there are -1 or n-1, all integers).

    Returns (bool, ReflexivityCertificate); the full facet x vertex table is
    included up to n = 5.
    """
    if n > VERTEX_GUARD:
        raise SizeGuard(n, VERTEX_GUARD)
    vertices = permutation_vertices(n)
    facets = facet_enumerate(n)
    counts = []
    table = [] if n <= 5 else None
    for f in facets:
        values = tuple(f.evaluate(v) for v in vertices)
        counts.append((f.representative, tuple(sorted(set(values)))))
        if table is not None:
            table.append(values)
    cert = ReflexivityCertificate(
        n=n,
        value_counts=tuple(counts),
        table=tuple(table) if table is not None else None,
    )
    return cert.reflexive, cert


def _doubly_stochastic_01(n: int) -> list:
    """Brute force: 0/1 matrices with unit row and column sums (one-hot rows)."""
    out = []

    def rec(row, used, acc):
        if row == n:
            out.append(tuple(acc))
            return
        for j in range(n):
            if j not in used:
                rec(row + 1, used | {j}, acc + [j])

    rec(0, frozenset(), [])
    return out


def lattice_points_enumerate(n: int) -> list:
    """All lattice points of the polytope, exactly.

    Residue argument per class k in 0..n-1: entries congruent to k/n modulo 1
    that lie in [0, 1] are forced to {0, 1} for k = 0 (unit row/column sums
    make these the permutation matrices) and to the constant k/n otherwise
    (row sums then force k = 1, the center). Cross-validated for n <= 4 by
    brute force over the entry grids.
    """
    if n > ENUMERATION_GUARD:
        raise SizeGuard(n, ENUMERATION_GUARD)
    vertices = permutation_vertices(n)
    center = LatticeMatrixPoint(n=n, entries=tuple(tuple(0 for _ in range(n)) for _ in range(n)))
    points = list(vertices) + [center]
    if n <= 4:
        brute = set()
        # k = 0 grid: entries in {0, 1}
        for perm in _doubly_stochastic_01(n):
            m = [[n * (1 if perm[i] == j else 0) - 1 for j in range(n)] for i in range(n)]
            brute.add(tuple(tuple(r) for r in m))
        # k >= 1 grids: the only candidate in [0, 1] is the constant k/n
        for k in range(1, n):
            if k * n == n:  # row sums equal k; doubly stochastic needs k = 1
                brute.add(tuple(tuple(k - 1 for _ in range(n)) for _ in range(n)))
        if brute != {p.entries for p in points}:
            raise RuntimeError("residue enumeration disagrees with brute force")
    return points


def _terminal_from_points(vertices: list, points: list, n: int) -> bool:
    """The polytope is terminal iff its lattice points are exactly the
    vertices plus the single strictly interior center."""
    vertex_set = {v.entries for v in vertices}
    point_set = {p.entries for p in points}
    center = tuple(tuple(0 for _ in range(n)) for _ in range(n))
    if point_set != vertex_set | {center}:
        return False
    # the center is strictly interior: every facet value 0 > -1
    facets = facet_enumerate(n)
    center_point = LatticeMatrixPoint(n=n, entries=center)
    return all(f.evaluate(center_point) > -1 for f in facets)


def terminal_check(n: int) -> bool:
    """True iff the only lattice points are the vertices and the center."""
    if n > ENUMERATION_GUARD:
        raise SizeGuard(n, ENUMERATION_GUARD)
    return _terminal_from_points(permutation_vertices(n), lattice_points_enumerate(n), n)


def newton_polytope_of_E(n: int) -> list:
    """Signed exponent points of the determinant expansion, shifted to the
    lattice coordinates.

    The determinant contributes one monomial per permutation; dividing by the
    n-th root of the entry product shifts every exponent matrix by the center,
    which lands the scaled exponents exactly on the permutation vertices.
    Raises if the matched sets differ (they cannot).
    """
    if n > NEWTON_GUARD:
        raise SizeGuard(n, NEWTON_GUARD)
    signed = []
    for perm in permutations(range(n)):
        signed.append((_perm_sign(perm), _vertex_from_permutation(n, perm)))
    monomial_set = {p.entries for _, p in signed}
    vertex_set = {v.entries for v in permutation_vertices(n)}
    if monomial_set != vertex_set:
        raise RuntimeError("Newton polytope does not match the vertex set")
    return signed


def _int_rank(rows: list) -> int:
    """Exact rank of integer vectors by fraction-free elimination."""
    m = [list(r) for r in rows if any(r)]
    if not m:
        return 0
    cols = len(m[0])
    rank = 0
    for c in range(cols):
        piv = next((i for i in range(rank, len(m)) if m[i][c] != 0), None)
        if piv is None:
            continue
        m[rank], m[piv] = m[piv], m[rank]
        for i in range(len(m)):
            if i != rank and m[i][c] != 0:
                p, f = m[rank][c], m[i][c]
                m[i] = [p * a - f * b for a, b in zip(m[i], m[rank])]
        rank += 1
        if rank == len(m):
            break
    return rank


def _int_det(m: list) -> int:
    """Exact determinant by Bareiss fraction-free elimination."""
    a = [list(map(int, row)) for row in m]
    size = len(a)
    sign = 1
    prev = 1
    for k in range(size - 1):
        if a[k][k] == 0:
            swap = next((i for i in range(k + 1, size) if a[i][k] != 0), None)
            if swap is None:
                return 0
            a[k], a[swap] = a[swap], a[k]
            sign = -sign
        for i in range(k + 1, size):
            for j in range(k + 1, size):
                a[i][j] = (a[i][j] * a[k][k] - a[i][k] * a[k][j]) // prev
        prev = a[k][k]
    return sign * a[-1][-1]


def polytope_dimension(n: int) -> int:
    """Affine dimension of the vertex set, exactly; equals (n-1)^2."""
    vertices = permutation_vertices(n)
    base = vertices[0]
    rows = []
    for v in vertices[1:]:
        rows.append([v.entries[i][j] - base.entries[i][j] for i in range(n) for j in range(n)])
    return _int_rank(rows)


def full_report(n: int) -> PolytopeReport:
    """Complete certificate bundle for one dimension (n <= 5)."""
    if n > ENUMERATION_GUARD:
        raise SizeGuard(n, ENUMERATION_GUARD)
    vertices = permutation_vertices(n)
    facets = facet_enumerate(n)
    reflexive, _ = reflexive_check(n)
    points = lattice_points_enumerate(n)
    return PolytopeReport(
        n=n,
        vertex_count=len(vertices),
        facet_count=len(facets),
        dimension=polytope_dimension(n),
        reflexive=reflexive,
        lattice_point_count=len(points),
        terminal=_terminal_from_points(vertices, points, n),
    )


def _top_left_block(point: LatticeMatrixPoint) -> tuple:
    """Coordinates of a zero-sum matrix: its top-left (n-1) x (n-1) block."""
    n = point.n
    return tuple(point.entries[i][j] for i in range(n - 1) for j in range(n - 1))


@dataclass(frozen=True)
class ToricIdentification:
    """Outcome of matching the polytope against a known toric model.

    ``certified`` False with a reason means "not certified", never a failure:
    the search for an identification is heuristic even though every check it
    performs is exact.
    """

    n: int
    model: str
    certified: bool
    reason: str
    details: dict


def toric_identification(n: int) -> ToricIdentification:
    """Match the n = 2 polytope to the reflexive segment and the n = 3 one to
    a product of two triangle fans.

    For n = 3 the certificate is: the vertices split by permutation parity
    into two triples each summing to zero (two projective-plane fans), some
    pair from each triple is a lattice basis (checked by an exact determinant
    against the lattice index), and the nine facets realize every choice of
    one omitted vertex per triple (the product cone structure).
    """
    if n == 2:
        vertices = permutation_vertices(2)
        blocks = sorted(b[0] for b in map(_top_left_block, vertices))
        points = lattice_points_enumerate(2)
        ok = blocks == [-1, 1] and len(points) == 3
        return ToricIdentification(
            n=2, model="projective line", certified=ok,
            reason="vertex blocks +-1 with three lattice points" if ok else "unexpected data",
            details={"vertex_blocks": blocks, "lattice_points": len(points)},
        )
    if n != 3:
        return ToricIdentification(
            n=n, model="", certified=False,
            reason="no toric model attempted for this dimension", details={},
        )
    perms = list(permutations(range(3)))
    vertices = [_vertex_from_permutation(3, p) for p in perms]
    even = [v for p, v in zip(perms, vertices) if _perm_sign(p) == 1]
    odd = [v for p, v in zip(perms, vertices) if _perm_sign(p) == -1]
    for group in (even, odd):
        sums = [sum(v.entries[i][j] for v in group) for i in range(3) for j in range(3)]
        if any(sums):
            return ToricIdentification(
                n=3, model="product of two projective planes", certified=False,
                reason="parity triple does not sum to zero", details={},
            )
    # index of the character lattice inside Z^4 in block coordinates
    target_index = 3 ** ((3 - 1) ** 2 - 1)
    basis_pairs = None
    for a in range(3):
        for b in range(a + 1, 3):
            for c in range(3):
                for d in range(c + 1, 3):
                    rows = [
                        _top_left_block(even[a]), _top_left_block(even[b]),
                        _top_left_block(odd[c]), _top_left_block(odd[d]),
                    ]
                    if abs(_int_det([list(r) for r in rows])) == target_index:
                        basis_pairs = ((a, b), (c, d))
                        break
                if basis_pairs:
                    break
            if basis_pairs:
                break
        if basis_pairs:
            break
    if basis_pairs is None:
        return ToricIdentification(
            n=3, model="product of two projective planes", certified=False,
            reason="no vertex quadruple spans the lattice", details={},
        )
    # product cone structure: each facet omits exactly one vertex per triple
    even_set = [v.entries for v in even]
    odd_set = [v.entries for v in odd]
    omissions = set()
    for f in facet_enumerate(3):
        on_facet = [v for v in vertices if f.evaluate(v) == -1]
        miss_even = [i for i, e in enumerate(even_set) if e not in {v.entries for v in on_facet}]
        miss_odd = [i for i, o in enumerate(odd_set) if o not in {v.entries for v in on_facet}]
        if len(on_facet) != 4 or len(miss_even) != 1 or len(miss_odd) != 1:
            return ToricIdentification(
                n=3, model="product of two projective planes", certified=False,
                reason="facet is not a product of triangle cones", details={},
            )
        omissions.add((miss_even[0], miss_odd[0]))
    if len(omissions) != 9:
        return ToricIdentification(
            n=3, model="product of two projective planes", certified=False,
            reason="facet omission pattern is not the full 3 x 3 grid", details={},
        )
    return ToricIdentification(
        n=3, model="product of two projective planes", certified=True,
        reason="parity triples sum to zero, span the lattice, and the nine "
               "facets realize the product cone grid",
        details={"basis_pairs": basis_pairs, "lattice_index": target_index},
    )
