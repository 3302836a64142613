"""Certification of projector systems and their unbiasedness relations.

All checks are report-producing: they list every violated relation with its
indices and a deviation magnitude in spectral norm (largest singular value),
which is basis independent. Numeric rank always means rank at the caller's
tolerance.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ZeroEntry
from .linalg import as_matrix, invert, singular_spectrum
from .potential import WeightMatrix
from .report import CheckReport, Violation

__all__ = [
    "CheckReport",
    "Violation",
    "ProjectorSystem",
    "GraphSpec",
    "projectors_from_transition",
    "check_unbiased_pair",
    "check_graph_representation",
    "check_admissible_A_representation",
    "check_psi_pushforward",
    "check_mub",
    "coordinate_projectors",
]


def _specnorm(m: np.ndarray) -> float:
    return float(np.linalg.norm(m, 2))


def coordinate_projectors(n: int) -> list:
    """The diagonal matrix units e_ii, the reference complete system."""
    qs = []
    for i in range(n):
        q = np.zeros((n, n), dtype=complex)
        q[i, i] = 1.0
        qs.append(q)
    return qs


@dataclass
class ProjectorSystem:
    """An ordered list of projectors sharing one dimension.

    Members are expected to be rank-1 idempotents unless a different rank is
    declared in ``ranks`` (only an explicitly marked aggregate may have rank
    above 1). ``validate`` checks idempotency, numeric rank, and pairwise
    orthogonality of all declared-orthogonal pairs.
    """

    n: int
    members: list
    tolerance: float = 1e-10
    ranks: list | None = None

    def __post_init__(self):
        self.members = [as_matrix(m) for m in self.members]
        for m in self.members:
            if m.shape != (self.n, self.n):
                raise ValueError("all members must be n x n")
        if self.ranks is None:
            self.ranks = [1] * len(self.members)

    def validate(self, pairwise_orthogonal: bool = True) -> CheckReport:
        report = CheckReport()
        for i, m in enumerate(self.members):
            dev = _specnorm(m @ m - m)
            if dev > self.tolerance:
                report.add("idempotent", (i,), dev)
            rank = singular_spectrum(m, tol=max(self.tolerance, 1e-12)).rank
            if rank != self.ranks[i]:
                report.add("rank", (i,), float(abs(rank - self.ranks[i])))
        if pairwise_orthogonal:
            for i in range(len(self.members)):
                for j in range(len(self.members)):
                    if i == j:
                        continue
                    dev = _specnorm(self.members[i] @ self.members[j])
                    if dev > self.tolerance:
                        report.add("orthogonal", (i, j), dev)
        return report


@dataclass(frozen=True)
class GraphSpec:
    """A loop-free weighted graph: vertices plus undirected weighted edges.

    Adjacent vertices carry the unbiasedness relation with the edge weight;
    non-adjacent ones carry the orthogonality relation.
    """

    vertices: tuple
    edges: tuple

    def __post_init__(self):
        seen = set()
        for u, v, weight in self.edges:
            if u == v:
                raise ValueError(f"loop at vertex {u!r}")
            if u not in self.vertices or v not in self.vertices:
                raise ValueError(f"edge ({u!r}, {v!r}) references unknown vertex")
            key = frozenset((u, v))
            if key in seen:
                raise ValueError(f"duplicate edge ({u!r}, {v!r})")
            if weight == 0:
                raise ValueError(f"zero weight on edge ({u!r}, {v!r})")
            seen.add(key)

    def weight(self, u, v):
        for a, b, w in self.edges:
            if {a, b} == {u, v}:
                return w
        return None

    def components(self) -> list:
        """Connected components as lists of vertex positions."""
        index = {v: i for i, v in enumerate(self.vertices)}
        adj = {i: set() for i in range(len(self.vertices))}
        for u, v, _ in self.edges:
            adj[index[u]].add(index[v])
            adj[index[v]].add(index[u])
        seen, comps = set(), []
        for i in range(len(self.vertices)):
            if i in seen:
                continue
            stack, comp = [i], []
            while stack:
                k = stack.pop()
                if k in seen:
                    continue
                seen.add(k)
                comp.append(k)
                stack.extend(adj[k] - seen)
            comps.append(sorted(comp))
        return comps


def projectors_from_transition(g) -> ProjectorSystem:
    """The complete system p_i = g q_i g^{-1} conjugating the coordinate one.

    p_i is the outer product of column i of g with row i of g^{-1}; the
    members are rank-1 idempotents, pairwise orthogonal, summing to identity.
    """
    g = as_matrix(g)
    ginv = invert(g)
    members = [np.outer(g[:, i], ginv[i, :]) for i in range(g.shape[0])]
    return ProjectorSystem(n=g.shape[0], members=members)


def check_unbiased_pair(g, w: WeightMatrix, tol: float = 1e-10) -> CheckReport:
    """Certify that p_i = g q_i g^{-1} is unbiased against the coordinate q_j.

    Checks |Tr(p_i q_j) - L[i,j]| <= tol and the sandwich relation
    ||p_i q_j p_i - L[i,j] p_i|| <= tol*n for all pairs, plus the projector
    system invariants of {p_i}. Equivalent content: g[j,i]*ginv[i,j] = L[i,j].
    """
    g = as_matrix(g)
    n = g.shape[0]
    if w.k != n or w.n != n:
        raise ValueError("check_unbiased_pair requires a square weight matrix")
    zeros = np.argwhere(g == 0)
    if zeros.size:
        raise ZeroEntry(tuple(int(x) for x in zeros[0]))
    system = projectors_from_transition(g)
    system.tolerance = tol
    report = system.validate()
    qs = coordinate_projectors(n)
    lam = w.entries
    for i, p in enumerate(system.members):
        for j, q in enumerate(qs):
            trace_dev = abs(np.trace(p @ q) - lam[i, j])
            if trace_dev > tol:
                report.add("trace", (i, j), float(trace_dev))
            sandwich_dev = _specnorm(p @ q @ p - lam[i, j] * p)
            if sandwich_dev > tol * n:
                report.add("sandwich", (i, j), sandwich_dev)
    return report


def check_graph_representation(graph: GraphSpec, assignment: dict, tol: float = 1e-10) -> CheckReport:
    """Verify the defining relations of the graph algebra on an assignment.

    Per vertex x^2 = x; per edge (i, j) with weight L both x_i x_j x_i = L x_i
    and x_j x_i x_j = L x_j; per non-edge both products vanish. The report's
    details carry the numeric generator ranks; connected components whose
    generators disagree in rank are violations (the algebra forces a common
    "rank of the representation" on each component).
    """
    mats = {v: as_matrix(assignment[v]) for v in graph.vertices}
    dims = {m.shape for m in mats.values()}
    if len(dims) != 1:
        raise ValueError("all assigned matrices must share one dimension")
    report = CheckReport()
    index = {v: i for i, v in enumerate(graph.vertices)}
    for v in graph.vertices:
        x = mats[v]
        dev = _specnorm(x @ x - x)
        if dev > tol:
            report.add("idempotent", (index[v],), dev)
    adjacency = {frozenset((u, v)): weight for u, v, weight in graph.edges}
    verts = list(graph.vertices)
    for a in range(len(verts)):
        for b in range(a + 1, len(verts)):
            u, v = verts[a], verts[b]
            x, y = mats[u], mats[v]
            weight = adjacency.get(frozenset((u, v)))
            if weight is not None:
                dev1 = _specnorm(x @ y @ x - weight * x)
                dev2 = _specnorm(y @ x @ y - weight * y)
                if dev1 > tol:
                    report.add("edge_sandwich", (a, b), dev1)
                if dev2 > tol:
                    report.add("edge_sandwich", (b, a), dev2)
            else:
                dev1 = _specnorm(x @ y)
                dev2 = _specnorm(y @ x)
                if dev1 > tol:
                    report.add("nonedge_orthogonal", (a, b), dev1)
                if dev2 > tol:
                    report.add("nonedge_orthogonal", (b, a), dev2)
    ranks = [singular_spectrum(mats[v], tol=max(tol, 1e-12)).rank for v in verts]
    report.details["generator_ranks"] = ranks
    for comp in graph.components():
        comp_ranks = {ranks[i] for i in comp}
        if len(comp_ranks) > 1:
            report.add("rank_uniform", tuple(comp), float(max(comp_ranks) - min(comp_ranks)))
    if ranks:
        report.details["representation_rank"] = ranks[0] if len(set(ranks)) == 1 else None
    return report


def check_admissible_A_representation(qs: ProjectorSystem, P, lambda_bar, k: int,
                                      tol: float = 1e-10) -> CheckReport:
    """Check the relations of a complete system q_i plus one aggregate P.

    Requires P^2 = P, numeric rank(P) = k, q_i q_j = 0 for i != j, and
    q_i P q_i = lambda_i q_i.
    """
    P = as_matrix(P)
    lambda_bar = list(lambda_bar)
    if len(lambda_bar) != len(qs.members):
        raise ValueError("lambda_bar length must match the number of q projectors")
    report = CheckReport()
    dev = _specnorm(P @ P - P)
    if dev > tol:
        report.add("P_idempotent", (), dev)
    rank = singular_spectrum(P, tol=max(tol, 1e-12)).rank
    if rank != k:
        report.add("P_rank", (), float(abs(rank - k)))
    for i, qi in enumerate(qs.members):
        for j, qj in enumerate(qs.members):
            if i == j:
                continue
            d = _specnorm(qi @ qj)
            if d > tol:
                report.add("orthogonal", (i, j), d)
    for i, qi in enumerate(qs.members):
        d = _specnorm(qi @ P @ qi - lambda_bar[i] * qi)
        if d > tol:
            report.add("sandwich_P", (i,), d)
    return report


def check_psi_pushforward(ps: ProjectorSystem, w: WeightMatrix, tol: float = 1e-10) -> CheckReport:
    """Certify the aggregate-projector relations on P = sum of the k members.

    The targets are the column sums lambda_j = sum_i L[i, j]; passing
    certifies that summing the row projectors to a single rank-k projector
    respects all defining relations of the aggregate algebra.
    """
    k = len(ps.members)
    if w.k != k:
        raise ValueError("weight row count must match the number of projectors")
    n = ps.n
    P = np.zeros((n, n), dtype=complex)
    for p in ps.members:
        P = P + p
    lambda_bar = [complex(s) for s in w.entries.sum(axis=0)]
    qs = ProjectorSystem(n=n, members=coordinate_projectors(n), tolerance=tol)
    report = check_admissible_A_representation(qs, P, lambda_bar, k, tol=tol)
    report.details["lambda_bar"] = lambda_bar
    return report


def check_mub(g, tol: float = 1e-10) -> CheckReport:
    """Mutual-unbiasedness check on the transition matrix itself.

    Passing means gdag * g = n * identity (columns are sqrt(n)-scaled
    orthonormal) and every |g[i,j]| = 1; together these make the induced
    projectors Hermitian and the two bases mutually unbiased. This is cheaper
    than, and equivalent to, rebuilding Hermitian inner products.
    """
    g = as_matrix(g)
    n = g.shape[0]
    report = CheckReport()
    gram_dev = _specnorm(g.conj().T @ g - n * np.eye(n))
    if gram_dev > tol * n:
        report.add("scaled_unitary", (), gram_dev)
    mod_dev = np.abs(np.abs(g) - 1.0)
    for i, j in np.argwhere(mod_dev > tol):
        report.add("unimodular", (int(i), int(j)), float(mod_dev[i, j]))
    return report
