"""Causal structure learning: constraint-based, score-based, and ICA-based.

All algorithms consume a NumericDataset and emit graph types from
``cgpakit.graphs``. Iteration order is lexicographic on column names
everywhere a tie could occur, so runs are exactly reproducible.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass

import numpy as np
from scipy.optimize import linear_sum_assignment
from scipy.stats import norm

from .dataset import NumericDataset
from .errors import (GraphError, IcaNonConvergence, NodeMismatch,
                     SingularCovariance, SingularRegression, TooFewSamples)
from .graphs import Dag, PartiallyDirectedGraph, WeightedDag
from .stats import CiResult


class CiTester:
    """Fisher-z tests off a precomputed correlation matrix, memoized."""

    def __init__(self, ds: NumericDataset, alpha: float):
        self.n = ds.n_rows
        self.alpha = alpha
        self.columns = ds.columns
        self.index = {c: k for k, c in enumerate(ds.columns)}
        self.corr = np.corrcoef(ds.matrix, rowvar=False)
        if np.isnan(self.corr).any():
            raise SingularCovariance("zero-variance column in dataset")
        self._cache: dict = {}

    def partial_corr(self, i: str, j: str, cond) -> float:
        a, b = self.index[i], self.index[j]
        if not cond:
            return float(np.clip(self.corr[a, b], -1.0, 1.0))
        ix = [a, b] + [self.index[c] for c in cond]
        sub = self.corr[np.ix_(ix, ix)]
        try:
            omega = np.linalg.inv(sub)
        except np.linalg.LinAlgError:
            raise SingularCovariance("singular correlation submatrix") from None
        denom = omega[0, 0] * omega[1, 1]
        if denom <= 0:
            raise SingularCovariance("non-positive precision diagonal")
        return float(np.clip(-omega[0, 1] / math.sqrt(denom), -1.0, 1.0))

    def test(self, i: str, j: str, cond) -> CiResult:
        cond = tuple(sorted(cond))
        key = (i, j, cond) if i <= j else (j, i, cond)
        hit = self._cache.get(key)
        if hit is not None:
            return hit
        if self.n - len(cond) - 3 < 1:
            raise TooFewSamples(f"n={self.n} too small for |Z|={len(cond)}")
        r = self.partial_corr(i, j, cond)
        if abs(r) >= 1.0:
            r = math.copysign(1.0 - 1e-12, r)
        stat = math.sqrt(self.n - len(cond) - 3) * math.atanh(r)
        p = 2.0 * float(norm.sf(abs(stat)))
        res = CiResult(statistic=stat, p_value=p, independent=p > self.alpha, cond_set=cond)
        self._cache[key] = res
        return res


# --------------------------------------------------------------------------
# PC (stable adjacency scan, v-structures, Meek closure)
# --------------------------------------------------------------------------

def pc_discover(ds: NumericDataset, alpha: float = 0.05,
                max_cond_size: int = 4) -> PartiallyDirectedGraph:
    """Constraint-based discovery: prune the complete graph by CI tests."""
    if ds.n_rows <= ds.n_cols + 3:
        raise TooFewSamples(f"need n_rows > n_cols + 3, got {ds.n_rows} x {ds.n_cols}")
    tester = CiTester(ds, alpha)
    nodes = sorted(ds.columns)
    adj = {v: set(nodes) - {v} for v in nodes}
    sepset: dict = {}

    for level in range(max_cond_size + 1):
        snapshot = {v: sorted(adj[v]) for v in nodes}
        removals = []
        testable = False
        for x in nodes:
            for y in snapshot[x]:
                if x >= y:
                    continue
                found = None
                for side_from, side_to in ((x, y), (y, x)):
                    pool = [z for z in snapshot[side_from] if z != side_to]
                    if len(pool) < level:
                        continue
                    testable = True
                    for S in itertools.combinations(pool, level):
                        if tester.test(x, y, S).independent:
                            found = S
                            break
                    if found is not None:
                        break
                if found is not None:
                    removals.append((x, y, found))
        for x, y, S in removals:
            adj[x].discard(y)
            adj[y].discard(x)
            sepset[(x, y)] = sepset[(y, x)] = set(S)
        if not testable:
            break

    directed: dict = {}  # ordered pair -> True for collider-oriented edges
    undirected = {frozenset((x, y)) for x in nodes for y in adj[x] if x < y}

    # v-structures: x -> z <- y when z is not in sepset(x, y)
    for z in nodes:
        neighbors = sorted(adj[z])
        for x, y in itertools.combinations(neighbors, 2):
            if y in adj[x]:
                continue
            if z not in sepset.get((x, y), set()):
                for a in (x, y):
                    e = frozenset((a, z))
                    if e in undirected:
                        undirected.discard(e)
                        directed[(a, z)] = True
                    # an edge already oriented z -> a by an earlier collider
                    # stays as-is (first orientation wins, order is fixed)

    _meek_closure(nodes, adj, directed, undirected)
    return PartiallyDirectedGraph(tuple(ds.columns),
                                  frozenset(directed.keys()),
                                  frozenset(undirected))


def _meek_closure(nodes, adj, directed, undirected):
    """Meek rules R1-R3 applied to a fixed skeleton until no change."""
    def orient(a, b):
        e = frozenset((a, b))
        if e in undirected:
            undirected.discard(e)
            directed[(a, b)] = True
            return True
        return False

    changed = True
    while changed:
        changed = False
        for e in sorted(undirected, key=sorted):
            a, b = sorted(e)
            for u, v in ((a, b), (b, a)):
                # R1: w -> u, u - v, w and v nonadjacent  =>  u -> v
                if any((w, u) in directed and v not in adj[w]
                       for w in sorted(adj[u]) if w != v):
                    changed |= orient(u, v)
                    break
                # R2: u -> w -> v with u - v  =>  u -> v
                if any((u, w) in directed and (w, v) in directed
                       for w in sorted(adj[u] & adj[v])):
                    changed |= orient(u, v)
                    break
                # R3: u - w1 -> v, u - w2 -> v, w1 and w2 nonadjacent  =>  u -> v
                spokes = [w for w in sorted(adj[u] & adj[v])
                          if frozenset((u, w)) in undirected and (w, v) in directed]
                if any(w2 not in adj[w1]
                       for w1, w2 in itertools.combinations(spokes, 2)):
                    changed |= orient(u, v)
                    break
            if changed:
                break


# --------------------------------------------------------------------------
# BIC scoring and greedy score-based search
# --------------------------------------------------------------------------

class BicScorer:
    """Decomposable Gaussian BIC: sum of node log-likelihoods minus (k/2)log N."""

    def __init__(self, ds: NumericDataset):
        self.n = ds.n_rows
        self.columns = ds.columns
        self.index = {c: k for k, c in enumerate(ds.columns)}
        centered = ds.matrix - ds.matrix.mean(axis=0)
        self.cov = centered.T @ centered / self.n  # MLE covariance
        self._cache: dict = {}

    def local(self, node: str, parents) -> float:
        key = (node, frozenset(parents))
        hit = self._cache.get(key)
        if hit is not None:
            return hit
        v = self.index[node]
        ps = sorted(self.index[p] for p in parents)
        if ps:
            cpp = self.cov[np.ix_(ps, ps)]
            cpv = self.cov[ps, v]
            try:
                beta = np.linalg.solve(cpp, cpv)
            except np.linalg.LinAlgError:
                raise SingularRegression(
                    f"collinear parents {sorted(parents)} for {node}") from None
            sigma2 = float(self.cov[v, v] - cpv @ beta)
        else:
            sigma2 = float(self.cov[v, v])
        sigma2 = max(sigma2, 1e-12)
        loglik = -0.5 * self.n * (math.log(2.0 * math.pi * sigma2) + 1.0)
        k = len(ps) + 2  # coefficients + intercept + variance
        score = loglik - 0.5 * k * math.log(self.n)
        self._cache[key] = score
        return score

    def total(self, dag: Dag) -> float:
        return sum(self.local(v, dag.parents(v)) for v in dag.nodes)


def bic_score(ds: NumericDataset, dag: Dag) -> float:
    return BicScorer(ds).total(dag)


class _SearchState:
    """Mutable CPDAG for the equivalence-class search."""

    def __init__(self, nodes):
        self.nodes = sorted(nodes)
        self.parents = {v: set() for v in self.nodes}
        self.children = {v: set() for v in self.nodes}
        self.neigh = {v: set() for v in self.nodes}  # undirected

    def adjacent(self, x: str) -> set:
        return self.parents[x] | self.children[x] | self.neigh[x]

    def is_clique(self, S) -> bool:
        S = sorted(S)
        return all(b in self.adjacent(a)
                   for i, a in enumerate(S) for b in S[i + 1:])

    def blocked_semi_directed(self, src: str, dst: str, blocked: set) -> bool:
        """True when every semi-directed src->...->dst path hits ``blocked``."""
        stack, seen = [src], {src}
        while stack:
            u = stack.pop()
            if u == dst:
                return False
            for w in self.children[u] | self.neigh[u]:
                if w not in seen and w not in blocked:
                    seen.add(w)
                    stack.append(w)
        return True

    def edge_count(self) -> int:
        directed = sum(len(p) for p in self.parents.values())
        undirected = sum(len(s) for s in self.neigh.values()) // 2
        return directed + undirected

    def copy(self) -> "_SearchState":
        dup = _SearchState(self.nodes)
        for v in self.nodes:
            dup.parents[v] = set(self.parents[v])
            dup.children[v] = set(self.children[v])
            dup.neigh[v] = set(self.neigh[v])
        return dup

    def total_score(self, scorer: "BicScorer") -> float:
        parents = {v: set() for v in self.nodes}
        for u, v in self.consistent_extension():
            parents[v].add(u)
        return sum(scorer.local(v, parents[v]) for v in self.nodes)

    def set_orientation(self, directed_pairs, undirected_pairs):
        for v in self.nodes:
            self.parents[v].clear()
            self.children[v].clear()
            self.neigh[v].clear()
        for u, v in directed_pairs:
            self.parents[v].add(u)
            self.children[u].add(v)
        for e in undirected_pairs:
            a, b = tuple(e)
            self.neigh[a].add(b)
            self.neigh[b].add(a)

    # -- PDAG -> DAG -> CPDAG completion ------------------------------------

    def consistent_extension(self) -> frozenset:
        """Orient undirected edges into a DAG respecting current arrows."""
        parents = {v: set(self.parents[v]) for v in self.nodes}
        children = {v: set(self.children[v]) for v in self.nodes}
        neigh = {v: set(self.neigh[v]) for v in self.nodes}
        remaining = set(self.nodes)
        oriented = {(u, v) for v in self.nodes for u in parents[v]}
        while remaining:
            pick = None
            for x in sorted(remaining):
                if children[x] & remaining:
                    continue  # needs to be a directed sink
                nb = neigh[x] & remaining
                adj_x = (parents[x] | children[x] | neigh[x]) & remaining
                if all(adj_x - {y} <= ((parents[y] | children[y] | neigh[y]) | {y})
                       for y in nb):
                    pick = x
                    break
            if pick is None:
                raise GraphError("PDAG admits no consistent extension")
            for y in neigh[pick] & remaining:
                oriented.add((y, pick))
            remaining.discard(pick)
        return frozenset(oriented)

    def recomplete(self):
        """Replace the current orientation with the CPDAG of an extension."""
        edges = self.consistent_extension()
        adj = {v: set() for v in self.nodes}
        parents = {v: [] for v in self.nodes}
        for u, v in edges:
            adj[u].add(v)
            adj[v].add(u)
            parents[v].append(u)
        directed: dict = {}
        undirected = {frozenset((u, v)) for u, v in edges}
        for z in self.nodes:  # v-structures of the extension are compelled
            ps = sorted(parents[z])
            for x, y in itertools.combinations(ps, 2):
                if y not in adj[x]:
                    for a in (x, y):
                        e = frozenset((a, z))
                        if e in undirected:
                            undirected.discard(e)
                            directed[(a, z)] = True
        _meek_closure(self.nodes, adj, directed, undirected)
        self.set_orientation(directed.keys(), undirected)


def _subsets(items, cap: int = 10):
    items = sorted(items)[:cap]
    for size in range(len(items) + 1):
        yield from itertools.combinations(items, size)


def _best_insert(state: _SearchState, scorer: BicScorer, eps: float):
    best = None
    for x in state.nodes:
        adj_x = state.adjacent(x)
        for y in state.nodes:
            if x == y or y in adj_x:
                continue
            na = state.neigh[y] & adj_x
            pool = state.neigh[y] - adj_x
            for T in _subsets(pool):
                S = na | set(T)
                if not state.is_clique(S):
                    continue
                if not state.blocked_semi_directed(y, x, S):
                    continue
                pa = state.parents[y] | S
                delta = scorer.local(y, pa | {x}) - scorer.local(y, pa)
                if best is None or delta > best[0] + eps:
                    best = (delta, x, y, tuple(T))
    return best


def _best_delete(state: _SearchState, scorer: BicScorer, eps: float):
    pairs = [(u, v) for v in state.nodes for u in state.parents[v]]
    pairs += [(a, b) for a in state.nodes for b in state.neigh[a]]
    best = None
    for x, y in sorted(pairs):
        na = state.neigh[y] & state.adjacent(x)
        for H in _subsets(na):
            keep = na - set(H)
            if not state.is_clique(keep):
                continue
            pa = state.parents[y] - {x} | keep
            delta = scorer.local(y, pa) - scorer.local(y, pa | {x})
            if best is None or delta > best[0] + eps:
                best = (delta, x, y, tuple(H))
    return best


def _apply_insert(state: _SearchState, x: str, y: str, T):
    state.parents[y].add(x)
    state.children[x].add(y)
    for t in T:
        state.neigh[t].discard(y)
        state.neigh[y].discard(t)
        state.parents[y].add(t)
        state.children[t].add(y)
    state.recomplete()


def _apply_delete(state: _SearchState, x: str, y: str, H):
    state.parents[y].discard(x)
    state.children[x].discard(y)
    state.neigh[x].discard(y)
    state.neigh[y].discard(x)
    for h in H:
        if h in state.neigh[y]:
            state.neigh[y].discard(h)
            state.neigh[h].discard(y)
            state.parents[h].add(y)
            state.children[y].add(h)
        if h in state.neigh[x]:
            state.neigh[x].discard(h)
            state.neigh[h].discard(x)
            state.parents[h].add(x)
            state.children[x].add(h)
    state.recomplete()


def _best_turn(state: _SearchState, scorer: BicScorer, eps: float):
    """Best score-improving re-orientation of one existing edge.

    Each candidate is applied to a copy and re-completed, so the delta
    is the exact equivalence-class score change (the skeleton never
    changes under a turn).
    """
    base = state.total_score(scorer)
    candidates = [(v, u) for v in state.nodes for u in state.parents[v]]
    candidates += [(a, b) for a in state.nodes for b in state.neigh[a]]
    best = None
    for x, y in sorted(candidates):  # make x -> y hold in the new class
        trial = state.copy()
        trial.parents[x].discard(y)
        trial.children[y].discard(x)
        trial.neigh[x].discard(y)
        trial.neigh[y].discard(x)
        trial.parents[y].add(x)
        trial.children[x].add(y)
        try:
            trial.recomplete()
        except GraphError:
            continue
        delta = trial.total_score(scorer) - base
        if delta > eps and (best is None or delta > best[0] + eps):
            best = (delta, trial)
    return best


def score_search(ds: NumericDataset, lam: float = 0.0,
                 scorer: BicScorer | None = None) -> PartiallyDirectedGraph:
    """Greedy equivalence-class search on BIC - lam * |edges|.

    Repeats three phases to convergence: forward insertions while the
    penalized objective improves, backward deletions while it improves,
    then single-edge turnings while they improve. Ties break
    lexicographically, so runs reproduce exactly.
    """
    eps = 1e-10
    scorer = scorer or BicScorer(ds)
    state = _SearchState(ds.columns)
    while True:
        moved = False
        while True:
            best = _best_insert(state, scorer, eps)
            if best is None or best[0] - lam <= eps:
                break
            _apply_insert(state, best[1], best[2], best[3])
            moved = True
        while True:
            best = _best_delete(state, scorer, eps)
            if best is None or best[0] + lam <= eps:
                break
            _apply_delete(state, best[1], best[2], best[3])
            moved = True
        turned = False
        while True:
            best = _best_turn(state, scorer, eps)
            if best is None:
                break
            state = best[1]
            moved = turned = True
        if not moved or not turned:
            break  # a full cycle with no turn cannot enable new moves
    directed = frozenset((u, v) for v in state.nodes for u in state.parents[v])
    undirected = frozenset(frozenset((a, b)) for a in state.nodes
                           for b in state.neigh[a])
    return PartiallyDirectedGraph(tuple(ds.columns), directed, undirected)


def _extension_dag(cpdag: PartiallyDirectedGraph, columns) -> Dag:
    state = _SearchState(cpdag.nodes)
    state.set_orientation(cpdag.directed_edges, cpdag.undirected_edges)
    return Dag(tuple(columns), state.consistent_extension())


def grasp_discover(ds: NumericDataset, lam: float = 0.0) -> Dag:
    """Sparsity-regularized search: objective BIC(G) - lam * |edges(G)|.

    lam = 0 reproduces ges_discover exactly. The returned DAG is a
    consistent extension of the search's equivalence class, so
    orientations within the class follow the deterministic extension
    order rather than carrying causal meaning.
    """
    return _extension_dag(score_search(ds, lam=lam), ds.columns)


def ges_discover(ds: NumericDataset) -> Dag:
    """Greedy BIC equivalence search (forward insertions, backward deletions)."""
    return grasp_discover(ds, lam=0.0)


# --------------------------------------------------------------------------
# ICA-LiNGAM
# --------------------------------------------------------------------------

def _symmetric_decorrelate(W: np.ndarray) -> np.ndarray:
    vals, vecs = np.linalg.eigh(W @ W.T)
    vals = np.maximum(vals, 1e-12)
    return vecs @ np.diag(vals ** -0.5) @ vecs.T @ W


def _fastica_unmixing(X: np.ndarray, seed: int, max_iters: int, tol: float) -> np.ndarray:
    """Fixed-point ICA (tanh contrast, symmetric decorrelation) on rows of X."""
    n, p = X.shape
    Xc = X - X.mean(axis=0)
    cov = Xc.T @ Xc / n
    vals, vecs = np.linalg.eigh(cov)
    if vals.min() <= 1e-12:
        raise SingularCovariance("dataset covariance is singular")
    K = vecs @ np.diag(vals ** -0.5) @ vecs.T  # ZCA whitening
    Z = Xc @ K
    rng = np.random.default_rng(seed)
    W = _symmetric_decorrelate(rng.normal(size=(p, p)))
    for _ in range(max_iters):
        Y = Z @ W.T
        G = np.tanh(Y)
        W_new = (G.T @ Z) / n - np.diag((1.0 - G ** 2).mean(axis=0)) @ W
        W_new = _symmetric_decorrelate(W_new)
        delta = float(np.max(np.abs(np.abs(np.einsum("ij,ij->i", W_new, W)) - 1.0)))
        W = W_new
        if delta < tol:
            return W @ K  # unmixing in the original coordinates
    raise IcaNonConvergence(max_iters)


def _best_diagonal_permutation(W: np.ndarray) -> np.ndarray:
    """Row permutation minimizing sum(1/|W_ii|); exact assignment solve."""
    cost = 1.0 / np.maximum(np.abs(W), 1e-12)
    rows, cols = linear_sum_assignment(cost)
    perm = np.empty_like(rows)
    perm[cols] = rows  # row rows[k] moves to position cols[k]
    return W[perm, :]


def _causal_order(B: np.ndarray) -> list:
    """Node order making B as lower-triangular as possible (squared mass)."""
    p = B.shape[0]
    if p <= 8:
        best, best_cost = None, math.inf
        for perm in itertools.permutations(range(p)):
            Bp = B[np.ix_(perm, perm)]
            cost = float(np.sum(np.triu(Bp, k=1) ** 2))
            if cost < best_cost - 1e-15:
                best, best_cost = perm, cost
        return list(best)
    remaining = list(range(p))
    order = []
    while remaining:
        # most exogenous next: smallest squared incoming mass from remaining
        costs = [(float(sum(B[i, j] ** 2 for j in remaining if j != i)), i)
                 for i in remaining]
        _, pick = min(costs)
        order.append(pick)
        remaining.remove(pick)
    return order


def ica_lingam(ds: NumericDataset, prune_threshold: float = 0.05, seed: int = 0,
               max_iters: int = 1000, tol: float = 1e-7) -> WeightedDag:
    """Linear non-Gaussian model fit: ICA, row permutation, causal order,
    least-squares weights on the ordered predecessors, pruning."""
    X = ds.matrix
    W = _fastica_unmixing(X, seed=seed, max_iters=max_iters, tol=tol)
    W = _best_diagonal_permutation(W)
    d = np.diag(W).copy()
    d[np.abs(d) < 1e-12] = 1e-12
    W = W / d[:, None]
    B_ica = np.eye(W.shape[0]) - W
    order = _causal_order(B_ica)

    # minimize ||X - BX||^2 subject to the strict causal order: per-node OLS
    # of each variable on all its predecessors, then threshold pruning.
    Xc = X - X.mean(axis=0)
    cov = Xc.T @ Xc / X.shape[0]
    p = X.shape[1]
    B = np.zeros((p, p))
    for pos, i in enumerate(order):
        preds = order[:pos]
        if not preds:
            continue
        cpp = cov[np.ix_(preds, preds)]
        cpv = cov[preds, i]
        try:
            beta = np.linalg.solve(cpp, cpv)
        except np.linalg.LinAlgError:
            raise SingularRegression("collinear predecessors in causal order") from None
        B[i, preds] = beta
    B[np.abs(B) < prune_threshold] = 0.0

    nodes = ds.columns
    edges = frozenset((nodes[j], nodes[i]) for i in range(p) for j in range(p)
                      if B[i, j] != 0.0)
    return WeightedDag(Dag(nodes, edges), B, prune_threshold)


# --------------------------------------------------------------------------
# Hypothesis-graph evaluation
# --------------------------------------------------------------------------

@dataclass(frozen=True)
class ViolationReport:
    markov_violation_fraction: float
    triangle_violation_fraction: float
    markov_p: float
    triangle_p: float
    per_test_detail: tuple
    n_markov_tests: int
    n_triangle_tests: int

    def to_dict(self) -> dict:
        return {
            "markov_violation_fraction": self.markov_violation_fraction,
            "triangle_violation_fraction": self.triangle_violation_fraction,
            "markov_p": self.markov_p,
            "triangle_p": self.triangle_p,
            "n_markov_tests": self.n_markov_tests,
            "n_triangle_tests": self.n_triangle_tests,
            "per_test_detail": [
                {"kind": kind, "x": x, "y": y, "cond": list(cond),
                 "violated": violated, "result": res.to_dict()}
                for kind, x, y, cond, violated, res in self.per_test_detail],
        }


def _markov_pairs(dag: Dag):
    """(v, u, parents(v)) for every non-descendant u outside v's parent set."""
    for v in sorted(dag.nodes):
        parents = set(dag.parents(v))
        descendants = dag.descendants(v)
        for u in sorted(dag.nodes):
            if u == v or u in parents or u in descendants:
                continue
            yield v, u, tuple(sorted(parents))


def _directed_triangles(dag: Dag):
    for x, y in sorted(dag.edges):
        for z in dag.children(y):
            if (x, z) in dag.edges:
                yield x, y, z


def _violation_fractions(dag: Dag, tester: CiTester, collect: bool = False):
    markov_total = markov_bad = 0
    detail = []
    for v, u, cond in _markov_pairs(dag):
        res = tester.test(v, u, cond)
        violated = not res.independent
        markov_bad += violated
        markov_total += 1
        if collect:
            detail.append(("markov", v, u, cond, violated, res))
    tri_total = tri_bad = 0
    for x, y, z in _directed_triangles(dag):
        unconditional = tester.test(x, z, ())
        given_mediator = tester.test(x, z, (y,))
        violated = unconditional.independent or given_mediator.independent
        tri_bad += violated
        tri_total += 1
        if collect:
            detail.append(("triangle", x, z, (y,), violated, given_mediator))
    markov_frac = markov_bad / markov_total if markov_total else 0.0
    tri_frac = tri_bad / tri_total if tri_total else 0.0
    return markov_frac, tri_frac, detail


def evaluate_hypothesis_graph(ds: NumericDataset, dag: Dag, alpha: float = 0.05,
                              n_permutations: int = 200, seed: int = 0,
                              n_jobs: int = 1) -> ViolationReport:
    """Markov and directed-triangle dependence checks, with a permutation
    null over node relabelings of the same graph shape.

    The relabelings are drawn up front from one seeded generator, so the
    result is identical whether the null is evaluated serially or on
    ``n_jobs`` threads.
    """
    missing = [v for v in dag.nodes if v not in ds.columns]
    if missing:
        raise NodeMismatch(f"dag nodes missing from dataset: {missing}")
    tester = CiTester(ds, alpha)
    markov_frac, tri_frac, detail = _violation_fractions(dag, tester, collect=True)

    rng = np.random.default_rng(seed)
    nodes = list(dag.nodes)
    relabeled = []
    for _ in range(n_permutations):
        perm = rng.permutation(len(nodes))
        relabeled.append(dag.relabel({nodes[i]: nodes[perm[i]]
                                      for i in range(len(nodes))}))

    def fractions(copy):
        m, t, _ = _violation_fractions(copy, tester)
        return m, t

    if n_jobs > 1 and relabeled:
        from concurrent.futures import ThreadPoolExecutor
        with ThreadPoolExecutor(max_workers=n_jobs) as pool:
            results = list(pool.map(fractions, relabeled))
    else:
        results = [fractions(copy) for copy in relabeled]
    markov_leq = sum(m <= markov_frac for m, _ in results)
    tri_leq = sum(t <= tri_frac for _, t in results)
    markov_p = markov_leq / n_permutations if n_permutations else 1.0
    tri_p = tri_leq / n_permutations if n_permutations else 1.0
    return ViolationReport(markov_frac, tri_frac, markov_p, tri_p, tuple(detail),
                           sum(1 for _ in _markov_pairs(dag)),
                           sum(1 for _ in _directed_triangles(dag)))
