"""Finite metric spaces, metric cones and Gromov-Hausdorff estimates."""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass

import numpy as np

from .errors import MetricViolation

TRIANGLE_TOL = 1e-9
EXHAUSTIVE_LIMIT = 200
EXACT_GH_LIMIT = 8
PROBE_LIMIT = 400


@dataclass
class FiniteMetricSpace:
    labels: list
    D: np.ndarray

    def __post_init__(self):
        self.D = np.asarray(self.D, dtype=float)
        if self.D.ndim != 2 or self.D.shape[0] != self.D.shape[1]:
            raise MetricViolation("distance matrix must be square")
        if len(self.labels) != self.D.shape[0]:
            raise MetricViolation("one label per point is required")

    @property
    def size(self):
        return self.D.shape[0]

    @property
    def diameter(self):
        return float(self.D.max()) if self.size else 0.0

    def validate(self, tol=TRIANGLE_TOL, seed=0, n_triples=200_000):
        """Raise MetricViolation unless D is a (pseudo) metric."""
        D = self.D
        if not np.all(np.isfinite(D)):
            raise MetricViolation("non finite distances")
        if np.any(D < 0):
            raise MetricViolation("negative distances")
        if np.any(np.abs(np.diag(D)) > tol):
            raise MetricViolation("nonzero diagonal")
        if np.max(np.abs(D - D.T)) > tol:
            raise MetricViolation("asymmetric distances")
        worst = triangle_defect(D, seed=seed, n_triples=n_triples)
        if worst > tol:
            raise MetricViolation(f"triangle inequality violated by {worst:.3g}")
        return self

    def to_text(self):
        """First line the count, then the strict lower triangle row by row."""
        lines = [str(self.size)]
        for i in range(1, self.size):
            lines.append(" ".join(repr(float(v)) for v in self.D[i, :i]))
        return "\n".join(lines) + "\n"

    @classmethod
    def from_text(cls, text):
        rows = [ln.split() for ln in text.strip().splitlines()]
        m = int(rows[0][0])
        D = np.zeros((m, m))
        for i in range(1, m):
            vals = [float(v) for v in rows[i]]
            if len(vals) != i:
                raise MetricViolation(f"row {i} has {len(vals)} entries, expected {i}")
            D[i, :i] = vals
            D[:i, i] = vals
        return cls(list(range(m)), D)

    def relabel(self, perm):
        perm = np.asarray(perm)
        return FiniteMetricSpace([self.labels[i] for i in perm], self.D[np.ix_(perm, perm)])


def triangle_defect(D, seed=0, n_triples=200_000):
    """max over triples of D[i,j] - D[i,k] - D[k,j]; exhaustive for small spaces."""
    m = D.shape[0]
    if m <= EXHAUSTIVE_LIMIT:
        worst = -math.inf
        for k in range(m):
            worst = max(worst, float(np.max(D - D[:, k : k + 1] - D[k : k + 1, :])))
        return worst
    rng = np.random.Generator(np.random.Philox(seed))
    i, j, k = rng.integers(0, m, size=(3, n_triples))
    return float(np.max(D[i, j] - D[i, k] - D[k, j]))


def cone_distance(r1, r2, dz):
    """Distance in the metric cone between (r1, z1) and (r2, z2), d(z1, z2) = dz."""
    r1, r2, dz = np.broadcast_arrays(*(np.asarray(v, dtype=float) for v in (r1, r2, dz)))
    near = r1 * r1 + r2 * r2 - 2.0 * r1 * r2 * np.cos(np.minimum(dz, math.pi))
    return np.where(dz <= math.pi, np.sqrt(np.maximum(near, 0.0)), r1 + r2)


def cone_space(Z, radial_grid, validate=True):
    """Truncated metric cone over Z sampled at the given radii.

    Points are ordered radius-major: index = i_r * |Z| + i_z.
    """
    radii = np.asarray(radial_grid, dtype=float)
    if np.any(radii <= 0):
        raise MetricViolation("cone radii must be positive")
    m = Z.size
    R = np.repeat(radii, m)
    idx = np.tile(np.arange(m), radii.size)
    D = cone_distance(R[:, None], R[None, :], Z.D[np.ix_(idx, idx)])
    np.fill_diagonal(D, 0.0)
    labels = [(float(r), Z.labels[z]) for r, z in zip(R, idx)]
    out = FiniteMetricSpace(labels, D)
    return out.validate() if validate else out


# ---------------------------------------------------------------------------
# Gromov-Hausdorff


def correspondence_distortion(A, B, pairs):
    pa = np.array([p for p, _ in pairs])
    pb = np.array([q for _, q in pairs])
    return float(np.max(np.abs(A.D[np.ix_(pa, pa)] - B.D[np.ix_(pb, pb)])))


def gh_lower_bound(A, B):
    """Half the larger of |diam A - diam B| and the Hausdorff distance
    between the eccentricity sets; both are 1-Lipschitz invariants."""
    d1 = abs(A.diameter - B.diameter)
    ea, eb = A.D.max(axis=1), B.D.max(axis=1)
    gap = np.abs(ea[:, None] - eb[None, :])
    d2 = max(gap.min(axis=1).max(), gap.min(axis=0).max())
    return 0.5 * max(d1, float(d2))


def _feasible(A, B, eps):
    """Is there a correspondence with distortion <= eps?

    A correspondence is a set of pairs, pairwise compatible
    (|d_A(a, a') - d_B(b, b')| <= eps), covering both spaces.  The search
    repeatedly takes the uncovered point with the fewest compatible
    partners and branches over them; ``allowed`` holds the pairs compatible
    with everything chosen so far.
    """
    m, k = A.size, B.size
    C = np.abs(A.D[:, None, :, None] - B.D[None, :, None, :]) <= eps + 1e-12

    def search(allowed, cov_a, cov_b):
        best, best_opts = None, None
        for a in np.flatnonzero(~cov_a):
            opts = np.flatnonzero(allowed[a])
            if best is None or opts.size < best_opts.size:
                best, best_opts = (0, a), opts
                if opts.size == 0:
                    return False
        for b in np.flatnonzero(~cov_b):
            opts = np.flatnonzero(allowed[:, b])
            if best is None or opts.size < best_opts.size:
                best, best_opts = (1, b), opts
                if opts.size == 0:
                    return False
        if best is None:
            return True
        side, idx = best
        for c in best_opts:
            a, b = (idx, c) if side == 0 else (c, idx)
            ca, cb = cov_a.copy(), cov_b.copy()
            ca[a] = cb[b] = True
            if search(allowed & C[a, b], ca, cb):
                return True
        return False

    return search(np.ones((m, k), dtype=bool), np.zeros(m, dtype=bool), np.zeros(k, dtype=bool))


def gh_exact(A, B):
    """Exact GH distance of two small spaces by bisection over the finite
    set of candidate distortions with a backtracking feasibility test."""
    if A.size > EXACT_GH_LIMIT or B.size > EXACT_GH_LIMIT:
        raise ValueError(f"exact search is limited to {EXACT_GH_LIMIT} points")
    va = np.unique(np.concatenate([A.D.ravel(), [0.0]]))
    vb = np.unique(np.concatenate([B.D.ravel(), [0.0]]))
    cands = np.unique(np.abs(va[:, None] - vb[None, :]).ravel())
    lo, hi = 0, cands.size - 1
    while lo < hi:
        mid = (lo + hi) // 2
        if _feasible(A, B, cands[mid]):
            hi = mid
        else:
            lo = mid + 1
    return 0.5 * float(cands[lo])


def _greedy_map(DA, DB, order, seed_b):
    """Map the points of A (in ``order``) to B greedily, minimizing the
    distortion against the points already placed."""
    phi = np.empty(DA.shape[0], dtype=int)
    placed = [order[0]]
    phi[order[0]] = seed_b
    for a in order[1:]:
        P = np.array(placed)
        cost = np.max(np.abs(DA[a, P][None, :] - DB[:, phi[P]]), axis=1)
        b = int(np.argmin(cost))
        phi[a] = b
        placed.append(a)
    return phi


def _complete(DA, DB, phi):
    """Add a partner in A for every point of B missed by phi."""
    pairs = [(a, int(phi[a])) for a in range(DA.shape[0])]
    hit = set(int(b) for b in phi)
    pa = np.arange(DA.shape[0])
    for b in range(DB.shape[0]):
        if b in hit:
            continue
        cost = np.max(np.abs(DB[b, phi][None, :] - DA[:, pa]), axis=1)
        pairs.append((int(np.argmin(cost)), b))
    return pairs


def _local_search(DA, DB, pairs, max_iter=500):
    """Descend on (distortion, number of entries attaining it).

    Moves touch the pairs involved in a worst entry: change one partner
    (keeping coverage) or drop the pair when both ends are covered elsewhere.
    Counting ties lets the search cross plateaus where several entries share
    the maximum.
    """
    pa = np.array([p for p, _ in pairs])
    pb = np.array([q for _, q in pairs])
    m, k = DA.shape[0], DB.shape[0]
    M = np.abs(DA[np.ix_(pa, pa)] - DB[np.ix_(pb, pb)])
    top = float(M.max())
    score = (top, int(np.count_nonzero(M >= top - 1e-12)))
    for _ in range(max_iter):
        top = score[0]
        hot = np.flatnonzero(M.max(axis=1) >= top - 1e-12)
        best_move = None
        for p in hot:
            keep = np.ones(pa.size, dtype=bool)
            keep[p] = False
            rest = M[np.ix_(keep, keep)]
            rest_top = float(rest.max()) if rest.size else 0.0
            ra, rb = pa[keep], pb[keep]
            a, b = pa[p], pb[p]
            ca, cb = bool(np.any(ra == a)), bool(np.any(rb == b))
            cands = []
            if cb:
                cands += [(a, b2) for b2 in range(k) if b2 != b]
            if ca:
                cands += [(a2, b) for a2 in range(m) if a2 != a]
            if ca and cb and rest.size:
                t = rest_top
                sc = (t, int(np.count_nonzero(rest >= t - 1e-12)))
                if sc < score and (best_move is None or sc < best_move[0]):
                    best_move = (sc, p, None)
            if not cands:
                continue
            na = np.array([c[0] for c in cands])
            nb = np.array([c[1] for c in cands])
            rows = np.abs(DA[na][:, ra] - DB[nb][:, rb])
            row_top = rows.max(axis=1) if rows.shape[1] else np.zeros(len(cands))
            tops = np.maximum(row_top, rest_top)
            for c in np.argsort(tops, kind="stable")[:8]:
                t = float(tops[c])
                if t > score[0] + 1e-15:
                    break
                cnt = 2 * int(np.count_nonzero(rows[c] >= t - 1e-12))
                cnt += int(np.count_nonzero(rest >= t - 1e-12))
                sc = (t, cnt)
                if (sc[0] < score[0] - 1e-15 or sc[1] < score[1]) and (best_move is None or sc < best_move[0]):
                    best_move = (sc, p, cands[c])
        if best_move is None:
            break
        score, p, new = best_move
        if new is None:
            pa, pb = np.delete(pa, p), np.delete(pb, p)
        else:
            pa[p], pb[p] = new
        M = np.abs(DA[np.ix_(pa, pa)] - DB[np.ix_(pb, pb)])
    return list(zip(pa.tolist(), pb.tolist())), score[0]


def _construct(C, rng, greedy=True):
    """One randomized most-constrained-first construction under the
    compatibility tensor C, without backtracking.  Returns pairs or None."""
    m, k = C.shape[:2]
    allowed = np.ones((m, k), dtype=bool)
    cov_a = np.zeros(m, dtype=bool)
    cov_b = np.zeros(k, dtype=bool)
    pairs = []
    while not (cov_a.all() and cov_b.all()):
        counts = [(int(allowed[a].sum()), rng.random(), 0, a) for a in np.flatnonzero(~cov_a)]
        counts += [(int(allowed[:, b].sum()), rng.random(), 1, b) for b in np.flatnonzero(~cov_b)]
        n_opts, _, side, idx = min(counts)
        if n_opts == 0:
            return None
        opts = np.flatnonzero(allowed[idx] if side == 0 else allowed[:, idx])
        # prefer the partner that leaves the most pairs open
        keep = []
        for c in opts:
            a, b = (idx, c) if side == 0 else (c, idx)
            keep.append(np.count_nonzero(allowed & C[a, b]) + rng.random())
        keep = np.asarray(keep)
        if greedy:
            c = opts[int(np.argmax(keep))]
        else:
            c = opts[rng.choice(opts.size, p=keep / keep.sum())]
        a, b = (idx, c) if side == 0 else (c, idx)
        pairs.append((int(a), int(b)))
        allowed &= C[a, b]
        cov_a[a] = cov_b[b] = True
    return pairs


def _probe_thresholds(DA, DB, best, pairs, rng, tries=200):
    """Push the distortion below ``best`` by constructive probing at the
    next smaller candidate value, stopping at the first failure."""
    diff = np.abs(DA[:, None, :, None] - DB[None, :, None, :])
    cands = np.unique(diff)
    while True:
        below = cands[cands < best - 1e-15]
        if below.size == 0:
            return best, pairs
        C = diff <= below[-1] + 1e-12
        found = None
        for t in range(tries):
            found = _construct(C, rng, greedy=t % 2 == 0)
            if found is not None:
                break
        if found is None:
            return best, pairs
        pa = np.array([p for p, _ in found])
        pb = np.array([q for _, q in found])
        best = float(np.max(np.abs(DA[np.ix_(pa, pa)] - DB[np.ix_(pb, pb)])))
        pairs = found


def gh_search(A, B, restarts=200, seed=0, initial=None):
    """Upper bound 1/2 dis(R) from greedy correspondences and local search.

    ``initial`` optionally supplies a starting correspondence, either a
    map A -> B as an index array or a list of (a, b) pairs (e.g. a known
    natural correspondence); it is refined alongside the random restarts.
    Returns (upper, pairs).
    """
    if initial is not None:
        init = list(initial)
        if init and np.ndim(init[0]) == 0:
            init = _complete(A.D, B.D, np.asarray(init, dtype=int))
        initial = [(int(a), int(b)) for a, b in init]
    # canonical order so that gh_search(A, B) and gh_search(B, A) agree
    swap = (B.size, B.diameter) < (A.size, A.diameter)
    if swap:
        A, B = B, A
        if initial is not None:
            initial = [(b, a) for a, b in initial]
    DA, DB = A.D, B.D
    rng = np.random.Generator(np.random.Philox(seed))
    best, best_pairs = math.inf, None
    seeds = []
    small = A.size * B.size <= 4 * restarts
    if small:
        seeds = [(a, b, d) for a in range(A.size) for b in range(B.size) for d in (0, 1)]
    else:
        for _ in range(restarts):
            seeds.append((int(rng.integers(A.size)), int(rng.integers(B.size)), int(rng.integers(2))))
    starts = []
    if initial is not None:
        starts.append(initial)
    for a0, b0, direction in seeds:
        if direction == 0:
            order = [a0] + [int(v) for v in rng.permutation(A.size) if v != a0]
            phi = _greedy_map(DA, DB, order, b0)
            starts.append(_complete(DA, DB, phi))
        else:
            order = [b0] + [int(v) for v in rng.permutation(B.size) if v != b0]
            psi = _greedy_map(DB, DA, order, a0)
            pairs = _complete(DB, DA, psi)
            starts.append([(q, p) for p, q in pairs])
    for pairs in starts:
        pairs, d = _local_search(DA, DB, pairs)
        if d < best:
            best, best_pairs = d, pairs
    if A.size * B.size <= PROBE_LIMIT:
        best, best_pairs = _probe_thresholds(DA, DB, best, best_pairs, rng)
    if swap:
        best_pairs = [(q, p) for p, q in best_pairs]
    return 0.5 * best, best_pairs


def gh_distance(A, B, restarts=200, seed=0, initial=None):
    """{lower, upper} bounds on the GH distance; exact for small spaces."""
    if A.size <= EXACT_GH_LIMIT and B.size <= EXACT_GH_LIMIT:
        v = gh_exact(A, B)
        return {"lower": v, "upper": v, "exact": True}
    lower = gh_lower_bound(A, B)
    upper, _ = gh_search(A, B, restarts=restarts, seed=seed, initial=initial)
    return {"lower": min(lower, upper), "upper": upper, "exact": False}


def identity_distortion(A, B):
    """Half the distortion of the index-to-index correspondence."""
    if A.size != B.size:
        raise ValueError("spaces differ in size")
    return 0.5 * float(np.max(np.abs(A.D - B.D)))
