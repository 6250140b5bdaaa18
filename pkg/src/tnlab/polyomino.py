"""Directed plane polyominoes, toric polyominoes, and the decomposition between them.

A directed plane polyomino rooted at (0, 0) is a finite cell set containing
the root in which every other cell (x, y) has (x+1, y) or (x, y+1) in the set;
all cells therefore lie in the quadrant {(-a, -b): a, b >= 0}. Statistics:
area m = |cells|, perimeter p = number of occupied/empty neighbor pairs in
both directions, upper perimeter n = number of pairs with (x, y) empty and
(x+1, y) occupied.

Toric polyominoes are the nonzero-weight upper-layer spin configurations of
the two-layer model: boolean (L, L) grids in which every occupied cell has an
occupied successor to the right or below (modulo L). `toric_to_plane`
decomposes one into rooted plane polyominoes by building the one-out-edge
successor graph, rooting each weakly connected component on its unique cycle,
and backtracing every vertex's path to the root.
"""

from dataclasses import dataclass
from fractions import Fraction
from typing import NamedTuple

import numpy as np

from .errors import ResourceLimitError

ENUMERATION_BUDGET = 12
SERIES_BUDGET = 24
TORIC_BUDGET = 4


@dataclass(frozen=True)
class Polyomino:
    """Cell set with an optional root; frame is None for the plane or L for the L x L torus."""

    cells: frozenset
    frame: int = None
    root: tuple = None


class PolyominoStats(NamedTuple):
    area: int
    perimeter: int
    upper_perimeter: int


def stats(poly):
    """(area, perimeter, upper perimeter) from the defining formulas."""
    cells = poly.cells
    if not cells:
        raise ValueError("empty cell set")
    if poly.frame is None:
        def occupied(x, y):
            return (x, y) in cells
        span = cells | {(x - 1, y) for x, y in cells} | {(x, y - 1) for x, y in cells}
    else:
        L = poly.frame
        def occupied(x, y):
            return (x % L, y % L) in cells
        span = {(x, y) for x in range(L) for y in range(L)}
    perimeter = 0
    upper = 0
    for x, y in span:
        here = occupied(x, y)
        if here != occupied(x + 1, y):
            perimeter += 1
            if not here:
                upper += 1
        if here != occupied(x, y + 1):
            perimeter += 1
    return PolyominoStats(len(cells), perimeter, upper)


def generate_directed(m_max):
    """All directed plane polyominoes rooted at (0, 0) with area <= m_max.

    Grows by attaching one cell at a time: any absent cell whose right or
    down neighbor is present may be added, and every directed polyomino of
    area m + 1 arises this way from one of area m (remove a cell of minimal
    x + y). Yields (area, frozenset of cells) pairs.
    """
    if m_max > ENUMERATION_BUDGET:
        raise ResourceLimitError(
            f"exhaustive enumeration capped at area {ENUMERATION_BUDGET}")
    level = {frozenset({(0, 0)})}
    for m in range(1, m_max + 1):
        for cells in level:
            yield m, cells
        if m == m_max:
            break
        nxt = set()
        for cells in level:
            candidates = set()
            for x, y in cells:
                candidates.add((x - 1, y))
                candidates.add((x, y - 1))
            for c in candidates - cells:
                nxt.add(cells | {c})
        level = nxt


@dataclass(frozen=True)
class PolyominoCounts:
    """Counts indexed by (area, upper perimeter)."""

    m_max: int
    counts: dict

    def get(self, m, n):
        return self.counts.get((m, n), 0)

    def by_area(self):
        out = {}
        for (m, _), c in self.counts.items():
            out[m] = out.get(m, 0) + c
        return out

    def csv_rows(self):
        rows = [("area", "upper_perimeter", "count")]
        for (m, n) in sorted(self.counts):
            rows.append((m, n, self.counts[(m, n)]))
        return rows


def enumerate_directed(m_max):
    """Exact D_{m,n} counts by exhaustive generation."""
    counts = {}
    for m, cells in generate_directed(m_max):
        n = stats(Polyomino(cells)).upper_perimeter
        counts[(m, n)] = counts.get((m, n), 0) + 1
    return PolyominoCounts(m_max, counts)


def directed_gf(q, p):
    """Closed form of sum_{m,n} D_{m,n} q^m p^n.

    Defined where the denominator 1 - q(2+p) + q^2(1-p) and the radicand are
    positive; outside that region raises ValueError.
    """
    den = 1.0 - q * (2.0 + p) + q * q * (1.0 - p)
    if den <= 0.0:
        raise ValueError(f"denominator {den} not positive at q={q}, p={p}")
    rad = (1.0 + q) * (1.0 + q - q * p) / den
    if rad <= 0.0:
        raise ValueError(f"radicand {rad} not positive at q={q}, p={p}")
    return p / 2.0 * (np.sqrt(rad) - 1.0)


def _poly_mul(a, b, m_max, n_max):
    out = {}
    for (i1, j1), c1 in a.items():
        for (i2, j2), c2 in b.items():
            i, j = i1 + i2, j1 + j2
            if i > m_max or j > n_max:
                continue
            key = (i, j)
            out[key] = out.get(key, Fraction(0)) + c1 * c2
    return {k: v for k, v in out.items() if v}


def series_coefficients(m_max, n_max):
    """Exact integer D_{m,n} from the power series of the closed form.

    The series is expanded over rationals (geometric series for the reciprocal
    denominator, binomial series for the square root); a non-integer
    coefficient in the result signals an internal expansion error.
    """
    if m_max > SERIES_BUDGET:
        raise ResourceLimitError(f"series expansion capped at area {SERIES_BUDGET}")
    one = Fraction(1)
    # 1 - denominator = q(2 + p) - q^2(1 - p)
    u = {(1, 0): 2 * one, (1, 1): one, (2, 0): -one, (2, 1): one}
    inv_den = {(0, 0): one}
    power = {(0, 0): one}
    for _ in range(m_max):
        power = _poly_mul(power, u, m_max, m_max)
        if not power:
            break
        for k, v in power.items():
            inv_den[k] = inv_den.get(k, Fraction(0)) + v
    numer = {(0, 0): one, (1, 0): 2 * one, (2, 0): one, (1, 1): -one, (2, 1): -one}
    r = _poly_mul(numer, inv_den, m_max, m_max)
    r[(0, 0)] -= one  # r = A/B - 1 has no constant term
    r = {k: v for k, v in r.items() if v}
    sqrt_minus_one = {}
    coeff = one  # binomial(1/2, k), starting at k = 1 below
    power = {(0, 0): one}
    for k in range(1, m_max + 1):
        coeff *= Fraction(1, 2) - (k - 1)
        coeff /= k
        power = _poly_mul(power, r, m_max, m_max)
        if not power:
            break
        for key, v in power.items():
            sqrt_minus_one[key] = sqrt_minus_one.get(key, Fraction(0)) + coeff * v
    counts = {}
    for (m, n_shift), v in sqrt_minus_one.items():
        v = v / 2  # overall p/2 factor
        n = n_shift + 1
        if v == 0 or m > m_max or n > n_max:
            continue
        if v.denominator != 1:
            raise RuntimeError(f"non-integer series coefficient {v} at ({m}, {n})")
        counts[(m, n)] = int(v)
    return PolyominoCounts(m_max, counts)


def enumerate_toric(L):
    """All nonzero-weight upper-layer configurations of the L x L torus."""
    if L > TORIC_BUDGET:
        raise ResourceLimitError(f"toric enumeration capped at L = {TORIC_BUDGET}")
    out = []
    n = L * L
    shifts = np.arange(n, dtype=np.uint32)
    codes = np.arange(1 << n, dtype=np.uint32)
    bits = ((codes[:, None] >> shifts) & 1).astype(bool).reshape(-1, L, L)
    right = np.roll(bits, -1, axis=2)
    down = np.roll(bits, -1, axis=1)
    bad = (bits & ~right & ~down).any(axis=(1, 2))
    nonempty = bits.any(axis=(1, 2))
    for i in np.nonzero(~bad & nonempty)[0]:
        out.append(bits[i])
    return out


def _successor_graph(config):
    c = np.asarray(config, dtype=bool)
    if c.shape[0] != c.shape[1]:
        raise ValueError("toric decomposition is defined on square tori")
    L = c.shape[0]
    edges = {}
    for x, y in zip(*np.nonzero(c)):
        x, y = int(x), int(y)
        if c[(x + 1) % L, y]:
            edges[(x, y)] = ((x + 1) % L, y)
        elif c[x, (y + 1) % L]:
            edges[(x, y)] = (x, (y + 1) % L)
        else:
            raise ValueError(f"cell ({x}, {y}) has no occupied successor; not a toric polyomino")
    return L, edges


def _weak_components(edges):
    parent = {v: v for v in edges}

    def find(v):
        while parent[v] != v:
            parent[v] = parent[parent[v]]
            v = parent[v]
        return v

    for u, v in edges.items():
        ru, rv = find(u), find(v)
        if ru != rv:
            parent[ru] = rv
    comps = {}
    for v in edges:
        comps.setdefault(find(v), []).append(v)
    return list(comps.values())


def _component_cycle(vertices, edges):
    seen = {}
    v = vertices[0]
    order = 0
    while v not in seen:
        seen[v] = order
        order += 1
        v = edges[v]
    cycle = [v]
    w = edges[v]
    while w != v:
        cycle.append(w)
        w = edges[w]
    return cycle


def _trace_component(vertices, edges, root, L):
    # move counts to the root along the unique out-path; root maps to (0, 0)
    moves = {root: (0, 0)}
    for start in vertices:
        path = []
        v = start
        while v not in moves:
            path.append(v)
            v = edges[v]
        for u in reversed(path):
            w = edges[u]
            da, db = (1, 0) if w == ((u[0] + 1) % L, u[1]) else (0, 1)
            wa, wb = moves[w]
            moves[u] = (wa + da, wb + db)
    cells = frozenset((-a, -b) for a, b in (moves[v] for v in vertices))
    if len(cells) != len(vertices):
        raise RuntimeError("backtrace produced colliding plane cells")
    return Polyomino(cells, frame=None, root=(0, 0))


def toric_to_plane(config, root_rule=min):
    """Decompose a toric polyomino into rooted plane polyominoes.

    Builds the directed successor graph (edge to the down neighbor if
    occupied, else to the right neighbor), splits it into weakly connected
    components, roots each component at `root_rule(cycle vertices)`, and maps
    every vertex reached by a right-moves and b down-moves to plane cell
    (-a, -b).
    """
    L, edges = _successor_graph(config)
    pieces = []
    for vertices in _weak_components(edges):
        cycle = _component_cycle(vertices, edges)
        root = root_rule(cycle)
        pieces.append(_trace_component(vertices, edges, root, L))
    return pieces


def toric_stats(config):
    c = np.asarray(config, dtype=bool)
    L = c.shape[0]
    cells = frozenset((int(x), int(y)) for x, y in zip(*np.nonzero(c)))
    return stats(Polyomino(cells, frame=L))


@dataclass(frozen=True)
class DecompositionReport:
    L: int
    n_valid: int
    n_violations: int
    violations: tuple

    @property
    def ok(self):
        return self.n_violations == 0


def verify_decomposition(L, root_rule=min):
    """Exhaustively check the toric-to-plane decomposition invariants at size L.

    For every nonzero configuration with toric stats (m, n) producing k plane
    pieces with stats (m_i, n_i): k <= m/L <= L, every m_i >= L,
    sum m_i = m, and n <= sum n_i <= n + k.
    """
    violations = []
    n_valid = 0
    for config in enumerate_toric(L):
        n_valid += 1
        ts = toric_stats(config)
        pieces = toric_to_plane(config, root_rule=root_rule)
        piece_stats = [stats(p) for p in pieces]
        k = len(pieces)
        total_area = sum(s.area for s in piece_stats)
        total_upper = sum(s.upper_perimeter for s in piece_stats)
        problems = []
        if not (k <= ts.area / L <= L):
            problems.append(f"k={k} outside [.., m/L={ts.area / L}, L={L}]")
        if any(s.area < L for s in piece_stats):
            problems.append(f"piece areas {[s.area for s in piece_stats]} below L")
        if total_area != ts.area:
            problems.append(f"area sum {total_area} != {ts.area}")
        if not (ts.upper_perimeter <= total_upper <= ts.upper_perimeter + k):
            problems.append(
                f"upper perimeter sum {total_upper} outside "
                f"[{ts.upper_perimeter}, {ts.upper_perimeter + k}]")
        if problems:
            violations.append((ascii_art(config), "; ".join(problems)))
    return DecompositionReport(L, n_valid, len(violations), tuple(violations))


def ascii_art(cells_or_config):
    """Render a polyomino or boolean grid as rows of '#' and '.'."""
    if isinstance(cells_or_config, Polyomino):
        cells = cells_or_config.cells
        xs = [c[0] for c in cells]
        ys = [c[1] for c in cells]
        lines = []
        for x in range(min(xs), max(xs) + 1):
            lines.append("".join("#" if (x, y) in cells else "."
                                 for y in range(min(ys), max(ys) + 1)))
        return "\n".join(lines)
    grid = np.asarray(cells_or_config, dtype=bool)
    return "\n".join("".join("#" if v else "." for v in row) for row in grid)
