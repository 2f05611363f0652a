"""Semi-decision and exact oracles for global validity.

The workhorse is a small table-constraint solver: forbidden-pattern
translates inside a finite cell set become nogood tables, and a
backtracking search with generalized arc consistency decides whether a
partial assignment extends to a locally valid one.  Refutation by
unextendability is sound evidence of global invalidity; positive evidence
is only ever labeled exact when a genuinely exact oracle (the transfer
graph on Z) or a stabilized brute-force enumeration backs it.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field, replace
from functools import lru_cache

from .groups import GroupError
from .patterns import (
    EMPTY_PATTERN,
    Pattern,
    contains_translate,
    locally_valid,
    translate_pattern,
)

REFUTED = "refuted"
NOT_REFUTED = "not_refuted"
EXACT = "exact"


class BudgetExceeded(RuntimeError):
    """A search hit its node cap; distinct from a definite answer."""


@dataclass(frozen=True)
class Budget:
    """Caps for the semi-decision procedures.

    radius_cap bounds the padding radius used in refutation searches and
    node_cap the number of search nodes per search.  The remaining knobs
    bound the certificate machinery: how far the candidate stream runs, how
    large its patterns grow, how many extra verification radii are tried,
    and how much determinacy probing is done per candidate.
    """

    radius_cap: int = 3
    node_cap: int = 200_000
    candidate_extra_radius: int = 0
    candidate_cells_cap: int = 4
    verify_extra_radius: int = 2
    enumeration_cap: int = 4096
    probe_depth: int = 2
    probe_radius_cap: int = 2
    probe_shape_cap: int = 96
    probe_pattern_cap: int = 64
    probe_extension_cap: int = 1500
    language_radius_cap: int = 16

    @classmethod
    def small(cls):
        return cls(
            radius_cap=2,
            node_cap=20_000,
            candidate_cells_cap=3,
            verify_extra_radius=1,
            enumeration_cap=1024,
            probe_depth=1,
            probe_shape_cap=32,
            probe_pattern_cap=32,
            probe_extension_cap=400,
            language_radius_cap=8,
        )

    @classmethod
    def default(cls):
        return cls()

    @classmethod
    def large(cls):
        return cls(
            radius_cap=4,
            node_cap=1_000_000,
            candidate_extra_radius=1,
            candidate_cells_cap=5,
            verify_extra_radius=3,
            enumeration_cap=16384,
            probe_radius_cap=3,
            probe_shape_cap=256,
            probe_pattern_cap=256,
            probe_extension_cap=6000,
            language_radius_cap=24,
        )

    def describe(self):
        return f"radius_cap={self.radius_cap} node_cap={self.node_cap}"


@dataclass(frozen=True)
class ValidityVerdict:
    """Outcome of a global-validity probe for one pattern."""

    status: str  # REFUTED | NOT_REFUTED | EXACT
    radius: int = 0
    valid: object = None  # EXACT only
    budget_exhausted: bool = False

    @property
    def refuted(self):
        return self.status == REFUTED or (self.status == EXACT and not self.valid)

    @property
    def positive_exact(self):
        return self.status == EXACT and self.valid


# ---- the finite constraint solver -------------------------------------------


class _Csp:
    """Locally valid assignments on a fixed cell set.

    Domains are bitmasks over alphabet indices; constraints are allowed-tuple
    tables (one per forbidden-translate scope) filtered by generalized arc
    consistency, with incremental requeueing after each branch.
    """

    def __init__(self, spec, cells):
        self.spec = spec
        self.cells = tuple(sorted(cells, key=spec.sites.cell_key))
        self.index = {c: i for i, c in enumerate(self.cells)}
        self.n_sym = len(spec.alphabet)
        self.full_mask = (1 << self.n_sym) - 1
        self.empty_forbidden = False
        self.tables = self._build_tables()
        self.watch = [[] for _ in self.cells]
        for ti, (scope, _) in enumerate(self.tables):
            for ci in scope:
                self.watch[ci].append(ti)

    def _build_tables(self):
        sites = self.spec.sites
        cellset = frozenset(self.cells)
        nogoods = {}
        for q in self.spec.forbidden:
            if not q.cells:
                self.empty_forbidden = True
                return []
            anchor = q.cells[0][0]
            ab_inv = sites.group.invert(sites.base(anchor))
            for cell in self.cells:
                if sites.leveled and cell[1] != anchor[1]:
                    continue
                g = sites.group.compose(sites.base(cell), ab_inv)
                placed = tuple(
                    (sites.translate_cell(g, c), a) for c, a in q.cells
                )
                if any(c not in cellset for c, _ in placed):
                    continue
                scope = tuple(sorted(self.index[c] for c, _ in placed))
                vals = dict((self.index[c], a) for c, a in placed)
                combo = tuple(vals[i] for i in scope)
                nogoods.setdefault(scope, set()).add(combo)
        tables = []
        for scope, bad in sorted(nogoods.items()):
            allowed = tuple(
                combo
                for combo in itertools.product(range(self.n_sym), repeat=len(scope))
                if combo not in bad
            )
            tables.append((scope, allowed))
        return tables

    def _propagate(self, domains, queue):
        tables = self.tables
        watch = self.watch
        while queue:
            ti = queue.pop()
            scope, allowed = tables[ti]
            k = len(scope)
            support = [0] * k
            for combo in allowed:
                for j in range(k):
                    if not (domains[scope[j]] >> combo[j]) & 1:
                        break
                else:
                    for j in range(k):
                        support[j] |= 1 << combo[j]
            for j in range(k):
                ci = scope[j]
                new = domains[ci] & support[j]
                if not new:
                    return False
                if new != domains[ci]:
                    domains[ci] = new
                    for tj in watch[ci]:
                        if tj != ti:
                            queue.add(tj)
        return True

    def solve(self, fixed, node_cap, enumerate_all=False, yield_cap=None):
        """Return a list of full assignments (symbol tuples over self.cells).

        With enumerate_all False the list holds at most one witness.  Raises
        BudgetExceeded when the node cap trips.
        """
        if self.empty_forbidden:
            return []
        domains = [self.full_mask] * len(self.cells)
        for cell, a in fixed.cells:
            ci = self.index.get(cell)
            if ci is None:
                raise GroupError(f"fixed cell outside the region: {cell!r}")
            if not (domains[ci] >> a) & 1:
                return []
            domains[ci] = 1 << a
        results = []
        nodes = [0]

        def search(domains, queue):
            nodes[0] += 1
            if nodes[0] > node_cap:
                raise BudgetExceeded(f"node cap {node_cap} hit")
            if not self._propagate(domains, queue):
                return
            branch = -1
            branch_size = self.n_sym + 1
            for i, d in enumerate(domains):
                c = d.bit_count()
                if 1 < c < branch_size:
                    branch = i
                    branch_size = c
                    if c == 2:
                        break
            if branch < 0:
                results.append(
                    tuple(d.bit_length() - 1 for d in domains)
                )
                return
            d = domains[branch]
            for v in range(self.n_sym):
                if not (d >> v) & 1:
                    continue
                child = domains.copy()
                child[branch] = 1 << v
                search(child, set(self.watch[branch]))
                if results and not enumerate_all:
                    return
                if yield_cap is not None and len(results) >= yield_cap:
                    return

        search(domains, set(range(len(self.tables))))
        return results

    def as_patterns(self, assignments):
        return [Pattern(tuple(zip(self.cells, combo))) for combo in assignments]


@lru_cache(maxsize=None)
def _csp_for(spec, cells):
    return _Csp(spec, cells)


def locally_valid_patterns(spec, cells, node_cap=200_000, yield_cap=None):
    """All locally valid total assignments on the cell set, as patterns."""
    cells = tuple(sorted(cells, key=spec.sites.cell_key))
    csp = _csp_for(spec, cells)
    sols = csp.solve(EMPTY_PATTERN, node_cap, enumerate_all=True, yield_cap=yield_cap)
    complete = yield_cap is None or len(sols) < yield_cap
    return csp.as_patterns(sols), complete


@lru_cache(maxsize=None)
def _pad_cached(sites, domain, R):
    return sites.pad_cells(domain, R)


def extendable_to_radius(spec, pattern, R, node_cap=200_000):
    """Does some locally valid pattern on the R-padded domain extend this one?

    The padded domain is the union of R-balls around the domain cells and
    the identity.  Raises BudgetExceeded (distinct from False) on node cap.
    """
    if any(q == EMPTY_PATTERN for q in spec.forbidden):
        return False
    cells = _pad_cached(spec.sites, pattern.domain, R)
    csp = _csp_for(spec, cells)
    return bool(csp.solve(pattern, node_cap))


@lru_cache(maxsize=None)
def _refute_cached(spec, pattern, radius_cap, node_cap):
    # extendability is antitone in the padding radius, so one success at the
    # cap settles NOT_REFUTED; the increasing scan only runs to locate the
    # minimal refutation radius.
    try:
        if not extendable_to_radius(spec, pattern, 0, node_cap):
            return ValidityVerdict(REFUTED, 0)
        if radius_cap > 0 and extendable_to_radius(
            spec, pattern, radius_cap, node_cap
        ):
            return ValidityVerdict(NOT_REFUTED, radius_cap)
        for R in range(1, radius_cap + 1):
            if not extendable_to_radius(spec, pattern, R, node_cap):
                return ValidityVerdict(REFUTED, R)
    except BudgetExceeded:
        return ValidityVerdict(NOT_REFUTED, radius_cap, budget_exhausted=True)
    return ValidityVerdict(NOT_REFUTED, radius_cap)


def refute_global_validity(spec, pattern, budget):
    """Sound refutation by unextendability; never a positive confirmation."""
    return _refute_cached(spec, pattern, budget.radius_cap, budget.node_cap)


# ---- the exact transfer-graph oracle on Z -----------------------------------


class TransferOracle:
    """Exact language computation for specs over Z via the window-overlap
    graph trimmed to its bi-infinitely extendable part."""

    exact = True

    def __init__(self, spec):
        if spec.sites.leveled or spec.group.kind != "abelian" or spec.group.n_axes != 1:
            raise GroupError("transfer oracle needs a plain spec over Z")
        self.spec = spec
        if any(q == EMPTY_PATTERN for q in spec.forbidden):
            self.n = 1
            self.vertices = []
            self.edges = {}
            return
        diam = 0
        for q in spec.forbidden:
            xs = [c[0] for c, _ in q.cells]
            diam = max(diam, max(xs) - min(xs))
        self.n = max(1, diam)
        self.vertices, self.edges = self._build()

    def _word_valid(self, word):
        p = Pattern(tuple(((i,), a) for i, a in enumerate(word)))
        return locally_valid(self.spec, p)

    def _build(self):
        n = self.n
        n_sym = len(self.spec.alphabet)
        verts = [
            w
            for w in itertools.product(range(n_sym), repeat=n)
            if self._word_valid(w)
        ]
        edges = {}
        vset = set(verts)
        for w in verts:
            outs = []
            for a in range(n_sym):
                nxt = w[1:] + (a,)
                if nxt in vset and self._word_valid(w + (a,)):
                    outs.append(nxt)
            edges[w] = outs
        # trim to the maximal subgraph where every vertex has in and out edges
        while True:
            with_out = {w for w, outs in edges.items() if outs}
            with_in = set()
            for w, outs in edges.items():
                if w in with_out:
                    with_in.update(o for o in outs if o in with_out)
            keep = with_out & with_in
            # also keep sources of surviving edges only if they survive
            if keep == set(edges):
                break
            edges = {
                w: [o for o in outs if o in keep]
                for w, outs in edges.items()
                if w in keep
            }
            if not edges:
                break
        return sorted(edges), edges

    def nonempty(self):
        return bool(self.vertices)

    @lru_cache(maxsize=None)
    def words(self, length):
        """Globally valid words of the given length, sorted."""
        if not self.vertices:
            return ()
        if length == 0:
            return ((),)
        if length <= self.n:
            return tuple(
                sorted({w[i : i + length] for w in self.vertices for i in range(self.n - length + 1)})
            )
        out = set()

        def walk(word, vert, remaining):
            if remaining == 0:
                out.add(word)
                return
            for nxt in self.edges[vert]:
                walk(word + (nxt[-1],), nxt, remaining - 1)

        for v in self.vertices:
            walk(v, v, length - self.n)
        return tuple(sorted(out))

    def patterns_on(self, cells):
        """Exact set of globally valid patterns on a finite subset of Z."""
        cells = tuple(sorted(cells))
        if not cells:
            return (
                frozenset([EMPTY_PATTERN]) if self.nonempty() else frozenset()
            )
        xs = [c[0] for c in cells]
        lo, hi = min(xs), max(xs)
        length = hi - lo + 1
        out = set()
        for w in self.words(length):
            out.add(Pattern(tuple((c, w[c[0] - lo]) for c in cells)))
        return frozenset(out)

    def patterns_on_with_status(self, cells):
        return self.patterns_on(cells), True

    def is_valid(self, pattern):
        return pattern in self.patterns_on(tuple(sorted(pattern.domain)))


# ---- budgeted brute-force oracle (margin stabilization) ----------------------


class MarginOracle:
    """Upper-approximation oracle: keep the assignments on a shape that stay
    extendable as the padding radius grows, and report the set exact once two
    consecutive radii agree.  This is test-grade ground truth, not a proof."""

    def __init__(self, spec, budget=None):
        self.spec = spec
        self.budget = budget or Budget.default()
        self._cache = {}

    @property
    def exact(self):
        return True  # callers get per-query status from patterns_on_with_status

    def patterns_on_with_status(self, cells):
        cells = tuple(sorted(cells, key=self.spec.sites.cell_key))
        hit = self._cache.get(cells)
        if hit is not None:
            return hit
        if not cells:
            verdict = refute_global_validity(self.spec, EMPTY_PATTERN, self.budget)
            result = (
                frozenset() if verdict.refuted else frozenset([EMPTY_PATTERN]),
                verdict.refuted,
            )
            self._cache[cells] = result
            return result
        candidates, complete = locally_valid_patterns(
            self.spec, cells, node_cap=self.budget.node_cap
        )
        stable = False
        survivors = candidates
        previous = None
        for R in range(self.budget.radius_cap + 1):
            current = []
            for p in survivors:
                try:
                    if extendable_to_radius(self.spec, p, R, self.budget.node_cap):
                        current.append(p)
                except BudgetExceeded:
                    current.append(p)  # keep: upper approximation
                    complete = False
            survivors = current
            if previous is not None and len(previous) == len(survivors):
                stable = True
                break
            previous = survivors
        result = (frozenset(survivors), stable and complete)
        self._cache[cells] = result
        return result

    def patterns_on(self, cells):
        return self.patterns_on_with_status(cells)[0]

    def is_valid(self, pattern):
        cells = tuple(sorted(pattern.domain, key=self.spec.sites.cell_key))
        return pattern in self.patterns_on(cells)


def follower_symbols(spec, pattern, at, oracle=None, budget=None):
    """Symbols that can extend the pattern at the given cell.

    With an exact oracle the answer is the exact follower set (status
    "exact"); otherwise each symbol carries the refutation verdict and the
    returned set is the not-refuted upper approximation.
    """
    if at in pattern.domain:
        raise GroupError("extension cell already assigned")
    statuses = {}
    out = set()
    if oracle is not None:
        cells = tuple(
            sorted(pattern.domain | {at}, key=spec.sites.cell_key)
        )
        pats, exact = oracle.patterns_on_with_status(cells)
        for q in pats:
            if q.restrict(pattern.domain) == pattern:
                a = q.get(at)
                out.add(a)
                statuses[a] = EXACT if exact else NOT_REFUTED
        for a in range(len(spec.alphabet)):
            if a not in out:
                statuses[a] = REFUTED if exact else NOT_REFUTED
        return out, statuses, exact
    budget = budget or Budget.default()
    for a in range(len(spec.alphabet)):
        verdict = refute_global_validity(spec, pattern.with_cell(at, a), budget)
        statuses[a] = verdict.status
        if not verdict.refuted:
            out.add(a)
    return out, statuses, False
