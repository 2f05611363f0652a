"""Exact language deduction over a verified certificate, plus the decision
procedures built on it: inclusion, emptiness, pattern completion, and
projective subdynamics.

The deduction rules are deliberately minimal: the table starts at the empty
shape, grows by corner extension along family prefixes (everything a
forbidden pattern could see across the extension corner is already in the
shape), and is closed under translation and restriction.  Anything the
rules cannot reach is reported NotDerived, never guessed.
"""

from __future__ import annotations

from dataclasses import dataclass, replace

from .certificates import (
    FAMILY_CORNERED,
    FAMILY_II,
    FAMILY_TREE_CONVEX,
    family_prefixes,
)
from .groups import GroupError
from .oracles import Budget, refute_global_validity
from .patterns import (
    EMPTY_PATTERN,
    Pattern,
    make_spec,
    translate_pattern,
    valid_symbols_at,
)
from .shapes import anti_shelling, group_order_key

NOT_DERIVED = "not_derived"
SUBSET = "subset"
NOT_SUBSET = "not_subset"
UNKNOWN = "unknown"
EMPTY = "empty"
NONEMPTY = "nonempty"


class CertificateViolation(RuntimeError):
    """A step the certificate guarantees turned out impossible; the
    certificate should be re-verified."""


class LanguageTable:
    """Exact pattern sets per shape, with per-entry provenance."""

    def __init__(self, spec, radius):
        self.spec = spec
        self.radius = radius
        self.entries = {}  # canonical cells tuple -> frozenset of Pattern
        self.provenance = {}
        root_empty = any(q == EMPTY_PATTERN for q in spec.forbidden)
        self._store(
            (), frozenset() if root_empty else frozenset([EMPTY_PATTERN]), "root"
        )

    def _canonical(self, cells):
        """Translate the shape so its least cell sits at the identity."""
        cells = tuple(sorted(cells, key=self.spec.sites.cell_key))
        if not cells:
            return (), self.spec.group.identity()
        g = self.spec.group.invert(self.spec.sites.base(cells[0]))
        moved = tuple(
            sorted(
                (self.spec.sites.translate_cell(g, c) for c in cells),
                key=self.spec.sites.cell_key,
            )
        )
        return moved, g

    def _store(self, canon_cells, patterns, why):
        self.entries[canon_cells] = frozenset(patterns)
        self.provenance[canon_cells] = why

    def shapes(self):
        return sorted(self.entries, key=lambda s: (len(s), s))

    def lookup(self, cells):
        """Exact pattern set on the shape, if derivable from the table by
        translation and restriction; None otherwise."""
        sites = self.spec.sites
        group = self.spec.group
        cells = tuple(sorted(cells, key=sites.cell_key))
        if not cells:
            pats = self.entries.get(())
            return set(pats) if pats is not None else None
        canon, g0 = self._canonical(cells)
        hit = self.entries.get(canon)
        if hit is None:
            found = None
            anchor = canon[0]
            ab_inv = group.invert(sites.base(anchor))
            for key in sorted(self.entries, key=lambda s: (len(s), s)):
                if len(key) < len(canon):
                    continue
                keyset = frozenset(key)
                for cell in key:
                    if sites.leveled and cell[1] != anchor[1]:
                        continue
                    g = group.compose(sites.base(cell), ab_inv)
                    moved = [sites.translate_cell(g, c) for c in canon]
                    if all(m in keyset for m in moved):
                        movedset = frozenset(moved)
                        g_inv = group.invert(g)
                        found = frozenset(
                            translate_pattern(sites, p.restrict(movedset), g_inv)
                            for p in self.entries[key]
                        )
                        break
                if found is not None:
                    break
            if found is None:
                return None
            self._store(canon, found, "restriction")
            hit = found
        g0_inv = group.invert(g0)
        return {translate_pattern(self.spec.sites, p, g0_inv) for p in hit}


def saturate_language(cert, W, budget=None, targets=()):
    """Build the table out to working radius W.

    Inductive-interval and cornered families run a fixpoint over family
    prefixes; the tree convex family grows one shelling chain to the W-ball
    (optionally grown around each requested target).
    """
    budget = budget or Budget.default()
    spec = cert.spec
    table = LanguageTable(spec, cert.radius)
    if any(q == EMPTY_PATTERN for q in spec.forbidden):
        return table
    if cert.family == FAMILY_TREE_CONVEX:
        _saturate_tree(table, cert, W, budget, targets)
        return table
    prefixes, _ = family_prefixes(
        spec.sites, cert.family, W, shape_cap=budget.enumeration_cap
    )
    prefixes = sorted(prefixes, key=lambda mc: (len(mc[0]), sorted(map(spec.sites.cell_key, mc[0]))))
    changed = True
    while changed:
        changed = False
        for cells, corner in prefixes:
            target = tuple(
                sorted(set(cells) | {corner}, key=spec.sites.cell_key)
            )
            canon, _ = table._canonical(target)
            if canon in table.entries:
                continue
            base = table.lookup(cells)
            if base is None:
                continue
            derived = set()
            for x in base:
                for a in valid_symbols_at(spec, x, corner):
                    derived.add(x.with_cell(corner, a))
            canon_pats = _canonicalize_entry(table, target, derived)
            table._store(canon, canon_pats, "corner extension")
            changed = True
    return table


def _canonicalize_entry(table, cells, patterns):
    canon, g0 = table._canonical(cells)
    return frozenset(
        translate_pattern(table.spec.sites, p, g0) for p in patterns
    )


def _saturate_tree(table, cert, W, budget, targets):
    spec = cert.spec
    group = spec.group
    region = set(group.ball(W))
    for t in targets:
        region.update(t)
    chain = anti_shelling(group, region)
    current = {EMPTY_PATTERN}
    done = []
    for s in chain:
        new = set()
        for x in current:
            for a in valid_symbols_at(spec, x, s):
                new.add(x.with_cell(s, a))
        current = new
        done.append(s)
        if len(current) > budget.node_cap:
            raise GroupError("language table over pattern budget")
    cells = tuple(sorted(done, key=spec.sites.cell_key))
    canon, _ = table._canonical(cells)
    table._store(canon, _canonicalize_entry(table, cells, current), "shelling")


def language_on(cert, cells, budget=None, w_start=None):
    """Exact pattern set on the shape, or NOT_DERIVED.

    The working radius escalates by doubling until the shape derives or the
    budget's radius cap is passed.
    """
    budget = budget or Budget.default()
    spec = cert.spec
    cells = tuple(sorted(cells, key=spec.sites.cell_key))
    need = max((spec.sites.cell_norm(c) for c in cells), default=0)
    W = max(w_start or 0, need, cert.radius, 1)
    while True:
        table = _table_for(cert, W, budget)
        got = table.lookup(cells)
        if got is not None:
            return got, table
        if W >= budget.language_radius_cap:
            return NOT_DERIVED, table
        W = min(2 * W, budget.language_radius_cap)


_TABLE_CACHE = {}


def _table_for(cert, W, budget):
    key = (id(cert), W)
    hit = _TABLE_CACHE.get(key)
    if hit is None:
        hit = saturate_language(cert, W, budget)
        _TABLE_CACHE[key] = hit
    return hit


def complete_pattern(cert, pattern, target_cells, budget=None):
    """Extend the pattern cell by cell across the target, taking the least
    valid symbol each time.  A dead end means the certificate lied; that is
    surfaced as CertificateViolation rather than papered over."""
    budget = budget or Budget.default()
    spec = cert.spec
    sites = spec.sites
    todo = [c for c in target_cells if c not in pattern.domain]
    if sites.leveled:
        todo.sort(key=lambda c: (-c[1], group_order_key(spec.group, c[0])))
    elif spec.group.kind == "free":
        todo.sort(key=sites.cell_key)
    else:
        todo.sort(key=lambda c: group_order_key(spec.group, c))
    out = pattern
    for c in todo:
        for a in range(len(spec.alphabet)):
            cand = out.with_cell(c, a)
            from .patterns import locally_valid_at

            if locally_valid_at(spec, cand, c):
                out = cand
                break
        else:
            raise CertificateViolation(
                f"no valid symbol at {sites.format_cell(c)}; re-verify the certificate"
            )
    return out


@dataclass(frozen=True)
class InclusionResult:
    status: str  # SUBSET | NOT_SUBSET | UNKNOWN
    witness: object = None
    evidence: tuple = ()


def decide_inclusion(x_spec, y_spec, budget=None, x_cert=None):
    """Safely decide X subset-of Y.

    Forward: every Y-forbidden pattern must be unextendable in X.  Backward:
    hunt the exact X language (via the certificate) for a pattern refuted in
    Y.  Both directions are sound; budget exhaustion gives UNKNOWN.
    """
    budget = budget or Budget.default()
    if x_spec.sites != y_spec.sites or x_spec.alphabet != y_spec.alphabet:
        raise GroupError("inclusion needs matching group and alphabet")
    radii = []
    refuted_all = True
    for q in y_spec.forbidden:
        verdict = refute_global_validity(x_spec, q, budget)
        if not verdict.refuted:
            refuted_all = False
            break
        radii.append(verdict.radius)
    if refuted_all:
        return InclusionResult(SUBSET, evidence=(max(radii, default=0),))
    if x_cert is not None:
        W = max(1, x_cert.spec.window, y_spec.window + 1)
        W = min(W + 1, budget.language_radius_cap)
        table = _table_for(x_cert, W, budget)
        seen = set()
        for shape in table.shapes():
            for p in sorted(table.entries[shape], key=lambda q: q.cells):
                if p in seen:
                    continue
                seen.add(p)
                if refute_global_validity(y_spec, p, budget).refuted:
                    return InclusionResult(NOT_SUBSET, witness=p)
    return InclusionResult(UNKNOWN)


@dataclass(frozen=True)
class EmptinessResult:
    status: str  # EMPTY | NONEMPTY | UNKNOWN
    evidence: str = ""


def decide_emptiness(spec, budget=None, cert=None):
    """Safely decide emptiness: refutation of the empty pattern proves
    empty; a certificate whose forbidden set spares the empty pattern
    proves nonempty."""
    budget = budget or Budget.default()
    verdict = refute_global_validity(spec, EMPTY_PATTERN, budget)
    if verdict.refuted:
        return EmptinessResult(EMPTY, f"empty pattern unextendable at radius {verdict.radius}")
    if cert is not None:
        if any(q == EMPTY_PATTERN for q in cert.spec.forbidden):
            return EmptinessResult(EMPTY, "certificate forbids the empty pattern")
        return EmptinessResult(NONEMPTY, "certificate admits the empty pattern")
    return EmptinessResult(UNKNOWN)


def project_to_subgroup(cert, axis, budget=None):
    """Forbidden patterns for the restriction to the subgroup spanned by the
    first `axis` axes: the certificate patterns that fit inside it, moved
    there and re-canonicalized."""
    spec = cert.spec
    group = spec.group
    if spec.sites.leveled or group.kind == "free":
        raise GroupError("projection needs a plain polycyclic certificate")
    if cert.family != FAMILY_II:
        raise GroupError("projection needs an inductive-interval certificate")
    sub = group.subgroup(axis)
    from .patterns import Sites

    sub_sites = Sites(sub)
    out = []
    for q in spec.forbidden:
        if not q.cells:
            out.append(q)
            continue
        tuples = [group.to_tuple(c) for c, _ in q.cells]
        tails = {t[axis:] for t in tuples}
        if len(tails) != 1:
            continue
        d0 = q.cells[0][0]
        moved = translate_pattern(spec.sites, q, group.invert(d0))
        cells = {}
        for c, a in moved.cells:
            t = group.to_tuple(c)
            if any(v != 0 for v in t[axis:]):
                raise GroupError("projection translate left the subgroup")
            cells[sub.from_tuple(t[:axis])] = a
        out.append(Pattern.from_dict(cells))
    return make_spec(sub_sites, spec.alphabet, out)
