"""Patterns, forbidden sets, and local validity.

A Pattern is a finite partial assignment of alphabet indices to cells.
Cells are group points for ordinary subshifts; for two-level relation
subshifts (used by the factor machinery) a cell is a (point, level) pair
and the group acts on the point part only.  The Sites wrapper hides the
difference.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import lru_cache

from .groups import Group, GroupError


@dataclass(frozen=True)
class Sites:
    """Cell geometry for a spec: a group, optionally with level tags."""

    group: Group
    levels: int = 0  # 0 = plain points; >= 1 = (point, level) cells

    @property
    def leveled(self):
        return self.levels > 0

    def identity_cell(self, level=None):
        e = self.group.identity()
        if not self.leveled:
            return e
        return (e, self.levels if level is None else level)

    def translate_cell(self, g, cell):
        if not self.leveled:
            return self.group.compose(g, cell)
        return (self.group.compose(g, cell[0]), cell[1])

    def base(self, cell):
        return cell if not self.leveled else cell[0]

    def cell_norm(self, cell):
        return self.group.norm(self.base(cell))

    def cell_key(self, cell):
        if not self.leveled:
            return self.group.point_key(cell)
        return (self.group.point_key(cell[0]), cell[1])

    def cell_distance(self, c, d):
        """Distance between the base points (levels are metrically free)."""
        g = self.group.compose(self.group.invert(self.base(c)), self.base(d))
        return self.group.norm(g)

    def cells_within(self, r):
        ball = self.group.ball(r)
        if not self.leveled:
            return ball
        return tuple((g, lvl) for g in ball for lvl in range(1, self.levels + 1))

    def pad_cells(self, cells, R):
        """Union of R-balls around the given cells and the identity; for
        leveled sites the padding covers every level."""
        bases = {self.base(c) for c in cells}
        bases.add(self.group.identity())
        out = set(cells)
        for b in bases:
            for q in self.group.ball(R):
                p = self.group.compose(b, q)
                if not self.leveled:
                    out.add(p)
                else:
                    for lvl in range(1, self.levels + 1):
                        out.add((p, lvl))
        return tuple(sorted(out, key=self.cell_key))

    def format_cell(self, cell):
        if not self.leveled:
            return self.group.format_point(cell)
        return f"{self.group.format_point(cell[0])}@{cell[1]}"

    def parse_cell(self, text):
        if not self.leveled:
            return self.group.parse_point(text)
        body, _, lvl = text.rpartition("@")
        if not body:
            raise GroupError(f"leveled cell needs point@level: {text!r}")
        level = int(lvl)
        if not 1 <= level <= self.levels:
            raise GroupError(f"level out of range in {text!r}")
        return (self.group.parse_point(body), level)


@dataclass(frozen=True)
class Pattern:
    """A finite partial configuration: sorted (cell, symbol index) pairs."""

    cells: tuple

    @classmethod
    def from_dict(cls, assignment):
        return cls(tuple(sorted(assignment.items())))

    @property
    def domain(self):
        return frozenset(c for c, _ in self.cells)

    def as_dict(self):
        return dict(self.cells)

    def get(self, cell):
        for c, a in self.cells:
            if c == cell:
                return a
        return None

    def __len__(self):
        return len(self.cells)

    def restrict(self, cells):
        keep = frozenset(cells)
        return Pattern(tuple((c, a) for c, a in self.cells if c in keep))

    def with_cell(self, cell, symbol):
        return Pattern.from_dict({**self.as_dict(), cell: symbol})


EMPTY_PATTERN = Pattern(())


@dataclass(frozen=True)
class Merge:
    """Result of merging two patterns: the union, or the first conflict."""

    pattern: object = None
    conflict: object = None  # the conflicting cell, if any

    @property
    def ok(self):
        return self.conflict is None


def merge_patterns(p, q):
    out = dict(p.cells)
    for c, a in q.cells:
        if c in out and out[c] != a:
            return Merge(None, c)
        out[c] = a
    return Merge(Pattern.from_dict(out), None)


def translate_pattern(sites, pattern, g):
    return Pattern(
        tuple(
            sorted((sites.translate_cell(g, c), a) for c, a in pattern.cells)
        )
    )


def canonical_pattern(sites, pattern):
    """Translate so the least domain cell sits at the identity."""
    if not pattern.cells:
        return pattern
    least = min(pattern.domain, key=sites.cell_key)
    g = sites.group.invert(sites.base(least))
    return translate_pattern(sites, pattern, g)


def contains_translate(sites, pattern, sub):
    """Does some translate of sub occur inside pattern (domains included)?"""
    if not sub.cells:
        return True
    data = dict(pattern.cells)
    anchor, anchor_sym = sub.cells[0]
    ab = sites.base(anchor)
    ab_inv = sites.group.invert(ab)
    for cell in pattern.domain:
        if sites.leveled and cell[1] != anchor[1]:
            continue
        g = sites.group.compose(sites.base(cell), ab_inv)
        for c, a in sub.cells:
            tc = sites.translate_cell(g, c)
            if data.get(tc) != a:
                break
        else:
            return True
    return False


@dataclass(frozen=True)
class SftSpec:
    """Alphabet plus a finite forbidden pattern set over a catalog group.

    forbidden patterns are stored in canonical translated form, deduplicated
    and with supersets of other forbidden patterns dropped.  window is the
    max cell norm over canonical forbidden domains; reach is the max distance
    from any domain cell to any other, i.e. how far a forbidden constraint
    can see from a cell it covers.
    """

    sites: Sites
    alphabet: tuple
    forbidden: tuple
    window: int = field(default=0, compare=False)
    reach: int = field(default=0, compare=False)

    @property
    def group(self):
        return self.sites.group

    def symbol_index(self, name):
        try:
            return self.alphabet.index(name)
        except ValueError:
            raise GroupError(f"undeclared symbol {name!r}") from None


def make_spec(sites, alphabet, forbidden, normalize=True):
    alphabet = tuple(str(a) for a in alphabet)
    if len(set(alphabet)) != len(alphabet):
        raise GroupError("duplicate symbols in alphabet")
    canon = []
    seen = set()
    for p in forbidden:
        for _, a in p.cells:
            if not 0 <= a < len(alphabet):
                raise GroupError(f"symbol index {a} outside alphabet")
        cp = canonical_pattern(sites, p)
        if cp not in seen:
            seen.add(cp)
            canon.append(cp)
    if normalize:
        kept = []
        for p in sorted(canon, key=lambda q: (len(q.cells), q.cells)):
            if not any(contains_translate(sites, p, q) for q in kept):
                kept.append(p)
        canon = kept
    canon.sort(key=lambda q: (len(q.cells), q.cells))
    window = 0
    reach = 0
    for p in canon:
        for c, _ in p.cells:
            window = max(window, sites.cell_norm(c))
            for d, _ in p.cells:
                reach = max(reach, sites.cell_distance(c, d))
    return SftSpec(
        sites=sites,
        alphabet=alphabet,
        forbidden=tuple(canon),
        window=window,
        reach=reach,
    )


def plain_spec(group, alphabet, forbidden, normalize=True):
    return make_spec(Sites(group), alphabet, forbidden, normalize=normalize)


def locally_valid(spec, pattern):
    """No translate of a forbidden pattern fits inside the pattern's domain."""
    return not any(
        contains_translate(spec.sites, pattern, q) for q in spec.forbidden
    )


def locally_valid_at(spec, pattern, cell):
    """Validity restricted to forbidden translates covering the given cell.

    Assumes the rest of the pattern was already checked; used for
    incremental extension checks.
    """
    sites = spec.sites
    data = dict(pattern.cells)
    cb = sites.base(cell)
    for q in spec.forbidden:
        if not q.cells:
            return False
        for qc, _ in q.cells:
            if sites.leveled and qc[1] != cell[1]:
                continue
            g = sites.group.compose(cb, sites.group.invert(sites.base(qc)))
            for c, a in q.cells:
                tc = sites.translate_cell(g, c)
                if data.get(tc) != a:
                    break
            else:
                return False
    return True


def valid_symbols_at(spec, pattern, cell):
    """Alphabet indices whose placement at cell keeps the pattern locally valid."""
    out = []
    for a in range(len(spec.alphabet)):
        if locally_valid_at(spec, pattern.with_cell(cell, a), cell):
            out.append(a)
    return out


def format_pattern(spec, pattern):
    if not pattern.cells:
        return "<empty>"
    return " ".join(
        f"{spec.sites.format_cell(c)}={spec.alphabet[a]}" for c, a in pattern.cells
    )


def m_sft_approximation(spec, window_cells, patterns_on):
    """Spec forbidding exactly the window patterns the oracle does not produce.

    patterns_on must return (patterns, exact) for a cell set; the result is
    tagged exact only when the oracle was.
    """
    cells = tuple(sorted(window_cells, key=spec.sites.cell_key))
    present, exact = patterns_on(cells)
    import itertools as _it

    forbidden = []
    for combo in _it.product(range(len(spec.alphabet)), repeat=len(cells)):
        p = Pattern(tuple(zip(cells, combo)))
        if p not in present:
            forbidden.append(p)
    return make_spec(spec.sites, spec.alphabet, forbidden, normalize=False), exact
