"""Certificate search: enumerate candidate forbidden sets, semidecide
equivalence with the input spec, verify the uniform extension condition
over a shape family, and probe follower determinacy.

A Certificate never asserts more than what re-verification can reproduce:
equivalence evidence is a pair of unextendability radii, the uniform
condition is a transcript of (prefix shape, pattern count) checks, and the
determinacy probes are recorded with their caps.  Budgets make everything
terminate; exhaustion yields Unknown, never a wrong verdict.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field

from .groups import GroupError
from .oracles import (
    Budget,
    BudgetExceeded,
    locally_valid_patterns,
    refute_global_validity,
)
from .patterns import (
    EMPTY_PATTERN,
    Pattern,
    Sites,
    canonical_pattern,
    contains_translate,
    make_spec,
    valid_symbols_at,
)
from .shapes import (
    cornered_prefixes,
    ii_prefixes,
    tree_convex_extension_prefixes,
)

FAMILY_II = "ii"
FAMILY_ALL_SUBSETS = "all-subsets"
FAMILY_TREE_CONVEX = "tree-convex"
FAMILY_CORNERED = "cornered"
FAMILIES = (FAMILY_II, FAMILY_ALL_SUBSETS, FAMILY_TREE_CONVEX, FAMILY_CORNERED)

EQUIVALENT = "equivalent"
NOT_EQUIVALENT = "not_equivalent"
VERIFIED = "verified"
FAILS_AT = "fails_at"
UNKNOWN = "unknown"


def family_prefixes(sites, family, R, shape_cap=None):
    """Truncated family shapes within B_R, each with its extension corner.

    Returns (list of (cells, corner), complete flag).  The enumeration is
    exact unless the cap trips.
    """
    group = sites.group
    e = sites.identity_cell() if not sites.leveled else None
    if family == FAMILY_II:
        if sites.leveled:
            raise GroupError("inductive intervals need a plain spec")
        out = [(frozenset(p), group.identity()) for p in ii_prefixes(group, R)]
        return out, True
    if family == FAMILY_ALL_SUBSETS:
        if sites.leveled:
            raise GroupError("all-subsets family needs a plain spec")
        pts = [g for g in group.ball(R) if g != group.identity()]
        out = []
        complete = True
        total = 2 ** len(pts)
        if shape_cap is not None and total > shape_cap:
            complete = False
        count = 0
        for size in range(len(pts) + 1):
            for combo in itertools.combinations(pts, size):
                out.append((frozenset(combo), group.identity()))
                count += 1
                if shape_cap is not None and count >= shape_cap:
                    return out, complete and count == total
        return out, True
    if family == FAMILY_TREE_CONVEX:
        if sites.leveled:
            raise GroupError("tree convex family needs a plain spec")
        shapes_list, complete = tree_convex_extension_prefixes(
            group, R, cap=shape_cap
        )
        return [(s, group.identity()) for s in shapes_list], complete
    if family == FAMILY_CORNERED:
        if not sites.leveled:
            raise GroupError("cornered family needs a two-level spec")
        out = [(c.cells, c.corner) for c in cornered_prefixes(group, R)]
        return out, True
    raise GroupError(f"unknown family {family!r}")


def _shape_token(sites, cells, corner):
    parts = ",".join(sites.format_cell(c) for c in sorted(cells, key=sites.cell_key))
    return f"[{parts}]@{sites.format_cell(corner)}"


@dataclass(frozen=True)
class Certificate:
    """A verified forbidden set: Q defines the same subshift as the source
    spec (evidence: refutation radii both ways) and every Q-locally-valid
    pattern on every family prefix within B_R extends at the corner."""

    spec: object  # the verified Q as an SftSpec
    family: str
    radius: int
    transcript: tuple  # (shape token, locally valid pattern count)
    equivalence_evidence: tuple  # (max radius forward, max radius backward)
    probe_note: str = ""


@dataclass(frozen=True)
class EquivalenceResult:
    status: str
    witness: object = None  # pattern separating the two, if NOT_EQUIVALENT
    evidence: tuple = ()


def verify_equivalence(spec_a, spec_b, budget, oracle_a=None, oracle_b=None):
    """Semidecide X(a) == X(b): each side's forbidden patterns must be
    unextendable in the other.  An exact oracle enables refutation of
    equivalence (a pattern valid on one side, forbidden on the other)."""
    if spec_a.sites != spec_b.sites or spec_a.alphabet != spec_b.alphabet:
        raise GroupError("equivalence needs matching group and alphabet")
    if spec_a.forbidden == spec_b.forbidden:
        return EquivalenceResult(EQUIVALENT, evidence=(0, 0))

    def side(source, targets, oracle):
        # every target-forbidden pattern must fail to appear in X(source)
        radius = 0
        for q in targets.forbidden:
            verdict = refute_global_validity(source, q, budget)
            if not verdict.refuted:
                witness = None
                if oracle is not None and not q.cells:
                    pass
                elif oracle is not None:
                    cells = tuple(sorted(q.domain, key=source.sites.cell_key))
                    pats, exact = oracle.patterns_on_with_status(cells)
                    if exact and q in pats:
                        witness = q
                return None, witness
            radius = max(radius, verdict.radius)
        return radius, None

    r_fwd, wit = side(spec_a, spec_b, oracle_a)
    if r_fwd is None and wit is not None:
        return EquivalenceResult(NOT_EQUIVALENT, witness=wit)
    r_bwd, wit = side(spec_b, spec_a, oracle_b)
    if r_bwd is None and wit is not None:
        return EquivalenceResult(NOT_EQUIVALENT, witness=wit)
    if r_fwd is None or r_bwd is None:
        return EquivalenceResult(UNKNOWN)
    return EquivalenceResult(EQUIVALENT, evidence=(r_fwd, r_bwd))


def _canonical_shapes(sites, cells_pool, max_cells):
    """Subsets of the pool up to translation, by size then canonical order."""
    seen = set()
    out = []
    for size in range(0, max_cells + 1):
        for combo in itertools.combinations(cells_pool, size):
            shifted = _canonical_cells(sites, combo)
            if shifted not in seen:
                seen.add(shifted)
                out.append(shifted)
    return out


def _canonical_cells(sites, cells):
    if not cells:
        return ()
    least = min(cells, key=sites.cell_key)
    g = sites.group.invert(sites.base(least))
    return tuple(
        sorted((sites.translate_cell(g, c) for c in cells), key=sites.cell_key)
    )


def minimal_refuted_patterns(spec, r, budget):
    """Minimal (under translated subpattern containment) patterns within
    ball(r) refuted at the current budget.  Forbidding these is equivalent to
    forbidding every refuted pattern on subsets of the r-ball."""
    sites = spec.sites
    pool = sites.cells_within(r)
    found = []
    n_sym = len(spec.alphabet)
    verdict = refute_global_validity(spec, EMPTY_PATTERN, budget)
    if verdict.refuted:
        return [EMPTY_PATTERN]
    for shape in _canonical_shapes(sites, pool, budget.candidate_cells_cap):
        if not shape:
            continue
        for combo in itertools.product(range(n_sym), repeat=len(shape)):
            p = Pattern(tuple(zip(shape, combo)))
            if any(contains_translate(sites, p, q) for q in found):
                continue
            if refute_global_validity(spec, p, budget).refuted:
                found.append(canonical_pattern(sites, p))
    return found


def enumerate_candidates(spec, budget, extra=()):
    """Deterministic candidate stream: user extras first, then the minimal
    refuted sets at growing radii, layered by pattern size so small windows
    are tried before the verification-heavy ones.  Duplicates are skipped."""
    seen = set()
    for q_spec in extra:
        if q_spec.forbidden not in seen:
            seen.add(q_spec.forbidden)
            yield q_spec
    r_lo = spec.window
    r_hi = spec.window + budget.candidate_extra_radius
    for r in range(r_lo, r_hi + 1):
        pats = minimal_refuted_patterns(spec, r, budget)
        sizes = sorted({len(p.cells) for p in pats}) or [0]
        for k in sizes:
            q = make_spec(
                spec.sites,
                spec.alphabet,
                [p for p in pats if len(p.cells) <= k],
            )
            if q.forbidden not in seen:
                seen.add(q.forbidden)
                yield q


@dataclass(frozen=True)
class UniformResult:
    status: str  # VERIFIED | FAILS_AT | UNKNOWN
    transcript: tuple = ()
    failure: tuple = ()  # (cells, pattern) on FAILS_AT
    complete: bool = True


def verify_uniform(q_spec, family, R, budget=None):
    """Check that every Q-locally-valid pattern on every family prefix
    within B_R admits a Q-locally-valid extension at the prefix corner."""
    budget = budget or Budget.default()
    if R < q_spec.window:
        raise GroupError("verification radius below the window size")
    sites = q_spec.sites
    prefixes, complete = family_prefixes(
        sites, family, R, shape_cap=budget.enumeration_cap
    )
    transcript = []
    for cells, corner in prefixes:
        try:
            pats, full = locally_valid_patterns(
                q_spec,
                cells,
                node_cap=budget.node_cap,
                yield_cap=budget.enumeration_cap,
            )
        except BudgetExceeded:
            return UniformResult(UNKNOWN, tuple(transcript), complete=False)
        if not full:
            complete = False
        for p in pats:
            if not valid_symbols_at(q_spec, p, corner):
                return UniformResult(
                    FAILS_AT, tuple(transcript), (frozenset(cells), p)
                )
        transcript.append((_shape_token(sites, cells, corner), len(pats)))
    if not complete:
        return UniformResult(UNKNOWN, tuple(transcript), complete=False)
    return UniformResult(VERIFIED, tuple(transcript))


@dataclass(frozen=True)
class ProbeResult:
    ok: bool
    violation: tuple = ()  # (cells, pattern, symbol) when not ok
    checked: int = 0
    complete: bool = True


def probe_determinacy(q_spec, family, R, budget):
    """Falsification probe for the claimed determining radius R.

    If Q uniformly defines the subshift on the family, then for a globally
    valid pattern x on a family prefix, every symbol that is Q-locally
    compatible with x's R-core extends x validly.  So a symbol that is
    compatible with the core but refutably incompatible with the whole of x
    (while x itself is not refuted) disproves the claim.  The cheap pass
    looks for symbols already locally contradicted beyond the core; the deep
    pass spends refutation searches on the rest, under the probe caps.
    Probes can only reject candidates, never certify them.
    """
    from dataclasses import replace

    sites = q_spec.sites
    probe_budget = replace(budget, radius_cap=budget.probe_radius_cap)
    checked = 0
    complete = True
    levels = []
    for W in range(R + 1, R + budget.probe_depth + 1):
        prefixes, full = family_prefixes(
            sites, family, W, shape_cap=budget.probe_shape_cap
        )
        complete = complete and full
        if len(prefixes) > budget.probe_shape_cap:
            prefixes = prefixes[: budget.probe_shape_cap]
            complete = False
        level = []
        for cells, corner in prefixes:
            try:
                pats, full = locally_valid_patterns(
                    q_spec,
                    cells,
                    node_cap=budget.node_cap,
                    yield_cap=budget.probe_pattern_cap,
                )
            except BudgetExceeded:
                complete = False
                continue
            complete = complete and full
            core = frozenset(
                c for c in cells if sites.cell_distance(corner, c) <= R
            )
            level.append((cells, corner, core, pats))
        levels.append(level)

    def x_valid(x):
        return not refute_global_validity(q_spec, x, probe_budget).refuted

    deep = []
    for level in levels:
        for cells, corner, core, pats in level:
            for x in pats:
                local = valid_symbols_at(q_spec, x.restrict(core), corner)
                full_ok = set(valid_symbols_at(q_spec, x, corner))
                for a in local:
                    if a not in full_ok:
                        # contradicted by x outside the core: refuted at pad 0
                        checked += 1
                        if x_valid(x):
                            return ProbeResult(
                                False, (frozenset(cells), x, a), checked, complete
                            )
                    else:
                        deep.append((cells, corner, x, a))
    if len(deep) > budget.probe_extension_cap:
        deep = deep[: budget.probe_extension_cap]
        complete = False
    for cells, corner, x, a in deep:
        checked += 1
        verdict = refute_global_validity(
            q_spec, x.with_cell(corner, a), probe_budget
        )
        if verdict.refuted and x_valid(x):
            return ProbeResult(False, (frozenset(cells), x, a), checked, complete)
    return ProbeResult(True, (), checked, complete)


@dataclass(frozen=True)
class SearchOutcome:
    certificate: object = None
    status: str = UNKNOWN
    candidates_tried: int = 0
    note: str = ""


def find_certificate(spec, family, budget=None, extra_candidates=()):
    """Dovetail (candidate Q, radius R); return the first Q that is
    equivalent to the spec, verifies uniformly at R, and survives the
    determinacy probes.  Budget exhaustion gives Unknown, never a wrong
    answer."""
    budget = budget or Budget.default()
    tried = 0
    notes = []
    for q_spec in enumerate_candidates(spec, budget, extra=extra_candidates):
        tried += 1
        eq = verify_equivalence(spec, q_spec, budget)
        if eq.status != EQUIVALENT:
            notes.append(f"candidate {tried}: equivalence {eq.status}")
            continue
        r_lo = max(1, q_spec.window)
        r_hi = max(r_lo, q_spec.window + budget.verify_extra_radius)
        for R in range(r_lo, r_hi + 1):
            uni = verify_uniform(q_spec, family, R, budget)
            if uni.status == FAILS_AT:
                notes.append(f"candidate {tried}: fails uniform check at R={R}")
                continue
            if uni.status != VERIFIED:
                notes.append(f"candidate {tried}: uniform check unknown at R={R}")
                continue
            probe = probe_determinacy(q_spec, family, R, budget)
            if not probe.ok:
                notes.append(f"candidate {tried}: determinacy probe fails at R={R}")
                continue
            note = f"probes checked {probe.checked} extensions"
            if not probe.complete:
                note += " (capped)"
            return SearchOutcome(
                Certificate(
                    spec=q_spec,
                    family=family,
                    radius=R,
                    transcript=uni.transcript,
                    equivalence_evidence=eq.evidence,
                    probe_note=note,
                ),
                status="found",
                candidates_tried=tried,
            )
    return SearchOutcome(None, UNKNOWN, tried, "; ".join(notes[-4:]))


def reverify_certificate(cert, source_spec, budget=None):
    """Re-run every check that backs a certificate, from scratch.

    Returns (ok, reason).  The transcript must be reproduced exactly, the
    equivalence evidence must still hold, and the probes must still pass.
    """
    budget = budget or Budget.default()
    if cert.radius < cert.spec.window:
        return False, "radius below window size"
    uni = verify_uniform(cert.spec, cert.family, cert.radius, budget)
    if uni.status != VERIFIED:
        return False, f"uniform check did not verify ({uni.status})"
    if tuple(uni.transcript) != tuple(cert.transcript):
        return False, "transcript mismatch"
    if source_spec is not None:
        eq = verify_equivalence(source_spec, cert.spec, budget)
        if eq.status != EQUIVALENT:
            return False, f"equivalence not confirmed ({eq.status})"
    probe = probe_determinacy(cert.spec, cert.family, cert.radius, budget)
    if not probe.ok:
        return False, "determinacy probe fails"
    return True, "ok"
