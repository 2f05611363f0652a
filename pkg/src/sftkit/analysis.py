"""Structural checkers: determining radii, extension counts, safe symbols,
corner-extension pattern sets, and strong spatial mixing gaps."""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from fractions import Fraction

from .groups import GroupError
from .oracles import (
    EXACT,
    NOT_REFUTED,
    REFUTED,
    Budget,
    follower_symbols,
    refute_global_validity,
)
from .patterns import Pattern, locally_valid, valid_symbols_at

ESTABLISHED = "established"
BUDGETED = "budgeted_evidence"
FAILS = "fails"
HOLDS = "holds_on_window"
UNKNOWN = "unknown"


@dataclass(frozen=True)
class RadiusFailure:
    """Witness that radius r does not determine followers on the shape:
    two patterns agreeing on the r-prefix whose follower sets provably
    differ at the given symbol."""

    radius: int
    witness_a: Pattern  # symbol is a follower here (status_a)
    witness_b: Pattern  # symbol is refuted here (status_b)
    symbol: int
    status_a: str
    status_b: str


@dataclass(frozen=True)
class AvoReport:
    shape: tuple
    status: str  # ESTABLISHED | BUDGETED | FAILS
    radius: object = None
    failures: tuple = ()
    caveat: str = ""
    exact: bool = False


def _cells_within(sites, cells, r):
    e_inv = sites.group.identity()
    return tuple(c for c in cells if sites.cell_norm(c) <= r)


def avoradius_for_shape(spec, cells, r_max, oracle=None, sample=None, budget=None):
    """Smallest r <= r_max such that, over the examined globally valid
    patterns on the shape, the follower set at the identity is a function of
    the pattern's restriction to the r-ball.

    With an exact oracle and no sample, all globally valid patterns are
    examined and a clean answer is Established.  A sample restricts the
    examination (failures found on it are still sound, given the oracle);
    the report is then budgeted evidence rather than an established radius.
    """
    budget = budget or Budget.default()
    sites = spec.sites
    cells = tuple(sorted(cells, key=sites.cell_key))
    e = sites.identity_cell(1) if sites.leveled else sites.identity_cell()
    if e in cells:
        raise GroupError("shape must omit the identity")

    exact_all = False
    if sample is not None:
        pats = list(sample)
    elif oracle is not None:
        pats, exact_all = oracle.patterns_on_with_status(cells)
        pats = sorted(pats, key=lambda p: p.cells)
    else:
        raise GroupError("need an oracle or a sample of valid patterns")

    followers = {}
    for p in pats:
        fol, statuses, exact = follower_symbols(
            spec, p, e, oracle=oracle, budget=budget
        )
        followers[p] = (fol, statuses, exact)

    failures = []
    best = None
    for r in range(r_max + 1):
        sub = _cells_within(sites, cells, r)
        groups = {}
        for p in pats:
            groups.setdefault(p.restrict(sub), []).append(p)
        failed = False
        for members in groups.values():
            for pa, pb in itertools.combinations(members, 2):
                fa, sta, _ = followers[pa]
                fb, stb, _ = followers[pb]
                for sym in sorted(fa - fb):
                    if stb.get(sym) == REFUTED:
                        failures.append(
                            RadiusFailure(r, pa, pb, sym, sta.get(sym), REFUTED)
                        )
                        failed = True
                        break
                else:
                    for sym in sorted(fb - fa):
                        if sta.get(sym) == REFUTED:
                            failures.append(
                                RadiusFailure(r, pb, pa, sym, stb.get(sym), REFUTED)
                            )
                            failed = True
                            break
                if failed:
                    break
            if failed:
                break
        if not failed and best is None:
            best = r
    if best is None:
        return AvoReport(cells, FAILS, None, tuple(failures), "no radius up to r_max")
    if sample is None and exact_all and all(f[2] for f in followers.values()):
        return AvoReport(cells, ESTABLISHED, best, tuple(failures), exact=True)
    return AvoReport(
        cells,
        BUDGETED,
        best,
        tuple(failures),
        "followers not fully exact" if sample is None else "sampled patterns only",
    )


@dataclass(frozen=True)
class ExtensionCountVerdict:
    shape: tuple
    status: str  # "constant" | "varies" | "withheld"
    count: object = None
    witnesses: tuple = ()


def equal_extension_counts(spec, shapes_list, oracle):
    """Per shape: is |follower set at e| the same for every globally valid
    pattern on the shape?  Requires exact answers; withheld otherwise."""
    out = []
    sites = spec.sites
    e = sites.identity_cell()
    for cells in shapes_list:
        cells = tuple(sorted(cells, key=sites.cell_key))
        pats, exact = oracle.patterns_on_with_status(cells)
        if not exact:
            out.append(ExtensionCountVerdict(cells, "withheld"))
            continue
        counts = {}
        for p in sorted(pats, key=lambda q: q.cells):
            fol, _, fol_exact = follower_symbols(spec, p, e, oracle=oracle)
            if not fol_exact:
                counts = None
                break
            counts.setdefault(len(fol), p)
        if counts is None:
            out.append(ExtensionCountVerdict(cells, "withheld"))
        elif len(counts) == 1:
            out.append(
                ExtensionCountVerdict(cells, "constant", next(iter(counts)))
            )
        else:
            ks = sorted(counts)
            out.append(
                ExtensionCountVerdict(
                    cells, "varies", None, (counts[ks[0]], counts[ks[-1]])
                )
            )
    return out


def safe_symbol_check(spec, symbol):
    """Can the symbol replace any subset of cells of any locally valid
    pattern on a forbidden domain without breaking local validity?"""
    if isinstance(symbol, str):
        symbol = spec.symbol_index(symbol)
    n_sym = len(spec.alphabet)
    domains = sorted({q.domain for q in spec.forbidden}, key=lambda d: sorted(map(spec.sites.cell_key, d)))
    for domain in domains:
        cells = tuple(sorted(domain, key=spec.sites.cell_key))
        for combo in itertools.product(range(n_sym), repeat=len(cells)):
            p = Pattern(tuple(zip(cells, combo)))
            if not locally_valid(spec, p):
                continue
            for mask in range(1, 2 ** len(cells)):
                repl = Pattern(
                    tuple(
                        (c, symbol if (mask >> i) & 1 else a)
                        for i, (c, a) in enumerate(p.cells)
                    )
                )
                if not locally_valid(spec, repl):
                    return False
    return True


# ---- corner geometry (exact rational arithmetic) -----------------------------


def _solve_affine(points, target):
    """Coefficients of an affine combination of points equal to target, if
    the points are affinely independent; None otherwise.  Exact fractions."""
    d = len(target)
    m = len(points)
    # rows: d coordinate equations + 1 normalization, columns: m coefficients
    rows = []
    for i in range(d):
        rows.append([Fraction(p[i]) for p in points] + [Fraction(target[i])])
    rows.append([Fraction(1)] * m + [Fraction(1)])
    # Gaussian elimination
    rank = 0
    pivots = []
    for col in range(m):
        piv = None
        for r in range(rank, len(rows)):
            if rows[r][col] != 0:
                piv = r
                break
        if piv is None:
            return None  # affinely dependent set: skip (a smaller subset will do)
        rows[rank], rows[piv] = rows[piv], rows[rank]
        pr = rows[rank]
        inv = Fraction(1) / pr[col]
        rows[rank] = [v * inv for v in pr]
        for r in range(len(rows)):
            if r != rank and rows[r][col] != 0:
                f = rows[r][col]
                rows[r] = [a - f * b for a, b in zip(rows[r], rows[rank])]
        pivots.append(col)
        rank += 1
    for r in range(rank, len(rows)):
        if rows[r][m] != 0:
            return None  # inconsistent
    coeffs = [Fraction(0)] * m
    for r, col in enumerate(pivots):
        coeffs[col] = rows[r][m]
    return coeffs


def hull_corners(points):
    """Vertices of the convex hull: points strictly maximized by some linear
    functional, computed exactly via Caratheodory over rational arithmetic."""
    pts = sorted(set(points))
    if len(pts) <= 1:
        return pts
    d = len(pts[0])
    corners = []
    for s in pts:
        others = [p for p in pts if p != s]
        inside = False
        for size in range(1, min(len(others), d + 1) + 1):
            for combo in itertools.combinations(others, size):
                coeffs = _solve_affine(combo, s)
                if coeffs is not None and all(c >= 0 for c in coeffs):
                    inside = True
                    break
            if inside:
                break
        if not inside:
            corners.append(s)
    return corners


def ktep_check(spec, pattern_set, k):
    """Do all patterns share one domain over Z^d, and does every corner of
    that domain admit exactly k extensions of every assignment on the rest?"""
    group = spec.group
    if spec.sites.leveled or group.kind != "abelian" or any(
        o is not None for o in group.orders
    ):
        raise GroupError("corner-extension check needs a plain Z^d spec")
    pattern_set = list(pattern_set)
    if not pattern_set:
        return False
    domain = pattern_set[0].domain
    if any(p.domain != domain for p in pattern_set):
        raise GroupError("patterns must share one domain")
    cells = sorted(domain)
    n_sym = len(spec.alphabet)
    pat_set = set(pattern_set)
    for corner in hull_corners(cells):
        rest = [c for c in cells if c != corner]
        for combo in itertools.product(range(n_sym), repeat=len(rest)):
            base = dict(zip(rest, combo))
            count = sum(
                1
                for a in range(n_sym)
                if Pattern.from_dict({**base, corner: a}) in pat_set
            )
            if count != k:
                return False
    return True


# ---- topological strong spatial mixing ---------------------------------------


@dataclass(frozen=True)
class TssmResult:
    status: str  # HOLDS | FAILS | UNKNOWN
    witness: tuple = ()  # (u, s, v) patterns on Fails
    note: str = ""


def tssm_gap_check(spec, gap, W, oracle, budget=None, combo_cap=200_000):
    """Search ball(W) for disjoint U, V, S with d(U,V) >= gap where valid
    u+s and s+v do not glue; exact verdicts need an exact oracle."""
    budget = budget or Budget.default()
    sites = spec.sites
    cells = list(sites.cells_within(W))
    n_sym = len(spec.alphabet)
    all_exact = True
    combos_seen = 0
    valid_cache = {}

    def is_valid(p):
        hit = valid_cache.get(p)
        if hit is None:
            pats, exact = oracle.patterns_on_with_status(
                tuple(sorted(p.domain, key=sites.cell_key))
            )
            hit = (p in pats, exact)
            valid_cache[p] = hit
        return hit

    for roles in itertools.product(range(4), repeat=len(cells)):
        U = [c for c, r in zip(cells, roles) if r == 1]
        V = [c for c, r in zip(cells, roles) if r == 2]
        S = [c for c, r in zip(cells, roles) if r == 3]
        if not U or not V:
            continue
        if min(sites.cell_distance(u, v) for u in U for v in V) < gap:
            continue
        region = U + S + V
        combos_seen += n_sym ** len(region)
        if combos_seen > combo_cap:
            return TssmResult(UNKNOWN, note="combination budget exhausted")
        for combo in itertools.product(range(n_sym), repeat=len(region)):
            assign = dict(zip(region, combo))
            u = Pattern.from_dict({c: assign[c] for c in U})
            s = Pattern.from_dict({c: assign[c] for c in S})
            v = Pattern.from_dict({c: assign[c] for c in V})
            us = Pattern.from_dict({**u.as_dict(), **s.as_dict()})
            sv = Pattern.from_dict({**s.as_dict(), **v.as_dict()})
            ok_us, ex1 = is_valid(us)
            if not ok_us:
                all_exact = all_exact and ex1
                continue
            ok_sv, ex2 = is_valid(sv)
            if not ok_sv:
                all_exact = all_exact and ex2
                continue
            if not (ex1 and ex2):
                all_exact = False
                continue
            usv = Pattern.from_dict({**us.as_dict(), **v.as_dict()})
            verdict = refute_global_validity(spec, usv, budget)
            if verdict.refuted:
                return TssmResult(FAILS, (u, s, v))
            ok_glue, ex3 = is_valid(usv)
            if not ex3:
                all_exact = False
            elif not ok_glue:
                return TssmResult(FAILS, (u, s, v))
    if all_exact:
        return TssmResult(HOLDS)
    return TssmResult(UNKNOWN, note="some validity checks were not exact")
