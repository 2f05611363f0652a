"""Shape families: inductive intervals, their prefixes and orders, tree
convex sets on free groups, and cornered two-level shapes.

Inductive intervals (IIs) are described symbolically by one 0-grazing
interval per axis and are never materialized; consumers always work with
truncations C `intersect` B_R.  All enumerations are deterministic: point order is
lexicographic on canonical coordinates, shape order is (size, cells).
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from functools import lru_cache

from .groups import Group, GroupError

POS = 1
NEG = -1


@dataclass(frozen=True)
class AxisInterval:
    """One 0-grazing interval: empty, [1,m], [-m,-1], [1,oo) or (-oo,-1].

    length None means infinite; sign 0 with length 0 is the empty interval.
    On a finite axis Z_k the interval is the image of the corresponding
    integer interval; the all-but-zero case is normalized to sign +1 with
    length k-1.
    """

    sign: int
    length: object = None  # int or None

    def __post_init__(self):
        if self.sign == 0:
            if self.length != 0:
                raise ValueError("empty interval must have length 0")
        elif self.sign not in (POS, NEG):
            raise ValueError(f"bad sign {self.sign}")
        elif self.length is not None and self.length < 1:
            raise ValueError("interval length must be >= 1")

    @classmethod
    def empty(cls):
        return cls(0, 0)

    @classmethod
    def pos(cls, m):
        return cls(POS, m)

    @classmethod
    def neg(cls, m):
        return cls(NEG, m)

    @classmethod
    def pos_inf(cls):
        return cls(POS, None)

    @classmethod
    def neg_inf(cls):
        return cls(NEG, None)

    def is_empty(self):
        return self.sign == 0

    def validate(self, order):
        """Check admissibility on an axis of the given order (None = Z)."""
        if self.sign == 0:
            return self
        if order is None:
            return self
        if self.length is None:
            raise ValueError("infinite interval on a finite axis")
        cap = order - 1 if self.sign == POS else order - 2
        if self.length > cap:
            raise ValueError(f"interval too long for Z{order}")
        return self

    def contains(self, v, order):
        """Membership of a canonical coordinate value."""
        if self.sign == 0:
            return False
        if order is None:
            if self.sign == POS:
                return v >= 1 and (self.length is None or v <= self.length)
            return v <= -1 and (self.length is None or v >= -self.length)
        v %= order
        if v == 0:
            return False
        if self.sign == POS:
            return v <= self.length
        return v >= order - self.length

    def values(self, order, max_norm):
        """Member values in anchor order (distance from 0), canonical coords."""
        if self.sign == 0:
            return
        if order is None:
            n = max_norm if self.length is None else min(self.length, max_norm)
            for j in range(1, n + 1):
                yield self.sign * j
        else:
            for j in range(1, self.length + 1):
                yield j % order if self.sign == POS else (-j) % order

    def anchor_index(self, v, order):
        """1-based position of member v counted from the anchor +-1."""
        if order is None:
            return abs(v)
        v %= order
        return v if self.sign == POS else order - v

    def describe(self):
        if self.sign == 0:
            return "empty"
        if self.length is None:
            return "[1,inf)" if self.sign == POS else "(-inf,-1]"
        if self.sign == POS:
            return f"[1,{self.length}]"
        return f"[-{self.length},-1]"


def ii_spec(group, intervals):
    """Validate a per-axis interval tuple against the group."""
    if group.kind == "free":
        raise GroupError("inductive intervals need a polycyclic group")
    intervals = tuple(intervals)
    if len(intervals) != group.n_axes:
        raise GroupError(
            f"spec has {len(intervals)} axes, group {group.key} has {group.n_axes}"
        )
    for iv, k in zip(intervals, group.orders):
        iv.validate(k)
    return intervals


def ii_contains(group, spec, g):
    """Membership in the II: last nonzero tuple coordinate lies in its interval."""
    t = group.to_tuple(g)
    i = group.last_nonzero_axis(t)
    if i == 0:
        return False
    return spec[i - 1].contains(t[i - 1], group.orders[i - 1])


def _axis_interval_choices(group, i, reach):
    """All distinct truncated intervals on axis i within coordinate reach."""
    k = group.orders[i]
    out = [AxisInterval.empty()]
    if k is None:
        for m in range(1, reach[i] + 1):
            out.append(AxisInterval.pos(m))
            out.append(AxisInterval.neg(m))
        # infinite intervals truncate like the longest finite ones, but the
        # longest finite choice must exist even when reach is 0
        if reach[i] >= 1:
            out.append(AxisInterval.pos_inf())
            out.append(AxisInterval.neg_inf())
    else:
        for m in range(1, k):
            out.append(AxisInterval.pos(m))
        for m in range(1, k - 1):
            out.append(AxisInterval.neg(m))
    return out


@lru_cache(maxsize=None)
def ii_prefixes(group, R):
    """The exact set {C intersect B_R : C an inductive interval}, as sorted frozensets."""
    if group.kind == "free":
        raise GroupError("inductive intervals need a polycyclic group")
    if R < 0:
        raise GroupError("negative radius")
    ball = group.ball(R)
    reach = group.axis_reach(R)
    choices = [_axis_interval_choices(group, i, reach) for i in range(group.n_axes)]
    seen = set()
    for intervals in itertools.product(*choices):
        members = frozenset(
            g for g in ball if ii_contains(group, intervals, g)
        )
        seen.add(members)
    return tuple(sorted(seen, key=lambda s: (len(s), sorted(map(group.point_key, s)))))


@lru_cache(maxsize=None)
def ii_prefix_set(group, R):
    return frozenset(ii_prefixes(group, R))


# ---- construction and extension orders -------------------------------------


def _group_stage_key(group, t, upto=None):
    """Order key for the whole-group enumeration: compare the last axis
    stage first (0, then positive values ascending, then negative), then
    recurse on the lower axes."""
    n = len(t) if upto is None else upto
    parts = []
    for i in range(n - 1, -1, -1):
        v = t[i]
        k = group.orders[i]
        if v == 0:
            parts += (0, 0)
        elif k is None and v < 0:
            parts += (2, -v)
        else:
            parts += (1, v)
    return tuple(parts)


def group_order_key(group, g):
    return _group_stage_key(group, group.to_tuple(g))


def _ii_order_key(group, spec, t):
    n = len(t)
    parts = []
    in_ii_mode = True
    for i in range(n - 1, -1, -1):
        v = t[i]
        if not in_ii_mode:
            k = group.orders[i]
            if v == 0:
                parts += (0, 0)
            elif k is None and v < 0:
                parts += (2, -v)
            else:
                parts += (1, v)
        elif v != 0:
            parts += (0, spec[i].anchor_index(v, group.orders[i]))
            in_ii_mode = False
        else:
            parts += (1, 0)
    return tuple(parts)


def construction_order(group, spec, W):
    """Enumerate (II intersect B_W), or B_W when spec is None, in stage blocks.

    Each emitted point s satisfies the translated-prefix property: the set
    s^-1 {earlier points}, read within B_R for any R <= W - |s|, is an II
    prefix.  The truncation caveat (checks only up to W - |s|) is the
    caller's to record.
    """
    if spec is None:
        return sorted(group.ball(W), key=lambda g: group_order_key(group, g))
    spec = ii_spec(group, spec)
    members = [g for g in group.ball(W) if ii_contains(group, spec, g)]
    members.sort(key=lambda g: _ii_order_key(group, spec, group.to_tuple(g)))
    return members


def _side_alternation(group, i, interval, reach):
    """Values of axis i outside interval+{0}, sides alternating; the nearer
    side goes first (tie: positive)."""
    k = group.orders[i]
    if k is None:
        lo = 0 if interval.sign != NEG else -(
            interval.length if interval.length is not None else reach[i] + 1
        )
        hi = 0 if interval.sign != POS else (
            interval.length if interval.length is not None else reach[i] + 1
        )
        bound = reach[i]
        out = []
        nxt = {POS: hi + 1, NEG: lo - 1}
        alive = {POS: nxt[POS] <= bound, NEG: -nxt[NEG] <= bound}
        if not (alive[POS] or alive[NEG]):
            return out
        if alive[POS] and (not alive[NEG] or nxt[POS] <= -nxt[NEG]):
            side = POS
        else:
            side = NEG
        while alive[POS] or alive[NEG]:
            if not alive[side]:
                side = -side
                continue
            v = nxt[side]
            out.append(v)
            nxt[side] = v + 1 if side == POS else v - 1
            alive[side] = nxt[side] <= bound if side == POS else -nxt[side] <= bound
            side = -side
        return out
    # finite axis: grow the covered arc [lo, hi] (mod k) until it wraps
    lo = -interval.length if interval.sign == NEG else 0
    hi = interval.length if interval.sign == POS else 0
    out = []
    side = POS if group.axis_norm(i, hi + 1) <= group.axis_norm(i, lo - 1) else NEG
    while hi - lo + 1 < k:
        v = hi + 1 if side == POS else lo - 1
        out.append(v % k)
        if side == POS:
            hi += 1
        else:
            lo -= 1
        side = -side
    return out


def extension_order(group, spec, W):
    """Order on (B_W minus (II union {e})) union {e} absorbing the complement.

    The identity comes first; then each axis in turn is filled on
    alternating sides of its interval, every block being a lower-axes
    coset enumerated in the whole-group order.  Each step s keeps
    s^-1({earlier} union II) an II prefix on B_R for R <= W - |s|.
    """
    spec = ii_spec(group, spec)
    ball = group.ball(W)
    reach = group.axis_reach(W)
    out = [group.identity()]
    n = group.n_axes
    for i in range(n):
        for v in _side_alternation(group, i, spec[i], reach):
            block = [
                g
                for g in ball
                if (t := group.to_tuple(g))[i] == v
                and all(t[j] == 0 for j in range(i + 1, n))
            ]
            block.sort(key=lambda g: _group_stage_key(group, group.to_tuple(g), upto=i))
            out.extend(block)
    return out


def order_prefix_violations(group, order, W, spec=None):
    """Check the translated-prefix property of an emitted order.

    For a construction order pass spec=None semantics via base=empty; for an
    extension order pass the II spec so the symbolic tail s^-1 II is included.
    Returns a list of (step point, radius) failures; empty means the order
    checks out at every radius R <= W - |s|.
    """
    balls = {R: group.ball(R) for R in range(W + 1)}
    prefix_sets = {R: ii_prefix_set(group, R) for R in range(W + 1)}
    seen = []
    bad = []
    for s in order:
        ns = group.norm(s)
        s_inv = group.invert(s)
        for R in range(0, W - ns + 1):
            view = set()
            for q in seen:
                p = group.compose(s_inv, q)
                if group.norm(p) <= R:
                    view.add(p)
            if spec is not None:
                for p in balls[R]:
                    if ii_contains(group, spec, group.compose(s, p)):
                        view.add(p)
            if frozenset(view) not in prefix_sets[R]:
                bad.append((s, R))
        seen.append(s)
    return bad


# ---- tree convex sets on free groups ---------------------------------------


def free_distance(group, u, w):
    if group.kind != "free":
        raise GroupError("tree geometry needs a free group")
    cp = 0
    while cp < len(u) and cp < len(w) and u[cp] == w[cp]:
        cp += 1
    return (len(u) - cp) + (len(w) - cp)


def geodesic(group, u, w):
    """The vertex path of the unique geodesic from u to w in the tree."""
    cp = 0
    while cp < len(u) and cp < len(w) and u[cp] == w[cp]:
        cp += 1
    down = [u[:i] for i in range(len(u), cp - 1, -1)]
    up = [w[:i] for i in range(cp + 1, len(w) + 1)]
    return down + up


def tree_convex_check(group, cells):
    """Geodesic-midpoint ball condition.

    For u, w in the set and v on their geodesic with r = min(d(v,u), d(v,w)),
    the ball v B_(r-1) must be inside the set.  The condition only bites for
    r >= 2: at r = 1 the nominal requirement would place v itself in the set,
    which already fails on elementary star shapes, so the boundary case is
    read as vacuous.
    """
    cells = list(cells)
    cellset = frozenset(cells)
    for a in range(len(cells)):
        for b in range(a + 1, len(cells)):
            u, w = cells[a], cells[b]
            for v in geodesic(group, u, w):
                r = min(free_distance(group, v, u), free_distance(group, v, w))
                if r < 2:
                    continue
                for q in group.ball(r - 1):
                    if group.compose(v, q) not in cellset:
                        return False
    return True


def extension_set_check(group, cells):
    """True when the set omits e and both it and set+{e} are tree convex."""
    cells = frozenset(cells)
    if group.identity() in cells:
        return False
    return tree_convex_check(group, cells) and tree_convex_check(
        group, cells | {group.identity()}
    )


@lru_cache(maxsize=None)
def tree_convex_extension_prefixes(group, R, cap=None):
    """All finite tree convex extension sets within B_R (they are exactly the
    radius-R truncations of the extension family)."""
    if group.kind != "free":
        raise GroupError("tree convex sets need a free group")
    pts = [g for g in group.ball(R) if g != ()]
    found = []
    limit = cap if cap is not None else float("inf")

    def grow(idx, current):
        if len(found) > limit:
            return
        if idx == len(pts):
            return
        # exclude pts[idx]
        grow(idx + 1, current)
        cand = current + [pts[idx]]
        if tree_convex_check(group, cand) and tree_convex_check(
            group, cand + [()]
        ):
            found.append(frozenset(cand))
            grow(idx + 1, cand)

    found.append(frozenset())
    grow(0, [])
    found = sorted(set(found), key=lambda s: (len(s), sorted(map(group.point_key, s))))
    complete = len(found) <= limit
    return tuple(found), complete


def anti_shelling(group, target, cap=100000):
    """Order the target set so every prefix is tree convex (greedy corner
    addition).  Deterministic: candidates are tried in point_key order."""
    remaining = sorted(target, key=group.point_key)
    chain = []
    current = []
    while remaining:
        for idx, p in enumerate(remaining):
            if tree_convex_check(group, current + [p]):
                current.append(p)
                chain.append(p)
                del remaining[idx]
                break
        else:
            raise GroupError("target admits no tree convex shelling")
        if len(chain) > cap:
            raise GroupError("shelling over budget")
    return chain


# ---- cornered two-level shapes ---------------------------------------------


@dataclass(frozen=True)
class CorneredShape:
    """A finite level-tagged shape together with its designated corner cell."""

    cells: frozenset
    corner: tuple

    def __post_init__(self):
        if self.corner in self.cells:
            raise ValueError("corner must lie outside the shape")


def cornered_prefixes(group, R):
    """Truncated two-level shapes: (B_R x {2}) union (P x {1}) with corner (e,1),
    and P x {2} with corner (e,2), over all II prefixes P at radius R."""
    e = group.identity()
    ball2 = frozenset((g, 2) for g in group.ball(R))
    out = []
    for p in ii_prefixes(group, R):
        out.append(CorneredShape(frozenset((g, 2) for g in p), (e, 2)))
        out.append(
            CorneredShape(ball2 | frozenset((g, 1) for g in p), (e, 1))
        )
    dedup = {}
    for shape in out:
        dedup[(shape.cells, shape.corner)] = shape
    return tuple(
        sorted(
            dedup.values(),
            key=lambda s: (
                len(s.cells),
                s.corner[1],
                sorted((group.point_key(c[0]), c[1]) for c in s.cells),
            ),
        )
    )
