"""Built-in shift groups and their word-metric geometry.

The catalog covers free abelian groups Z^d, abelian groups with torsion
factors (Z^d x Z_k1 x ... x Z_km), the discrete Heisenberg group, and free
groups F_k.  Group elements are plain tuples: coordinate tuples for the
polycyclic kinds, reduced words (tuples of signed generator indices) for
free groups.  A Group object supplies the arithmetic and the metric; it is
immutable and hashable, so everything downstream can cache on it.
"""

from __future__ import annotations

import re
import threading
from dataclasses import dataclass, field
from functools import lru_cache

MAX_BALL_RADIUS = 64

_LETTERS = "abcdefghijklmnopqrstuvwxyz"


class GroupError(ValueError):
    """Misuse of the group API: bad key, mixed operands, unsupported op."""


class ResourceBudgetError(RuntimeError):
    """An enumeration outgrew the configured radius/size budget."""


@dataclass(frozen=True)
class Group:
    """A catalog group.

    kind is one of "abelian", "heisenberg", "free".  For the polycyclic
    kinds, orders[i] is the order of axis i+1 (None = infinite); the axes
    of the Heisenberg group are ordered center first, so tuples read
    (t_c, t_b, t_a).  Free groups use rank instead.
    """

    key: str
    kind: str
    orders: tuple = ()
    rank: int = 0

    # ---- basics ----------------------------------------------------------

    @property
    def n_axes(self):
        return len(self.orders)

    def identity(self):
        if self.kind == "free":
            return ()
        return (0,) * len(self.orders)

    def check_point(self, g):
        if self.kind == "free":
            if not isinstance(g, tuple) or any(
                not isinstance(v, int) or v == 0 or abs(v) > self.rank for v in g
            ):
                raise GroupError(f"not a word of {self.key}: {g!r}")
            if any(g[i] == -g[i + 1] for i in range(len(g) - 1)):
                raise GroupError(f"word not reduced: {g!r}")
            return g
        if not isinstance(g, tuple) or len(g) != len(self.orders):
            raise GroupError(f"not a point of {self.key}: {g!r}")
        for v, k in zip(g, self.orders):
            if not isinstance(v, int):
                raise GroupError(f"not a point of {self.key}: {g!r}")
            if k is not None and not 0 <= v < k:
                raise GroupError(f"torsion coordinate out of range in {g!r}")
        return g

    def compose(self, g, h):
        if self.kind == "free":
            word = list(g)
            for s in h:
                if word and word[-1] == -s:
                    word.pop()
                else:
                    word.append(s)
            return tuple(word)
        if self.kind == "heisenberg":
            # coordinates (a, b, c) under (a,b,c)(a',b',c') = (a+a', b+b', c+c'+a*b')
            a1, b1, c1 = self._raw(g)
            a2, b2, c2 = self._raw(h)
            return self._from_raw((a1 + a2, b1 + b2, c1 + c2 + a1 * b2))
        return tuple(
            v + w if k is None else (v + w) % k
            for v, w, k in zip(g, h, self.orders)
        )

    def invert(self, g):
        if self.kind == "free":
            return tuple(-s for s in reversed(g))
        if self.kind == "heisenberg":
            a, b, c = self._raw(g)
            return self._from_raw((-a, -b, -c + a * b))
        return tuple(
            -v if k is None else (-v) % k for v, k in zip(g, self.orders)
        )

    def generators(self):
        """Symmetric generating set, in a fixed deterministic order."""
        if self.kind == "free":
            out = []
            for i in range(1, self.rank + 1):
                out.append((i,))
                out.append((-i,))
            return out
        if self.kind == "heisenberg":
            # word metric is taken over {a^+-1, b^+-1} only
            gens = []
            for idx in (2, 1):  # a-axis then b-axis in (a, b, c) coordinates
                vec = [0, 0, 0]
                vec[2 - idx] = 1
                g = self._from_raw(tuple(vec))
                gens.append(g)
                gens.append(self.invert(g))
            return gens
        out = []
        for i, k in enumerate(self.orders):
            vec = [0] * len(self.orders)
            vec[i] = 1
            g = tuple(vec)
            gi = self.invert(g)
            out.append(g)
            if gi != g:
                out.append(gi)
        return out

    # Heisenberg storage: the point tuple is (t_c, t_b, t_a); arithmetic
    # runs in (a, b, c) coordinates.
    def _raw(self, g):
        c, b, a = g
        return a, b, c

    def _from_raw(self, raw):
        a, b, c = raw
        return (c, b, a)

    # ---- ordering and metric ---------------------------------------------

    def point_key(self, g):
        """Deterministic sort key; lexicographic on canonical coordinates."""
        if self.kind == "free":
            return (len(g), g)
        return g

    def norm(self, g):
        if self.kind == "free":
            return len(g)
        if self.kind == "abelian":
            return sum(
                abs(v) if k is None else min(v, k - v)
                for v, k in zip(g, self.orders)
            )
        dist = _distances(self, MAX_BALL_RADIUS, stop_at=g)
        if g not in dist:
            raise ResourceBudgetError(f"norm of {g!r} exceeds radius budget")
        return dist[g]

    def ball(self, r):
        """All points at word distance <= r, sorted by point_key."""
        if r < 0:
            raise GroupError("negative radius")
        if r > MAX_BALL_RADIUS:
            raise ResourceBudgetError(f"ball radius {r} over budget")
        return _ball(self, r)

    def ball_set(self, r):
        return _ball_set(self, r)

    # ---- polycyclic tuple coordinates --------------------------------------

    def to_tuple(self, g):
        if self.kind == "free":
            raise GroupError("tuple coordinates are undefined for free groups")
        return g

    def from_tuple(self, t):
        if self.kind == "free":
            raise GroupError("tuple coordinates are undefined for free groups")
        if len(t) != len(self.orders):
            raise GroupError(f"tuple arity mismatch: {t!r}")
        out = tuple(
            v if k is None else v % k for v, k in zip(t, self.orders)
        )
        return self.check_point(out)

    def last_nonzero_axis(self, t):
        """1-based index of the last nonzero tuple entry; 0 for the identity."""
        for i in range(len(t) - 1, -1, -1):
            if t[i] != 0:
                return i + 1
        return 0

    def axis_norm(self, i, v):
        """Distance of value v from 0 along axis i (0-based)."""
        k = self.orders[i]
        if k is None:
            return abs(v)
        v %= k
        return min(v, k - v)

    def axis_reach(self, r):
        """Per-axis maximum of |t_i| over the r-ball (finite axes: max axis_norm)."""
        return _axis_reach(self, r)

    def subgroup(self, i):
        """The catalog group spanned by the first i axes of the polycycle structure."""
        if self.kind == "free":
            raise GroupError("subnormal series is undefined for free groups")
        if not 1 <= i <= self.n_axes:
            raise GroupError(f"axis index out of range: {i}")
        if self.kind == "heisenberg" and i == 3:
            return self
        # Heisenberg prefixes are abelian: H_1 = <c>, H_2 = <c, b>.
        return abelian_group(self.orders[:i])

    # ---- formatting ---------------------------------------------------------

    def format_point(self, g):
        if self.kind == "free":
            if not g:
                return "e"
            return "".join(
                _LETTERS[s - 1] if s > 0 else _LETTERS[-s - 1].upper() for s in g
            )
        return "(" + ",".join(str(v) for v in g) + ")"

    def parse_point(self, text):
        text = text.strip()
        if self.kind == "free":
            if text == "e":
                return ()
            word = []
            for ch in text:
                low = ch.lower()
                if low not in _LETTERS[: self.rank]:
                    raise GroupError(f"bad generator {ch!r} for {self.key}")
                s = _LETTERS.index(low) + 1
                word.append(s if ch.islower() else -s)
            g = ()
            for s in word:
                g = self.compose(g, (s,))
            return g
        m = re.fullmatch(r"\(?\s*(-?\d+(?:\s*,\s*-?\d+)*)\s*\)?", text)
        if not m:
            raise GroupError(f"bad point {text!r} for {self.key}")
        vals = tuple(int(v) for v in m.group(1).split(","))
        if len(vals) != self.n_axes:
            raise GroupError(
                f"point {text!r} has arity {len(vals)}, group {self.key} needs {self.n_axes}"
            )
        return self.from_tuple(vals)

    def describe(self):
        if self.kind == "free":
            return f"free group of rank {self.rank}"
        if self.kind == "heisenberg":
            return "discrete Heisenberg group (axes ordered center first)"
        parts = ["Z" if k is None else f"Z{k}" for k in self.orders]
        return " x ".join(parts)


def abelian_group(orders):
    parts = []
    run = 0
    for k in orders:
        if k is None:
            run += 1
        else:
            if run:
                parts.append("Z" if run == 1 else f"Z^{run}")
                run = 0
            parts.append(f"Z{k}")
    if run:
        parts.append("Z" if run == 1 else f"Z^{run}")
    key = "x".join(parts) if parts else "Z^0"
    return Group(key=key, kind="abelian", orders=tuple(orders))


@lru_cache(maxsize=None)
def group_from_key(key):
    """Parse a catalog key: "Z", "Z^3", "ZxZ2", "Z^2xZ3", "heisenberg", "F2"."""
    raw = key.strip()
    low = raw.lower()
    if low in ("heisenberg", "h3"):
        return Group(key="heisenberg", kind="heisenberg", orders=(None, None, None))
    m = re.fullmatch(r"[Ff](\d+)", raw)
    if m:
        rank = int(m.group(1))
        if not 1 <= rank <= len(_LETTERS):
            raise GroupError(f"free rank out of range in {key!r}")
        return Group(key=f"F{rank}", kind="free", rank=rank)
    orders = []
    for part in raw.split("x"):
        part = part.strip()
        m = re.fullmatch(r"[Zz](?:\^(\d+))?", part)
        if m:
            d = int(m.group(1) or 1)
            if d < 1:
                raise GroupError(f"bad dimension in {key!r}")
            orders.extend([None] * d)
            continue
        m = re.fullmatch(r"[Zz](\d+)", part)
        if m:
            k = int(m.group(1))
            if k < 2:
                raise GroupError(f"torsion order must be >= 2 in {key!r}")
            orders.append(k)
            continue
        raise GroupError(f"unknown group key {key!r}")
    if not orders:
        raise GroupError(f"unknown group key {key!r}")
    return abelian_group(orders)


# ---- cached breadth-first geometry ---------------------------------------

_BFS_LOCK = threading.Lock()
_BFS_STATE = {}  # group -> [radius_done, dist dict, frontier list]


def _distances(group, r, stop_at=None):
    """Word distances from the identity, expanded lazily out to radius r."""
    with _BFS_LOCK:
        state = _BFS_STATE.get(group)
        if state is None:
            e = group.identity()
            state = [0, {e: 0}, [e]]
            _BFS_STATE[group] = state
        done, dist, frontier = state
        gens = group.generators()
        while done < r and frontier:
            if stop_at is not None and stop_at in dist:
                break
            new_frontier = []
            for g in frontier:
                for s in gens:
                    h = group.compose(g, s)
                    if h not in dist:
                        dist[h] = done + 1
                        new_frontier.append(h)
            done += 1
            frontier = new_frontier
            state[0], state[2] = done, frontier
        return dist


@lru_cache(maxsize=None)
def _ball(group, r):
    dist = _distances(group, r)
    members = [g for g, d in dist.items() if d <= r]
    members.sort(key=group.point_key)
    return tuple(members)


@lru_cache(maxsize=None)
def _ball_set(group, r):
    return frozenset(_ball(group, r))


@lru_cache(maxsize=None)
def _axis_reach(group, r):
    if group.kind == "free":
        raise GroupError("axis reach is undefined for free groups")
    reach = [0] * group.n_axes
    for g in _ball(group, r):
        t = group.to_tuple(g)
        for i in range(group.n_axes):
            reach[i] = max(reach[i], group.axis_norm(i, t[i]))
    return tuple(reach)
