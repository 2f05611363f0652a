"""Built-in example corpus with known ground truth.

Each entry is an exact spec-file document (deterministically generated
where the forbidden set is large) plus a short description.
"""

from __future__ import annotations

import itertools


def _golden_mean():
    return (
        "# binary shift forbidding adjacent 1s\n"
        "group Z\n"
        "alphabet 0 1\n"
        "forbidden (0)=1 (1)=1\n"
    )


def _ledrappier():
    lines = [
        "# three-dot parity shift: x(v) + x(v+(1,0)) + x(v+(0,1)) = 0 mod 2",
        "group Z^2",
        "alphabet 0 1",
    ]
    for x, y, z in itertools.product(range(2), repeat=3):
        if (x + y + z) % 2 == 1:
            lines.append(f"forbidden (0,0)={x} (1,0)={y} (0,1)={z}")
    return "\n".join(lines) + "\n"


def _hard_square(comment):
    return (
        f"# {comment}\n"
        "group Z^2\n"
        "alphabet 0 1\n"
        "forbidden (0,0)=1 (1,0)=1\n"
        "forbidden (0,0)=1 (0,1)=1\n"
    )


def _spacetime_f():
    # one-step spacetime consistency for the automaton with
    # F(2, b) = 2, F(a, 2) = a, F(a, b) = a + b mod 2 on {0, 1}
    def F(a, b):
        if a == 2:
            return 2
        if b == 2:
            return a % 2
        return (a + b) % 2

    lines = [
        "# spacetime of the spreading-symbol automaton: row above = F(row)",
        "group Z^2",
        "alphabet 0 1 2",
    ]
    for a, b, c in itertools.product(range(3), repeat=3):
        if c != F(a, b):
            lines.append(f"forbidden (0,0)={a} (1,0)={b} (0,1)={c}")
    return "\n".join(lines) + "\n"


def _f2_golden_mean():
    return (
        "# no adjacent 1s on the rank-2 free group\n"
        "group F2\n"
        "alphabet 0 1\n"
        "forbidden e=1 a=1\n"
        "forbidden e=1 b=1\n"
    )


def _fullshift_conjugate_nonavo():
    # two binary tracks; second track of each row carries the XOR image of
    # the first track of the row below
    lines = [
        "# recoded full shift: track 2 at v = track 1 at v+(0,-1) XOR track 1 at v+(1,-1)",
        "group Z^2",
        "alphabet 00 01 10 11",
    ]
    syms = ["00", "01", "10", "11"]

    def s(sym):
        return int(sym[0])

    def t(sym):
        return int(sym[1])

    for here, below, belowright in itertools.product(syms, repeat=3):
        if t(here) != (s(below) + s(belowright)) % 2:
            lines.append(
                f"forbidden (0,0)={here} (0,-1)={below} (1,-1)={belowright}"
            )
    return "\n".join(lines) + "\n"


def _f2_geodesic_counterexample():
    # track 2 at g is the XOR of track 1 at gb and gab; the relevant
    # geodesically convex shapes are not tree convex
    lines = [
        "# free-group pair shift: track 2 at e = track 1 at b XOR track 1 at ab",
        "group F2",
        "alphabet 00 01 10 11",
    ]
    syms = ["00", "01", "10", "11"]
    for here, at_b, at_ab in itertools.product(syms, repeat=3):
        if int(here[1]) != (int(at_b[0]) + int(at_ab[0])) % 2:
            lines.append(f"forbidden e={here} b={at_b} ab={at_ab}")
    return "\n".join(lines) + "\n"


_ENTRIES = {
    "goldenmean": (_golden_mean, "golden mean shift on Z"),
    "ledrappier": (_ledrappier, "three-dot parity shift on Z^2"),
    "hardsquare": (_hard_square, "hard square shift on Z^2"),
    "hardsquare-safe": (
        _hard_square,
        "hard square shift on Z^2 (safe-symbol showcase)",
    ),
    "spacetimeF": (_spacetime_f, "spacetime of the spreading-symbol automaton"),
    "f2-goldenmean": (_f2_golden_mean, "golden mean shift on the free group F2"),
    "fullshift-conjugate-nonavo": (
        _fullshift_conjugate_nonavo,
        "full-shift recoding that defeats interval certificates",
    ),
    "f2-geodesic-counterexample": (
        _f2_geodesic_counterexample,
        "free-group shift with unbounded look-back on geodesically convex shapes",
    ),
}


def example_names():
    return sorted(_ENTRIES)


def builtin_example(name):
    """The exact corpus document for the name; raises KeyError otherwise."""
    entry = _ENTRIES.get(name)
    if entry is None:
        raise KeyError(name)
    builder, description = entry
    if builder is _hard_square:
        return builder(description)
    return builder()


def example_description(name):
    return _ENTRIES[name][1]
