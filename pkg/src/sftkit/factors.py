"""Factor maps as two-level relation subshifts: build the graph of a local
map as an SFT on level-tagged cells, certify it on cornered shapes, and
read forbidden patterns of the image off the certificate."""

from __future__ import annotations

import itertools
from dataclasses import dataclass

from .certificates import FAMILY_CORNERED, find_certificate
from .groups import GroupError
from .patterns import Pattern, Sites, make_spec, translate_pattern

IMAGE_LEVEL = 2
SOURCE_LEVEL = 1


@dataclass(frozen=True)
class LocalMap:
    """A sliding-block rule: neighborhood cells (points of Z^d) and one
    output symbol per neighborhood assignment."""

    neighborhood: tuple  # sorted points
    rule: tuple  # ((input symbols in neighborhood order), output) pairs, sorted

    @classmethod
    def from_function(cls, group, neighborhood, n_symbols, fn):
        nb = tuple(sorted(neighborhood, key=group.point_key))
        rows = []
        for combo in itertools.product(range(n_symbols), repeat=len(nb)):
            rows.append((combo, fn(dict(zip(nb, combo)))))
        return cls(nb, tuple(rows))

    def rule_dict(self):
        return dict(self.rule)

    def apply(self, group, pattern, cells):
        """Image symbols on the given cells; every neighborhood cell must be
        present in the pattern."""
        data = pattern.as_dict()
        out = {}
        for c in cells:
            combo = tuple(data[group.compose(c, n)] for n in self.neighborhood)
            out[c] = self.rule_dict()[combo]
        return Pattern.from_dict(out)


def build_graph_sft(spec, local_map):
    """The graph relation of the map as an SFT over level-tagged cells:
    source constraints at level 1, rule consistency across levels."""
    if spec.sites.leveled:
        raise GroupError("source spec must be plain")
    group = spec.group
    if group.kind != "abelian" or any(k is not None for k in group.orders):
        raise GroupError("factor machinery is limited to Z^d bases")
    sites = Sites(group, levels=2)
    forbidden = []
    for q in spec.forbidden:
        forbidden.append(
            Pattern(tuple(((c, SOURCE_LEVEL), a) for c, a in q.cells))
        )
    e = group.identity()
    rule = local_map.rule_dict()
    n_sym = len(spec.alphabet)
    for combo, out in sorted(rule.items()):
        for wrong in range(n_sym):
            if wrong == out:
                continue
            cells = {
                (n, SOURCE_LEVEL): a
                for n, a in zip(local_map.neighborhood, combo)
            }
            cells[(e, IMAGE_LEVEL)] = wrong
            forbidden.append(Pattern.from_dict(cells))
    return make_spec(sites, spec.alphabet, forbidden)


def factor_certificate(relation_spec, budget=None, extra_candidates=()):
    """Certificate search specialized to the cornered two-level family."""
    return find_certificate(
        relation_spec, FAMILY_CORNERED, budget, extra_candidates=extra_candidates
    )


def image_forbidden(cert):
    """Forbidden patterns of the image: the certificate patterns whose cells
    all live on the image level, with the tag dropped."""
    spec = cert.spec
    if not spec.sites.leveled:
        raise GroupError("image extraction needs a two-level certificate")
    group = spec.group
    out = []
    for q in spec.forbidden:
        if not q.cells:
            out.append(q)
            continue
        if any(c[1] != IMAGE_LEVEL for c, _ in q.cells):
            continue
        out.append(Pattern(tuple((c[0], a) for c, a in q.cells)))
    return make_spec(Sites(group), spec.alphabet, out)


def brute_image_patterns(spec, local_map, oracle, cells):
    """Ground-truth image language on the cells: map the oracle's source
    patterns on the neighborhood-padded shape cellwise."""
    group = spec.group
    padded = sorted(
        {group.compose(c, n) for c in cells for n in local_map.neighborhood},
        key=group.point_key,
    )
    pats, exact = oracle.patterns_on_with_status(tuple(padded))
    out = set()
    for p in pats:
        out.add(local_map.apply(group, p, cells))
    return frozenset(out), exact
