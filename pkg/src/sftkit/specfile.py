"""Text formats: spec files, certificate files, and line-oriented reports.

Spec files are line-oriented for diffability:

    group Z^2
    alphabet 0 1
    forbidden (0,0)=1 (1,0)=1
    map neighborhood (0,0) (1,0)
    map rule 0 1 -> 1

Free-group cells are words over the generators (a-z, inverses uppercase),
with "e" for the identity.  Certificate files carry the verified forbidden
set, radius, family, transcript, and a digest of the body.
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass, field

from .certificates import FAMILIES, Certificate
from .factors import LocalMap
from .groups import GroupError, group_from_key
from .patterns import Pattern, Sites, make_spec


class SpecParseError(ValueError):
    def __init__(self, line_no, message):
        super().__init__(f"line {line_no}: {message}")
        self.line_no = line_no


@dataclass(frozen=True)
class ParsedSpec:
    spec: object
    local_map: object = None
    warnings: tuple = ()


def _tokens(line):
    return line.split()


def parse_sft_spec(text):
    """Parse a spec document; raises SpecParseError with a line position."""
    group = None
    sites = None
    alphabet = None
    forbidden = []
    warnings = []
    seen_patterns = set()
    map_neighborhood = None
    map_rules = []
    for line_no, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        tokens = _tokens(line)
        head = tokens[0]
        if head == "group":
            if len(tokens) != 2:
                raise SpecParseError(line_no, "group takes one key")
            try:
                group = group_from_key(tokens[1])
            except GroupError as exc:
                raise SpecParseError(line_no, str(exc)) from None
            sites = Sites(group)
        elif head == "alphabet":
            alphabet = tuple(tokens[1:])
            if len(alphabet) < 1:
                raise SpecParseError(line_no, "alphabet needs symbols")
            if len(set(alphabet)) != len(alphabet):
                raise SpecParseError(line_no, "duplicate symbols")
        elif head == "forbidden":
            if group is None or alphabet is None:
                raise SpecParseError(line_no, "group and alphabet come first")
            cells = {}
            for tok in tokens[1:]:
                cell_text, sep, sym = tok.rpartition("=")
                if not sep:
                    raise SpecParseError(line_no, f"expected cell=symbol, got {tok!r}")
                if sym not in alphabet:
                    raise SpecParseError(line_no, f"undeclared symbol {sym!r}")
                try:
                    cell = group.parse_point(cell_text)
                except GroupError as exc:
                    raise SpecParseError(line_no, str(exc)) from None
                cells[cell] = alphabet.index(sym)
            p = Pattern.from_dict(cells)
            if p in seen_patterns:
                warnings.append(f"line {line_no}: duplicate forbidden pattern dropped")
            else:
                seen_patterns.add(p)
                forbidden.append(p)
        elif head == "map" and len(tokens) >= 2 and tokens[1] == "neighborhood":
            if group is None:
                raise SpecParseError(line_no, "group comes first")
            try:
                map_neighborhood = tuple(
                    group.parse_point(tok) for tok in tokens[2:]
                )
            except GroupError as exc:
                raise SpecParseError(line_no, str(exc)) from None
            if not map_neighborhood:
                raise SpecParseError(line_no, "neighborhood needs cells")
        elif head == "map" and len(tokens) >= 2 and tokens[1] == "rule":
            if map_neighborhood is None:
                raise SpecParseError(line_no, "map neighborhood comes first")
            body = tokens[2:]
            if "->" not in body:
                raise SpecParseError(line_no, "map rule needs '->'")
            arrow = body.index("->")
            ins, outs = body[:arrow], body[arrow + 1 :]
            if len(ins) != len(map_neighborhood) or len(outs) != 1:
                raise SpecParseError(line_no, "rule arity mismatch")
            for sym in ins + outs:
                if sym not in alphabet:
                    raise SpecParseError(line_no, f"undeclared symbol {sym!r}")
            map_rules.append(
                (
                    tuple(alphabet.index(s) for s in ins),
                    alphabet.index(outs[0]),
                )
            )
        else:
            raise SpecParseError(line_no, f"unknown directive {head!r}")
    if group is None:
        raise SpecParseError(0, "missing group")
    if alphabet is None:
        raise SpecParseError(0, "missing alphabet")
    spec = make_spec(sites, alphabet, forbidden)
    local_map = None
    if map_neighborhood is not None:
        nb = tuple(sorted(map_neighborhood, key=group.point_key))
        reorder = [map_neighborhood.index(c) for c in nb]
        rows = {}
        for ins, out in map_rules:
            rows[tuple(ins[i] for i in reorder)] = out
        expected = len(alphabet) ** len(nb)
        if len(rows) != expected:
            raise SpecParseError(0, f"map rule table incomplete: {len(rows)}/{expected}")
        local_map = LocalMap(nb, tuple(sorted(rows.items())))
    return ParsedSpec(spec, local_map, tuple(warnings))


def serialize_spec(spec, local_map=None, header=None):
    lines = []
    if header:
        lines.append(f"# {header}")
    lines.append(f"group {spec.group.key}")
    lines.append("alphabet " + " ".join(spec.alphabet))
    for q in spec.forbidden:
        lines.append(
            "forbidden "
            + " ".join(
                f"{spec.sites.format_cell(c)}={spec.alphabet[a]}" for c, a in q.cells
            )
        )
    if local_map is not None:
        lines.append(
            "map neighborhood "
            + " ".join(spec.group.format_point(c) for c in local_map.neighborhood)
        )
        for ins, out in local_map.rule:
            lines.append(
                "map rule "
                + " ".join(spec.alphabet[a] for a in ins)
                + " -> "
                + spec.alphabet[out]
            )
    return "\n".join(lines) + "\n"


# ---- certificate files -------------------------------------------------------


def _certificate_body(cert):
    spec = cert.spec
    lines = [
        "certificate",
        f"family {cert.family}",
        f"radius {cert.radius}",
        f"levels {spec.sites.levels}",
        f"group {spec.group.key}",
        "alphabet " + " ".join(spec.alphabet),
    ]
    for q in spec.forbidden:
        lines.append(
            "forbidden "
            + " ".join(
                f"{spec.sites.format_cell(c)}={spec.alphabet[a]}" for c, a in q.cells
            )
        )
    lines.append(
        "equivalence-evidence "
        + " ".join(str(r) for r in cert.equivalence_evidence)
    )
    if cert.probe_note:
        lines.append(f"probe-note {cert.probe_note}")
    for token, count in cert.transcript:
        lines.append(f"transcript {token} {count}")
    return lines


def serialize_certificate(cert):
    lines = _certificate_body(cert)
    digest = hashlib.sha256("\n".join(lines).encode()).hexdigest()
    lines.append(f"digest {digest}")
    return "\n".join(lines) + "\n"


def load_certificate(text, check_digest=True):
    """Parse a certificate file.  The digest guards transport integrity;
    semantic trust comes from re-verification, which the caller runs."""
    lines = [l.rstrip("\n") for l in text.splitlines() if l.strip()]
    if not lines or lines[0] != "certificate":
        raise SpecParseError(1, "not a certificate file")
    digest_line = lines[-1]
    if not digest_line.startswith("digest "):
        raise SpecParseError(len(lines), "missing digest")
    if check_digest:
        expect = hashlib.sha256("\n".join(lines[:-1]).encode()).hexdigest()
        if digest_line.split()[1] != expect:
            raise SpecParseError(len(lines), "digest mismatch")
    family = None
    radius = None
    levels = 0
    group = None
    alphabet = None
    forbidden = []
    evidence = ()
    probe_note = ""
    transcript = []
    for line_no, line in enumerate(lines[1:-1], start=2):
        tokens = line.split()
        head = tokens[0]
        if head == "family":
            family = tokens[1]
            if family not in FAMILIES:
                raise SpecParseError(line_no, f"unknown family {family!r}")
        elif head == "radius":
            radius = int(tokens[1])
        elif head == "levels":
            levels = int(tokens[1])
        elif head == "group":
            group = group_from_key(tokens[1])
        elif head == "alphabet":
            alphabet = tuple(tokens[1:])
        elif head == "forbidden":
            sites = Sites(group, levels)
            cells = {}
            for tok in tokens[1:]:
                cell_text, _, sym = tok.rpartition("=")
                cells[sites.parse_cell(cell_text)] = alphabet.index(sym)
            forbidden.append(Pattern.from_dict(cells))
        elif head == "equivalence-evidence":
            evidence = tuple(int(t) for t in tokens[1:])
        elif head == "probe-note":
            probe_note = " ".join(tokens[1:])
        elif head == "transcript":
            transcript.append((tokens[1], int(tokens[2])))
        else:
            raise SpecParseError(line_no, f"unknown directive {head!r}")
    if None in (family, radius, group, alphabet):
        raise SpecParseError(0, "incomplete certificate")
    sites = Sites(group, levels)
    spec = make_spec(sites, alphabet, forbidden, normalize=False)
    return Certificate(
        spec=spec,
        family=family,
        radius=radius,
        transcript=tuple(transcript),
        equivalence_evidence=evidence,
        probe_note=probe_note,
    )


# ---- reports -----------------------------------------------------------------


@dataclass(frozen=True)
class Report:
    """Line-oriented result record with a stable key:value schema."""

    command: str
    inputs: tuple  # (name, sha256) pairs
    verdict: str
    details: tuple = ()  # (key, value) pairs
    budget: str = ""
    wall_ms: int = 0

    def render(self, timing=True):
        lines = [f"command: {self.command}"]
        for name, digest in self.inputs:
            lines.append(f"input: {name} sha256={digest}")
        lines.append(f"verdict: {self.verdict}")
        for key, value in self.details:
            lines.append(f"{key}: {value}")
        if self.budget:
            lines.append(f"budget: {self.budget}")
        if timing:
            lines.append(f"wall_ms: {self.wall_ms}")
        return "\n".join(lines) + "\n"

    def to_json(self, timing=True):
        data = {
            "command": self.command,
            "inputs": [{"name": n, "sha256": d} for n, d in self.inputs],
            "verdict": self.verdict,
            "details": {k: v for k, v in self.details},
            "budget": self.budget,
        }
        if timing:
            data["wall_ms"] = self.wall_ms
        return json.dumps(data, indent=2, sort_keys=True) + "\n"


def digest_text(text):
    return hashlib.sha256(text.encode()).hexdigest()
