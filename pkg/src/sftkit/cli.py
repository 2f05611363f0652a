"""Command-line surface.

Exit codes: 0 = definite verdict, 2 = Unknown (budget ran out before a safe
answer), 1 = usage or parse error.  Reports are line-oriented key:value
text, or JSON with --json; reruns with the same inputs and budgets
reproduce the verdict byte-identically apart from the wall_ms field.
"""

from __future__ import annotations

import argparse
import sys
import time

from . import corpus
from .analysis import (
    avoradius_for_shape,
    equal_extension_counts,
    ktep_check,
    safe_symbol_check,
    tssm_gap_check,
)
from .certificates import (
    FAMILIES,
    FAMILY_CORNERED,
    FAMILY_II,
    FAMILY_TREE_CONVEX,
    find_certificate,
    reverify_certificate,
)
from .factors import build_graph_sft, factor_certificate, image_forbidden
from .groups import GroupError, ResourceBudgetError
from .languages import (
    EMPTY,
    NONEMPTY,
    NOT_DERIVED,
    NOT_SUBSET,
    SUBSET,
    decide_emptiness,
    decide_inclusion,
    language_on,
    project_to_subgroup,
)
from .oracles import Budget, MarginOracle, TransferOracle
from .patterns import Pattern, format_pattern
from .specfile import (
    Report,
    SpecParseError,
    digest_text,
    load_certificate,
    parse_sft_spec,
    serialize_certificate,
    serialize_spec,
)

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_UNKNOWN = 2

BUDGETS = {"small": Budget.small, "default": Budget.default, "large": Budget.large}


def _read(path):
    with open(path, encoding="utf-8") as fh:
        return fh.read()


def _load_spec(path):
    text = _read(path)
    parsed = parse_sft_spec(text)
    for warning in parsed.warnings:
        print(f"warning: {warning}", file=sys.stderr)
    return parsed, (path, digest_text(text))


def _oracle_for(spec, budget):
    if (
        not spec.sites.leveled
        and spec.group.kind == "abelian"
        and spec.group.n_axes == 1
    ):
        return TransferOracle(spec)
    return MarginOracle(spec, budget)


def _parse_shape(spec, text):
    cells = []
    for tok in text.split(";"):
        tok = tok.strip()
        if tok:
            cells.append(spec.sites.parse_cell(tok))
    return tuple(cells)


def _emit(report, args):
    out = report.to_json() if args.json else report.render()
    print(out, end="")


def _certify(args, budget):
    parsed, source = _load_spec(args.spec)
    t0 = time.monotonic()
    outcome = find_certificate(parsed.spec, args.family, budget)
    wall = int((time.monotonic() - t0) * 1000)
    if outcome.certificate is None:
        report = Report(
            "certify",
            (source,),
            "unknown",
            (
                ("family", args.family),
                ("candidates-tried", outcome.candidates_tried),
                ("note", outcome.note or "budget exhausted"),
            ),
            budget.describe(),
            wall,
        )
        _emit(report, args)
        return EXIT_UNKNOWN
    cert = outcome.certificate
    details = [
        ("family", cert.family),
        ("radius", cert.radius),
        ("forbidden-count", len(cert.spec.forbidden)),
        ("equivalence-evidence", " ".join(map(str, cert.equivalence_evidence))),
        ("transcript-entries", len(cert.transcript)),
        ("probe-note", cert.probe_note),
    ]
    text = serialize_certificate(cert)
    details.append(("certificate-sha256", digest_text(text)))
    if args.cert_out:
        with open(args.cert_out, "w", encoding="utf-8") as fh:
            fh.write(text)
        details.append(("certificate-file", args.cert_out))
    report = Report(
        "certify", (source,), "certificate", tuple(details), budget.describe(), wall
    )
    _emit(report, args)
    return EXIT_OK


def _get_certificate(args, parsed, source, budget, family):
    if getattr(args, "cert", None):
        text = _read(args.cert)
        cert = load_certificate(text)
        ok, why = reverify_certificate(cert, parsed.spec, budget)
        if not ok:
            raise SpecParseError(0, f"certificate failed re-verification: {why}")
        return cert
    outcome = find_certificate(parsed.spec, family, budget)
    return outcome.certificate


def _language(args, budget):
    parsed, source = _load_spec(args.spec)
    t0 = time.monotonic()
    family = args.family
    cert = _get_certificate(args, parsed, source, budget, family)
    if cert is None:
        report = Report(
            "language",
            (source,),
            "unknown",
            (("note", "no certificate at this budget"),),
            budget.describe(),
            int((time.monotonic() - t0) * 1000),
        )
        _emit(report, args)
        return EXIT_UNKNOWN
    if args.ball is not None:
        cells = tuple(parsed.spec.sites.cells_within(args.ball))
    else:
        cells = _parse_shape(parsed.spec, args.shape)
    got, _table = language_on(cert, cells, budget)
    wall = int((time.monotonic() - t0) * 1000)
    if got == NOT_DERIVED:
        report = Report(
            "language",
            (source,),
            "not_derived",
            (("note", "working radius cap reached"),),
            budget.describe(),
            wall,
        )
        _emit(report, args)
        return EXIT_UNKNOWN
    listing = sorted(format_pattern(parsed.spec, p) for p in got)
    details = [("shape-cells", len(cells)), ("pattern-count", len(listing))]
    details += [("pattern", line) for line in listing[: args.limit]]
    if len(listing) > args.limit:
        details.append(("elided", len(listing) - args.limit))
    report = Report(
        "language", (source,), "exact", tuple(details), budget.describe(), wall
    )
    _emit(report, args)
    return EXIT_OK


def _compare(args, budget):
    parsed_x, source_x = _load_spec(args.spec_x)
    parsed_y, source_y = _load_spec(args.spec_y)
    t0 = time.monotonic()
    outcome = find_certificate(parsed_x.spec, args.family, budget)
    result = decide_inclusion(
        parsed_x.spec, parsed_y.spec, budget, x_cert=outcome.certificate
    )
    wall = int((time.monotonic() - t0) * 1000)
    details = []
    if result.status == NOT_SUBSET:
        details.append(("witness", format_pattern(parsed_x.spec, result.witness)))
    if result.status == SUBSET:
        details.append(("refutation-radius", result.evidence[0]))
    report = Report(
        "compare",
        (source_x, source_y),
        result.status,
        tuple(details),
        budget.describe(),
        wall,
    )
    _emit(report, args)
    return EXIT_OK if result.status in (SUBSET, NOT_SUBSET) else EXIT_UNKNOWN


def _empty(args, budget):
    parsed, source = _load_spec(args.spec)
    t0 = time.monotonic()
    outcome = find_certificate(parsed.spec, args.family, budget)
    result = decide_emptiness(parsed.spec, budget, cert=outcome.certificate)
    wall = int((time.monotonic() - t0) * 1000)
    report = Report(
        "empty",
        (source,),
        result.status,
        (("evidence", result.evidence),) if result.evidence else (),
        budget.describe(),
        wall,
    )
    _emit(report, args)
    return EXIT_OK if result.status in (EMPTY, NONEMPTY) else EXIT_UNKNOWN


def _project(args, budget):
    parsed, source = _load_spec(args.spec)
    t0 = time.monotonic()
    cert = _get_certificate(args, parsed, source, budget, FAMILY_II)
    if cert is None:
        report = Report(
            "project",
            (source,),
            "unknown",
            (("note", "no certificate at this budget"),),
            budget.describe(),
            int((time.monotonic() - t0) * 1000),
        )
        _emit(report, args)
        return EXIT_UNKNOWN
    sub_spec = project_to_subgroup(cert, args.axis)
    wall = int((time.monotonic() - t0) * 1000)
    text = serialize_spec(sub_spec, header=f"axis-{args.axis} restriction")
    details = [
        ("subgroup", sub_spec.group.key),
        ("forbidden-count", len(sub_spec.forbidden)),
    ]
    if args.out:
        with open(args.out, "w", encoding="utf-8") as fh:
            fh.write(text)
        details.append(("spec-file", args.out))
    report = Report(
        "project", (source,), "projected", tuple(details), budget.describe(), wall
    )
    _emit(report, args)
    if not args.out:
        print(text, end="")
    return EXIT_OK


def _factor(args, budget):
    parsed, source = _load_spec(args.spec)
    map_source = source
    local_map = parsed.local_map
    if args.map:
        map_parsed, map_source = _load_spec(args.map)
        local_map = map_parsed.local_map
    if local_map is None:
        raise SpecParseError(0, "no local map section found")
    t0 = time.monotonic()
    relation = build_graph_sft(parsed.spec, local_map)
    outcome = factor_certificate(relation, budget)
    wall = int((time.monotonic() - t0) * 1000)
    inputs = (source,) if map_source == source else (source, map_source)
    if outcome.certificate is None:
        report = Report(
            "factor",
            inputs,
            "unknown",
            (("note", outcome.note or "budget exhausted"),),
            budget.describe(),
            wall,
        )
        _emit(report, args)
        return EXIT_UNKNOWN
    image = image_forbidden(outcome.certificate)
    text = serialize_spec(image, header="factor image")
    details = [
        ("relation-forbidden", len(relation.forbidden)),
        ("certificate-radius", outcome.certificate.radius),
        ("image-forbidden-count", len(image.forbidden)),
    ]
    if args.out:
        with open(args.out, "w", encoding="utf-8") as fh:
            fh.write(text)
        details.append(("spec-file", args.out))
    report = Report(
        "factor", inputs, "image", tuple(details), budget.describe(), wall
    )
    _emit(report, args)
    if not args.out:
        print(text, end="")
    return EXIT_OK


def _analyze(args, budget):
    parsed, source = _load_spec(args.spec)
    spec = parsed.spec
    t0 = time.monotonic()
    oracle = _oracle_for(spec, budget)
    details = []
    if args.check == "avoradius":
        cells = _parse_shape(spec, args.shape)
        report_obj = avoradius_for_shape(
            spec, cells, args.rmax, oracle=oracle, budget=budget
        )
        verdict = report_obj.status
        if report_obj.radius is not None:
            details.append(("radius", report_obj.radius))
        for f in report_obj.failures[: args.limit]:
            details.append(
                (
                    "failure",
                    f"r={f.radius} symbol={spec.alphabet[f.symbol]} "
                    f"follower-of [{format_pattern(spec, f.witness_a)}] "
                    f"refuted-for [{format_pattern(spec, f.witness_b)}]",
                )
            )
        if report_obj.caveat:
            details.append(("caveat", report_obj.caveat))
    elif args.check == "eec":
        shapes_list = [_parse_shape(spec, s) for s in args.shape.split("|")]
        verdicts = equal_extension_counts(spec, shapes_list, oracle)
        statuses = {v.status for v in verdicts}
        verdict = "constant" if statuses == {"constant"} else "mixed"
        for v in verdicts:
            token = ";".join(spec.sites.format_cell(c) for c in v.shape)
            val = v.count if v.status == "constant" else v.status
            details.append(("shape", f"{token} -> {val}"))
    elif args.check == "safe-symbol":
        ok = safe_symbol_check(spec, args.symbol)
        verdict = "safe" if ok else "not_safe"
        details.append(("symbol", args.symbol))
    elif args.check == "ktep":
        domains = {q.domain for q in spec.forbidden}
        if len(domains) != 1:
            raise SpecParseError(0, "ktep check needs one forbidden domain")
        domain = tuple(sorted(next(iter(domains))))
        import itertools as _it

        allowed = []
        forb = set(spec.forbidden)
        for combo in _it.product(range(len(spec.alphabet)), repeat=len(domain)):
            p = Pattern(tuple(zip(domain, combo)))
            if p not in forb:
                allowed.append(p)
        ok = ktep_check(spec, allowed, args.k)
        verdict = "ktep" if ok else "not_ktep"
        details.append(("k", args.k))
    elif args.check == "tssm":
        result = tssm_gap_check(spec, args.gap, args.window, oracle, budget)
        verdict = result.status
        if result.witness:
            u, s, v = result.witness
            details.append(("witness-u", format_pattern(spec, u)))
            details.append(("witness-s", format_pattern(spec, s)))
            details.append(("witness-v", format_pattern(spec, v)))
        if result.note:
            details.append(("note", result.note))
    else:
        raise SpecParseError(0, f"unknown check {args.check!r}")
    wall = int((time.monotonic() - t0) * 1000)
    report = Report(
        "analyze",
        (source,),
        verdict,
        tuple(details),
        budget.describe(),
        wall,
    )
    _emit(report, args)
    return EXIT_UNKNOWN if verdict in ("unknown", "budgeted_evidence") else EXIT_OK


def _example(args, budget):
    try:
        text = corpus.builtin_example(args.name)
    except KeyError:
        print(f"unknown example {args.name!r}; available:", file=sys.stderr)
        for name in corpus.example_names():
            print(f"  {name}: {corpus.example_description(name)}", file=sys.stderr)
        return EXIT_USAGE
    if args.out:
        with open(args.out, "w", encoding="utf-8") as fh:
            fh.write(text)
        print(f"wrote {args.out}")
    else:
        print(text, end="")
    return EXIT_OK


def build_parser():
    parser = argparse.ArgumentParser(
        prog="sftkit",
        description="Decision procedures for subshifts of finite type on "
        "finitely generated groups.",
    )
    parser.add_argument(
        "--budget", choices=sorted(BUDGETS), default="default", help="search budget"
    )
    parser.add_argument("--json", action="store_true", help="structured output")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("certify", help="search for a uniform-definability certificate")
    p.add_argument("spec")
    p.add_argument("--family", choices=FAMILIES, default=FAMILY_II)
    p.add_argument("--cert-out", help="write the certificate file here")
    p.set_defaults(fn=_certify)

    p = sub.add_parser("language", help="exact pattern set on a shape")
    p.add_argument("spec")
    p.add_argument("--cert", help="certificate file (else searched)")
    p.add_argument("--family", choices=FAMILIES, default=FAMILY_II)
    p.add_argument("--shape", help="cells, e.g. '(0);(1);(2)'")
    p.add_argument("--ball", type=int, help="use all cells of this ball")
    p.add_argument("--limit", type=int, default=64, help="max patterns listed")
    p.set_defaults(fn=_language)

    p = sub.add_parser("compare", help="safely decide inclusion X in Y")
    p.add_argument("spec_x")
    p.add_argument("spec_y")
    p.add_argument("--family", choices=FAMILIES, default=FAMILY_II)
    p.set_defaults(fn=_compare)

    p = sub.add_parser("empty", help="safely decide emptiness")
    p.add_argument("spec")
    p.add_argument("--family", choices=FAMILIES, default=FAMILY_II)
    p.set_defaults(fn=_empty)

    p = sub.add_parser("project", help="restriction to an axis subgroup")
    p.add_argument("spec")
    p.add_argument("--axis", type=int, required=True)
    p.add_argument("--cert", help="certificate file (else searched)")
    p.add_argument("--out", help="write the projected spec here")
    p.set_defaults(fn=_project)

    p = sub.add_parser("factor", help="image of a local map via the graph relation")
    p.add_argument("spec")
    p.add_argument("--map", help="spec file carrying the map section")
    p.add_argument("--out", help="write the image spec here")
    p.set_defaults(fn=_factor)

    p = sub.add_parser("analyze", help="structural checks")
    p.add_argument("spec")
    p.add_argument(
        "--check",
        choices=("avoradius", "eec", "safe-symbol", "ktep", "tssm"),
        required=True,
    )
    p.add_argument("--shape", help="cells '(0,0);(1,0)'; for eec, shapes split by '|'")
    p.add_argument("--rmax", type=int, default=3)
    p.add_argument("--symbol", help="symbol name for safe-symbol")
    p.add_argument("--k", type=int, default=1)
    p.add_argument("--gap", type=int, default=1)
    p.add_argument("--window", type=int, default=1)
    p.add_argument("--limit", type=int, default=8)
    p.set_defaults(fn=_analyze)

    p = sub.add_parser("example", help="emit a built-in corpus spec")
    p.add_argument("name")
    p.add_argument("--out")
    p.set_defaults(fn=_example)
    return parser


def main(argv=None):
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_USAGE if exc.code not in (0, None) else 0
    budget = BUDGETS[args.budget]()
    try:
        return args.fn(args, budget)
    except (SpecParseError, GroupError, FileNotFoundError, ResourceBudgetError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
