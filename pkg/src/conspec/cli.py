"""Command-line front end: ``conspec <subcommand>``.

Subcommands wire the pipeline end to end over a manifest:

* ``fit-map``     fit the vision-to-VLM affine map, write affine_map.json
* ``directions``  compute concept/class directions from caption embeddings
* ``regions``     build focus boxes (A1, A2, A3, gamma), write regions.json
* ``validate``    satisfaction probabilities, write report.csv (+ heat map)
* ``elicit``      derive strength-predicate specs from attribute annotations
* ``verify``      check spec files over a region, write report.jsonl + CSV
* ``audit``       re-check one spec with the grid oracle on a projection
* ``report``      turn raw reports into plot-ready data files

Exit codes: 0 success, 1 domain error (bad data, infeasible request),
2 usage error.  ``--jobs`` (default from ``CONSPEC_JOBS``) fans work out
across specs; outputs keep input order regardless of completion order.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
import time
from concurrent.futures import ThreadPoolExecutor
from datetime import datetime, timezone
from pathlib import Path

import numpy as np

from . import __version__
from .directions import CaptionTemplateSet, TextEmbedder, default_templates, direction_table
from .embeddings import EmbeddingSet, Manifest, load_manifest
from .errors import ConspecError, FormatError
from .lang import desugar, iter_spec_lines, parse_spec, to_lp_queries
from .oracle import grid_violation_oracle
from .regions import (
    BoxRegion,
    read_partition_csv,
    region_a1,
    region_a2,
    region_a3,
    region_gamma,
    surrogate_partition,
    write_regions_json,
)
from .repmap import RepMap, RepMode, fit_affine_map, load_affine_map, map_metrics, save_affine_map
from .validate import (
    elicit_predicates,
    filter_significant,
    relevant_concepts,
    satisfaction_probability,
    write_heatmap_json,
    write_report_csv,
)
from .verifier import (
    VerificationContext,
    load_head_json,
    outcome_record,
    verify_spec,
    write_epsilon_csv,
    write_report_jsonl,
)


def _default_jobs() -> int:
    try:
        return max(1, int(os.environ.get("CONSPEC_JOBS", "1")))
    except ValueError:
        return 1


def _filter_split(man: Manifest, E: EmbeddingSet, split: str | None) -> EmbeddingSet:
    ids = man.split_ids(split)
    if ids is None:
        return E
    rows = [i for i, rid in enumerate(E.ids) if rid in ids]
    if not rows:
        raise FormatError(f"split {split!r} selects no rows")
    return E.select(rows)


def _load_templates(man: Manifest) -> CaptionTemplateSet:
    if man.has("templates"):
        return CaptionTemplateSet.from_file(man.path("templates"))
    return default_templates()


def _load_dirs(man: Manifest):
    embedder = TextEmbedder.from_csv(man.path("captions"))
    templates = _load_templates(man)
    concept_dirs = direction_table(man.concept_names, templates, embedder)
    class_dirs = [
        direction_table([c], templates, embedder)[c] for c in man.class_names
    ]
    return concept_dirs, class_dirs


def _load_map(man: Manifest, args) -> "AffineMap":
    if getattr(args, "map", None):
        return load_affine_map(args.map)
    if man.has("map"):
        return load_affine_map(man.path("map"))
    split = "train" if man.splits and "train" in man.splits else None
    F = _filter_split(man, man.load_embeddings("vision"), split)
    G = _filter_split(man, man.load_embeddings("vlm"), split)
    return fit_affine_map(F, G)


def _build_regions(man: Manifest, args) -> list[BoxRegion]:
    space = "vlm" if args.region == "gamma" else "vision"
    E = _filter_split(man, man.load_embeddings(space), args.split)
    if args.region == "A1":
        return [region_a1(E, args.class_name)]
    if args.region == "A2":
        return [region_a2(E, args.class_name)]
    if args.region == "A3":
        if args.partition:
            part = read_partition_csv(args.partition)
        else:
            part = surrogate_partition(
                E, E.rows_where_predicted(args.class_name), k=args.surrogate_k
            )
        return region_a3(E, args.class_name, part)
    if args.region == "gamma":
        return [region_gamma(E, args.class_name, g) for g in args.gamma]
    raise FormatError(f"unknown region method {args.region!r}")


# --- subcommands ------------------------------------------------------------------


def cmd_fit_map(args) -> int:
    man = load_manifest(args.manifest)
    F = _filter_split(man, man.load_embeddings("vision"), args.split)
    G = _filter_split(man, man.load_embeddings("vlm"), args.split)
    m = fit_affine_map(F, G, gradient_descent=args.gradient_descent)
    save_affine_map(args.out, m)
    q = map_metrics(m, F, G)
    print(f"fitted {m.p_g}x{m.p_f} map on {len(F)} rows: mse={q.mse:.6g} r2={q.r2:.6g}")
    return 0


def cmd_directions(args) -> int:
    man = load_manifest(args.manifest)
    concept_dirs, class_dirs = _load_dirs(man)
    payload = {"names": {}}
    for d in list(concept_dirs.values()) + class_dirs:
        payload["names"][d.concept] = {
            "direction": [float(x) for x in d.direction],
            "caption_count": d.caption_count,
        }
    Path(args.out).write_text(json.dumps(payload), "utf-8")
    print(f"wrote {len(payload['names'])} directions to {args.out}")
    return 0


def cmd_regions(args) -> int:
    man = load_manifest(args.manifest)
    regions = _build_regions(man, args)
    write_regions_json(args.out, regions)
    for r in regions:
        width = float(np.sum(r.upper - r.lower))
        print(f"{r.tag()} class={r.class_name} dim={r.dim} total-width={width:.4g}")
    return 0


def cmd_validate(args) -> int:
    man = load_manifest(args.manifest)
    concept_dirs, _ = _load_dirs(man)
    if args.space == "vlm":
        E = _filter_split(man, man.load_embeddings("vlm"), args.split)
        rep = RepMap(RepMode.VLM_ONLY, concept_dirs)
    else:
        E = _filter_split(man, man.load_embeddings("vision"), args.split)
        rep = RepMap(RepMode.VIA_AFFINE, concept_dirs, map=_load_map(man, args))
    attrs_E = _filter_split(man, man.load_embeddings("vlm"), args.relevance_split)
    relevant = relevant_concepts(attrs_E, args.class_name, args.threshold)
    preds = elicit_predicates(relevant, man.concept_names, args.class_name)
    report = satisfaction_probability(
        E, preds, rep, args.class_name, split=args.split, jobs=args.jobs
    )
    write_report_csv(args.out, report)
    if args.heatmap:
        write_heatmap_json(args.heatmap, report, relevant)
    kept = sum(1 for e in report.entries if e.probability > args.significance)
    print(
        f"{len(preds)} predicates over {len(relevant)} relevant concepts; "
        f"{kept} above {args.significance:.0%} on split {args.split or 'all'}"
    )
    return 0


def cmd_elicit(args) -> int:
    man = load_manifest(args.manifest)
    E = _filter_split(man, man.load_embeddings("vlm"), args.split)
    relevant = relevant_concepts(E, args.class_name, args.threshold)
    preds = elicit_predicates(relevant, man.concept_names, args.class_name)
    if args.filter_significant:
        concept_dirs, _ = _load_dirs(man)
        rep = RepMap(RepMode.VLM_ONLY, concept_dirs)
        report = satisfaction_probability(
        E, preds, rep, args.class_name, split=args.split, jobs=args.jobs
    )
        preds = filter_significant(report, args.significance, split=args.split or "train")
    lines = [p.spec_text() for p in preds]
    Path(args.out).write_text("\n".join(lines) + ("\n" if lines else ""), "utf-8")
    print(f"elicited {len(lines)} specifications for {args.class_name} -> {args.out}")
    return 0


def cmd_verify(args) -> int:
    man = load_manifest(args.manifest)
    vocab = man.vocabulary
    concept_dirs, class_dirs = _load_dirs(man)
    regions = _build_regions(man, args)

    spec_lines = list(iter_spec_lines(Path(args.specs).read_text("utf-8")))
    parsed = [desugar(parse_spec(text, vocab), vocab) for _, text in spec_lines]

    if args.engine == "vision":
        head = load_head_json(man.path("head"))
        m = _load_map(man, args)
        contexts = [
            VerificationContext(
                box=box, concept_dirs=concept_dirs, head=head, map=m,
                class_labels=vocab.classes, max_clauses=args.max_clauses,
            )
            for box in regions
        ]
    else:
        contexts = [
            VerificationContext(
                box=box, concept_dirs=concept_dirs, class_dirs=class_dirs,
                class_labels=vocab.classes, max_clauses=args.max_clauses,
            )
            for box in regions
        ]

    tasks = [
        (si, text, ctx)
        for si, (_, text) in enumerate(spec_lines)
        for ctx in contexts
    ]

    def run(task):
        si, text, ctx = task
        t0 = time.perf_counter()
        outcome = verify_spec(parsed[si], ctx)
        ms = (time.perf_counter() - t0) * 1e3
        return outcome_record(text, ctx.box, outcome, ms, deterministic=args.deterministic)

    if args.jobs > 1:
        with ThreadPoolExecutor(max_workers=args.jobs) as pool:
            records = list(pool.map(run, tasks))
    else:
        records = [run(t) for t in tasks]

    out_dir = Path(args.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    if not args.deterministic:
        for rec in records:
            rec["generated_at"] = datetime.now(timezone.utc).isoformat()
    write_report_jsonl(out_dir / "report.jsonl", records)
    write_epsilon_csv(out_dir / "epsilons.csv", records)

    width = max(len(r["spec_text"]) for r in records) if records else 10
    print(f"{'specification':<{width}}  {'region':<10} {'outcome':<15} epsilon")
    for rec in records:
        eps = "" if rec["epsilon"] is None else f"{rec['epsilon']:+.6f}"
        print(f"{rec['spec_text']:<{width}}  {rec['region_provenance']:<10} {rec['outcome']:<15} {eps}")
    return 0


def cmd_audit(args) -> int:
    man = load_manifest(args.manifest)
    vocab = man.vocabulary
    concept_dirs, class_dirs = _load_dirs(man)
    regions = _build_regions(man, args)
    box = regions[args.box_index]
    e = desugar(parse_spec(args.spec, vocab), vocab)

    if args.engine == "vision":
        ctx = VerificationContext(
            box=box, concept_dirs=concept_dirs, head=load_head_json(man.path("head")),
            map=_load_map(man, args), class_labels=vocab.classes,
        )
    else:
        ctx = VerificationContext(
            box=box, concept_dirs=concept_dirs, class_dirs=class_dirs,
            class_labels=vocab.classes,
        )
    outcome = verify_spec(e, ctx)
    dims = [int(x) for x in args.dims.split(",")] if args.dims else list(range(min(3, box.dim)))
    anchor = outcome.point if outcome.point is not None else None
    print(f"lp: outcome={outcome.kind} epsilon={outcome.epsilon}")
    ok = True
    for clause in to_lp_queries(e, ctx.max_clauses):
        grid = grid_violation_oracle(clause, ctx, step=args.step, dims=dims, anchor=anchor)
        print(
            f"clause [{clause}]: grid {grid.status} eps={grid.epsilon} "
            f"({grid.points_checked} points on dims {dims})"
        )
        if (
            grid.status == "optimal"
            and outcome.epsilon is not None
            and grid.epsilon > outcome.epsilon + 1e-6
        ):
            ok = False
            print("  MISMATCH: grid found a stronger violation than the solver")
    if not ok:
        return 1
    print("audit consistent: grid never beats the solver")
    return 0


def cmd_report(args) -> int:
    records = []
    for line in Path(args.jsonl).read_text("utf-8").splitlines():
        if line.strip():
            records.append(json.loads(line))
    write_epsilon_csv(args.out_csv, records)
    print(f"wrote {len(records)} plot rows to {args.out_csv}")
    return 0


# --- argument parsing ----------------------------------------------------------------


def _add_manifest(p: argparse.ArgumentParser) -> None:
    p.add_argument("--manifest", required=True, help="path to manifest.json")


def _add_region_args(p: argparse.ArgumentParser) -> None:
    p.add_argument("--class", dest="class_name", required=True)
    p.add_argument("--region", default="A2", choices=["A1", "A2", "A3", "gamma"])
    p.add_argument("--gamma", type=float, nargs="*", default=[0.25, 1.0, 2.0],
                   help="gamma values for --region gamma")
    p.add_argument("--partition", help="partition.csv for --region A3")
    p.add_argument("--surrogate-k", type=int, default=3,
                   help="top-variance dims for the built-in A3 surrogate")
    p.add_argument("--split", default=None, help="row split to build regions from")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="conspec", description=__doc__.split("\n")[0])
    parser.add_argument("--version", action="version", version=f"conspec {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("fit-map", help="fit the vision-to-VLM affine map")
    _add_manifest(p)
    p.add_argument("--out", required=True)
    p.add_argument("--split", default=None)
    p.add_argument("--gradient-descent", action="store_true",
                   help="use the gradient-descent fit instead of the closed form")
    p.set_defaults(func=cmd_fit_map)

    p = sub.add_parser("directions", help="compute concept and class directions")
    _add_manifest(p)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_directions)

    p = sub.add_parser("regions", help="build focus regions")
    _add_manifest(p)
    _add_region_args(p)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_regions)

    p = sub.add_parser("validate", help="satisfaction probabilities for elicited predicates")
    _add_manifest(p)
    p.add_argument("--class", dest="class_name", required=True)
    p.add_argument("--split", default="test")
    p.add_argument("--relevance-split", default="train")
    p.add_argument("--space", default="vlm", choices=["vlm", "vision"])
    p.add_argument("--map", help="affine_map.json (fitted on the fly if omitted)")
    p.add_argument("--threshold", type=float, default=0.70)
    p.add_argument("--significance", type=float, default=0.95)
    p.add_argument("--jobs", type=int, default=_default_jobs())
    p.add_argument("--out", required=True)
    p.add_argument("--heatmap")
    p.set_defaults(func=cmd_validate)

    p = sub.add_parser("elicit", help="write elicited specifications to a spec file")
    _add_manifest(p)
    p.add_argument("--class", dest="class_name", required=True)
    p.add_argument("--split", default="train")
    p.add_argument("--threshold", type=float, default=0.70)
    p.add_argument("--filter-significant", action="store_true",
                   help="keep only predicates above the significance level on this split")
    p.add_argument("--significance", type=float, default=0.95)
    p.add_argument("--jobs", type=int, default=_default_jobs())
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_elicit)

    p = sub.add_parser("verify", help="check specifications over focus regions")
    _add_manifest(p)
    _add_region_args(p)
    p.add_argument("--specs", required=True, help="spec file: one specification per line")
    p.add_argument("--engine", default="vision", choices=["vision", "clip"])
    p.add_argument("--map")
    p.add_argument("--max-clauses", type=int, default=64)
    p.add_argument("--jobs", type=int, default=_default_jobs())
    p.add_argument("--deterministic", action="store_true",
                   help="suppress timestamps and timings in reports")
    p.add_argument("--out-dir", required=True)
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("audit", help="grid-oracle spot check of one specification")
    _add_manifest(p)
    _add_region_args(p)
    p.add_argument("--spec", required=True)
    p.add_argument("--engine", default="vision", choices=["vision", "clip"])
    p.add_argument("--map")
    p.add_argument("--box-index", type=int, default=0)
    p.add_argument("--dims", help="comma-separated dims to grid over (max 4)")
    p.add_argument("--step", type=float, default=0.01)
    p.set_defaults(func=cmd_audit)

    p = sub.add_parser("report", help="plot-ready data from a verification report")
    p.add_argument("--jsonl", required=True)
    p.add_argument("--out-csv", required=True)
    p.set_defaults(func=cmd_report)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except ConspecError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
