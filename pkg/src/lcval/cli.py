"""Command-line entry point sequencing the validation pipeline.

Subcommands: ``plan`` (sample-size planning and allocation reports),
``sample`` (seeded point draws), ``retrieve`` (per-sample label table),
``serve`` (annotation HTTP API), ``import-annotations`` / ``export-gt``
(annotation log handling), ``evaluate`` (accuracy reports), ``synth``
(synthetic landscape project) and ``reproduce-paper`` (built-in published
reference checks). Identical inputs and seed give byte-identical outputs.
"""
from __future__ import annotations

import argparse
import csv
import os
import sys

from . import kernels
from .annotation import (
    AnnotationStore,
    read_annotation_log,
    replay_log,
    write_annotation_log,
    write_ground_truth_csv,
    read_ground_truth_csv,
)
from .annotation import ConfidenceLevel
from .config import ConfigError, ProjectConfig, load_config, load_products
from .grid import TileShift, save_grid
from .metrics import (
    evaluate,
    percent,
    render_report,
    weights_from_levels,
    write_summary_csv,
)
from .nomenclature import GeneralClass
from .reference import run_reference_checks
from .retrieval import read_retrieval_csv, retrieve_labels, write_retrieval_csv
from .sampling import (
    Allocation,
    SamplingError,
    Stratum,
    allocate_class_anchored,
    allocate_max_anchored,
    draw_points,
    read_sample_csv,
    required_sample_size,
    round_half_up,
    strata_from_grid,
    write_allocation_csv,
    write_sample_csv,
)
from .server import AnnotationService, make_server
from .synth import DegradationSpec, generate_landscape, degrade


def _write(path: str, text: str) -> None:
    os.makedirs(os.path.dirname(os.path.abspath(path)), exist_ok=True)
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(text)


def _read(path: str) -> str:
    with open(path, "r", encoding="utf-8") as fh:
        return fh.read()


def _load_strata(cfg: ProjectConfig):
    from .config import load_product_grid, load_product_scheme

    product = cfg.product(cfg.sampling.stratify_by)
    grid = load_product_grid(cfg, product)
    scheme = load_product_scheme(cfg, product)
    return strata_from_grid(grid, scheme, by_general=cfg.sampling.by_general), grid


def _allocate(cfg: ProjectConfig, strata: list[Stratum]) -> Allocation:
    s = cfg.sampling
    if s.anchor is not None:
        if s.anchor_n is None:
            raise ConfigError("anchor set but anchor_n missing")
        return allocate_class_anchored(strata, s.anchor, s.anchor_n, s.n_min)
    n_max = s.n_max
    if n_max is None:
        # distribute the planner target proportionally: anchoring the largest
        # stratum at coverage_max * n makes every raw quota coverage * n
        n = required_sample_size(s.z, s.P, s.h).n
        n_max = round_half_up(max(st.coverage for st in strata) * n)
    return allocate_max_anchored(strata, n_max, s.n_min)


# -- subcommands ---------------------------------------------------------------


def cmd_plan(args) -> int:
    plan = required_sample_size(args.z, args.P, args.h)
    print(f"n = {plan.n}  (z={plan.z}, P={plan.P}, h={plan.h})")
    if args.coverage:
        strata = []
        with open(args.coverage, "r", encoding="utf-8") as fh:
            for row in csv.DictReader(fh):
                strata.append(Stratum(row["stratum_id"], float(row["coverage"])))
        if args.anchor:
            if args.anchor_n is None:
                print("error: --anchor requires --anchor-n", file=sys.stderr)
                return 1
            alloc = allocate_class_anchored(strata, args.anchor, args.anchor_n, args.n_min)
        else:
            n_max = args.n_max if args.n_max is not None else round_half_up(
                max(s.coverage for s in strata) * plan.n
            )
            alloc = allocate_max_anchored(strata, n_max, args.n_min)
        report = write_allocation_csv(alloc)
        if args.out:
            _write(args.out, report)
            print(f"allocation report -> {args.out} (total {alloc.total})")
        else:
            print(report, end="")
    return 0


def cmd_sample(args) -> int:
    cfg = load_config(args.config)
    seed = args.seed if args.seed is not None else cfg.sampling.seed
    strata, grid = _load_strata(cfg)
    alloc = _allocate(cfg, strata)
    points = draw_points(grid, alloc, seed, source_product=cfg.sampling.stratify_by)
    out = args.out or cfg.path(cfg.samples)
    _write(out, write_sample_csv(points))
    alloc_out = os.path.splitext(out)[0] + "_allocation.csv"
    _write(alloc_out, write_allocation_csv(alloc))
    print(f"{len(points)} samples -> {out}")
    print(f"allocation report -> {alloc_out}")
    return 0


def cmd_retrieve(args) -> int:
    cfg = load_config(args.config)
    samples = read_sample_csv(_read(args.samples or cfg.path(cfg.samples)))
    products = load_products(cfg)
    table = retrieve_labels(samples, products, out_of_extent=args.out_of_extent)
    out = args.out or os.path.join(cfg.path(cfg.output_dir), "retrieval.csv")
    _write(out, write_retrieval_csv(table))
    print(f"label table ({len(table.rows)} rows x {len(table.products)} products) -> {out}")
    return 0


def cmd_serve(args) -> int:
    cfg = load_config(args.config)
    samples = read_sample_csv(_read(args.samples or cfg.path(cfg.samples)))
    products = load_products(cfg)
    store = AnnotationStore(samples, experts=cfg.experts)
    log_path = args.log or cfg.path(cfg.annotation_log)
    if os.path.exists(log_path):
        replay_log(store, read_annotation_log(_read(log_path)))
        print(f"replayed {len(store.records)} records from {log_path}")
    service = AnnotationService(store, products, log_path=log_path)
    static_dir = args.static if args.static and os.path.isdir(args.static) else None
    httpd = make_server(service, bind=args.bind, port=args.port, static_dir=static_dir)
    host, port = httpd.server_address[:2]
    print(f"annotation API on http://{host}:{port}/api/samples (log: {log_path})")
    if static_dir:
        print(f"console bundle from {static_dir}")
    try:
        httpd.serve_forever()
    except KeyboardInterrupt:
        pass
    finally:
        httpd.server_close()
    return 0


def cmd_import_annotations(args) -> int:
    cfg = load_config(args.config)
    samples = read_sample_csv(_read(args.samples or cfg.path(cfg.samples)))
    log_path = cfg.path(cfg.annotation_log)
    existing = read_annotation_log(_read(log_path)) if os.path.exists(log_path) else []
    incoming = read_annotation_log(_read(args.log))
    store = AnnotationStore(samples, experts=cfg.experts)
    replay_log(store, existing + incoming)
    _write(log_path, write_annotation_log(store.records))
    print(f"imported {len(incoming)} records; log now {len(store.records)} -> {log_path}")
    return 0


def cmd_export_gt(args) -> int:
    cfg = load_config(args.config)
    samples = read_sample_csv(_read(args.samples or cfg.path(cfg.samples)))
    store = AnnotationStore(samples, experts=cfg.experts)
    log_path = cfg.path(cfg.annotation_log)
    if os.path.exists(log_path):
        replay_log(store, read_annotation_log(_read(log_path)))
    rows = store.export_ground_truth(partial=args.partial)
    out = args.out or os.path.join(cfg.path(cfg.output_dir), "ground_truth.csv")
    _write(out, write_ground_truth_csv(rows))
    counts = store.counts_by_level(rows)
    print(f"{len(rows)} finalized samples -> {out}")
    print(
        f"per confidence level: #1 {counts[1]}  #2 {counts[2]}  #3 {counts[3]}"
    )
    return 0


def cmd_evaluate(args) -> int:
    cfg = load_config(args.config)
    truth = read_ground_truth_csv(_read(args.truth))
    table = read_retrieval_csv(_read(args.retrieval))
    out_dir = args.out or cfg.path(cfg.output_dir)
    weighting = weights_from_levels(
        [ConfidenceLevel(lv) for lv in cfg.weighting_levels]
    )
    weighted = {}
    for product in table.products:
        report = evaluate(truth, table, product, weighting, sampling_set=args.set_id)
        path = os.path.join(out_dir, f"report_{product}.txt")
        _write(path, render_report(report))
        weighted[product] = {args.set_id: report.weighted_oa}
        print(f"{product}: weighted OA {percent(report.weighted_oa)} -> {path}")
    summary = write_summary_csv(weighted, [args.set_id])
    summary_path = os.path.join(out_dir, "summary.csv")
    _write(summary_path, summary)
    print(f"summary -> {summary_path}")
    return 0


SYNTH_CLASSES = (
    (1, "Cropland", GeneralClass.AGRICULTURE, 0.55),
    (2, "Woodland", GeneralClass.FOREST, 0.30),
    (3, "Built-up", GeneralClass.ARTIFICIAL, 0.08),
    (4, "Open water", GeneralClass.WATER, 0.07),
)


def cmd_synth(args) -> int:
    out_dir = args.out
    os.makedirs(out_dir, exist_ok=True)
    mix = {code: frac for code, _, _, frac in SYNTH_CLASSES}
    truth = generate_landscape(
        seed=args.seed,
        rows=args.rows,
        cols=args.cols,
        cell_size=args.cell_size,
        class_mix=mix,
        blob_scale=args.blob_scale,
    )
    save_grid(truth, os.path.join(out_dir, "truth.grid"))

    scheme_lines = ["raw_code,label,l3_code,general"]
    for code, label, general, _ in SYNTH_CLASSES:
        scheme_lines.append(f"{code},{label},,{general.value}")
    _write(os.path.join(out_dir, "synthetic_scheme.csv"), "\n".join(scheme_lines) + "\n")

    products = [{"name": "truth", "grid": "truth.grid", "scheme": "synthetic_scheme.csv"}]
    for i in range(args.products):
        name = f"product-{chr(ord('a') + i)}"
        spec = DegradationSpec.diagonal(
            tuple(mix),
            p_correct=args.accuracy,
            shift=TileShift(dx=i % 2, dy=0),
            unclassified_rate=args.unclassified_rate,
        )
        degraded = degrade(truth, spec, seed=args.seed + 1 + i)
        save_grid(degraded, os.path.join(out_dir, f"{name}.grid"))
        _write(os.path.join(out_dir, f"{name}_degradation.json"), spec.to_json() + "\n")
        products.append(
            {"name": name, "grid": f"{name}.grid", "scheme": "synthetic_scheme.csv"}
        )

    import json

    config = {
        "products": products,
        "sampling": {
            "z": 1.96,
            "P": 0.5,
            "h": args.h,
            "n_min": args.n_min,
            "seed": args.seed,
            "stratify_by": "truth",
            "by_general": False,
        },
        "experts": ["expert-a", "expert-b"],
        "output_dir": "out",
        "samples": "samples.csv",
        "annotation_log": "annotations.csv",
    }
    _write(os.path.join(out_dir, "project.json"), json.dumps(config, indent=2) + "\n")
    print(
        f"synthetic project ({args.rows}x{args.cols} @ {args.cell_size}m, "
        f"{args.products} degraded products, kernel backend {kernels.backend()}) -> {out_dir}"
    )
    return 0


def cmd_reproduce_paper(args) -> int:
    results = run_reference_checks()
    failed = 0
    for c in results:
        mark = "PASS" if c.passed else "FAIL"
        print(f"[{mark}] {c.name}: {c.detail}")
        failed += 0 if c.passed else 1
    print(f"{len(results) - failed}/{len(results)} reference checks passed")
    return 0 if failed == 0 else 1


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="lcval", description="Land-cover map validation toolkit"
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("plan", help="sample-size planning and allocation report")
    p.add_argument("--z", type=float, default=1.96, help="critical normal value")
    p.add_argument("--P", type=float, default=0.5, help="planning proportion")
    p.add_argument("--h", type=float, default=0.05, help="confidence half-width")
    p.add_argument("--coverage", help="stratum coverage CSV (stratum_id,coverage)")
    p.add_argument("--n-max", type=int, default=None, help="cap for the largest stratum")
    p.add_argument("--n-min", type=int, default=5, help="per-stratum floor")
    p.add_argument("--anchor", help="anchor stratum id (class-anchored allocation)")
    p.add_argument("--anchor-n", type=int, default=None, help="anchor sample count")
    p.add_argument("--out", help="allocation report path")
    p.set_defaults(func=cmd_plan)

    p = sub.add_parser("sample", help="draw seeded stratified sample points")
    p.add_argument("--config", required=True)
    p.add_argument("--seed", type=int, default=None, help="override the config seed")
    p.add_argument("--out", help="sample CSV path (default from config)")
    p.set_defaults(func=cmd_sample)

    p = sub.add_parser("retrieve", help="per-sample label table across products")
    p.add_argument("--config", required=True)
    p.add_argument("--samples", help="sample CSV (default from config)")
    p.add_argument(
        "--out-of-extent",
        choices=("error", "unclassified"),
        default="error",
        help="policy for samples outside a product grid",
    )
    p.add_argument("--out", help="output CSV path")
    p.set_defaults(func=cmd_retrieve)

    p = sub.add_parser("serve", help="run the annotation HTTP API")
    p.add_argument("--config", required=True)
    p.add_argument("--samples", help="sample CSV (default from config)")
    p.add_argument("--log", help="annotation log path (default from config)")
    p.add_argument("--port", type=int, default=8765)
    p.add_argument("--bind", default="127.0.0.1")
    p.add_argument("--static", help="directory with the console bundle to serve at /")
    p.set_defaults(func=cmd_serve)

    p = sub.add_parser("import-annotations", help="merge a record log into the project log")
    p.add_argument("--config", required=True)
    p.add_argument("--samples", help="sample CSV (default from config)")
    p.add_argument("--log", required=True, help="annotation log CSV to import")
    p.set_defaults(func=cmd_import_annotations)

    p = sub.add_parser("export-gt", help="export finalized ground truth")
    p.add_argument("--config", required=True)
    p.add_argument("--samples", help="sample CSV (default from config)")
    p.add_argument("--partial", action="store_true", help="skip unfinalized samples")
    p.add_argument("--out", help="output CSV path")
    p.set_defaults(func=cmd_export_gt)

    p = sub.add_parser("evaluate", help="accuracy reports for every product")
    p.add_argument("--config", required=True)
    p.add_argument("--truth", required=True, help="ground truth CSV")
    p.add_argument("--retrieval", required=True, help="retrieval table CSV")
    p.add_argument("--set-id", default="default", help="sampling set identifier")
    p.add_argument("--out", help="report directory")
    p.set_defaults(func=cmd_evaluate)

    p = sub.add_parser("synth", help="generate a synthetic validation project")
    p.add_argument("--out", required=True, help="project directory")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--rows", type=int, default=300)
    p.add_argument("--cols", type=int, default=300)
    p.add_argument("--cell-size", type=float, default=20.0)
    p.add_argument("--blob-scale", type=int, default=8)
    p.add_argument("--products", type=int, default=2, help="number of degraded products")
    p.add_argument("--accuracy", type=float, default=0.9, help="kernel diagonal")
    p.add_argument("--unclassified-rate", type=float, default=0.02)
    p.add_argument("--h", type=float, default=0.05, help="planning half-width")
    p.add_argument("--n-min", type=int, default=5, help="per-stratum floor")
    p.set_defaults(func=cmd_synth)

    p = sub.add_parser(
        "reproduce-paper", help="check built-in published reference tables"
    )
    p.set_defaults(func=cmd_reproduce_paper)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
