"""Command-line entry points.

Subcommands: ``segment`` (one image + trimap -> mask and report),
``evaluate`` (a JSON manifest of images -> per-image error table),
``optimize`` (GA search for k and the weight vector on one image), and
``serve`` (the HTTP facade). Runtime failures exit 1 with a one-line
diagnostic; argparse usage errors exit 2.
"""

from __future__ import annotations

import argparse
import csv
import json
import sys
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path

import numpy as np

from . import features as features_mod
from . import ga as ga_mod
from . import imgio, pipeline
from .seeds import decode_ground_truth, decode_trimap


def _parse_lambda(args) -> np.ndarray:
    if getattr(args, "lambda_file", None):
        return features_mod.load_lambda_file(args.lambda_file)
    inline = getattr(args, "lambda_inline", None)
    if inline:
        return features_mod.validate_weights([float(v) for v in inline.split(",")])
    return np.ones(features_mod.N_FEATURES)


def _params_from_args(args) -> pipeline.SegParams:
    return pipeline.SegParams(k=args.k, lam=_parse_lambda(args))


def _write_report(path, payload) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(payload, fh, indent=2)
        fh.write("\n")


def _report_payload(result, params, error=None, oracle_tuned=False):
    payload = {
        "error_rate": error,
        "iterations": result.iterations,
        "converged": result.converged,
        "k": params.k,
        "lambda": [float(v) for v in params.lam],
        "wall_ms": result.wall_ms,
    }
    if oracle_tuned:
        payload["oracle_tuned"] = True
    return payload


def _run_one(image_path, trimap_path, params, gt_path=None, workers=1, trace_path=None):
    image = imgio.load_image(image_path)
    seeds = decode_trimap(imgio.load_gray(trimap_path))
    trace_rows = []
    trace = (lambda it, stat: trace_rows.append((it, stat))) if trace_path else None
    result = pipeline.segment(image, seeds, params, workers=workers, trace=trace)
    error = None
    if gt_path:
        gt = decode_ground_truth(imgio.load_gray(gt_path))
        error = pipeline.error_rate(result, gt, seeds)
    if trace_path:
        with open(trace_path, "w", encoding="utf-8", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(["iteration", "statistic"])
            writer.writerows(trace_rows)
    return result, error, seeds


def cmd_segment(args) -> int:
    params = _params_from_args(args)
    result, error, _ = _run_one(
        args.image, args.trimap, params, gt_path=args.gt, workers=args.jobs, trace_path=args.trace
    )
    imgio.save_mask(pipeline.encode_mask(result), args.out)
    if result.class_count > 2:
        legend_path = Path(args.out).with_suffix(".legend.txt")
        with open(legend_path, "w", encoding="utf-8") as fh:
            for level, cls in pipeline.mask_legend(result.class_count):
                fh.write(f"{level} {cls}\n")
    if args.report:
        _write_report(args.report, _report_payload(result, params, error))
    if error is not None:
        print(f"error_rate: {error:.6f} ({error * 100:.2f}%)")
    print(
        f"wrote {args.out}: {result.n_nodes} nodes, {result.iterations} iterations, "
        f"converged={result.converged}, {result.wall_ms:.0f} ms"
    )
    return 0


def _evaluate_entry(entry, default_params, workers):
    params = default_params
    if entry.get("params"):
        with open(entry["params"], "r", encoding="utf-8") as fh:
            loaded = json.load(fh)
        params = pipeline.SegParams(k=loaded["k"], lam=loaded["lambda"])
    result, error, _ = _run_one(
        entry["image"], entry["trimap"], params, gt_path=entry.get("gt"), workers=workers
    )
    return result, error


def cmd_evaluate(args) -> int:
    with open(args.manifest, "r", encoding="utf-8") as fh:
        manifest = json.load(fh)
    if not isinstance(manifest, list) or not manifest:
        raise ValueError(f"{args.manifest}: manifest must be a non-empty JSON array")
    default_params = _params_from_args(args)

    def run(entry):
        try:
            result, error = _evaluate_entry(entry, default_params, 1)
            return (entry, result, error, None)
        except Exception as exc:  # noqa: BLE001 - per-entry failures recorded
            return (entry, None, None, str(exc))

    if args.jobs > 1:
        with ThreadPoolExecutor(max_workers=args.jobs) as pool:
            rows = list(pool.map(run, manifest))
    else:
        rows = [run(entry) for entry in manifest]

    table = []
    failures = 0
    for entry, result, error, failure in rows:
        name = Path(entry.get("image", "?")).stem
        if failure is not None:
            failures += 1
            table.append((name, None, None, None, failure))
        else:
            table.append((name, error, result.iterations, result.wall_ms, None))

    print(f"{'image':<16}{'error %':>10}{'iters':>8}{'wall ms':>10}")
    errors = []
    for name, error, iters, wall, failure in table:
        if failure is not None:
            print(f"{name:<16}{'FAILED':>10}  {failure}")
            continue
        err_txt = "n/a" if error is None else f"{error * 100:.2f}"
        print(f"{name:<16}{err_txt:>10}{iters:>8}{wall:>10.0f}")
        if error is not None:
            errors.append(error)
    if errors:
        print(f"{'mean':<16}{np.mean(errors) * 100:>10.2f}")
    if args.out:
        with open(args.out, "w", encoding="utf-8", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(["image", "error_rate", "iterations", "wall_ms", "failure"])
            writer.writerows(table)
            if errors:
                writer.writerow(["mean", float(np.mean(errors)), "", "", ""])
    return 1 if failures else 0


def cmd_optimize(args) -> int:
    config = ga_mod.GaConfig()
    if args.ga_config:
        with open(args.ga_config, "r", encoding="utf-8") as fh:
            config = ga_mod.GaConfig(**json.load(fh))
    if args.seed is not None:
        config.rng_seed = args.seed

    image = imgio.load_image(args.image)
    seeds = decode_trimap(imgio.load_gray(args.trimap))
    gt = decode_ground_truth(imgio.load_gray(args.gt))
    outcome = ga_mod.optimize(image, seeds, gt, config, jobs=args.jobs)

    payload = {
        "k": outcome.best.k,
        "lambda": [float(v) for v in outcome.best.lam],
        "fitness": outcome.best.fitness,
        "oracle_tuned": True,
    }
    _write_report(args.out, payload)
    if args.history:
        with open(args.history, "w", encoding="utf-8", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(["generation", "best", "mean"])
            writer.writerows(outcome.history)
    print(
        f"best genome: k={outcome.best.k}, fitness={outcome.best.fitness:.6f} "
        f"({outcome.best.fitness * 100:.2f}% error, oracle-tuned)"
    )
    return 0


def cmd_serve(args) -> int:
    import uvicorn

    from .service import create_app

    app = create_app(max_pixels=args.max_pixels, cors_origins=args.cors_origin)
    uvicorn.run(app, host=args.host, port=args.port, log_level="info")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="lpseg",
        description="Interactive image segmentation by label propagation on kNN pixel graphs.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    seg = sub.add_parser("segment", help="segment one image from a trimap")
    seg.add_argument("--image", required=True, help="RGB image (PNG/BMP)")
    seg.add_argument("--trimap", required=True, help="8-bit trimap {0,64,128,255}")
    seg.add_argument("--gt", help="optional ground-truth mask; prints the error rate")
    seg.add_argument("--k", type=int, default=10, help="neighbor count (default 10)")
    seg.add_argument(
        "--lambda", dest="lambda_inline", metavar="W0,...,W22",
        help="inline comma-separated 23 feature weights (default all ones)",
    )
    seg.add_argument("--lambda-file", help="23-line text file, one weight per line")
    seg.add_argument("--out", required=True, help="output mask path (PNG)")
    seg.add_argument("--report", help="write a JSON run report here")
    seg.add_argument("--trace", help="write per-checkpoint CSV (iteration, statistic)")
    seg.add_argument("--jobs", type=int, default=1, help="worker partitions")
    seg.set_defaults(func=cmd_segment)

    ev = sub.add_parser("evaluate", help="run a JSON manifest of images and tabulate errors")
    ev.add_argument("--manifest", required=True, help="JSON array of {image, trimap, gt, params?}")
    ev.add_argument("--k", type=int, default=10)
    ev.add_argument("--lambda", dest="lambda_inline", metavar="W0,...,W22")
    ev.add_argument("--lambda-file")
    ev.add_argument("--out", help="also write the table as CSV")
    ev.add_argument("--jobs", type=int, default=1, help="parallel manifest entries")
    ev.set_defaults(func=cmd_evaluate)

    opt = sub.add_parser("optimize", help="GA search for k and feature weights on one image")
    opt.add_argument("--image", required=True)
    opt.add_argument("--trimap", required=True)
    opt.add_argument("--gt", required=True)
    opt.add_argument("--ga-config", help="JSON file overriding GaConfig fields")
    opt.add_argument("--seed", type=int, help="RNG seed override")
    opt.add_argument("--out", required=True, help="best-genome JSON output")
    opt.add_argument("--history", help="per-generation CSV (generation, best, mean)")
    opt.add_argument("--jobs", type=int, default=1, help="parallel genome evaluations")
    opt.set_defaults(func=cmd_optimize)

    srv = sub.add_parser("serve", help="run the HTTP segmentation service")
    srv.add_argument("--host", default="127.0.0.1")
    srv.add_argument("--port", type=int, default=8765)
    srv.add_argument("--max-pixels", type=int, default=2_000_000)
    srv.add_argument("--cors-origin", action="append", default=None,
                     help="allowed CORS origin (repeatable; default *)")
    srv.set_defaults(func=cmd_serve)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (ValueError, OSError, json.JSONDecodeError) as exc:
        print(f"lpseg: error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
