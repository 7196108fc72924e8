"""``singdetect`` command line: generate, filter, fit, trace, pipeline, report.

Exit codes: 0 success, 1 I/O error, 2 invalid input or arguments,
3 degenerate fit under ``--strict``.
"""
from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path

import numpy as np

from .basis import Basis
from .data import BatchedPointSet, RectDomain, load_points, merge_batches, save_points
from .diagnostics import radius_function, trace_zero_set
from .filtering import KdeParams, KnnParams, apply_filter
from .fitting import DetectionModel, FitReport, WeightScheme, fit
from .report import coefficient_table, exact_coefficients
from .synthgen import CurveSpec, GenParams, generate

log = logging.getLogger("singdetect")

EXIT_IO, EXIT_INVALID, EXIT_DEGENERATE = 1, 2, 3

DEFAULTS = {
    "curve": "circle", "batches": 17, "seed": 0, "grid": 5, "w0": 0.3, "q": 0.25,
    "outliers": 0.0, "batch_size": None, "prefix": None,
    "filter": "none", "gamma": 0.6, "k": 5, "bandwidth": "silverman",
    "basis": "poly:2", "weights": "uniform", "exact": None,
    "resolution": 256, "radius_samples": 100, "domain": None, "strict": False,
}


class Degenerate(Exception):
    pass


def _dump_json(obj, path) -> None:
    Path(path).write_text(json.dumps(obj, indent=2, sort_keys=True) + "\n", encoding="utf-8")


def _resolve(args: argparse.Namespace) -> dict:
    """Defaults, then the config file, then explicitly given flags."""
    cfg = dict(DEFAULTS)
    if getattr(args, "config", None):
        with open(args.config, encoding="utf-8") as fh:
            loaded = json.load(fh)
        if not isinstance(loaded, dict):
            raise ValueError("config file must hold a JSON object")
        cfg.update({k.replace("-", "_"): v for k, v in loaded.items()})
    cfg.update({k: v for k, v in vars(args).items()
                if v is not None and k not in ("func", "config")})
    return cfg


def _filter_params(cfg: dict):
    method = cfg["filter"]
    if method == "none":
        return None
    if method == "kde":
        bw = cfg["bandwidth"]
        return KdeParams(float(cfg["gamma"]), bw if bw == "silverman" else float(bw))
    if method == "knn":
        return KnnParams(float(cfg["gamma"]), int(cfg["k"]))
    raise ValueError(f"unknown filter {method!r}; choose none, kde or knn")


def _gen_params(cfg: dict) -> GenParams:
    kw = dict(n_batches=int(cfg["batches"]), grid=int(cfg["grid"]), w0=float(cfg["w0"]),
              q=float(cfg["q"]), outlier_fraction=float(cfg["outliers"]), seed=int(cfg["seed"]))
    if cfg.get("batch_size") is not None:
        kw["batch_sizes"] = (int(cfg["batch_size"]),)
    return GenParams(**kw)


def _parse_domain(text) -> RectDomain | None:
    if text is None:
        return None
    if isinstance(text, dict):
        return RectDomain.from_dict(text)
    vals = [float(v) for v in str(text).split(",")]
    if len(vals) != 4:
        raise ValueError("domain must be xmin,xmax,ymin,ymax")
    return RectDomain(*vals)


def _apply_prefix(data, prefix):
    if prefix is None:
        return data
    return merge_batches(data).head(int(prefix))


def _bounding_domain(points: np.ndarray) -> RectDomain:
    lo, hi = points.min(axis=0), points.max(axis=0)
    pad = 0.05 * max(float((hi - lo).max()), 1e-9)
    return RectDomain(lo[0] - pad, hi[0] + pad, lo[1] - pad, hi[1] + pad)


def _warn(report: FitReport, strict: bool) -> None:
    for w in report.warnings:
        log.warning("fit warning: %s", w)
    if strict and report.warnings:
        raise Degenerate(", ".join(report.warnings))


# -- subcommands ---------------------------------------------------------------

def cmd_generate(args) -> None:
    cfg = _resolve(args)
    data = generate(CurveSpec.named(cfg["curve"]), _gen_params(cfg))
    save_points(data, cfg["out"])
    log.info("wrote %d points in %d batches to %s", len(data), data.R + 1, cfg["out"])


def cmd_filter(args) -> None:
    cfg = _resolve(args)
    params = _filter_params(cfg)
    if params is None:
        raise ValueError("filter needs --filter kde or --filter knn")
    data = _apply_prefix(load_points(cfg["input"]), cfg["prefix"])
    rep = apply_filter(merge_batches(data), params)
    _dump_json({"config": cfg, "filter": rep.to_dict()}, cfg["out"])
    if cfg.get("kept_out"):
        save_points(rep.kept, cfg["kept_out"])
    print(f"kept {rep.kept_indices.size} of {rep.scores.size} points "
          f"(threshold {rep.threshold_value:.6g})")


def _run_fit(cfg: dict, data):
    data = _apply_prefix(data, cfg["prefix"])
    basis = Basis.parse(cfg["basis"])
    weights = WeightScheme.parse(cfg["weights"])
    fparams = _filter_params(cfg)
    if fparams is None and weights.kind != "uniform" and not isinstance(data, BatchedPointSet):
        raise ValueError(f"weights {weights} need batched (Type II) input")
    return data, fit(data, basis, weights, fparams)


def _fit_document(cfg: dict, rep: FitReport, domain: RectDomain | None) -> dict:
    doc = {"config": cfg, "fit": rep.to_dict()}
    if domain is not None:
        doc["domain"] = domain.to_dict()
    return doc


def _table(cfg: dict, rep: FitReport) -> str:
    exact = exact_coefficients(cfg["exact"], rep.basis) if cfg.get("exact") else None
    return coefficient_table(rep.basis, rep.coefficients, exact,
                             title=f"basis {rep.basis}, weights {rep.weights}, "
                                   f"residual {rep.residual:.6g}")


def cmd_fit(args) -> None:
    cfg = _resolve(args)
    data, rep = _run_fit(cfg, load_points(cfg["input"]))
    domain = _parse_domain(cfg["domain"]) or data.domain
    if cfg.get("out"):
        _dump_json(_fit_document(cfg, rep, domain), cfg["out"])
    table = _table(cfg, rep)
    if cfg.get("table"):
        Path(cfg["table"]).write_text(table, encoding="utf-8")
    sys.stdout.write(table)
    _warn(rep, bool(cfg["strict"]))


def _load_model(path) -> tuple[DetectionModel, dict]:
    doc = json.loads(Path(path).read_text(encoding="utf-8"))
    try:
        basis = Basis.parse(doc["fit"]["basis"])
        model = DetectionModel(basis, doc["fit"]["coefficients"])
    except (KeyError, TypeError) as exc:
        raise ValueError(f"{path} is not a fit document: missing {exc}") from None
    return model, doc


def _write_trace(out, curve, domain, points=None, filtered=None, title=None) -> None:
    out = Path(out)
    if out.suffix.lower() == ".csv":
        with open(out, "w", encoding="utf-8", newline="") as fh:
            curve.write_csv(fh)
    else:
        from .plotting import plot_detection
        plot_detection(out, curve, domain, points, filtered, title)


def _write_radius(out, samples) -> None:
    out = Path(out)
    if out.suffix.lower() == ".csv":
        with open(out, "w", encoding="utf-8", newline="") as fh:
            fh.write("index,x,y,r\n")
            for i, ((x, y), r) in enumerate(zip(samples.points, samples.values)):
                fh.write(f"{i},{format(x, '.17g')},{format(y, '.17g')},{format(r, '.17g')}\n")
    else:
        from .plotting import plot_radius
        plot_radius(out, samples)


def cmd_trace(args) -> None:
    cfg = _resolve(args)
    model, doc = _load_model(cfg["fit"])
    points = None
    if cfg.get("input"):
        points = merge_batches(load_points(cfg["input"])).points
    domain = (_parse_domain(cfg["domain"]) or _parse_domain(doc.get("domain"))
              or (_bounding_domain(points) if points is not None else RectDomain(-1, 1, -1, 1)))
    curve = trace_zero_set(model, domain, int(cfg["resolution"]))
    _write_trace(cfg["out"], curve, domain, points)
    if cfg.get("radius_out"):
        if curve.empty:
            raise ValueError("traced curve is empty; no radius samples")
        _write_radius(cfg["radius_out"], radius_function(curve, int(cfg["radius_samples"])))
    print(f"traced {len(curve)} polyline(s), {curve.vertices().shape[0]} vertices")


def cmd_report(args) -> None:
    cfg = _resolve(args)
    model, doc = _load_model(cfg["fit"])
    exact = exact_coefficients(cfg["exact"], model.basis) if cfg.get("exact") else None
    table = coefficient_table(model.basis, model.coefficients, exact,
                              title=f"basis {model.basis}, exact {cfg.get('exact') or '-'}")
    if cfg.get("out"):
        Path(cfg["out"]).write_text(table, encoding="utf-8")
    sys.stdout.write(table)


def cmd_pipeline(args) -> None:
    cfg = _resolve(args)
    outdir = Path(cfg.get("outdir") or "out")
    outdir.mkdir(parents=True, exist_ok=True)
    if cfg.get("input"):
        data = load_points(cfg["input"])
    else:
        data = generate(CurveSpec.named(cfg["curve"]), _gen_params(cfg))
        save_points(data, outdir / "data.csv")
        if cfg.get("exact") is None and not str(cfg["curve"]).startswith("poly:"):
            cfg["exact"] = cfg["curve"]
    _dump_json(cfg, outdir / "config.json")

    used, rep = _run_fit(cfg, data)
    domain = (_parse_domain(cfg["domain"]) or data.domain
              or _bounding_domain(merge_batches(data).points))
    filtered = None
    if rep.filter_report is not None:
        _dump_json({"config": cfg, "filter": rep.filter_report.to_dict()}, outdir / "filter.json")
        filtered = rep.filter_report.kept.points
    _dump_json(_fit_document(cfg, rep, domain), outdir / "fit.json")
    table = _table(cfg, rep)
    (outdir / "table.txt").write_text(table, encoding="utf-8")

    curve = trace_zero_set(rep.model, domain, int(cfg["resolution"]))
    _write_trace(outdir / "curve.csv", curve, domain)
    _write_trace(outdir / "curve.svg", curve, domain, merge_batches(used).points, filtered,
                 title=f"{rep.basis}, filter {cfg['filter']}")
    if not curve.empty:
        samples = radius_function(curve, int(cfg["radius_samples"]))
        _write_radius(outdir / "radius.csv", samples)
        _write_radius(outdir / "radius.svg", samples)
    sys.stdout.write(table)
    _warn(rep, bool(cfg["strict"]))


# -- argument parsing ------------------------------------------------------------

def _add_gen(p) -> None:
    g = p.add_argument_group("generator")
    g.add_argument("--curve", help="circle, lshape, xshape, semicircles or poly:<file.json>")
    g.add_argument("--batches", type=int, help="refinement count R (default 17)")
    g.add_argument("--seed", type=int)
    g.add_argument("--grid", type=int, help="batch-0 grid nodes per side (default 5)")
    g.add_argument("--w0", type=float, help="tube half-width scale; batch i uses w0*q^i (default 0.3)")
    g.add_argument("--q", type=float, help="tube decay per batch (default 0.25)")
    g.add_argument("--outliers", type=float, help="uniform outlier fraction per batch")
    g.add_argument("--batch-size", type=int, dest="batch_size",
                   help="tube points per batch (default schedule totals 322 points)")


def _add_filter(p) -> None:
    g = p.add_argument_group("filtering")
    g.add_argument("--filter", choices=["none", "kde", "knn"])
    g.add_argument("--gamma", type=float, help="threshold in (0, 1) (default 0.6)")
    g.add_argument("--k", type=int, help="kNN neighbour count (default 5)")
    g.add_argument("--bandwidth", help="'silverman' or a positive number")


def _add_fit(p) -> None:
    g = p.add_argument_group("fitting")
    g.add_argument("--basis", help="poly:<n> or fourier:<J>:<M> (default poly:2)")
    g.add_argument("--weights", help="uniform, schedule:<b> or sigmas:<s0,s1,...>")
    g.add_argument("--exact", help="named exact curve for the error column")
    g.add_argument("--prefix", type=int, help="use only the first N merged points")
    g.add_argument("--strict", action="store_true", default=None,
                   help="exit 3 on rank-deficient or non-unique fits")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="singdetect", description=__doc__.splitlines()[0])
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("generate", help="write a synthetic batched point set")
    _add_gen(p)
    p.add_argument("--out", required=True)
    p.add_argument("--config")
    p.set_defaults(func=cmd_generate)

    p = sub.add_parser("filter", help="density-filter a point set")
    p.add_argument("--input", required=True)
    _add_filter(p)
    p.add_argument("--prefix", type=int)
    p.add_argument("--out", required=True, help="filter report JSON")
    p.add_argument("--kept-out", dest="kept_out", help="kept points CSV/JSON")
    p.add_argument("--config")
    p.set_defaults(func=cmd_filter)

    p = sub.add_parser("fit", help="fit a detection function")
    p.add_argument("--input", required=True)
    _add_filter(p)
    _add_fit(p)
    p.add_argument("--domain", help="xmin,xmax,ymin,ymax recorded for tracing")
    p.add_argument("--out", help="fit report JSON")
    p.add_argument("--table", help="write the coefficient table here")
    p.add_argument("--config")
    p.set_defaults(func=cmd_fit)

    p = sub.add_parser("trace", help="trace the zero set of a fitted function")
    p.add_argument("--fit", required=True)
    p.add_argument("--input", help="data to draw under the curve")
    p.add_argument("--domain", help="xmin,xmax,ymin,ymax")
    p.add_argument("--resolution", type=int)
    p.add_argument("--out", required=True, help="curve.csv or curve.svg")
    p.add_argument("--radius-out", dest="radius_out", help="radius samples .csv or .svg")
    p.add_argument("--radius-samples", dest="radius_samples", type=int)
    p.add_argument("--config")
    p.set_defaults(func=cmd_trace)

    p = sub.add_parser("pipeline", help="generate/load, filter, fit, trace and report")
    p.add_argument("--input", help="point file; omit to generate")
    _add_gen(p)
    _add_filter(p)
    _add_fit(p)
    p.add_argument("--domain", help="xmin,xmax,ymin,ymax")
    p.add_argument("--resolution", type=int)
    p.add_argument("--radius-samples", dest="radius_samples", type=int)
    p.add_argument("--outdir")
    p.add_argument("--config")
    p.set_defaults(func=cmd_pipeline)

    p = sub.add_parser("report", help="coefficient table against an exact curve")
    p.add_argument("--fit", required=True)
    p.add_argument("--exact")
    p.add_argument("--out")
    p.add_argument("--config")
    p.set_defaults(func=cmd_report)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    verbose = args.__dict__.pop("verbose")
    args.__dict__.pop("command")
    logging.basicConfig(level=logging.INFO if verbose else logging.WARNING,
                        format="%(name)s: %(levelname)s: %(message)s", stream=sys.stderr)
    try:
        args.func(args)
    except Degenerate as exc:
        log.error("degenerate fit: %s", exc)
        return EXIT_DEGENERATE
    except OSError as exc:
        log.error("%s", exc)
        return EXIT_IO
    except (ValueError, KeyError, json.JSONDecodeError) as exc:
        log.error("%s", exc)
        return EXIT_INVALID
    return 0


if __name__ == "__main__":
    sys.exit(main())
