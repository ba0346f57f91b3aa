"""Command-line interface.

Commands read annotation JSON-lines or binary tensor directories and write
JSON-lines, CSV, SVG, or tensor directories.  All outputs are deterministic:
floats are formatted with 9 significant digits, iteration orders are fixed,
and worker threads only ever map a pure function over images with ordered
collection, so --jobs never changes a single output byte.

Exit codes: 0 success, 2 malformed input, 3 bad configuration.
"""

from __future__ import annotations

import argparse
import json
import math
import re
import sys
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path

import numpy as np

from .annotations import curved_subset_select, parse_jsonl, write_jsonl
from .config import Config, apply_overrides, load_config
from .decode import Detection, LevelPrediction, PredictionMaps, decode_all
from .errors import ConfigError, GeometryError, ParseError
from .evaluation import evaluate, fmeasure
from .fourier import (
    FourierSignature,
    fourier_coefficients,
    reconstruct,
    truncation_l2_error,
)
from .geometry import Contour, polygon_iou, resample_equidistant
from .losses import OHEM_RATIO, cross_entropy, ohem_select, regression_loss, total_loss
from .serialize import fmt9, json_line, read_tensor, round9, write_tensor
from .svg import render_svg
from .targets import generate_targets

_INPUT_ERRORS = (ParseError, GeometryError, ValueError, OSError, KeyError)


def _pmap(fn, items, jobs: int) -> list:
    items = list(items)
    if jobs <= 1 or len(items) <= 1:
        return [fn(item) for item in items]
    with ThreadPoolExecutor(max_workers=jobs) as pool:
        return list(pool.map(fn, items))


def _read_lines(path: str) -> list[str]:
    if path == "-":
        return sys.stdin.read().splitlines()
    return Path(path).read_text(encoding="utf-8").splitlines()


def _write_text(path: str, text: str) -> None:
    if path == "-":
        sys.stdout.write(text)
        return
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(text)


def _safe_name(name: str) -> str:
    return re.sub(r"[^A-Za-z0-9._-]", "_", name)


def _safe_dir_names(images) -> dict[str, str]:
    mapping = {}
    for img in images:
        safe = _safe_name(img.image_id)
        if safe in mapping.values():
            raise ParseError(f"image ids collide after sanitizing: {img.image_id!r}")
        mapping[img.image_id] = safe
    return mapping


def _config_header(cfg: Config) -> str:
    parts = []
    for key, value in cfg.to_dict().items():
        parts.append(f"{key}={fmt9(value) if isinstance(value, float) else value}")
    return "# config: " + " ".join(parts)


def _parse_annotations(path: str):
    images, clamped = parse_jsonl(_read_lines(path))
    if clamped:
        print(f"warning: clamped {clamped} out-of-bounds points", file=sys.stderr)
    return images


# ---------------------------------------------------------------------------
# embed / reconstruct


def cmd_embed(args, cfg: Config) -> int:
    images = _parse_annotations(args.annotations)

    def one(img) -> list[str]:
        lines = []
        for inst in img.instances:
            sig = fourier_coefficients(
                resample_equidistant(inst.polygon, cfg.n), cfg.k
            )
            lines.append(
                json_line(
                    {
                        "image_id": img.image_id,
                        "instance_id": inst.id,
                        "k": cfg.k,
                        "ignore": inst.ignore,
                        "coeffs": [round9(v) for v in sig.flat],
                    }
                )
            )
        return lines

    blocks = _pmap(one, images, args.jobs)
    _write_text(args.out, "".join(line + "\n" for block in blocks for line in block))
    return 0


def cmd_reconstruct(args, cfg: Config) -> int:
    out_lines = []
    for lineno, line in enumerate(_read_lines(args.signatures), start=1):
        if not line.strip():
            continue
        try:
            obj = json.loads(line)
            sig = FourierSignature.from_flat(obj["coeffs"])
            image_id = obj["image_id"]
            instance_id = obj["instance_id"]
        except (json.JSONDecodeError, KeyError, TypeError, ValueError) as exc:
            raise ParseError(f"bad signature record: {exc}", line=lineno) from None
        contour = reconstruct(sig, cfg.n_prime)
        out_lines.append(
            json_line(
                {
                    "image_id": image_id,
                    "instance_id": instance_id,
                    "points": [round9(v) for v in contour.flat()],
                }
            )
        )
    _write_text(args.out, "".join(line + "\n" for line in out_lines))
    return 0


# ---------------------------------------------------------------------------
# fidelity


def cmd_fidelity(args, cfg: Config) -> int:
    images = _parse_annotations(args.annotations)
    degrees = sorted({int(tok) for tok in args.degrees.split(",")}) if args.degrees else [cfg.k]
    if any(deg < 1 for deg in degrees):
        raise ConfigError(f"degrees must be >= 1, got {degrees}")
    if 2 * max(degrees) + 1 > cfg.n:
        raise ConfigError(f"degree {max(degrees)} too large for n = {cfg.n}")
    kmax = max(degrees)
    work = [
        (img, inst) for img in images for inst in img.instances if not inst.ignore
    ]

    def one(item):
        img, inst = item
        samples = resample_equidistant(inst.polygon, cfg.n)
        full = fourier_coefficients(samples, kmax)
        rows = []
        for deg in degrees:
            sig = FourierSignature(full.coeffs[kmax - deg : kmax + deg + 1])
            recon = reconstruct(sig, cfg.n_prime)
            iou = polygon_iou(inst.polygon, recon, cfg.iou_supersample)
            err = truncation_l2_error(samples, deg)
            rows.append((deg, iou, err, recon))
        return img, inst, rows

    results = _pmap(one, work, args.jobs)

    if args.svg_dir:
        svg_dir = Path(args.svg_dir)
        svg_dir.mkdir(parents=True, exist_ok=True)
        for img, inst, rows in results:
            for deg, _iou, _err, recon in rows:
                name = f"{_safe_name(img.image_id)}_{_safe_name(inst.id)}_k{deg}.svg"
                _write_text(
                    str(svg_dir / name),
                    render_svg(
                        img.width,
                        img.height,
                        [inst.polygon.vertices],
                        [recon.vertices],
                    ),
                )

    lines = [_config_header(cfg), "k,mean_iou,median_iou,mean_l2"]
    for deg in degrees:
        ious = [row[1] for _, _, rows in results for row in rows if row[0] == deg]
        errs = [row[2] for _, _, rows in results for row in rows if row[0] == deg]
        if not ious:
            raise ParseError("no usable instances in the annotation file")
        lines.append(
            ",".join(
                [
                    str(deg),
                    fmt9(float(np.mean(ious))),
                    fmt9(float(np.median(ious))),
                    fmt9(float(np.mean(errs))),
                ]
            )
        )
    _write_text(args.out, "".join(line + "\n" for line in lines))
    return 0


# ---------------------------------------------------------------------------
# targets / decode / loss


_TENSOR_KEYS = ("tr", "tcr", "reg", "weight", "care")


def cmd_targets(args, cfg: Config) -> int:
    images = _parse_annotations(args.annotations)
    dirnames = _safe_dir_names(images)
    out_root = Path(args.out_dir)
    out_root.mkdir(parents=True, exist_ok=True)

    def one(img):
        maps = generate_targets(
            img, cfg.levels, k=cfg.k, n=cfg.n, shrink_factor=cfg.shrink_factor
        )
        img_dir = out_root / dirnames[img.image_id]
        img_dir.mkdir(parents=True, exist_ok=True)
        level_meta = []
        for name, lt in maps.levels.items():
            write_tensor(img_dir / f"{name}_tr.fct", lt.tr)
            write_tensor(img_dir / f"{name}_tcr.fct", lt.tcr)
            write_tensor(img_dir / f"{name}_reg.fct", lt.regression)
            write_tensor(img_dir / f"{name}_weight.fct", lt.weight)
            write_tensor(img_dir / f"{name}_care.fct", lt.care)
            level_meta.append(
                {
                    "name": name,
                    "stride": lt.spec.stride,
                    "low": round9(lt.spec.low),
                    "high": round9(lt.spec.high),
                    "height": int(lt.shape[0]),
                    "width": int(lt.shape[1]),
                }
            )
        meta = {
            "image_id": maps.image_id,
            "width": maps.width,
            "height": maps.height,
            "k": maps.k,
            "n": cfg.n,
            "shrink_factor": round9(cfg.shrink_factor),
            "levels": level_meta,
            "skipped": [[inst_id, reason] for inst_id, reason in maps.skipped],
        }
        _write_text(str(img_dir / "meta.json"), json_line(meta) + "\n")
        return maps.skipped

    skipped = _pmap(one, images, args.jobs)
    total_skipped = sum(len(s) for s in skipped)
    if total_skipped:
        print(f"warning: skipped {total_skipped} degenerate instances", file=sys.stderr)
    return 0


def _load_prediction_dir(img_dir: Path) -> PredictionMaps:
    meta = json.loads((img_dir / "meta.json").read_text(encoding="utf-8"))
    maps = PredictionMaps(meta["image_id"], meta["width"], meta["height"])
    for entry in meta["levels"]:
        name = entry["name"]
        maps.levels[name] = LevelPrediction(
            name=name,
            stride=int(entry["stride"]),
            tr_prob=read_tensor(img_dir / f"{name}_tr.fct"),
            tcr_prob=read_tensor(img_dir / f"{name}_tcr.fct"),
            regression=read_tensor(img_dir / f"{name}_reg.fct"),
        )
    return maps


def _map_dirs(root: str) -> list[Path]:
    base = Path(root)
    if not base.is_dir():
        raise ParseError(f"not a directory: {root}")
    dirs = sorted(p for p in base.iterdir() if p.is_dir() and (p / "meta.json").is_file())
    if not dirs:
        raise ParseError(f"no map directories with meta.json under {root}")
    return dirs


def cmd_decode(args, cfg: Config) -> int:
    def one(img_dir: Path) -> list[str]:
        maps = _load_prediction_dir(img_dir)
        detections = decode_all(
            maps,
            score_thresh=cfg.score_thresh,
            nms_iou=cfg.nms_iou,
            n_points=cfg.n_prime,
            supersample=cfg.iou_supersample,
        )
        return [
            json_line(
                {
                    "image_id": maps.image_id,
                    "level": det.level,
                    "score": round9(det.score),
                    "points": [round9(v) for v in det.contour.flat()],
                }
            )
            for det in detections
        ]

    blocks = _pmap(one, _map_dirs(args.maps_dir), args.jobs)
    _write_text(args.out, "".join(line + "\n" for block in blocks for line in block))
    return 0


def _image_loss(gt_dir: Path, pred_dir: Path, cfg: Config):
    meta = json.loads((gt_dir / "meta.json").read_text(encoding="utf-8"))
    tr_sum = tr_cnt = tcr_sum = tcr_cnt = reg_sum = reg_px = 0.0
    for entry in meta["levels"]:
        name = entry["name"]
        gt_tr = read_tensor(gt_dir / f"{name}_tr.fct").astype(np.float64)
        gt_tcr = read_tensor(gt_dir / f"{name}_tcr.fct").astype(np.float64)
        gt_reg = read_tensor(gt_dir / f"{name}_reg.fct").astype(np.float64)
        gt_care = read_tensor(gt_dir / f"{name}_care.fct").astype(np.float64)
        pr_tr = read_tensor(pred_dir / f"{name}_tr.fct").astype(np.float64)
        pr_tcr = read_tensor(pred_dir / f"{name}_tcr.fct").astype(np.float64)
        pr_reg = read_tensor(pred_dir / f"{name}_reg.fct").astype(np.float64)
        if pr_tr.shape != gt_tr.shape or pr_reg.shape != gt_reg.shape:
            raise ParseError(
                f"{pred_dir.name}/{name}: prediction shapes do not match targets"
            )
        care = gt_care.ravel() > 0.5
        losses = cross_entropy(pr_tr.ravel()[care], gt_tr.ravel()[care])
        positives = gt_tr.ravel()[care] == 1.0
        selected = ohem_select(losses, positives, OHEM_RATIO)
        tr_sum += float(losses[selected].sum())
        tr_cnt += int(selected.sum())
        domain = (gt_tr == 1.0) & (gt_care > 0.5)
        if domain.any():
            tcr_losses = cross_entropy(pr_tcr[domain], gt_tcr[domain])
            tcr_sum += float(tcr_losses.sum())
            tcr_cnt += int(domain.sum())
            reg_sum += regression_loss(
                gt_reg[:, domain].T,
                pr_reg[:, domain].T,
                gt_tcr[domain] == 1.0,
                n_points=cfg.n_prime,
            )
            reg_px += int(domain.sum())
    return tr_sum, tr_cnt, tcr_sum, tcr_cnt, reg_sum, reg_px


def cmd_loss(args, cfg: Config) -> int:
    gt_dirs = _map_dirs(args.gt_dir)
    pred_root = Path(args.pred_dir)

    def one(gt_dir: Path):
        pred_dir = pred_root / gt_dir.name
        if not (pred_dir / "meta.json").is_file():
            raise ParseError(f"missing prediction directory {pred_dir}")
        return _image_loss(gt_dir, pred_dir, cfg)

    rows = _pmap(one, gt_dirs, args.jobs)
    tr_sum = sum(r[0] for r in rows)
    tr_cnt = sum(r[1] for r in rows)
    tcr_sum = sum(r[2] for r in rows)
    tcr_cnt = sum(r[3] for r in rows)
    reg_sum = sum(r[4] for r in rows)
    reg_px = sum(r[5] for r in rows)
    l_tr = tr_sum / tr_cnt if tr_cnt else 0.0
    l_tcr = tcr_sum / tcr_cnt if tcr_cnt else 0.0
    breakdown = total_loss(l_tr, l_tcr, reg_sum, cfg.lam)
    report = {
        "l_tr": breakdown.l_tr,
        "l_tcr": breakdown.l_tcr,
        "l_reg": breakdown.l_reg,
        "lambda": breakdown.lam,
        "total": breakdown.total,
        "pixels": {
            "tr_selected": int(tr_cnt),
            "tcr_domain": int(tcr_cnt),
            "regression": int(reg_px),
        },
        "config": cfg.to_dict(),
    }
    _write_text(args.out, json_line(report) + "\n")
    return 0


# ---------------------------------------------------------------------------
# eval / subset / plot


def _load_detections(path: str) -> dict[str, list[Detection]]:
    grouped: dict[str, list[Detection]] = {}
    for lineno, line in enumerate(_read_lines(path), start=1):
        if not line.strip():
            continue
        try:
            obj = json.loads(line)
            image_id = obj["image_id"]
            score = float(obj["score"])
            contour = Contour.from_flat(obj["points"])
        except (json.JSONDecodeError, KeyError, TypeError, ValueError) as exc:
            raise ParseError(f"bad detection record: {exc}", line=lineno) from None
        bucket = grouped.setdefault(image_id, [])
        bucket.append(
            Detection(contour=contour, score=score, level=str(obj.get("level", "")),
                      origin=(0, len(bucket)))
        )
    return grouped


def cmd_eval(args, cfg: Config) -> int:
    images = _parse_annotations(args.annotations)
    grouped = _load_detections(args.detections)
    known = {img.image_id for img in images}
    unknown = sorted(set(grouped) - known)
    if unknown:
        raise ParseError(f"detections reference unknown image ids: {unknown[:5]}")

    def one(img):
        return img.image_id, evaluate(
            grouped.get(img.image_id, []),
            img.instances,
            iou_thresh=cfg.eval_iou,
            supersample=cfg.iou_supersample,
        )

    reports = _pmap(one, images, args.jobs)
    tp = sum(r.tp for _, r in reports)
    fp = sum(r.fp for _, r in reports)
    fn = sum(r.fn for _, r in reports)
    precision, recall, hmean = fmeasure(tp, fp, fn)
    report = {
        "precision": precision,
        "recall": recall,
        "hmean": hmean,
        "tp": tp,
        "fp": fp,
        "fn": fn,
        "images": len(images),
        "iou_thresh": cfg.eval_iou,
        "per_image": [
            {
                "image_id": image_id,
                "tp": r.tp,
                "fp": r.fp,
                "fn": r.fn,
                "matches": [
                    {"det": m.det_index, "gt": m.gt_id, "iou": m.iou}
                    for m in r.matches
                ],
            }
            for image_id, r in reports
        ],
        "config": cfg.to_dict(),
    }
    _write_text(args.out, json_line(report) + "\n")
    if args.csv:
        csv_lines = [
            _config_header(cfg),
            "precision,recall,hmean,tp,fp,fn",
            ",".join([fmt9(precision), fmt9(recall), fmt9(hmean), str(tp), str(fp), str(fn)]),
        ]
        _write_text(args.csv, "".join(line + "\n" for line in csv_lines))
    return 0


def cmd_subset(args, cfg: Config) -> int:
    images = _parse_annotations(args.annotations)
    kept_images = []
    for img in images:
        selected = curved_subset_select(
            [inst for inst in img.instances if not inst.ignore],
            cfg.subset_threshold,
        )
        if not selected:
            continue
        carried = tuple(selected) + tuple(
            inst for inst in img.instances if inst.ignore
        )
        kept_images.append(
            type(img)(img.image_id, img.width, img.height, carried)
        )
    _write_text(
        args.out, "".join(line + "\n" for line in write_jsonl(kept_images, fmt=round9))
    )
    return 0


def cmd_plot(args, cfg: Config) -> int:
    images = _parse_annotations(args.annotations)
    dirnames = _safe_dir_names(images)
    grouped = _load_detections(args.detections) if args.detections else None
    out_root = Path(args.out_dir)
    out_root.mkdir(parents=True, exist_ok=True)
    degree = args.degree if args.degree else cfg.k
    if 2 * degree + 1 > cfg.n:
        raise ConfigError(f"degree {degree} too large for n = {cfg.n}")

    def one(img):
        green = [
            inst.polygon.vertices for inst in img.instances if not inst.ignore
        ]
        if grouped is not None:
            red = [det.contour.vertices for det in grouped.get(img.image_id, [])]
        else:
            red = [
                reconstruct(
                    fourier_coefficients(
                        resample_equidistant(inst.polygon, cfg.n), degree
                    ),
                    cfg.n_prime,
                ).vertices
                for inst in img.instances
                if not inst.ignore
            ]
        _write_text(
            str(out_root / f"{dirnames[img.image_id]}.svg"),
            render_svg(img.width, img.height, green, red),
        )

    _pmap(one, images, args.jobs)
    return 0


# ---------------------------------------------------------------------------
# parser and entry point


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="fctool",
        description="Fourier contour embedding toolkit for text shapes",
    )
    parser.add_argument("--config", help="flat key = value configuration file")
    parser.add_argument(
        "--set",
        dest="overrides",
        action="append",
        default=[],
        metavar="KEY=VALUE",
        help="override one configuration key (repeatable)",
    )
    parser.add_argument(
        "--jobs", type=int, default=1, help="worker threads for per-image work"
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("embed", help="signatures of annotated contours")
    p.add_argument("annotations")
    p.add_argument("-o", "--out", default="-")
    p.set_defaults(func=cmd_embed)

    p = sub.add_parser("reconstruct", help="contours from signature records")
    p.add_argument("signatures")
    p.add_argument("-o", "--out", default="-")
    p.set_defaults(func=cmd_reconstruct)

    p = sub.add_parser("fidelity", help="reconstruction quality sweep over degrees")
    p.add_argument("annotations")
    p.add_argument("--degrees", default="", help="comma list, e.g. 3,5,10")
    p.add_argument("--svg-dir", default="", help="write per-instance overlays here")
    p.add_argument("-o", "--out", default="-")
    p.set_defaults(func=cmd_fidelity)

    p = sub.add_parser("targets", help="ground-truth tensor maps per image")
    p.add_argument("annotations")
    p.add_argument("--out-dir", required=True)
    p.set_defaults(func=cmd_targets)

    p = sub.add_parser("decode", help="detections from prediction tensor maps")
    p.add_argument("--maps-dir", required=True)
    p.add_argument("-o", "--out", default="-")
    p.set_defaults(func=cmd_decode)

    p = sub.add_parser("loss", help="loss breakdown of predictions against targets")
    p.add_argument("--gt-dir", required=True)
    p.add_argument("--pred-dir", required=True)
    p.add_argument("-o", "--out", default="-")
    p.set_defaults(func=cmd_loss)

    p = sub.add_parser("eval", help="precision/recall/hmean of detections")
    p.add_argument("--detections", required=True)
    p.add_argument("--annotations", required=True)
    p.add_argument("-o", "--out", default="-")
    p.add_argument("--csv", default="", help="also write a CSV summary row here")
    p.set_defaults(func=cmd_eval)

    p = sub.add_parser("subset", help="filter annotations to curved instances")
    p.add_argument("annotations")
    p.add_argument("-o", "--out", default="-")
    p.set_defaults(func=cmd_subset)

    p = sub.add_parser("plot", help="SVG overlays of annotations and fits")
    p.add_argument("annotations")
    p.add_argument("--detections", default="")
    p.add_argument("--degree", type=int, default=0)
    p.add_argument("--out-dir", required=True)
    p.set_defaults(func=cmd_plot)

    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        cfg = load_config(args.config) if args.config else Config()
        cfg = apply_overrides(cfg, args.overrides)
        if args.jobs < 1:
            raise ConfigError(f"--jobs must be >= 1, got {args.jobs}")
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 3
    try:
        return args.func(args, cfg)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 3
    except _INPUT_ERRORS as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
