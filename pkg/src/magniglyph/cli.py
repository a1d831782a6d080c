"""Command-line front door: magnify, generate, evaluate.

Exit codes: 0 success, 1 validation failure, 2 I/O failure.  Identical
argument vectors and inputs produce byte-identical outputs; ``--jobs``
(default from ``MAGNIGLYPH_JOBS``) only controls worker count.
"""

from __future__ import annotations

import json
import sys
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path

import click

from .annotations import AnnotationError, load_annotations
from .datasetgen import (SynthSpec, generate_dataset, load_manifest,
                         read_pack, synth_scene, validate_pack)
from .eraser import InpaintConfig, erase_text
from .annotations import extract_components
from .magnifier import (STRATEGIES, MagnifyConfig, detection_paste_baseline,
                        magnify_scene)
from .metrics import EvalReport, evaluate
from .raster import load_raster, save_mask, save_raster

EXIT_OK = 0
EXIT_VALIDATION = 1
EXIT_IO = 2


def _fail(code: int, stage: str, message: str):
    click.echo(f"error [{stage}]: {message}", err=True)
    sys.exit(code)


def _jobs_default() -> int:
    import os

    try:
        return max(1, int(os.environ.get("MAGNIGLYPH_JOBS", "1")))
    except ValueError:
        return 1


@click.group()
def main():
    """Scene-text magnification toolkit."""


def _inpaint_options(fn):
    fn = click.option("--max-iterations", type=int, default=2000,
                      show_default=True, help="Inpainting sweep budget.")(fn)
    fn = click.option("--tolerance", type=float, default=0.05,
                      show_default=True,
                      help="Per-sweep convergence threshold.")(fn)
    fn = click.option("--dilation-radius", type=int, default=1,
                      show_default=True,
                      help="Mask dilation before inpainting.")(fn)
    return fn


def _load_scene(input_path: Path, annotations_path: Path):
    scenes = load_annotations(annotations_path)
    stem = input_path.stem
    for scene in scenes:
        if scene.image_id == stem or (
                scene.image_path and Path(scene.image_path).name == input_path.name):
            return scene
    if len(scenes) == 1:
        return scenes[0]
    raise AnnotationError(
        f"no annotation record matches {input_path.name!r} "
        f"(ids: {[s.image_id for s in scenes]})")


@main.command("magnify")
@click.option("--input", "input_path", required=True,
              type=click.Path(path_type=Path), help="Input PNG image.")
@click.option("--annotations", "ann_path", required=True,
              type=click.Path(path_type=Path), help="Annotation document.")
@click.option("--rate", type=float, default=1.2, show_default=True)
@click.option("--strategy", type=click.Choice(STRATEGIES),
              default="component-center", show_default=True)
@click.option("--out", "out_path", required=True,
              type=click.Path(path_type=Path), help="Output PNG path.")
@click.option("--emit-intermediates", "inter_dir",
              type=click.Path(path_type=Path), default=None,
              help="Directory for erased/component/mask side outputs.")
@_inpaint_options
def cmd_magnify(input_path, ann_path, rate, strategy, out_path, inter_dir,
                max_iterations, tolerance, dilation_radius):
    """Magnify annotated characters in one image."""
    try:
        cfg = MagnifyConfig(rate=rate, strategy=strategy,
                            inpaint=InpaintConfig(max_iterations=max_iterations,
                                                  tolerance=tolerance,
                                                  dilation_radius=dilation_radius))
    except ValueError as e:
        _fail(EXIT_VALIDATION, "config", str(e))
    try:
        image = load_raster(input_path)
    except OSError as e:
        _fail(EXIT_IO, "load-image", str(e))
    try:
        scene = _load_scene(input_path, ann_path)
    except AnnotationError as e:
        _fail(EXIT_VALIDATION, "annotations", str(e))
    except OSError as e:
        _fail(EXIT_IO, "annotations", str(e))

    try:
        result = magnify_scene(image, scene, cfg)
    except ValueError as e:
        _fail(EXIT_VALIDATION, "magnify", str(e))
    try:
        save_raster(result.image, out_path)
        if inter_dir is not None:
            erased = erase_text(image, scene, cfg.inpaint)
            component, union = extract_components(image, scene)
            save_raster(erased, inter_dir / "erased.png")
            save_raster(component, inter_dir / "component.png")
            save_mask(union, inter_dir / "component_mask.png")
            save_mask(result.magnified_union_mask,
                      inter_dir / "magnified_mask.png")
    except OSError as e:
        _fail(EXIT_IO, "write", str(e))
    sys.exit(EXIT_OK)


@main.command("generate")
@click.option("--corpus", "corpus_path", type=click.Path(path_type=Path),
              default=None, help="Annotation document for a real corpus.")
@click.option("--synthetic", "synth_path", type=click.Path(path_type=Path),
              default=None, help="Synthetic corpus spec (JSON).")
@click.option("--rates", default="1.2,1.5", show_default=True,
              help="Comma-separated magnification rates.")
@click.option("--split", "split_fraction", type=float, default=0.9,
              show_default=True, help="Train fraction.")
@click.option("--seed", type=int, default=0, show_default=True)
@click.option("--jobs", type=int, default=None,
              help="Worker count (default $MAGNIGLYPH_JOBS or 1).")
@click.option("--out", "out_dir", required=True,
              type=click.Path(path_type=Path))
@_inpaint_options
def cmd_generate(corpus_path, synth_path, rates, split_fraction, seed, jobs,
                 out_dir, max_iterations, tolerance, dilation_radius):
    """Generate sample packs from a corpus or a synthetic spec."""
    if (corpus_path is None) == (synth_path is None):
        _fail(EXIT_VALIDATION, "config",
              "exactly one of --corpus / --synthetic is required")
    try:
        rate_list = [float(r) for r in rates.split(",") if r]
        if not rate_list or any(r <= 0 for r in rate_list):
            raise ValueError(f"invalid rates {rates!r}")
    except ValueError as e:
        _fail(EXIT_VALIDATION, "config", str(e))
    jobs = jobs if jobs is not None else _jobs_default()
    cfg = MagnifyConfig(inpaint=InpaintConfig(max_iterations=max_iterations,
                                              tolerance=tolerance,
                                              dilation_radius=dilation_radius))

    corpus = []
    try:
        if synth_path is not None:
            corpus = build_synthetic_corpus(
                json.loads(synth_path.read_text(encoding="utf-8")))
        else:
            base = corpus_path.parent
            for scene in load_annotations(corpus_path):
                if not scene.image_path:
                    raise AnnotationError(
                        f"image {scene.image_id!r}: missing image path")
                corpus.append((load_raster(base / scene.image_path), scene))
    except (AnnotationError, ValueError) as e:
        _fail(EXIT_VALIDATION, "corpus", str(e))
    except OSError as e:
        _fail(EXIT_IO, "corpus", str(e))

    try:
        manifest = generate_dataset(corpus, rate_list, split_fraction,
                                    out_dir, seed=seed, jobs=jobs, cfg=cfg)
    except ValueError as e:
        _fail(EXIT_VALIDATION, "generate", str(e))
    except OSError as e:
        _fail(EXIT_IO, "generate", str(e))
    n_train = sum(1 for p in manifest["packs"] if p["split"] == "train")
    click.echo(f"wrote {len(manifest['packs'])} packs "
               f"({n_train} train / {len(manifest['packs']) - n_train} test) "
               f"to {out_dir}")
    sys.exit(EXIT_OK)


def build_synthetic_corpus(spec_doc: dict):
    """Expand a synthetic corpus spec into (image, annotation, plate) tuples.

    Spec keys: ``count``, ``base_seed``, and any SynthSpec field.
    """
    count = int(spec_doc.get("count", 10))
    base_seed = int(spec_doc.get("base_seed", 0))
    fields = {k: v for k, v in spec_doc.items()
              if k not in ("count", "base_seed")}
    for key in ("image_size", "char_count", "glyph_height", "bg_range",
                "fg_range"):
        if key in fields:
            fields[key] = tuple(fields[key])
    corpus = []
    for i in range(count):
        spec = SynthSpec(seed=base_seed + i, **fields)
        corpus.append(synth_scene(spec))
    return corpus


def _pack_pairs(gt_dir: Path, pred_dir: Path | None, region_kind: str,
                split: str | None, compare_strategy: str | None,
                inpaint: InpaintConfig):
    """Assemble (image_id, pred, gt, regions) tuples for evaluate()."""
    manifest = load_manifest(gt_dir)
    pairs = []
    for entry in manifest["packs"]:
        if split and entry["split"] != split:
            continue
        pack = read_pack(gt_dir / entry["dir"])
        gt = pack.magnified_scene
        boxes = (pack.magnified_bboxes if region_kind == "magnified"
                 else pack.original_bboxes)
        regions = [b for b in boxes if b is not None]
        if compare_strategy is not None:
            if pack.annotation is None:
                raise ValueError(
                    f"pack {entry['id']!r} has no annotation; cannot re-run "
                    "the pipeline for --compare")
            if compare_strategy == "detection-paste":
                pred = detection_paste_baseline(pack.original, pack.annotation,
                                                pack.rate)
            else:
                cfg = MagnifyConfig(rate=pack.rate, strategy=compare_strategy,
                                    inpaint=inpaint)
                pred = magnify_scene(pack.original, pack.annotation, cfg).image
        else:
            candidates = [pred_dir / f"{entry['id']}.png",
                          pred_dir / entry["id"] / "magnified.png"]
            path = next((p for p in candidates if p.is_file()), None)
            if path is None:
                raise FileNotFoundError(
                    f"no prediction found for image_id {entry['id']!r} "
                    f"(looked for {candidates[0]})")
            pred = load_raster(path)
        pairs.append((entry["id"], pred, gt, regions))
    return pairs


@main.command("evaluate")
@click.option("--pred", "pred_dir", type=click.Path(path_type=Path),
              default=None, help="Directory of predicted PNGs (<pack_id>.png).")
@click.option("--gt", "gt_dir", required=True,
              type=click.Path(path_type=Path),
              help="Dataset directory with manifest.json.")
@click.option("--regions", "region_kind",
              type=click.Choice(["magnified", "original"]),
              default="magnified", show_default=True)
@click.option("--pooling", type=click.Choice(["pooled", "per-image"]),
              default="pooled", show_default=True)
@click.option("--split", type=click.Choice(["train", "test"]), default=None,
              help="Restrict to one split (default: all packs).")
@click.option("--compare", is_flag=True,
              help="Ignore --pred; evaluate the component-center oracle and "
                   "the detection-paste baseline in one run.")
@click.option("--out", "out_path", type=click.Path(path_type=Path),
              default=None, help="Report JSON path (CSV written alongside).")
@click.option("--jobs", type=int, default=None,
              help="Worker count (default $MAGNIGLYPH_JOBS or 1).")
@_inpaint_options
def cmd_evaluate(pred_dir, gt_dir, region_kind, pooling, split, compare,
                 out_path, jobs, max_iterations, tolerance, dilation_radius):
    """Regional-SSIM evaluation against a generated dataset."""
    if not compare and pred_dir is None:
        _fail(EXIT_VALIDATION, "config", "--pred is required without --compare")
    inpaint = InpaintConfig(max_iterations=max_iterations, tolerance=tolerance,
                            dilation_radius=dilation_radius)
    jobs = jobs if jobs is not None else _jobs_default()
    strategies = (["component-center", "detection-paste"] if compare
                  else [None])
    try:
        reports = {}
        for strat in strategies:
            pairs = _pack_pairs(gt_dir, pred_dir, region_kind, split, strat,
                                inpaint)
            if jobs > 1:
                def score(pair):
                    return evaluate([pair], pooling=pooling)
                with ThreadPoolExecutor(max_workers=jobs) as pool:
                    sub = list(pool.map(score, pairs))
                report = _merge_reports(sub, pooling)
            else:
                report = evaluate(pairs, pooling=pooling)
            reports[strat or "pred"] = report
    except (ValueError, AnnotationError) as e:
        _fail(EXIT_VALIDATION, "evaluate", str(e))
    except FileNotFoundError as e:
        _fail(EXIT_VALIDATION, "evaluate", str(e))
    except OSError as e:
        _fail(EXIT_IO, "evaluate", str(e))

    for name, report in reports.items():
        click.echo(f"{name}: {report.grand_mean:.3f}")
    if out_path is not None:
        try:
            if len(reports) == 1:
                report = next(iter(reports.values()))
                out_path.parent.mkdir(parents=True, exist_ok=True)
                out_path.write_text(report.to_json(), encoding="utf-8")
                out_path.with_suffix(".csv").write_text(report.to_csv(),
                                                        encoding="utf-8")
            else:
                out_path.parent.mkdir(parents=True, exist_ok=True)
                for name, report in reports.items():
                    stem = out_path.with_suffix("")
                    Path(f"{stem}_{name}.json").write_text(report.to_json(),
                                                           encoding="utf-8")
                    Path(f"{stem}_{name}.csv").write_text(report.to_csv(),
                                                          encoding="utf-8")
        except OSError as e:
            _fail(EXIT_IO, "write-report", str(e))
    sys.exit(EXIT_OK)


def _merge_reports(reports, pooling: str) -> EvalReport:
    """Combine single-image reports; aggregation is order-independent."""
    import numpy as np

    per_image = tuple(pi for r in reports for pi in r.per_image)
    means = tuple(m for r in reports for m in r.mean_per_image)
    if pooling == "pooled":
        scores = [s.ssim for _, ss in per_image for s in ss]
        grand = float(np.mean(scores)) if scores else float("nan")
    else:
        import math

        finite = [m for m in means if not math.isnan(m)]
        grand = float(np.mean(finite)) if finite else float("nan")
    return EvalReport(per_image=per_image, mean_per_image=means,
                      grand_mean=grand, pooling=pooling)


if __name__ == "__main__":
    main()
