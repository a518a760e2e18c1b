"""Command-line interface.

Every subcommand that builds features accepts the experiment flags, whose
names mirror :class:`fbface.config.ExperimentConfig`.  The default output
directory comes from ``FBFACE_OUTPUT`` when set.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import logging
import os
import sys
import traceback
from pathlib import Path

import numpy as np

from . import __version__
from . import descriptors as desc_io
from .baseline import load_pca, save_pca
from .config import CLASSIFIERS, DESCRIPTOR_VARIANTS, MODES, OCCLUSION_VARIANTS, EyeNoise, ExperimentConfig
from .dataset import ManifestError, ingest, synth_dataset
from .discriminant import ConfigMismatchError, DiscriminantModel, load_model, save_model
from .experiment import TrainedPipeline, features, preprocess, subjects_of, train, verify
from .fbt import FbtConfig
from .svg import write_roc_svg
from .synth import SynthOptions
from .verification import build_roc, read_roc_csv, write_roc_csv

OUTPUT_ENV = "FBFACE_OUTPUT"
INCOMPLETE_MARKER = "INCOMPLETE"
PF_REPORT = 0.10

log = logging.getLogger("fbface")


class CliError(Exception):
    pass


def default_output_dir() -> str:
    return os.environ.get(OUTPUT_ENV, ExperimentConfig.output_dir)


def sha256_file(path) -> str:
    h = hashlib.sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(1 << 20), b""):
            h.update(chunk)
    return h.hexdigest()


def add_config_flags(p: argparse.ArgumentParser) -> None:
    g = p.add_argument_group("experiment configuration")
    g.add_argument("--mode", choices=MODES, default="global")
    g.add_argument("--fbt-max-order", type=int, default=FbtConfig.max_order)
    g.add_argument("--fbt-max-root", type=int, default=FbtConfig.max_root)
    g.add_argument("--fbt-angular-step", type=float, default=FbtConfig.angular_step)
    g.add_argument("--fbt-radial-samples", type=int, default=None)
    g.add_argument("--occlusion", choices=OCCLUSION_VARIANTS, default=None)
    g.add_argument("--eye-noise", action="store_true", help="perturb eye coordinates before registration")
    g.add_argument("--eye-noise-mean", type=float, default=EyeNoise.mean)
    g.add_argument("--eye-noise-sd", type=float, default=EyeNoise.sd)
    g.add_argument("--eye-noise-seed", type=int, default=EyeNoise.seed)
    g.add_argument("--eye-noise-shared", type=float, default=EyeNoise.shared)
    g.add_argument("--classifier", choices=CLASSIFIERS, default="pfld")
    g.add_argument("--descriptor-variant", choices=tuple(DESCRIPTOR_VARIANTS), default="raw_372")
    g.add_argument("--output-dir", default=None, help=f"default: ${OUTPUT_ENV} or {ExperimentConfig.output_dir}")
    g.add_argument("--pca-sample-size", type=int, default=None)
    g.add_argument("--pca-drop-leading", type=int, default=ExperimentConfig.pca_drop_leading)
    g.add_argument("--pca-seed", type=int, default=ExperimentConfig.pca_seed)
    g.add_argument("--workers", type=int, default=1)


def config_from_args(args) -> ExperimentConfig:
    fbt = FbtConfig(
        max_order=args.fbt_max_order,
        max_root=args.fbt_max_root,
        angular_step=args.fbt_angular_step,
        radial_samples=args.fbt_radial_samples,
    )
    noise = None
    if args.eye_noise:
        noise = EyeNoise(args.eye_noise_mean, args.eye_noise_sd, args.eye_noise_seed, args.eye_noise_shared)
    return ExperimentConfig(
        mode=args.mode,
        fbt=fbt,
        occlusion=args.occlusion,
        eye_noise=noise,
        classifier=args.classifier,
        descriptor_variant=args.descriptor_variant,
        output_dir=args.output_dir or default_output_dir(),
        pca_sample_size=args.pca_sample_size,
        pca_drop_leading=args.pca_drop_leading,
        pca_seed=args.pca_seed,
        workers=args.workers,
    )


def _output(config: ExperimentConfig) -> Path:
    out = Path(config.output_dir)
    try:
        out.mkdir(parents=True, exist_ok=True)
    except OSError as exc:
        raise CliError(f"cannot create output directory {out}: {exc}") from exc
    return out


def _write_descriptors(out: Path, name: str, samples, rows, config: ExperimentConfig, binary: bool = True) -> list:
    ids = [s.image_id for s in samples]
    settings = config.feature_settings()
    written = [out / f"{name}.csv"]
    desc_io.write_csv(written[0], ids, rows, settings)
    if binary:
        desc_io.write_binary(out / f"{name}.f8", rows)
        sidecar = {"ids": ids, "shape": list(np.shape(rows)), "dtype": "<f8", "settings": settings}
        (out / f"{name}.json").write_text(json.dumps(sidecar, indent=1, sort_keys=True) + "\n")
        written += [out / f"{name}.f8", out / f"{name}.json"]
    return written


def _save_pipeline(pipeline: TrainedPipeline, path: Path) -> None:
    if isinstance(pipeline.model, DiscriminantModel):
        save_model(pipeline.model, path, pipeline.gallery_features)
    else:
        save_pca(pipeline.model, path, pipeline.gallery_features, pipeline.gallery_labels, pipeline.config.fingerprint())


def _load_pipeline(path, config: ExperimentConfig) -> TrainedPipeline:
    """Rebuild a trained pipeline, refusing models trained under other feature settings."""
    try:
        model, train_rows = load_model(path)
    except ValueError as first:
        try:
            model, gallery, meta = load_pca(path)
        except ValueError:
            raise CliError(str(first)) from None
        if meta.get("fingerprint") and meta["fingerprint"] != config.fingerprint():
            raise ConfigMismatchError(f"model was trained with config {meta['fingerprint']}, probe uses {config.fingerprint()}")
        labels = meta["labels"]
        subjects = list(dict.fromkeys(labels))
        return TrainedPipeline(config, subjects, gallery, labels, model)
    model.check_fingerprint(config.fingerprint())
    if train_rows is None:
        raise CliError(f"{path}: model container lacks training descriptors")
    return TrainedPipeline(config, list(model.subject_ids), train_rows, [], model)


def _report(roc) -> str:
    return f"P_V at P_F<={PF_REPORT:.2f}: {roc.pv_at_pf(PF_REPORT):.4f}  EER: {roc.eer():.4f}"


# commands


def cmd_synth(args) -> int:
    out = Path(args.output_dir or default_output_dir())
    options = SynthOptions(expression=args.expression, eye_detail=args.eye_detail)
    manifest = synth_dataset(out, args.subjects, args.images_per_subject, args.noise_sd, args.seed, options)
    print(f"wrote {len(manifest.entries)} images to {out} (manifest {out / 'manifest.csv'})")
    return 0


def cmd_ingest_check(args) -> int:
    manifest = ingest(args.manifest, args.eyes)
    counts = {}
    for e in manifest.entries:
        counts[e.partition] = counts.get(e.partition, 0) + 1
    print(f"{len(manifest.entries)} entries: " + ", ".join(f"{k}={v}" for k, v in sorted(counts.items())))
    for image_id in manifest.flagged:
        print(f"flagged {image_id}: no eye coordinates, using the mean of located faces")
    return 0


def cmd_extract(args) -> int:
    config = config_from_args(args)
    out = _output(config)
    manifest = ingest(args.manifest, args.eyes)
    pre = preprocess(manifest, config)
    for name, samples, occluded in (("gallery", pre.gallery, False), ("probes", pre.probes, True)):
        if args.partition not in ("all", name) or not samples:
            continue
        rows = features(samples, config, occluded=occluded)
        for path in _write_descriptors(out, f"descriptors_{name}", samples, rows, config, binary=args.format == "both"):
            print(f"wrote {path}")
    for image_id, reason in pre.excluded:
        print(f"excluded {image_id}: {reason}")
    return 0


def cmd_train(args) -> int:
    config = config_from_args(args)
    out = _output(config)
    manifest = ingest(args.manifest, args.eyes)
    pre = preprocess(manifest, config)
    if len(subjects_of(pre.gallery)) < 2:
        raise CliError("the gallery needs at least two subjects")
    pipeline = train(pre.gallery, config)
    path = Path(args.model) if args.model else out / "model.npz"
    _save_pipeline(pipeline, path)
    print(f"trained {config.classifier} on {len(pre.gallery)} gallery images ({config.fingerprint()}); wrote {path}")
    return 0


def cmd_verify(args) -> int:
    config = config_from_args(args)
    out = _output(config)
    pipeline = _load_pipeline(args.model, config)
    manifest = ingest(args.manifest, args.eyes)
    pre = preprocess(manifest, config)
    run = verify(pipeline, pre.probes)
    roc = build_roc(run)
    write_roc_csv(roc, out / "roc.csv")
    for image_id, reason in pre.excluded + run.excluded:
        print(f"excluded {image_id}: {reason}")
    print(_report(roc))
    print(f"wrote {out / 'roc.csv'}")
    return 0


def cmd_roc_plot(args) -> int:
    curves = [(Path(p).parent.name or Path(p).stem, read_roc_csv(p)) for p in args.roc]
    if args.labels:
        if len(args.labels) != len(curves):
            raise CliError("give one label per ROC file")
        curves = [(label, roc) for label, (_, roc) in zip(args.labels, curves)]
    write_roc_svg(args.out, curves, args.title)
    print(f"wrote {args.out}")
    return 0


def run_pipeline(manifest_path, config: ExperimentConfig, eyes_path=None) -> dict:
    """Execute the whole pipeline into ``config.output_dir`` and return the run manifest.

    An ``INCOMPLETE`` marker sits in the output directory until every
    artifact is written; on failure it records the error.
    """
    out = _output(config)
    marker = out / INCOMPLETE_MARKER
    marker.write_text("run in progress\n")
    record = {
        "tool": f"fbface {__version__}",
        "status": "running",
        "config": config.as_dict(),
        "config_fingerprint": config.fingerprint(),
        "seeds": {
            "eye_noise": None if config.eye_noise is None else config.eye_noise.seed,
            "pca": config.pca_seed if config.classifier == "pca_baseline" else None,
        },
    }
    try:
        manifest = ingest(manifest_path, eyes_path)
        eyes_file = Path(eyes_path) if eyes_path else manifest.root / "eyes.csv"
        record["inputs"] = {
            "manifest": {"path": str(manifest_path), "sha256": sha256_file(manifest_path)},
            "eyes": {"path": str(eyes_file), "sha256": sha256_file(eyes_file)} if eyes_file.exists() else None,
            "images": {e.image_id: sha256_file(e.path) for e in sorted(manifest.entries, key=lambda e: e.image_id)},
        }
        pre = preprocess(manifest, config)
        gallery_rows = features(pre.gallery, config)
        probe_rows = features(pre.probes, config, occluded=True)
        descriptor_dir = out / "descriptors"
        descriptor_dir.mkdir(exist_ok=True)
        _write_descriptors(descriptor_dir, "gallery", pre.gallery, gallery_rows, config)
        _write_descriptors(descriptor_dir, "probes", pre.probes, probe_rows, config)
        if len(subjects_of(pre.gallery)) < 2:
            raise CliError("the gallery needs at least two subjects")
        pipeline = train(pre.gallery, config, gallery_rows)
        _save_pipeline(pipeline, out / "model.npz")
        run = verify(pipeline, pre.probes, probe_rows)
        roc = build_roc(run)
        write_roc_csv(roc, out / "roc.csv")
        label = f"{config.classifier} {config.mode}" if config.classifier == "pfld" else config.classifier
        write_roc_svg(out / "roc.svg", [(label, roc)], title="verification ROC")
        record["excluded"] = (
            [{"image_id": i, "reason": "no eye coordinates; filled with mean of located faces"} for i in manifest.flagged]
            + [{"image_id": i, "reason": r} for i, r in pre.excluded + run.excluded]
        )
        record["results"] = {
            "probes": len(run.probe_ids),
            "gallery_subjects": len(run.gallery_ids),
            "pv_at_pf_0.10": roc.pv_at_pf(PF_REPORT),
            "eer": roc.eer(),
        }
        record["outputs"] = {
            name: sha256_file(out / name) for name in ("roc.csv", "roc.svg", "model.npz")
        }
        record["status"] = "complete"
    except BaseException as exc:
        record["status"] = "failed"
        record["error"] = f"{type(exc).__name__}: {exc}"
        marker.write_text(f"run failed; artifacts in this directory are partial\n{record['error']}\n")
        (out / "run_manifest.json").write_text(json.dumps(record, indent=1, sort_keys=True) + "\n")
        raise
    (out / "run_manifest.json").write_text(json.dumps(record, indent=1, sort_keys=True) + "\n")
    marker.unlink()
    return record


def cmd_run(args) -> int:
    config = config_from_args(args)
    record = run_pipeline(args.manifest, config, args.eyes)
    r = record["results"]
    print(f"P_V at P_F<={PF_REPORT:.2f}: {r['pv_at_pf_0.10']:.4f}  EER: {r['eer']:.4f}")
    for item in record["excluded"]:
        print(f"excluded {item['image_id']}: {item['reason']}")
    print(f"artifacts in {config.output_dir}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="fbface", description="Fourier-Bessel face verification experiments")
    parser.add_argument("--version", action="version", version=f"fbface {__version__}")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("synth", help="write a synthetic face dataset")
    p.add_argument("--subjects", type=int, default=20)
    p.add_argument("--images-per-subject", type=int, default=5)
    p.add_argument("--noise-sd", type=float, default=0.02)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--expression", type=float, default=SynthOptions.expression)
    p.add_argument("--eye-detail", type=int, default=SynthOptions.eye_detail)
    p.add_argument("--output-dir", default=None)
    p.set_defaults(func=cmd_synth)

    p = sub.add_parser("ingest-check", help="validate a dataset manifest")
    p.add_argument("manifest")
    p.add_argument("--eyes", default=None, help="eye sidecar (default: eyes.csv next to the manifest)")
    p.set_defaults(func=cmd_ingest_check)

    p = sub.add_parser("extract", help="write descriptors for a manifest")
    p.add_argument("manifest")
    p.add_argument("--eyes", default=None)
    p.add_argument("--partition", choices=("all", "gallery", "probes"), default="all")
    p.add_argument("--format", choices=("csv", "both"), default="both", help="CSV only, or CSV plus float64 binary")
    add_config_flags(p)
    p.set_defaults(func=cmd_extract)

    p = sub.add_parser("train", help="train on the gallery partition")
    p.add_argument("manifest")
    p.add_argument("--eyes", default=None)
    p.add_argument("--model", default=None, help="model path (default: OUTPUT_DIR/model.npz)")
    add_config_flags(p)
    p.set_defaults(func=cmd_train)

    p = sub.add_parser("verify", help="score probes with a trained model and write the ROC")
    p.add_argument("manifest")
    p.add_argument("--model", required=True)
    p.add_argument("--eyes", default=None)
    add_config_flags(p)
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("roc-plot", help="render ROC CSV files as SVG")
    p.add_argument("roc", nargs="+")
    p.add_argument("--out", required=True)
    p.add_argument("--labels", nargs="*", default=None)
    p.add_argument("--title", default="verification ROC")
    p.set_defaults(func=cmd_roc_plot)

    p = sub.add_parser("run", help="preprocess, extract, train, verify and plot in one go")
    p.add_argument("manifest")
    p.add_argument("--eyes", default=None)
    add_config_flags(p)
    p.set_defaults(func=cmd_run)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")
    try:
        return args.func(args)
    except (CliError, ManifestError, ConfigMismatchError, ValueError, OSError) as exc:
        if args.verbose:
            traceback.print_exc()
        print(f"fbface {args.command}: error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
