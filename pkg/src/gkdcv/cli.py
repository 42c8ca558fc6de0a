"""Command-line interface: ``gkdcv <command> ...``.

Failures exit with status 1 and print one line ``error: <category>: <message>``
on stderr; usage errors exit with status 2.
"""

from __future__ import annotations

import argparse
import csv
import sys
from dataclasses import replace
from pathlib import Path

import numpy as np

from . import formats
from .classifier import Measure, classify_many
from .config import PipelineConfig, format_config, load_config, save_config
from .errors import ConfigError, DimensionError, EvaluationError, GkdcvError, ManifestError
from .evaluation import (
    claim_scores,
    closed_set_eval,
    equal_error_point,
    tau_sweep,
    verification_eval,
)
from .image_io import DatasetManifest, first_k_split, format_manifest, load_image, load_manifest, save_pgm
from .kdcv import fit, project_many
from .pipeline import Pipeline


def _fmt(v) -> str:
    return repr(float(v)) if isinstance(v, (float, np.floating)) else str(v)


def _config(args, model_path=None) -> PipelineConfig:
    if getattr(args, "config", None):
        return load_config(args.config)
    if model_path is not None:
        side = Path(str(model_path) + ".cfg")
        if side.exists():
            return load_config(side)
    return PipelineConfig()


def _measure(args, cfg: PipelineConfig) -> Measure:
    return Measure.parse(args.measure) if getattr(args, "measure", None) else cfg.measure


def _manifest_features(pipe: Pipeline, manifest: DatasetManifest, entries) -> np.ndarray:
    return pipe.batch([manifest.resolve(e) for e in entries])


def _load_model_for(args, cfg: PipelineConfig):
    model = formats.load_model(args.model)
    if cfg.feature_length != model.feature_dim:
        raise DimensionError(
            f"pipeline produces feature length {cfg.feature_length}, model expects {model.feature_dim}"
        )
    return model


# -- commands ----------------------------------------------------------------


def cmd_gabor_dump(args) -> int:
    cfg = _config(args)
    pipe = Pipeline(cfg)
    img = pipe.prepare(load_image(args.image), origin=args.image)
    from .gabor import respond

    stack = respond(img, cfg.gabor, cfg.support, bank=pipe.bank)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    count = 0
    for nu in range(stack.num_scales):
        for mu in range(stack.num_orientations):
            plane = stack.plane(mu, nu)
            stem = out / f"plane_v{nu}_u{mu}"
            if args.format in ("pgm", "both"):
                peak = plane.max()
                save_pgm(stem.with_suffix(".pgm"), plane / peak if peak > 0 else plane)
            if args.format in ("bin", "both"):
                formats.write_plane(stem.with_suffix(".bin"), plane)
            count += 1
    print(f"wrote {count} planes to {out}")
    return 0


def cmd_extract(args) -> int:
    cfg = _config(args)
    manifest = load_manifest(args.manifest)
    roles = set(args.roles.split(",")) if args.roles else None
    entries = [e for e in manifest.entries if roles is None or e.role in roles]
    if not entries:
        raise ManifestError(f"{args.manifest}: no entries selected")
    X = _manifest_features(Pipeline(cfg), manifest, entries)
    formats.write_features(args.out, X, [(e.path, e.class_id) for e in entries])
    print(f"wrote {X.shape[0]}x{X.shape[1]} feature matrix to {args.out}")
    return 0


def cmd_train(args) -> int:
    cfg = _config(args)
    if args.features:
        X, sources = formats.read_features(args.features)
        if sources is None:
            raise ManifestError(f"{args.features}: missing sidecar CSV with class ids")
        labels = np.array([cid for _, cid in sources])
    else:
        if not args.manifest:
            raise ManifestError("train needs a manifest or --features")
        manifest = load_manifest(args.manifest)
        entries = manifest.by_role("train")
        if not entries:
            raise ManifestError(f"{args.manifest}: no train entries")
        X = _manifest_features(Pipeline(cfg), manifest, entries)
        labels = np.array([e.class_id for e in entries])
    model = fit(X, labels, cfg.kernel, cfg.rank_tol)
    formats.save_model(model, args.model)
    save_config(cfg, str(args.model) + ".cfg")
    print(f"M={model.num_samples} C={model.num_classes} r={model.rank} p={model.dim}")
    return 0


def _probe_inputs(args):
    if args.manifest:
        manifest = load_manifest(args.manifest)
        entries = [e for e in manifest.entries if e.role != "train"] or list(manifest.entries)
        return [e.path for e in entries], [manifest.resolve(e) for e in entries]
    if not args.images:
        raise ManifestError("predict needs --manifest or image paths")
    return list(args.images), [Path(p) for p in args.images]


def cmd_predict(args) -> int:
    cfg = _config(args, args.model)
    model = _load_model_for(args, cfg)
    measure = _measure(args, cfg)
    names, paths = _probe_inputs(args)
    Y = project_many(model, Pipeline(cfg).batch(paths))
    rankings = classify_many(model, Y, measure)
    out = open(args.out, "w", newline="", encoding="utf-8") if args.out else sys.stdout
    try:
        w = csv.writer(out, lineterminator="\n")
        for name, ranking in zip(names, rankings):
            for cid, s in ranking.top(args.ranking or 1):
                w.writerow([name, cid, _fmt(s)])
    finally:
        if out is not sys.stdout:
            out.close()
    return 0


def _parse_sweep(text: str) -> np.ndarray:
    try:
        lo, hi, steps = text.split(":")
        lo, hi, steps = float(lo), float(hi), int(steps)
    except ValueError:
        raise ConfigError(f"--tau-sweep expects lo:hi:steps, got {text!r}") from None
    if steps < 2 or not hi > lo:
        raise ConfigError("--tau-sweep needs hi > lo and at least 2 steps")
    return np.linspace(lo, hi, steps)


def _write_rows(path: Path, header, rows) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for r in rows:
            w.writerow([_fmt(v) for v in r])


def _report_text(report, mode: str) -> str:
    c = report.counts
    lines = [f"mode: {mode}", f"measure: {report.measure}",
             f"TP={c.tp} FP={c.fp} TN={c.tn} FN={c.fn}"]
    for name in ("threshold", "sensitivity", "specificity", "accuracy", "balanced_accuracy", "fpr", "fnr"):
        v = getattr(report, name)
        if v is not None:
            lines.append(f"{name}: {v:.3f}" + ("" if name == "threshold" else "%"))
    if report.cmc:
        lines.append("cmc: " + " ".join(f"r{k + 1}={v:.3f}%" for k, v in enumerate(report.cmc)))
    return "\n".join(lines) + "\n"


def cmd_eval(args) -> int:
    cfg = _config(args, args.model)
    model = _load_model_for(args, cfg)
    measure = _measure(args, cfg)
    manifest = load_manifest(args.manifest)
    pipe = Pipeline(cfg)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)

    genuine = manifest.by_role("probe-genuine")
    if args.mode == "closed":
        probes = genuine or manifest.by_role("train")
        if not probes:
            raise ManifestError(f"{args.manifest}: no probes to evaluate")
        Y = project_many(model, _manifest_features(pipe, manifest, probes))
        report = closed_set_eval(model, Y, [e.class_id for e in probes], measure)
        _write_rows(out / "cmc.csv", ["rank", "rate"], [(k + 1, v) for k, v in enumerate(report.cmc)])
    else:
        impostors = manifest.by_role("probe-impostor")
        if not impostors:
            raise EvaluationError("verify mode needs probe-impostor entries in the manifest")
        if not genuine:
            raise EvaluationError("verify mode needs probe-genuine entries in the manifest")
        Yg = project_many(model, _manifest_features(pipe, manifest, genuine))
        Yi = project_many(model, _manifest_features(pipe, manifest, impostors))
        gc = [e.class_id for e in genuine]
        ic = [e.class_id for e in impostors]
        if args.tau is not None:
            report = verification_eval(model, Yg, gc, Yi, ic, measure, args.tau)
        else:
            gs = claim_scores(model, Yg, gc, measure)
            iscores = claim_scores(model, Yi, ic, measure)
            if args.tau_sweep:
                taus = _parse_sweep(args.tau_sweep)
            else:
                both = np.concatenate([gs, iscores])
                taus = np.linspace(both.min(), both.max(), 101)
            sweep = tau_sweep(gs, iscores, taus, measure)
            _write_rows(out / "sweep.csv", ["tau", "sensitivity", "specificity"],
                        [(r.threshold, r.sensitivity, r.specificity) for r in sweep])
            report = equal_error_point(sweep)

    _write_rows(out / "metrics.csv", ["metric", "value"], report.rows())
    text = _report_text(report, args.mode)
    (out / "report.txt").write_text(text, encoding="utf-8")
    sys.stdout.write(text)
    return 0


def cmd_split(args) -> int:
    manifest = first_k_split(args.root, args.k)
    text = format_manifest(manifest.entries)
    if args.out:
        out = Path(args.out)
        root = Path(args.root).resolve()
        # keep paths valid relative to the manifest's own directory
        base = out.resolve().parent
        try:
            rel = root.relative_to(base)
            prefix = "" if str(rel) == "." else f"{rel.as_posix()}/"
        except ValueError:
            prefix = f"{root.as_posix()}/"
        entries = [replace(e, path=prefix + e.path) for e in manifest.entries]
        out.write_text(format_manifest(entries), encoding="utf-8")
        print(f"wrote {len(entries)} entries ({manifest.num_classes} classes) to {out}")
    else:
        sys.stdout.write(text)
    return 0


def cmd_synth(args) -> int:
    from .synthetic import make_dataset

    paths = make_dataset(args.out, args.classes, args.per_class, args.height, args.width, args.seed)
    print(f"wrote {len(paths)} images to {args.out}")
    return 0


def cmd_config(args) -> int:
    cfg = _config(args)
    sys.stdout.write(format_config(cfg))
    return 0


# -- parser ------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="key=value pipeline configuration file")

    p = argparse.ArgumentParser(prog="gkdcv", description=__doc__.splitlines()[0])
    sub = p.add_subparsers(dest="command", required=True)

    s = sub.add_parser("gabor-dump", parents=[common], help="write the Gabor magnitude planes of one image")
    s.add_argument("image")
    s.add_argument("--out", required=True)
    s.add_argument("--format", choices=("pgm", "bin", "both"), default="pgm")
    s.set_defaults(func=cmd_gabor_dump)

    s = sub.add_parser("extract", parents=[common], help="extract block features for a manifest")
    s.add_argument("manifest")
    s.add_argument("--out", required=True, help="FEATMAT1 output file (sidecar CSV written next to it)")
    s.add_argument("--roles", help="comma-separated roles to include (default: all)")
    s.set_defaults(func=cmd_extract)

    s = sub.add_parser("train", parents=[common], help="fit a model on a manifest's train entries")
    s.add_argument("manifest", nargs="?")
    s.add_argument("--features", help="train from a cached FEATMAT1 file instead of images")
    s.add_argument("--model", required=True)
    s.set_defaults(func=cmd_train)

    s = sub.add_parser("predict", parents=[common], help="classify images")
    s.add_argument("images", nargs="*")
    s.add_argument("--model", required=True)
    s.add_argument("--manifest")
    s.add_argument("--measure", choices=[m.value for m in Measure])
    s.add_argument("--ranking", type=int, metavar="N", help="emit the top N classes per image")
    s.add_argument("--out")
    s.set_defaults(func=cmd_predict)

    s = sub.add_parser("eval", parents=[common], help="evaluate a model on a manifest")
    s.add_argument("manifest")
    s.add_argument("--model", required=True)
    s.add_argument("--measure", choices=[m.value for m in Measure])
    s.add_argument("--mode", choices=("closed", "verify"), default="closed")
    tau = s.add_mutually_exclusive_group()
    tau.add_argument("--tau", type=float)
    tau.add_argument("--tau-sweep", metavar="LO:HI:STEPS")
    s.add_argument("--out", required=True)
    s.set_defaults(func=cmd_eval)

    s = sub.add_parser("split", help="first-k train/probe manifest from a directory-per-class tree")
    s.add_argument("root")
    s.add_argument("--k", type=int, required=True)
    s.add_argument("--out")
    s.set_defaults(func=cmd_split)

    s = sub.add_parser("synth", help="write a synthetic face-like dataset")
    s.add_argument("out")
    s.add_argument("--classes", type=int, default=8)
    s.add_argument("--per-class", type=int, default=5)
    s.add_argument("--height", type=int, default=92)
    s.add_argument("--width", type=int, default=112)
    s.add_argument("--seed", type=int, default=0)
    s.set_defaults(func=cmd_synth)

    s = sub.add_parser("config", parents=[common], help="print the effective configuration")
    s.set_defaults(func=cmd_config)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except GkdcvError as exc:
        msg = " ".join(str(exc).split())
        print(f"error: {exc.category}: {msg}", file=sys.stderr)
        return 1
    except OSError as exc:
        msg = " ".join(str(exc).split())
        print(f"error: io: {msg}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
