"""Command-line entry point.

Subcommands mirror the pipeline stages so each is independently re-runnable
on the documented CSV/JSON formats: ``cwde`` fills missing dominance,
``fuse`` reduces a lexicon, ``relabel`` emits soft labels, ``rebalance``
admits auxiliary samples under the density cap, ``evaluate`` compares label
files, ``loss-check`` verifies analytic gradients, ``serve`` runs the
annotation service and ``pipeline`` chains cwde, fuse, relabel and evaluate
from one TOML or JSON config with a reproducibility manifest.
"""
from __future__ import annotations

import argparse
import hashlib
import json
import logging
import os
import shutil
import sys
import tempfile
from dataclasses import dataclass
from pathlib import Path
from typing import Dict, List, Optional, Sequence

from . import __version__, cwde, fusion, io, loss, metrics, rebalance, softlabel
from .model import (
    AUXILIARY_SET,
    EmotionModelError,
    PRIMARY_SET,
    SampleRecord,
    Taxonomy,
    UNIVERSAL_EMOTIONS,
    one_hot,
)

log = logging.getLogger("emoblend")

TAXONOMY_CHOICES = ("universal", "fused")

# Stage-named exit codes so scripted callers can tell failures apart.
EXIT_CONFIG = 2
EXIT_CWDE = 10
EXIT_FUSE = 11
EXIT_RELABEL = 12
EXIT_EVALUATE = 13
EXIT_REBALANCE = 14


def _err(msg: str) -> None:
    print(f"error: {msg}", file=sys.stderr)


def _sha256(path: Path) -> str:
    h = hashlib.sha256()
    with open(path, "rb") as f:
        for chunk in iter(lambda: f.read(1 << 16), b""):
            h.update(chunk)
    return h.hexdigest()


def _dominance_estimator(universals, prior_strength: float, use_label_prior: bool):
    names = {e.name for e in universals}

    def estimate(rec: SampleRecord) -> float:
        label = rec.label if use_label_prior and rec.label in names else None
        return cwde.estimate_dominance(
            rec.valence, rec.arousal, universals,
            label_prior=label, prior_strength=prior_strength)

    return estimate


def cmd_cwde(args) -> int:
    lexicon = io.load_lexicon(args.lexicon)
    universals = cwde.core_universals(lexicon)
    records = io.read_samples(args.infile)
    missing = sum(1 for r in records if r.dominance is None)
    records, clamped = cwde.fill_dominance(
        records, universals,
        prior_strength=args.prior_strength,
        use_label_prior=not args.no_label_prior)
    io.write_samples(records, args.out)
    print(f"filled {missing} of {len(records)} records "
          f"({clamped} clamped) -> {args.out}")
    return 0


def cmd_fuse(args) -> int:
    lexicon = io.load_lexicon(args.lexicon)
    config = fusion.FusionConfig(
        seed=args.seed, t=args.t, mc_samples=args.mc_samples)
    taxonomy, trace = fusion.fuse_taxonomy(lexicon, config)
    io.save_lexicon(taxonomy, args.out_taxonomy)
    _write_trace(trace, args.out_trace)
    print(f"{lexicon.K} -> {taxonomy.K} classes in {len(trace.steps)} "
          f"fusion steps -> {args.out_taxonomy}")
    return 0


def _write_trace(trace: fusion.FusionTrace, path) -> None:
    with open(path, "w", encoding="utf-8") as f:
        for i, step in enumerate(trace.steps, start=1):
            f.write(json.dumps({
                "step": i,
                "merged_a": step.merged_a,
                "merged_b": step.merged_b,
                "nim": step.nim_value,
                "new_name": step.new_name,
            }, sort_keys=True) + "\n")


def _relabel(records, taxonomy, universals, prior_strength: float):
    estimator = _dominance_estimator(universals, prior_strength, True)
    rows, errors = [], []
    for outcome in softlabel.relabel_dataset(records, taxonomy, estimator):
        if outcome.error is not None:
            errors.append((outcome.id, outcome.error))
        else:
            rows.append((outcome.id, outcome.label))
    return rows, errors


def cmd_relabel(args) -> int:
    lexicon = io.load_lexicon(args.lexicon)
    taxonomy = io.load_lexicon(args.taxonomy)
    universals = cwde.core_universals(lexicon)
    records = io.read_samples(args.infile)
    rows, errors = _relabel(records, taxonomy, universals, args.prior_strength)
    for rec_id, reason in errors:
        log.warning("skipped %s: %s", rec_id, reason)
    if not rows:
        _err("no records could be labeled")
        return 1
    io.write_labels(rows, taxonomy.names(), args.out)
    print(f"labeled {len(rows)} records over {taxonomy.K} classes "
          f"({len(errors)} skipped) -> {args.out}")
    return 0


def cmd_rebalance(args) -> int:
    primary = io.read_samples(args.primary)
    aux = io.read_samples(args.aux)
    cap = args.cap_value
    if cap is None:
        cap = rebalance.max_quadrant_density(primary, args.reference_label)
    stats = rebalance.QuadrantStats.from_records(primary)
    admitted, final = rebalance.admit_stream(stats, cap, aux)
    for rec in primary:
        rec.source = PRIMARY_SET
    for rec in admitted:
        rec.source = AUXILIARY_SET
    io.write_samples(primary + admitted, args.out)
    dens = ", ".join(f"Q{q}={final.density(q):.1f}" for q in rebalance.QUADRANTS)
    print(f"admitted {len(admitted)} of {len(aux)} candidates at cap "
          f"{cap:.1f} ({dens}) -> {args.out}")
    return 0


def cmd_evaluate(args) -> int:
    pred_names, pred_rows = io.read_labels(args.pred)
    truth_names, truth_rows = io.read_labels(args.truth)
    if pred_names != truth_names:
        _err(f"class mismatch: prediction classes {pred_names} vs "
             f"truth classes {truth_names}")
        return 1
    truth_by_id = dict(truth_rows)
    missing = [i for i, _ in pred_rows if i not in truth_by_id]
    if missing:
        _err(f"{len(missing)} prediction id(s) absent from truth "
             f"(first: {missing[0]!r})")
        return 1
    preds = [v for _, v in pred_rows]
    truths = [truth_by_id[i] for i, _ in pred_rows]
    truth_indices = None
    if args.labels:
        cats = io.read_categorical_labels(args.labels)
        truth_indices = []
        for rec_id, _ in pred_rows:
            if rec_id not in cats:
                _err(f"id {rec_id!r} absent from categorical labels")
                return 1
            name = cats[rec_id]
            if name not in pred_names:
                _err(f"categorical label {name!r} is not a class "
                     f"({rec_id!r})")
                return 1
            truth_indices.append(pred_names.index(name))
    report = metrics.batch_report(
        preds, truths, truth_indices=truth_indices,
        k=len(pred_names), epsilon=args.epsilon)
    payload = report.to_dict()
    with open(args.report, "w", encoding="utf-8") as f:
        json.dump(payload, f, indent=2, sort_keys=True)
        f.write("\n")
    print(f"JS {report.js:.4f}  KL(p||q) {report.kl_pq:.4f}  "
          f"KL(q||p) {report.kl_qp:.4f}  over {report.n_pairs} pairs "
          f"-> {args.report}")
    return 0


def cmd_loss_check(args) -> int:
    variants = loss.VARIANTS if args.variant == "all" else (args.variant,)
    sizes = [args.n] if args.n else [8, 14]
    print(f"{'variant':<12} {'n':>3} {'trials':>6} {'max d/dz':>12} "
          f"{'max d/dW':>12}  status")
    ok_all = True
    for variant in variants:
        for n in sizes:
            worst_z, worst_w, ok = loss.gradient_check(
                n=n, trials=args.trials, variant=variant, seed=args.seed)
            ok_all = ok_all and ok
            print(f"{variant:<12} {n:>3} {args.trials:>6} {worst_z:>12.3e} "
                  f"{worst_w:>12.3e}  {'PASS' if ok else 'FAIL'}")
    return 0 if ok_all else 1


def cmd_serve(args) -> int:
    import uvicorn

    from . import service

    if args.image_dir:
        image_ids = service.discover_image_ids(args.image_dir)
    elif args.auto_labels:
        image_ids = sorted(service.load_auto_labels(args.auto_labels))
    else:
        _err("need --image-dir or --auto-labels to define the image pool")
        return EXIT_CONFIG
    auto = service.load_auto_labels(args.auto_labels) if args.auto_labels else {}
    store = service.AnnotationStore(image_ids, args.data_dir, seed=args.seed)
    app = service.create_app(
        store, auto_labels=auto, image_dir=args.image_dir, ui_dir=args.ui_dir)
    print(f"serving {len(image_ids)} images on port {args.port} "
          f"(data in {args.data_dir})")
    uvicorn.run(app, host=args.host, port=args.port, log_level="info")
    return 0


@dataclass
class PipelineConfig:
    lexicon: Path
    samples: Path
    out_dir: Path
    seed: int
    aux_samples: Optional[Path] = None
    reference_label: Optional[str] = None
    cap_value: Optional[float] = None
    t: float = 0.5
    mc_samples: int = 200_000
    prior_strength: float = cwde.DEFAULT_PRIOR_STRENGTH
    use_label_prior: bool = True
    epsilon: float = metrics.DEFAULT_EPSILON
    taxonomy_choice: str = "fused"

    def echo(self) -> Dict[str, object]:
        return {
            "paths": {
                "lexicon": str(self.lexicon),
                "samples": str(self.samples),
                "aux_samples": None if self.aux_samples is None else str(self.aux_samples),
                "out_dir": str(self.out_dir),
            },
            "fusion": {"t": self.t, "seed": self.seed,
                       "mc_samples": self.mc_samples},
            "cwde": {"prior_strength": self.prior_strength,
                     "use_label_prior": self.use_label_prior},
            "metrics": {"epsilon": self.epsilon},
            "taxonomy": {"choice": self.taxonomy_choice},
            "rebalance": {
                "reference_label": self.reference_label,
                "cap_value": self.cap_value,
            },
        }


class PipelineConfigError(EmotionModelError):
    pass


def load_pipeline_config(path) -> PipelineConfig:
    path = Path(path)
    if not path.exists():
        raise PipelineConfigError(f"config file {path} does not exist")
    text = path.read_text(encoding="utf-8")
    if path.suffix.lower() == ".json":
        raw = json.loads(text)
    elif path.suffix.lower() == ".toml":
        try:
            import tomllib
        except ModuleNotFoundError:
            import tomli as tomllib
        raw = tomllib.loads(text)
    else:
        raise PipelineConfigError(
            f"config must be .toml or .json, got {path.suffix!r}")

    def section(name: str) -> dict:
        sec = raw.get(name, {})
        if not isinstance(sec, dict):
            raise PipelineConfigError(f"config section {name!r} must be a table")
        return sec

    paths = section("paths")
    for key in ("lexicon", "samples", "out_dir"):
        if key not in paths:
            raise PipelineConfigError(f"config lacks paths.{key}")
    fus = section("fusion")
    if "seed" not in fus:
        raise PipelineConfigError(
            "config lacks fusion.seed (seeds are mandatory, no wall-clock default)")
    cw = section("cwde")
    met = section("metrics")
    tax = section("taxonomy")
    reb = section("rebalance")

    base = path.parent

    def resolve(p) -> Path:
        p = Path(p)
        return p if p.is_absolute() else base / p

    cfg = PipelineConfig(
        lexicon=resolve(paths["lexicon"]),
        samples=resolve(paths["samples"]),
        out_dir=resolve(paths["out_dir"]),
        aux_samples=resolve(paths["aux_samples"]) if paths.get("aux_samples") else None,
        seed=int(fus["seed"]),
        t=float(fus.get("t", 0.5)),
        mc_samples=int(fus.get("mc_samples", 200_000)),
        prior_strength=float(cw.get("prior_strength", cwde.DEFAULT_PRIOR_STRENGTH)),
        use_label_prior=bool(cw.get("use_label_prior", True)),
        epsilon=float(met.get("epsilon", metrics.DEFAULT_EPSILON)),
        taxonomy_choice=str(tax.get("choice", "fused")),
        reference_label=reb.get("reference_label"),
        cap_value=float(reb["cap_value"]) if "cap_value" in reb else None,
    )
    if not 0.0 < cfg.t < 1.0:
        raise PipelineConfigError(f"fusion.t must be in (0, 1), got {cfg.t}")
    if cfg.taxonomy_choice not in TAXONOMY_CHOICES:
        raise PipelineConfigError(
            f"taxonomy.choice must be one of {TAXONOMY_CHOICES}, "
            f"got {cfg.taxonomy_choice!r}")
    for label, p in (("lexicon", cfg.lexicon), ("samples", cfg.samples),
                     ("aux_samples", cfg.aux_samples)):
        if p is not None and not p.exists():
            raise PipelineConfigError(f"paths.{label} {p} does not exist")
    if cfg.aux_samples is not None and not cfg.reference_label:
        raise PipelineConfigError(
            "paths.aux_samples needs rebalance.reference_label")
    return cfg


def run_pipeline(cfg: PipelineConfig) -> int:
    """cwde -> (rebalance) -> fuse -> relabel -> evaluate, atomically promoted.

    Every artifact lands in a temp directory and moves into out_dir only
    after all stages succeed, so a failed run never leaves partial output.
    The manifest records versions, seeds and content digests, never clocks.
    """
    cfg.out_dir.parent.mkdir(parents=True, exist_ok=True)
    tmp = Path(tempfile.mkdtemp(prefix=".pipeline-", dir=str(cfg.out_dir.parent)))
    artifacts: List[str] = []
    try:
        try:
            lexicon = io.load_lexicon(cfg.lexicon)
            universals = cwde.core_universals(lexicon)
            records = io.read_samples(cfg.samples)
            records, _ = cwde.fill_dominance(
                records, universals, prior_strength=cfg.prior_strength,
                use_label_prior=cfg.use_label_prior)
            for rec in records:
                rec.source = PRIMARY_SET
            io.write_samples(records, tmp / "samples_dominance.csv")
            artifacts.append("samples_dominance.csv")
        except Exception as exc:
            _err(f"cwde stage: {exc}")
            return EXIT_CWDE

        if cfg.aux_samples is not None:
            try:
                aux = io.read_samples(cfg.aux_samples)
                cap = cfg.cap_value
                if cap is None:
                    cap = rebalance.max_quadrant_density(
                        records, cfg.reference_label)
                stats = rebalance.QuadrantStats.from_records(records)
                admitted, _ = rebalance.admit_stream(stats, cap, aux)
                admitted, _ = cwde.fill_dominance(
                    admitted, universals, prior_strength=cfg.prior_strength,
                    use_label_prior=cfg.use_label_prior)
                for rec in admitted:
                    rec.source = AUXILIARY_SET
                records = records + admitted
                io.write_samples(records, tmp / "samples_rebalanced.csv")
                artifacts.append("samples_rebalanced.csv")
            except Exception as exc:
                _err(f"rebalance stage: {exc}")
                return EXIT_REBALANCE

        try:
            if cfg.taxonomy_choice == "fused":
                config = fusion.FusionConfig(
                    seed=cfg.seed, t=cfg.t, mc_samples=cfg.mc_samples)
                taxonomy, trace = fusion.fuse_taxonomy(lexicon, config)
            else:
                taxonomy = lexicon.subset(
                    [n for n in lexicon.names() if n in UNIVERSAL_EMOTIONS])
                trace = fusion.FusionTrace(steps=[], final_count=taxonomy.K)
            io.save_lexicon(taxonomy, tmp / "taxonomy.csv")
            _write_trace(trace, tmp / "fusion_trace.jsonl")
            artifacts += ["taxonomy.csv", "fusion_trace.jsonl"]
        except Exception as exc:
            _err(f"fuse stage: {exc}")
            return EXIT_FUSE

        try:
            rows, errors = _relabel(
                records, taxonomy, universals, cfg.prior_strength)
            if not rows:
                raise EmotionModelError("no records could be labeled")
            io.write_labels(rows, taxonomy.names(), tmp / "labels.csv")
            artifacts.append("labels.csv")
        except Exception as exc:
            _err(f"relabel stage: {exc}")
            return EXIT_RELABEL

        try:
            names, label_rows = io.read_labels(tmp / "labels.csv")
            cat = {r.id: r.label for r in records if r.label}
            preds, truths, truth_indices = [], [], []
            for rec_id, vec in label_rows:
                label = cat.get(rec_id)
                if label is None or label not in names:
                    continue
                idx = names.index(label)
                preds.append(vec)
                truths.append(one_hot(idx, len(names)).probs)
                truth_indices.append(idx)
            if not preds:
                raise EmotionModelError(
                    "no record carries a categorical label that is a "
                    "taxonomy class; nothing to evaluate")
            report = metrics.batch_report(
                preds, truths, truth_indices=truth_indices,
                k=len(names), epsilon=cfg.epsilon)
            payload = {
                "n_records": len(records),
                "n_labeled": len(label_rows),
                "n_relabel_errors": len(errors),
                "n_evaluated": len(preds),
                "metrics": report.to_dict(),
            }
            with open(tmp / "report.json", "w", encoding="utf-8") as f:
                json.dump(payload, f, indent=2, sort_keys=True)
                f.write("\n")
            artifacts.append("report.json")
        except Exception as exc:
            _err(f"evaluate stage: {exc}")
            return EXIT_EVALUATE

        manifest = {
            "package": {"name": "emoblend", "version": __version__},
            "runtime": _runtime_versions(),
            "config": cfg.echo(),
            "seeds": {"fusion": cfg.seed},
            "inputs": {
                str(p): _sha256(p)
                for p in (cfg.lexicon, cfg.samples, cfg.aux_samples)
                if p is not None
            },
            "artifacts": {name: _sha256(tmp / name) for name in artifacts},
        }
        with open(tmp / "manifest.json", "w", encoding="utf-8") as f:
            json.dump(manifest, f, indent=2, sort_keys=True)
            f.write("\n")
        artifacts.append("manifest.json")

        cfg.out_dir.mkdir(parents=True, exist_ok=True)
        for name in artifacts:
            os.replace(tmp / name, cfg.out_dir / name)
    finally:
        shutil.rmtree(tmp, ignore_errors=True)
    print(f"pipeline complete: {len(artifacts)} artifacts in {cfg.out_dir}")
    return 0


def _runtime_versions() -> Dict[str, str]:
    import numpy
    import scipy

    return {
        "python": ".".join(str(v) for v in sys.version_info[:3]),
        "numpy": numpy.__version__,
        "scipy": scipy.__version__,
    }


def cmd_pipeline(args) -> int:
    try:
        cfg = load_pipeline_config(args.config)
    except (PipelineConfigError, json.JSONDecodeError) as exc:
        _err(f"config: {exc}")
        return EXIT_CONFIG
    return run_pipeline(cfg)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="emoblend",
        description="Valence-arousal emotion distribution pipeline tools")
    parser.add_argument("--version", action="version",
                        version=f"%(prog)s {__version__}")
    parser.add_argument("-v", "--verbose", action="store_true",
                        help="enable debug logging")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("cwde", help="fill missing dominance values")
    p.add_argument("--lexicon", required=True, help="emotion lexicon CSV")
    p.add_argument("--in", dest="infile", required=True, help="sample CSV")
    p.add_argument("--out", required=True, help="output sample CSV")
    p.add_argument("--prior-strength", type=float,
                   default=cwde.DEFAULT_PRIOR_STRENGTH,
                   help="posterior mass granted to the labeled emotion")
    p.add_argument("--no-label-prior", action="store_true",
                   help="ignore categorical labels; use uniform prior")
    p.set_defaults(func=cmd_cwde)

    p = sub.add_parser("fuse", help="reduce a lexicon by pairwise fusion")
    p.add_argument("--lexicon", required=True)
    p.add_argument("--t", type=float, default=0.5,
                   help="fusion threshold on the normalized intersection")
    p.add_argument("--mc-samples", type=int, default=200_000,
                   help="Monte Carlo samples per intersection estimate")
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--out-taxonomy", required=True)
    p.add_argument("--out-trace", required=True,
                   help="JSON-lines fusion trace, one step per line")
    p.set_defaults(func=cmd_fuse)

    p = sub.add_parser("relabel", help="emit soft labels for a sample CSV")
    p.add_argument("--lexicon", required=True,
                   help="lexicon CSV providing the prototypical emotions")
    p.add_argument("--taxonomy", required=True,
                   help="taxonomy CSV defining the label classes")
    p.add_argument("--in", dest="infile", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--prior-strength", type=float,
                   default=cwde.DEFAULT_PRIOR_STRENGTH)
    p.set_defaults(func=cmd_relabel)

    p = sub.add_parser("rebalance",
                       help="admit auxiliary samples under the density cap")
    p.add_argument("--primary", required=True)
    p.add_argument("--aux", required=True)
    p.add_argument("--reference-label", required=True,
                   help="emotion whose quadrant density sets the cap")
    p.add_argument("--cap-value", type=float, default=None,
                   help="override the derived density cap")
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_rebalance)

    p = sub.add_parser("evaluate", help="compare two label CSVs")
    p.add_argument("--pred", required=True)
    p.add_argument("--truth", required=True)
    p.add_argument("--labels", default=None,
                   help="categorical truth CSV (id,label) for accuracy/F1")
    p.add_argument("--epsilon", type=float, default=metrics.DEFAULT_EPSILON)
    p.add_argument("--report", required=True, help="output JSON report")
    p.set_defaults(func=cmd_evaluate)

    p = sub.add_parser("loss-check",
                       help="verify analytic loss gradients by finite differences")
    p.add_argument("--variant", choices=(*loss.VARIANTS, "all"), default="all")
    p.add_argument("--n", type=int, default=None,
                   help="class count (default: both 8 and 14)")
    p.add_argument("--trials", type=int, default=100)
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(func=cmd_loss_check)

    p = sub.add_parser("serve", help="run the annotation service")
    p.add_argument("--host", default=os.environ.get("EMOBLEND_HOST", "127.0.0.1"))
    p.add_argument("--port", type=int,
                   default=int(os.environ.get("EMOBLEND_PORT", "8000")))
    p.add_argument("--data-dir",
                   default=os.environ.get("EMOBLEND_DATA_DIR", "annotation-data"))
    p.add_argument("--image-dir", default=os.environ.get("EMOBLEND_IMAGE_DIR"))
    p.add_argument("--auto-labels",
                   default=os.environ.get("EMOBLEND_AUTO_LABELS"),
                   help="CSV of automatic labels (id plus 8 probabilities)")
    p.add_argument("--ui-dir", default=os.environ.get("EMOBLEND_UI_DIR"),
                   help="static UI bundle to serve at /")
    p.add_argument("--seed", type=int, default=None,
                   help="seed session assignment (testing only)")
    p.set_defaults(func=cmd_serve)

    p = sub.add_parser("pipeline",
                       help="run cwde, fuse, relabel, evaluate from a config")
    p.add_argument("--config", required=True, help="TOML or JSON config file")
    p.set_defaults(func=cmd_pipeline)
    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(
        level=logging.DEBUG if args.verbose else logging.INFO,
        format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except EmotionModelError as exc:
        _err(str(exc))
        return 1
    except OSError as exc:
        _err(str(exc))
        return 1


if __name__ == "__main__":
    sys.exit(main())
