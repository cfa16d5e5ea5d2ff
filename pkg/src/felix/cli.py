"""``felix`` command line: align | train | predict | evaluate | stats.

Corpora are JSONL with fields ``source``, ``target`` and ``prediction``.
Settings come from an optional flat JSON config (``--config``) and can be
overridden with ``--key value``.  Logs go to stderr; data only to files.

Exit codes: 0 ok, 1 usage error, 2 data error, 3 numeric failure.
"""

from __future__ import annotations

import argparse
import dataclasses
import json
import logging
import sys
from pathlib import Path
from typing import Dict, List, Optional, Sequence

from . import metrics
from .align import AlignmentConfig, align, alignment_stats
from .core import EditPlan, SentinelError, Tag, WhitespaceTokenizer
from .models import checkpoint
from .models.config import Hyperparams
from .models.pipeline import VocabMismatch, predict
from .models.train import AlignedExample, NumericError, insertion_example, train

log = logging.getLogger("felix")

EXIT_OK, EXIT_USAGE, EXIT_DATA, EXIT_NUMERIC = 0, 1, 2, 3

# Keys accepted on top of Hyperparams.
EXTRA_DEFAULTS = {"del_f1": False, "lowercase": False, "unbounded_span": False}

TAGGER_FILE = "tagger.ckpt"
INSERTION_FILE = "insertion.ckpt"


class UsageError(Exception):
    pass


class DataError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


# -- config -------------------------------------------------------------------


def _field_types() -> Dict[str, type]:
    types = {f.name: type(f.default) for f in dataclasses.fields(Hyperparams)}
    types.update({k: type(v) for k, v in EXTRA_DEFAULTS.items()})
    return types


def _coerce(key: str, raw, kind: type):
    if isinstance(raw, kind) and not (kind is int and isinstance(raw, bool)):
        return raw
    text = str(raw)
    if kind is bool:
        low = text.lower()
        if low in ("1", "true", "yes", "on"):
            return True
        if low in ("0", "false", "no", "off"):
            return False
        raise UsageError(f"{key} expects a boolean, got {raw!r}")
    try:
        return kind(text)
    except ValueError:
        raise UsageError(f"{key} expects {kind.__name__}, got {raw!r}") from None


def resolve_config(config_path: Optional[str], overrides: Sequence[str]) -> dict:
    """Defaults, then the config file, then ``--key value`` pairs."""
    types = _field_types()
    cfg = {**Hyperparams().to_dict(), **EXTRA_DEFAULTS}
    layers = []
    if config_path:
        try:
            data = json.loads(Path(config_path).read_text(encoding="utf-8"))
        except (OSError, json.JSONDecodeError) as e:
            raise UsageError(f"cannot read config {config_path}: {e}") from None
        if not isinstance(data, dict):
            raise UsageError("config must be a flat JSON object")
        layers.append(data)
    it = iter(overrides)
    cli = {}
    for tok in it:
        if not tok.startswith("--"):
            raise UsageError(f"unexpected argument {tok!r}")
        key = tok[2:].replace("-", "_")
        if "=" in key:
            key, val = key.split("=", 1)
        else:
            val = next(it, None)
            if val is None:
                raise UsageError(f"--{key} needs a value")
        cli[key] = val
    layers.append(cli)
    for layer in layers:
        for key, val in layer.items():
            if key not in types:
                raise UsageError(f"unknown config key {key!r}")
            cfg[key] = _coerce(key, val, types[key])
    try:
        hyper_of(cfg)
    except ValueError as e:
        raise UsageError(str(e)) from None
    return cfg


def hyper_of(cfg: dict) -> Hyperparams:
    return Hyperparams(**{k: v for k, v in cfg.items() if k not in EXTRA_DEFAULTS})


def align_cfg_of(cfg: dict) -> AlignmentConfig:
    span = None if cfg["unbounded_span"] else cfg["max_span"]
    return AlignmentConfig(cfg["mode"], span, cfg["pointing_enabled"])


# -- io -----------------------------------------------------------------------


def read_jsonl(path: str, required: Sequence[str] = ()) -> List[dict]:
    try:
        lines = Path(path).read_text(encoding="utf-8").splitlines()
    except OSError as e:
        raise DataError(f"cannot read {path}: {e}") from None
    rows = []
    for no, line in enumerate(lines, 1):
        if not line.strip():
            continue
        try:
            obj = json.loads(line)
        except json.JSONDecodeError as e:
            raise DataError(f"{path}:{no}: malformed JSON ({e.msg})") from None
        if not isinstance(obj, dict):
            raise DataError(f"{path}:{no}: expected a JSON object")
        for key in required:
            if key not in obj:
                raise DataError(f"{path}:{no}: missing field {key!r}")
        if "source" in required and not str(obj["source"]).strip():
            raise DataError(f"{path}:{no}: empty source")
        rows.append(obj)
    return rows


def _dump(obj) -> str:
    return json.dumps(obj, sort_keys=True, ensure_ascii=False)


def write_jsonl(path: Path, rows) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        for row in rows:
            fh.write(_dump(row) + "\n")


def write_json(path: Path, obj) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(json.dumps(obj, sort_keys=True, indent=2, ensure_ascii=False) + "\n", encoding="utf-8")


def _sidecar(path: Path, suffix: str) -> Path:
    return path.with_name(path.name + suffix)


def _tokenize_rows(rows, tok: WhitespaceTokenizer, fields):
    out = []
    for no, row in enumerate(rows, 1):
        try:
            out.append([tok.tokenize(str(row[f])) for f in fields])
        except SentinelError as e:
            raise DataError(f"record {no}: {e}") from None
    return out


# -- commands -----------------------------------------------------------------


def plan_record(plan: EditPlan) -> dict:
    return {
        "tags": [t.label for t in plan.tags],
        "pointers": sorted([i, j] for i, j in plan.pointers.items()),
        "cls_insertion": plan.cls_insertion,
    }


def plan_from_record(rec: dict) -> EditPlan:
    try:
        plan = EditPlan(
            tuple(Tag.from_label(t) for t in rec["tags"]),
            {int(i): int(j) for i, j in rec["pointers"]},
            rec.get("cls_insertion"),
        )
        plan.validate()
    except (KeyError, TypeError, ValueError) as e:
        raise DataError(f"bad edit plan: {e}") from None
    return plan


def cmd_align(args, cfg) -> int:
    tok = WhitespaceTokenizer(cfg["lowercase"])
    acfg = align_cfg_of(cfg)
    hyper = hyper_of(cfg)
    rows = read_jsonl(args.corpus, ("source", "target"))
    records, skipped = [], {}
    for src, tgt in _tokenize_rows(rows, tok, ("source", "target")):
        out = align(src, tgt, acfg)
        if not out.ok:
            skipped[out.reason] = skipped.get(out.reason, 0) + 1
            continue
        ex = AlignedExample(tuple(src), tuple(tgt), out.plan)
        if acfg.max_span is None:
            masked_labels = None
        else:
            _, masked_labels = insertion_example(ex, hyper)
        records.append({"source_tokens": src, "target_tokens": tgt, **plan_record(out.plan),
                        "insertion_labels": masked_labels})
    out_path = Path(args.out)
    write_jsonl(out_path, records)
    n = len(rows)
    summary = {
        "pairs": n,
        "aligned": len(records),
        "skipped": dict(sorted(skipped.items())),
        "coverage_percent": 100.0 * len(records) / n if n else 0.0,
        "config": cfg,
    }
    write_json(_sidecar(out_path, ".summary.json"), summary)
    log.info("aligned %d/%d pairs", len(records), n)
    return EXIT_OK


def cmd_train(args, cfg) -> int:
    hyper = hyper_of(cfg)
    rows = read_jsonl(args.aligned, ("source_tokens", "target_tokens", "tags", "pointers"))
    if not rows:
        raise DataError("no training records")
    corpus = [AlignedExample(tuple(r["source_tokens"]), tuple(r["target_tokens"]), plan_from_record(r))
              for r in rows]
    for no, ex in enumerate(corpus, 1):
        if ex.plan.n != len(ex.source):
            raise DataError(f"record {no}: {ex.plan.n} tags for {len(ex.source)} source tokens")
        if any(t.insertion is not None and (t.insertion == "INS") != (hyper.mode == "infilling")
               for t in ex.plan.tags):
            raise DataError(f"record {no}: tags were aligned for a different mode than {hyper.mode!r}")
    out = Path(args.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    losses = []

    def on_step(kind, step, loss):
        losses.append(f"{kind}\t{step}\t{loss!r}")
        if step % 100 == 0:
            log.info("%s step %d loss %.5f", kind, step, loss)

    tagger, inserter = train(corpus, hyper, on_step=on_step)
    extra = {"config": cfg}
    checkpoint.save(tagger, out / TAGGER_FILE, extra)
    checkpoint.save(inserter, out / INSERTION_FILE, extra)
    (out / "loss_log.tsv").write_text("model\tstep\tloss\n" + "".join(l + "\n" for l in losses), encoding="utf-8")
    write_json(out / "train_config.json", cfg)
    log.info("wrote checkpoints to %s", out)
    return EXIT_OK


def load_models(model_dir: str):
    d = Path(model_dir)
    try:
        tagger, _ = checkpoint.load(d / TAGGER_FILE)
        inserter, _ = checkpoint.load(d / INSERTION_FILE)
    except OSError as e:
        raise DataError(f"cannot read checkpoint: {e}") from None
    except (checkpoint.CheckpointError, ValueError, KeyError) as e:
        raise DataError(f"bad checkpoint: {e}") from None
    if tagger.vocab != inserter.vocab:
        raise DataError("tagger and insertion checkpoints use different vocabularies")
    if tagger.hyper.mode != inserter.hyper.mode:
        raise DataError("tagger and insertion checkpoints were trained for different modes")
    return tagger, inserter


def cmd_predict(args, cfg) -> int:
    tagger, inserter = load_models(args.model_dir)
    # Only decode-time settings may differ from the trained models.
    if args.given:
        decode = {k: cfg[k] for k in ("beam_size", "pointing_enabled") if k in args.given}
        tagger.hyper = dataclasses.replace(tagger.hyper, **decode)
    tok = WhitespaceTokenizer(cfg["lowercase"])
    rows = read_jsonl(args.corpus, ("source",))
    out_rows = []
    for (src,) in _tokenize_rows(rows, tok, ("source",)):
        try:
            pred = predict(src, tagger, inserter)
        except VocabMismatch as e:
            raise DataError(str(e)) from None
        except ValueError as e:
            raise DataError(f"cannot predict for {' '.join(src)!r}: {e}") from None
        out_rows.append({
            "source": tok.detokenize(src),
            "prediction": tok.detokenize(pred.tokens),
            "tags": pred.tags,
            "chain": pred.chain,
            "masked_input": " ".join(pred.masked.tokens),
        })
    out_path = Path(args.out)
    write_jsonl(out_path, out_rows)
    eff = {**cfg, **{k: v for k, v in tagger.hyper.to_dict().items()}}
    write_json(_sidecar(out_path, ".config.json"), eff)
    log.info("predicted %d records", len(out_rows))
    return EXIT_OK


def cmd_evaluate(args, cfg) -> int:
    preds = read_jsonl(args.predictions, ("source", "prediction"))
    refs = read_jsonl(args.references, ("target",))
    if not preds:
        raise DataError("prediction file is empty")
    if len(preds) != len(refs):
        raise DataError(f"{len(preds)} predictions but {len(refs)} references")
    try:
        report = metrics.evaluate(
            [p["source"] for p in preds],
            [p["prediction"] for p in preds],
            [r["target"] for r in refs],
            del_f1=cfg["del_f1"],
        )
    except (TypeError, ValueError) as e:
        raise DataError(str(e)) from None
    report.metadata["config"] = _dump(cfg)
    out = Path(args.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    (out / "report.txt").write_text(report.to_text(), encoding="utf-8")
    (out / "report.json").write_text(report.to_json(), encoding="utf-8")
    log.info("exact %.2f  sari %.2f  ter %.2f", report.exact, report.sari, report.ter)
    return EXIT_OK


def corpus_stats(pairs, max_span: Optional[int]) -> dict:
    """Size, lengths, source-to-target TER and per-setting coverage / MASK %."""
    if not pairs:
        raise DataError("corpus is empty")
    n = len(pairs)
    t = metrics.corpus_ter([s for s, _ in pairs], [g for _, g in pairs])
    settings = {}
    for mode in ("masking", "infilling"):
        for pointing in (True, False):
            st = alignment_stats(pairs, AlignmentConfig(mode, max_span, pointing))
            key = f"{mode}/{'pointing' if pointing else 'no-pointing'}"
            settings[key] = {
                "coverage_percent": st["coverage_percent"],
                "mask_percent": st["mask_percent"],
                "skipped": dict(sorted(st["skipped"].items())),
            }
    rate = (lambda x: 100.0 * x / t.ref_len) if t.ref_len else (lambda x: 0.0)
    return {
        "size": n,
        "mean_source_len": sum(len(s) for s, _ in pairs) / n,
        "mean_target_len": sum(len(g) for _, g in pairs) / n,
        "ter": t.ter,
        "ter_ins": rate(t.ins),
        "ter_del": rate(t.dele),
        "ter_sub": rate(t.sub),
        "ter_shift": rate(t.shift),
        "settings": settings,
    }


def stats_text(st: dict) -> str:
    lines = [
        f"size: {st['size']}",
        f"mean_source_len: {st['mean_source_len']:.2f}",
        f"mean_target_len: {st['mean_target_len']:.2f}",
        f"TER: {st['ter']:.2f}  (ins {st['ter_ins']:.2f}  del {st['ter_del']:.2f}"
        f"  sub {st['ter_sub']:.2f}  shift {st['ter_shift']:.2f})",
        "",
        f"{'setting':<24}{'coverage%':>10}{'MASK%':>8}",
    ]
    for key, row in st["settings"].items():
        lines.append(f"{key:<24}{row['coverage_percent']:>10.2f}{row['mask_percent']:>8.2f}")
    return "\n".join(lines) + "\n"


def cmd_stats(args, cfg) -> int:
    tok = WhitespaceTokenizer(cfg["lowercase"])
    rows = read_jsonl(args.corpus, ("source", "target"))
    pairs = [tuple(p) for p in _tokenize_rows(rows, tok, ("source", "target"))]
    st = corpus_stats(pairs, None if cfg["unbounded_span"] else cfg["max_span"])
    st["config"] = cfg
    out = Path(args.out)
    write_json(out, st)
    _sidecar(out, ".txt").write_text(stats_text(st), encoding="utf-8")
    return EXIT_OK


# -- entry --------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="felix", description=__doc__.split("\n\n")[0])
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", parser_class=_Parser)
    sub.required = True

    def add(name, fn, help_, *positionals, out=("--out", True)):
        sp = sub.add_parser(name, help=help_)
        for pos in positionals:
            sp.add_argument(pos)
        sp.add_argument(out[0], required=out[1])
        sp.add_argument("--config", default=None, help="flat JSON settings file")
        sp.set_defaults(func=fn)
        return sp

    add("align", cmd_align, "build tagging targets from source/target pairs", "corpus")
    add("train", cmd_train, "train the tagger and insertion model", "aligned", out=("--out-dir", True))
    add("predict", cmd_predict, "edit sources with trained models", "corpus").add_argument("--model-dir", required=True)
    add("evaluate", cmd_evaluate, "score predictions against references", "predictions", "references",
        out=("--out-dir", True))
    add("stats", cmd_stats, "corpus statistics, coverage and MASK %", "corpus")
    return p


def main(argv: Optional[Sequence[str]] = None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    logging.basicConfig(level=logging.INFO, stream=sys.stderr, format="%(levelname)s %(name)s: %(message)s")
    try:
        args, extra = build_parser().parse_known_args(argv)
        logging.getLogger().setLevel(logging.DEBUG if args.verbose else logging.INFO)
        cfg = resolve_config(args.config, extra)
        args.given = {t[2:].split("=", 1)[0].replace("-", "_") for t in extra if t.startswith("--")}
        return args.func(args, cfg)
    except UsageError as e:
        print(f"felix: usage error: {e}", file=sys.stderr)
        return EXIT_USAGE
    except DataError as e:
        print(f"felix: data error: {e}", file=sys.stderr)
        return EXIT_DATA
    except NumericError as e:
        print(f"felix: numeric failure: {e}", file=sys.stderr)
        return EXIT_NUMERIC


if __name__ == "__main__":
    sys.exit(main())
