"""Command-line entry point: ``adspeech {synth,extract,stats,cv,train,predict}``.

Exit status: 0 success, 1 usage error, 2 data error, 3 internal error.
Every file written starts with a provenance line naming the tool version,
the configuration digest and the seed.
"""
from __future__ import annotations

import argparse
import json
import logging
import sys
import traceback
from pathlib import Path

import numpy as np

from . import __version__
from .chat import ChatParseError
from .config import ConfigError, PipelineConfig, load_config
from .corpus.audio import WavError
from .corpus.metadata import MetadataError
from .corpus.synth_corpus import CorpusPlan, parse_effects, synth_corpus
from .features import (SET_TAGS, FeatureTableError, VocabularyError, load_lexicon,
                       read_feature_csv, save_lexicon, set_names, write_feature_csv)
from .models import (CLASSIFIERS, REGRESSORS, cross_validate, load_model, save_model,
                     train_model)
from .models.metrics import classification_report, regression_report
from .pipeline import CorpusError, evaluate_holdout, extract_corpus, table_xy
from .stats import (OutlierRule, filter_outliers, format_significance, scatter_svg,
                    significance_csv, significance_table)

__all__ = ["main", "build_parser"]

EXIT_OK, EXIT_USAGE, EXIT_DATA, EXIT_INTERNAL = 0, 1, 2, 3

MODEL_ALIASES = {
    "class": {"rf": "rf_class", "knn": "knn", "svm": "svm_smo", "mlp": "mlp_class"},
    "reg": {"rf": "rf_reg", "svr": "svr_smo", "mlp": "mlp_reg", "lrsgd": "linreg_sgd"},
}

log = logging.getLogger("adspeech")


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        print(f"{self.prog}: error: {message}", file=sys.stderr)
        raise SystemExit(EXIT_USAGE)


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="adspeech", description="Alzheimer's speech feature pipeline")
    p.add_argument("--version", action="version", version=f"adspeech {__version__}")
    p.add_argument("--config", help="INI configuration file (default: $ADSPEECH_CONFIG)")
    p.add_argument("--seed", type=int, help="random seed (default: run.seed from config)")
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)
    # --config and --seed also accepted after the subcommand
    common = _Parser(add_help=False)
    common.add_argument("--config", default=argparse.SUPPRESS, help=argparse.SUPPRESS)
    common.add_argument("--seed", type=int, default=argparse.SUPPRESS, help=argparse.SUPPRESS)

    s = sub.add_parser("synth", parents=[common], help="write a synthetic corpus")
    s.add_argument("--out", required=True, help="output corpus directory")
    s.add_argument("--n", type=int, help="sessions per group")
    s.add_argument("--effect", action="append", default=[],
                   help="planted AD shift, e.g. pause:+0.5 (repeatable; 'adlike' preset)")
    s.add_argument("--no-audio", action="store_true", help="transcripts and metadata only")
    s.add_argument("--ad-ceiling", type=int, help="AD sessions pinned to MMSE 30")

    e = sub.add_parser("extract", parents=[common], help="compute the feature CSV of a corpus")
    e.add_argument("corpus", help="corpus directory")
    e.add_argument("--out", required=True, help="feature CSV to write")
    lex = e.add_mutually_exclusive_group(required=True)
    lex.add_argument("--fit", metavar="SIDECAR", help="fit vocabulary here and write it to SIDECAR")
    lex.add_argument("--lexicon", metavar="SIDECAR", help="reuse a vocabulary fit on training data")
    e.add_argument("--set", default="all", choices=SET_TAGS, help="feature set to write")
    e.add_argument("--dump-contours", metavar="DIR", help="write per-session F0/intensity CSVs")
    e.add_argument("--flags", metavar="CSV", help="write per-session validity flags")
    e.add_argument("--jobs", type=int, default=1)

    st = sub.add_parser("stats", parents=[common],
                        help="group tests, MMSE correlations and scatter plot")
    st.add_argument("features", help="feature CSV")
    st.add_argument("--out-dir", required=True)
    st.add_argument("--alpha", type=float)
    st.add_argument("--full", action="store_true", help="list every feature")
    st.add_argument("--drop-outliers", default="", metavar="RULE", help="e.g. ad30:1,lexlow:3")

    cv = sub.add_parser("cv", parents=[common], help="k-fold cross-validation")
    cv.add_argument("features")
    _model_args(cv)
    cv.add_argument("--folds", type=int)
    cv.add_argument("--no-stratify", action="store_true")
    cv.add_argument("--jobs", type=int)
    cv.add_argument("--drop-outliers", default="", metavar="RULE")
    cv.add_argument("--out", help="report file stem (writes .txt and .csv)")

    tr = sub.add_parser("train", parents=[common], help="fit one model and save it")
    tr.add_argument("features")
    _model_args(tr)
    tr.add_argument("--out", required=True, help="model JSON")
    tr.add_argument("--test", help="also predict this feature CSV")
    tr.add_argument("--predictions", help="predictions CSV for --test")
    tr.add_argument("--drop-outliers", default="", metavar="RULE")

    pr = sub.add_parser("predict", parents=[common], help="apply a saved model")
    pr.add_argument("model", help="model JSON")
    pr.add_argument("features", help="feature CSV")
    pr.add_argument("--out", required=True, help="predictions CSV")
    return p


def _model_args(p):
    p.add_argument("--model", required=True,
                   help="rf, knn, svm, mlp (class); rf, svr, mlp, lrsgd (reg); a kind name; or all")
    p.add_argument("--set", default="all",
                   help=f"feature set ({', '.join(SET_TAGS)}); comma list or 'every' for cv")
    p.add_argument("--task", choices=("class", "reg"), default="class")


# ---------------------------------------------------------------- helpers

def _header(cfg: PipelineConfig, seed: int, command: str) -> str:
    return f"adspeech {__version__} config={cfg.digest()} seed={seed} command={command}"


def _write(path, text):
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(text, encoding="utf-8")


def _kinds(model: str, task: str) -> list[str]:
    table = MODEL_ALIASES[task]
    if model == "all":
        return list(table.values())
    kind = table.get(model, model)
    allowed = CLASSIFIERS if task == "class" else REGRESSORS
    if kind not in allowed:
        raise UsageError(f"model {model!r} is not available for task {task!r}")
    return [kind]


def _sets(text: str, many: bool) -> list[str]:
    tags = list(SET_TAGS) if text == "every" else [t.strip() for t in text.split(",")]
    for t in tags:
        if t not in SET_TAGS:
            raise UsageError(f"unknown feature set {t!r}")
    if not many and len(tags) != 1:
        raise UsageError("give exactly one feature set")
    return tags


def _rule(text: str) -> OutlierRule:
    try:
        return OutlierRule.parse(text)
    except ValueError as e:
        raise UsageError(str(e)) from None


def _apply_rule(table, rule):
    if rule.is_noop:
        return table, []
    kept, dropped = filter_outliers(table.session_ids, table.labels, table.mmse,
                                    table.column("lex_mean"), rule)
    return table.select_rows(kept), [table.session_ids[i] for i in dropped]


def _predictions_csv(ids, preds, classification, header):
    col = "predicted_label" if classification else "predicted_mmse"
    lines = [f"# {header}", f"session_id,{col}"]
    for sid, p in zip(ids, preds):
        lines.append(f"{sid},{p if classification else repr(float(p))}")
    return "\n".join(lines) + "\n"


def _report_text(report) -> str:
    if report.task == "classification":
        out = [f"accuracy {report.accuracy:.4f}  (n={report.n})", "class    P       R       F1      support"]
        for c in report.per_class:
            out.append(f"{c.label:<8} {c.precision:.4f}  {c.recall:.4f}  {c.f1:.4f}  {c.support}")
        out.append("confusion (rows true, columns predicted): " + ", ".join(report.labels))
        out.extend("  " + " ".join(f"{v:4d}" for v in row) for row in report.confusion)
        return "\n".join(out) + "\n"
    if report.rmse is None:
        return f"no reference MMSE; {report.n} predictions written\n"
    return f"rmse {report.rmse:.4f}  (n={report.n})\n"


# ---------------------------------------------------------------- commands

def cmd_synth(args, cfg, seed):
    s = cfg.sections["synth"]
    effects = parse_effects(",".join(args.effect) if args.effect else s["effects"])
    plan = CorpusPlan(n_per_group=args.n or s["n_per_group"], effects=effects, seed=seed,
                      n_turns=s["n_turns"], mmse_intercept=s["mmse_intercept"],
                      mmse_slope=s["mmse_slope"], mmse_noise=s["mmse_noise"], snr_db=s["snr_db"],
                      sample_rate=s["sample_rate"],
                      ad_at_ceiling=s["ad_at_ceiling"] if args.ad_ceiling is None else args.ad_ceiling)
    sessions = synth_corpus(args.out, plan, audio=not args.no_audio,
                            header=_header(cfg, seed, "synth"))
    print(f"wrote {len(sessions)} sessions")
    print(Path(args.out) / "manifest.csv")
    return EXIT_OK


def cmd_extract(args, cfg, seed):
    lexicon = load_lexicon(args.lexicon) if args.lexicon else None
    res = extract_corpus(args.corpus, lexicon, cfg.acoustic_params(), n_jobs=args.jobs,
                         contour_dir=args.dump_contours)
    for f in res.failures:
        print(f"warning: skipped {f.session_id}: {f.reason}", file=sys.stderr)
    table = res.table
    keep = set_names(args.set, cfg.sections["features"]["demographics"])
    if keep != table.names:
        table.X = table.columns(keep)
        table.names = keep
    header = _header(cfg, seed, "extract")
    write_feature_csv(args.out, table, header_comment=header)
    if args.fit:
        save_lexicon(args.fit, res.vocabulary, res.scaler, {"provenance": header})
    if args.flags:
        lines = [f"# {header}", "session_id,invalid"]
        lines += [f"{sid},{' '.join(res.invalid.get(sid, []))}" for sid in table.session_ids]
        _write(args.flags, "\n".join(lines) + "\n")
    print(f"wrote {len(table)} rows x {len(table.names)} features to {args.out}")
    return EXIT_OK


def cmd_stats(args, cfg, seed):
    table = read_feature_csv(args.features)
    st = cfg.sections["stats"]
    alpha = st["alpha"] if args.alpha is None else args.alpha
    rule = _rule(args.drop_outliers)
    header = _header(cfg, seed, "stats")
    rows = significance_table(table, alpha=alpha, full=args.full, method=st["method"])
    title = (f"# {header}\nGroup comparison ({st['method']} t-test, two-sided), "
             f"{'all features' if args.full else f'p < {alpha:g}'}; values from this corpus")
    text = format_significance(rows, title)
    out = Path(args.out_dir)
    _write(out / "significance.txt", text)
    _write(out / "significance.csv", f"# {header}\n" + significance_csv(rows))
    dropped = []
    if not rule.is_noop:
        _, dropped = filter_outliers(table.session_ids, table.labels, table.mmse,
                                     table.column("lex_mean"), rule)
    if all(m is not None for m in table.mmse):
        svg = scatter_svg(table.column("lex_mean"), table.mmse_array(), table.labels,
                          table.session_ids, dropped)
        _write(out / "lexical_mmse.svg", svg.replace("\n", f"\n<!-- {header} -->\n", 1))
    print(text, end="")
    if dropped:
        print("outliers: " + ", ".join(table.session_ids[i] for i in dropped))
    return EXIT_OK


def cmd_cv(args, cfg, seed):
    table = read_feature_csv(args.features)
    kinds = _kinds(args.model, args.task)
    tags = _sets(args.set, many=True)
    table, dropped = _apply_rule(table, _rule(args.drop_outliers))
    c = cfg.sections["cv"]
    folds = args.folds or c["folds"]
    jobs = args.jobs or c["n_jobs"]
    demo = cfg.sections["features"]["demographics"]
    header = _header(cfg, seed, "cv")
    metric = "accuracy" if args.task == "class" else "rmse"
    grid, details = {}, []
    for tag in tags:
        for kind in kinds:
            mc = cfg.model_config(kind, seed)
            names, X, y = table_xy(table, tag, mc.is_classifier, demo)
            res = cross_validate(mc, X, y, folds=folds, seed=seed,
                                 stratify=c["stratify"] and not args.no_stratify,
                                 n_jobs=jobs, feature_names=names)
            rep = res.report
            grid[tag, kind] = rep.accuracy if args.task == "class" else rep.rmse
            details.append(f"[{tag} / {kind}]\n" + _report_text(rep))
    width = max(10, *(len(k) for k in kinds))
    lines = [f"# {header}",
             f"{folds}-fold cross-validation, {metric} (values from this corpus)"]
    if dropped:
        lines.append("dropped outliers: " + ", ".join(dropped))
    lines.append("set".ljust(10) + "".join(k.rjust(width + 2) for k in kinds))
    for tag in tags:
        lines.append(tag.ljust(10) + "".join(f"{grid[tag, k]:.4f}".rjust(width + 2) for k in kinds))
    text = "\n".join(lines) + "\n\n" + "\n".join(details)
    print(text, end="")
    if args.out:
        _write(args.out + ".txt", text)
        csv_lines = [f"# {header}", f"set,model,{metric}"]
        csv_lines += [f"{t},{k},{grid[t, k]!r}" for t in tags for k in kinds]
        _write(args.out + ".csv", "\n".join(csv_lines) + "\n")
    return EXIT_OK


def cmd_train(args, cfg, seed):
    table = read_feature_csv(args.features)
    kinds = _kinds(args.model, args.task)
    if len(kinds) != 1:
        raise UsageError("train takes a single model")
    tag = _sets(args.set, many=False)[0]
    rule = _rule(args.drop_outliers)
    mc = cfg.model_config(kinds[0], seed)
    demo = cfg.sections["features"]["demographics"]
    header = _header(cfg, seed, "train")
    if args.test:
        test = read_feature_csv(args.test)
        res = evaluate_holdout(table, test, mc, tag, rule, demo)
        model, dropped = res.model, res.dropped_ids
        if args.predictions:
            _write(args.predictions, _predictions_csv(test.session_ids, res.predictions,
                                                      mc.is_classifier, header))
        report = _report_text(res.report)
    else:
        table, dropped = _apply_rule(table, rule)
        names, X, y = table_xy(table, tag, mc.is_classifier, demo)
        model = train_model(mc, X, y, names)
        report = ""
    save_model(args.out, model, {"header": header, "set": tag, "demographics": demo})
    if dropped:
        print(f"dropped {len(dropped)} outliers: " + ", ".join(dropped))
    print(f"saved {mc.kind} model on set {tag} to {args.out}")
    print(report, end="")
    return EXIT_OK


def cmd_predict(args, cfg, seed):
    try:
        model = load_model(args.model)
        prov = json.loads(Path(args.model).read_text(encoding="utf-8")).get("provenance", {})
    except (KeyError, ValueError) as e:
        raise FeatureTableError(f"{args.model}: unreadable model file ({e})") from None
    table = read_feature_csv(args.features)
    X = table.columns(model.feature_names)
    pred = model.predict(X)
    header = _header(cfg, seed, "predict")
    clf = model.config.is_classifier
    _write(args.out, _predictions_csv(table.session_ids, pred, clf, header))
    print(f"model {model.config.kind} on set {prov.get('set', '?')}: {len(pred)} predictions")
    if clf and all(l in ("AD", "nonAD") for l in table.labels):
        print(_report_text(classification_report(table.labels, pred, labels=["AD", "nonAD"])), end="")
    elif not clf and all(m is not None for m in table.mmse):
        print(_report_text(regression_report(table.mmse_array(), np.asarray(pred))), end="")
    return EXIT_OK


COMMANDS = {"synth": cmd_synth, "extract": cmd_extract, "stats": cmd_stats, "cv": cmd_cv,
            "train": cmd_train, "predict": cmd_predict}

DATA_ERRORS = (CorpusError, FeatureTableError, MetadataError, ChatParseError, WavError,
               VocabularyError, OSError)


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return int(e.code or 0)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        cfg = load_config(args.config)
        seed = cfg.seed if args.seed is None else args.seed
        return COMMANDS[args.command](args, cfg, seed)
    except (UsageError, ConfigError) as e:
        print(f"adspeech {args.command}: error: {e}", file=sys.stderr)
        return EXIT_USAGE
    except DATA_ERRORS as e:
        print(f"adspeech {args.command}: data error: {e}", file=sys.stderr)
        return EXIT_DATA
    except ValueError as e:
        print(f"adspeech {args.command}: data error: {e}", file=sys.stderr)
        return EXIT_DATA
    except Exception:                                   # pragma: no cover - last resort
        traceback.print_exc()
        return EXIT_INTERNAL


if __name__ == "__main__":
    sys.exit(main())
