###############################################################################
# Copyright (c) 2024, the neuroexam developers.
#
# This file is part of neuroexam. It is distributed under the MIT License;
# see the LICENSE file at the repository root for the full text.
###############################################################################

"""Command line interface for extracting and analysing exam features."""
from argparse import ArgumentParser, RawTextHelpFormatter
from concurrent.futures import ProcessPoolExecutor
from contextlib import contextmanager
from itertools import repeat
import json
import logging
import os
import sys

from filelock import FileLock, Timeout
import numpy as np
import pandas as pd
from sklearn.metrics import silhouette_score

from neuroexam import __version__, plotting, report_renderer_factory
from neuroexam.abstracts.enums import ExamKind, Label
from neuroexam.analysis import ClassifierFactory
from neuroexam.analysis.density import class_densities
from neuroexam.analysis.distance import distance_study
from neuroexam.analysis.evaluation import ModelBundle, evaluate
from neuroexam.analysis.matrix import FeatureMatrix, FeaturePipeline
from neuroexam.analysis.pca import pca
from neuroexam.datastructures.features import FeatureVector
from neuroexam.errors import ConfigError, NeuroExamError, ParseError
from neuroexam.features import ExtractorFactory, extract_features
from neuroexam.specification import RunConfig
from neuroexam.specification.recording import FORMATS, META_SUFFIX, \
    read_recording, write_recording
from neuroexam.synth import PROFILES, gen_cohort, generate
from neuroexam.utils import LoggerUtility, create_parentdir, dump_json, \
    make_safe_path

# Program Globals
LOGGER = logging.getLogger(__name__)
LOG_UTIL = LoggerUtility(logging.getLogger("neuroexam"))

# Configuration globals
DEBUG_FORMAT = "[%(asctime)s: %(levelname)s] " \
               "[%(module)s: %(lineno)d] %(message)s"
LFORMAT = "[%(asctime)s: %(levelname)s] %(message)s"

# Exit codes
EXIT_OK = 0
EXIT_USAGE = 1
EXIT_FAILED = 2
EXIT_INTERNAL = 3

LOCK_NAME = ".neuroexam.lock"
LOCK_TIMEOUT = 60
SPLIT_ALIASES = {
    "video": "video_based",
    "subject": "subject_based",
    "video_based": "video_based",
    "subject_based": "subject_based",
}


def load_run_config(args):
    """Effective configuration: file, then --seed, then --param overrides."""
    if args.config:
        config = RunConfig.load_config(args.config)
    else:
        config = RunConfig()
    if args.seed is not None:
        config.set("seed", args.seed)
    config.apply_overrides(args.param)
    return config


@contextmanager
def locked_output(out_dir):
    """Serialize writes into an output directory."""
    create_parentdir(out_dir)
    lock = FileLock(os.path.join(out_dir, LOCK_NAME))
    try:
        with lock.acquire(timeout=LOCK_TIMEOUT):
            yield out_dir
    except Timeout:
        msg = "Output directory '{}' is locked by another run." \
              .format(out_dir)
        LOGGER.error(msg)
        raise OSError(msg)


def write_json(path, data):
    with open(path, "w") as out_file:
        dump_json(data, out_file)
    LOGGER.info("Wrote %s", path)
    return path


def render_report(args, report_data, title):
    """Print a console summary table with the selected layout."""
    if not report_data or not next(iter(report_data.values())):
        return
    renderer = report_renderer_factory.get_renderer(args.layout,
                                                    args.disable_theme)
    renderer.layout(report_data, title=title)
    renderer.render()


def read_features(path):
    """Feature table from a CSV file or a JSON list of feature vectors."""
    if path.lower().endswith(".json"):
        with open(path, "r") as data:
            try:
                vectors = [FeatureVector.from_dict(entry)
                           for entry in json.load(data)]
            except (ValueError, KeyError, TypeError) as exc:
                msg = "Malformed feature list '{}': {}".format(path, exc)
                LOGGER.error(msg)
                raise ParseError(msg)
        return FeatureMatrix.from_vectors(vectors)
    return FeatureMatrix.read_csv(path)


def per_kind(m, kind=None):
    """(kind, sub-matrix) for the requested kind or every kind present."""
    kinds = [ExamKind.from_str(kind)] if kind else m.kinds()
    if not kinds:
        msg = "The feature table holds no known exam columns."
        LOGGER.error(msg)
        raise ParseError(msg)
    for exam in kinds:
        yield exam, m.select_kind(exam)


def output_name(out_dir, stem, kind, ext):
    return make_safe_path(out_dir, "{}_{}.{}".format(
        stem, kind.value.lower(), ext))


def collect_inputs(inputs):
    """Recording files named directly or found in the given directories."""
    paths = []
    for path in inputs:
        if os.path.isdir(path):
            for name in sorted(os.listdir(path)):
                ext = os.path.splitext(name)[1].lower().lstrip(".")
                if ext in FORMATS and not name.endswith(META_SUFFIX):
                    paths.append(os.path.join(path, name))
        else:
            paths.append(path)
    return paths


def extract_one(path, cfg, config_hash, with_segments=False):
    """
    Extract the features of one recording file.

    Runs in worker processes, so failures are returned instead of raised.

    :returns: ("ok", FeatureVector, segments or None) or
        ("error", error entry, None).
    """
    try:
        rec = read_recording(path)
        vector = extract_features(rec, cfg, config_hash)
        segments = None
        if with_segments and rec.test_kind is ExamKind.SAW:
            extractor = ExtractorFactory.get_extractor(rec.test_kind)(cfg)
            segments = {
                "recording_id": rec.recording_id,
                "fps": rec.fps,
                "segments": [seg.to_dict()
                             for seg in extractor.segments(rec)],
            }
        return "ok", vector, segments
    except (NeuroExamError, OSError, ValueError) as exc:
        LOGGER.warning("Skipping '%s': %s", path, exc)
        return "error", {
            "recording": path,
            "error": str(exc),
            "reason": getattr(exc, "reason", type(exc).__name__),
        }, None


def extract_cmd(args):
    """Extract feature vectors from recording files."""
    config = load_run_config(args)
    cfg = config.extraction_config()
    config_hash = config.config_hash()
    paths = collect_inputs(args.inputs)
    if not paths:
        LOGGER.error("No recordings found in %s", ", ".join(args.inputs))
        return EXIT_FAILED
    if args.jobs < 1:
        raise ConfigError("--jobs must be at least 1.")

    worker_args = (paths, repeat(cfg), repeat(config_hash),
                   repeat(bool(args.segments_out)))
    if args.jobs == 1 or len(paths) == 1:
        results = list(map(extract_one, *worker_args))
    else:
        LOGGER.info("Extracting %d recordings with %d workers.", len(paths),
                    args.jobs)
        with ProcessPoolExecutor(max_workers=args.jobs) as pool:
            results = list(pool.map(extract_one, *worker_args))

    vectors = [item for status, item, _ in results if status == "ok"]
    errors = [item for status, item, _ in results if status == "error"]
    segments = [seg for status, _, seg in results
                if status == "ok" and seg is not None]

    out_dir = os.path.abspath(args.out)
    with locked_output(out_dir):
        if vectors:
            if args.format == "json":
                write_json(os.path.join(out_dir, "features.json"),
                           [vec.to_dict() for vec in vectors])
            else:
                path = os.path.join(out_dir, "features.csv")
                FeatureMatrix.from_vectors(vectors).write_csv(path)
                LOGGER.info("Wrote %s", path)
        write_json(os.path.join(out_dir, "errors.json"), errors)

        if args.segments_out:
            seg_dir = os.path.abspath(args.segments_out)
            create_parentdir(seg_dir)
            for report in segments:
                write_json(make_safe_path(seg_dir, report["recording_id"] +
                                          ".segments.json"), report)

    render_report(args, {
        "Recording": [vec.recording_id for vec in vectors] +
                     [err["recording"] for err in errors],
        "Exam": [vec.test_kind.value for vec in vectors] +
                [""] * len(errors),
        "Missing": [len(vec.missing) for vec in vectors] +
                   [""] * len(errors),
        "Status": ["ok"] * len(vectors) +
                  [err["reason"] for err in errors],
    }, "Feature extraction")

    LOGGER.info("Extracted %d of %d recording(s).", len(vectors), len(paths))
    return EXIT_OK if vectors else EXIT_FAILED


def classify_cmd(args):
    """Cross-validate a classifier on a feature table."""
    config = load_run_config(args)
    if args.model:
        config.set("evaluation.model", args.model)
    if args.split:
        config.set("evaluation.split", SPLIT_ALIASES[args.split])
    threshold = config.get("evaluation.threshold")
    model = config.classifier()
    split = config.split_scheme()
    m = read_features(args.features)

    out_dir = os.path.abspath(args.out)
    rows = {"Exam": [], "Metric": [], "Value": []}
    for kind, sub in per_kind(m, args.kind):
        report = evaluate(model, sub, split, threshold)
        result = {
            "config_hash": config.config_hash(),
            "test_kind": kind.value,
            "report": report.to_dict(),
        }
        bundle = None
        if args.model_out or model.key == "rf":
            bundle = ModelBundle.train(model, sub, threshold)

        with locked_output(out_dir):
            write_json(output_name(out_dir, "classification", kind, "json"),
                       result)
            if model.key == "rf":
                write_json(output_name(out_dir, "importance", kind, "json"),
                           [{"feature": name, "weight": weight}
                            for name, weight in bundle.feature_importance()])
        if args.model_out:
            model_dir = os.path.abspath(args.model_out)
            with locked_output(model_dir):
                write_json(output_name(model_dir, "model", kind, "json"),
                           bundle.to_dict())

        for name, value in report.metrics.items():
            rows["Exam"].append(kind.value)
            rows["Metric"].append(name)
            rows["Value"].append(value)

    render_report(args, rows, "{} / {}".format(model.key, split.kind))
    return EXIT_OK


def _silhouette(projections, targets):
    labeled = targets >= 0
    y = targets[labeled]
    if len(np.unique(y)) != 2 or len(y) < 3:
        return None
    return float(silhouette_score(projections[labeled], y))


def pca_cmd(args):
    """Project standardized features onto their principal components."""
    config = load_run_config(args)
    if args.k is not None:
        config.set("pca.k", args.k)
    k = config.get("pca.k")
    m = read_features(args.features)

    out_dir = os.path.abspath(args.out)
    rows = {"Exam": [], "Explained": [], "Silhouette": []}
    for kind, sub in per_kind(m, args.kind):
        X = FeaturePipeline().fit_transform(sub)
        result = pca(X, k)
        columns = ["pc{}".format(i + 1) for i in range(result.k)]
        table = pd.concat([
            sub.to_frame()[["recording_id", "subject_id", "device", "label"]],
            pd.DataFrame(result.projections, columns=columns)], axis=1)
        silhouette = _silhouette(result.projections, sub.targets)

        with locked_output(out_dir):
            table.to_csv(output_name(out_dir, "pca", kind, "csv"),
                         index=False, float_format="%.17g",
                         lineterminator="\n")
            write_json(output_name(out_dir, "pca", kind, "json"), {
                "config_hash": config.config_hash(),
                "test_kind": kind.value,
                "explained_variance": result.explained_variance,
                "eigenvalues": result.eigenvalues,
                "silhouette": silhouette,
                "components": {
                    "columns": list(sub.columns),
                    "rows": result.components,
                },
            })
            plotting.pca_scatter(
                result.projections, sub.labels,
                output_name(out_dir, "pca", kind, "svg"),
                title="{} principal components".format(kind.value))

        rows["Exam"].append(kind.value)
        rows["Explained"].append(float(np.sum(result.explained_variance)))
        rows["Silhouette"].append(silhouette)

    render_report(args, rows, "PCA, k = {}".format(k))
    return EXIT_OK


def distance_cmd(args):
    """Intra- and inter-class feature distances per subject."""
    config = load_run_config(args)
    m = read_features(args.features)

    out_dir = os.path.abspath(args.out)
    rows = {"Exam": [], "Feature": [], "A-A": [], "N-N": [], "N-A": []}
    for kind, sub in per_kind(m, args.kind):
        report = distance_study(sub)
        data = {"config_hash": config.config_hash(),
                "test_kind": kind.value}
        data.update(report.to_dict())
        with locked_output(out_dir):
            write_json(output_name(out_dir, "distance", kind, "json"), data)
            plotting.distance_boxplot(
                report, output_name(out_dir, "distance", kind, "svg"),
                title="{} distances".format(kind.value))

        means = report.means()
        for j, name in enumerate(report.columns):
            rows["Exam"].append(kind.value)
            rows["Feature"].append(name)
            for kind_key, column in (("aa", "A-A"), ("nn", "N-N"),
                                     ("na", "N-A")):
                value = means[kind_key][j]
                rows[column].append(None if np.isnan(value)
                                    else float(value))
        LOGGER.info("%s: %.0f%% of features separate the classes.",
                    kind.value, 100 * report.separated_fraction())

    render_report(args, rows, "Mean normalized distances")
    return EXIT_OK


def density_cmd(args):
    """Class-wise feature densities."""
    config = load_run_config(args)
    if args.grid_points is not None:
        config.set("density.grid_points", args.grid_points)
    m = read_features(args.features)

    out_dir = os.path.abspath(args.out)
    rows = {"Exam": [], "Feature": [], "Overlap": [], "Normal": [],
            "Abnormal": []}
    for kind, sub in per_kind(m, args.kind):
        densities = class_densities(sub, config.get("density.grid_points"))
        with locked_output(out_dir):
            write_json(output_name(out_dir, "density", kind, "json"), {
                "config_hash": config.config_hash(),
                "test_kind": kind.value,
                "features": {name: density.to_dict()
                             for name, density in densities.items()},
            })
            plotting.density_plot(
                densities, output_name(out_dir, "density", kind, "svg"))

        for name, density in densities.items():
            rows["Exam"].append(kind.value)
            rows["Feature"].append(name)
            rows["Overlap"].append(density.overlap)
            rows["Normal"].append(density.means[Label.NORMAL])
            rows["Abnormal"].append(density.means[Label.ABNORMAL])

    render_report(args, rows, "Class densities")
    return EXIT_OK


def synth_cmd(args):
    """Write synthetic recordings."""
    config = load_run_config(args)
    changes = {}
    if args.kind:
        changes["test_kind"] = ExamKind.from_str(args.kind)
    base = config.synth_params(**changes)

    if args.cohort:
        if args.n_subjects is not None:
            config.set("cohort.n_subjects", args.n_subjects)
        if args.profile is not None:
            config.set("cohort.profile", args.profile)
        if args.device_noise is not None:
            config.set("cohort.device_noise", args.device_noise)
        profile = config.get("cohort.profile")
        recordings = gen_cohort(
            config.get("cohort.n_subjects"), profile=profile,
            seed=config.seed,
            test_kind=base.test_kind if profile is None or args.kind
            else None,
            device_noise=config.get("cohort.device_noise"), base=base)
    else:
        recordings = [generate(base)]

    out_dir = os.path.abspath(args.out)
    with locked_output(out_dir):
        for rec in recordings:
            path = make_safe_path(out_dir, "{}.{}".format(rec.recording_id,
                                                          args.format))
            write_recording(rec, path, args.format)

    LOGGER.info("Wrote %d synthetic recording(s) to %s", len(recordings),
                out_dir)
    render_report(args, {
        "Recording": [rec.recording_id for rec in recordings],
        "Exam": [rec.test_kind.value for rec in recordings],
        "Label": [rec.label.value for rec in recordings],
        "Frames": [rec.n_frames for rec in recordings],
    }, "Synthetic recordings")
    return EXIT_OK


def predict_cmd(args):
    """Score a feature table with a saved model bundle."""
    with open(args.model, "r") as data:
        try:
            bundle = ModelBundle.from_dict(json.load(data))
        except (ValueError, KeyError, TypeError) as exc:
            msg = "Malformed model bundle '{}': {}".format(args.model, exc)
            LOGGER.error(msg)
            raise ParseError(msg)

    m = read_features(args.features)
    present = [c for c in bundle.pipeline.columns if c in m.columns]
    if present:
        observed = ~np.all(np.isnan(m.take(columns=present).values), axis=1)
        m = m.take(np.flatnonzero(observed))
    scores, predictions = bundle.predict(m)

    out_dir = os.path.abspath(args.out)
    path = os.path.join(out_dir, "predictions.csv")
    with locked_output(out_dir):
        pd.DataFrame({
            "recording_id": m.recording_ids,
            "score": scores,
            "prediction": predictions,
        }).to_csv(path, index=False, float_format="%.17g",
                  lineterminator="\n")
    LOGGER.info("Wrote %s", path)

    render_report(args, {
        "Recording": list(m.recording_ids),
        "Score": [float(s) for s in scores],
        "Prediction": ["abnormal" if p else "normal" for p in predictions],
    }, "Predictions")
    return EXIT_OK


def _common_parser():
    common = ArgumentParser(add_help=False)
    common.add_argument(
        "--config", type=str,
        help="Path to a YAML run configuration.")
    common.add_argument(
        "-p", "--param", type=str, action="append", default=[],
        help="Override a configuration value as 'section.key:value'. "
        "May be repeated.")
    common.add_argument(
        "--seed", type=int,
        help="Seed of every random draw. [Default: the configured seed]")
    common.add_argument(
        "-o", "--out", type=str, default=".",
        help="Output directory. [Default: %(default)s]")
    common.add_argument(
        "--layout", type=str,
        choices=report_renderer_factory.get_layouts(), default="flat",
        help="Console summary layout. [Default: %(default)s]")
    common.add_argument(
        "--disable-theme", action="store_true", default=False,
        help="Turn off styling of the console summary.")
    return common


def _add_table_args(parser):
    parser.add_argument(
        "features", type=str,
        help="Feature table written by 'extract' (CSV or JSON).")
    parser.add_argument(
        "--kind", type=str, choices=[k.value for k in ExamKind],
        help="Only analyse this exam. [Default: every exam in the table]")


def setup_argparser():
    """Set up the program's argument parser."""
    parser = ArgumentParser(
        prog="neuroexam",
        description="Clinically interpretable features from pose time "
        "series of neurological exams.",
        formatter_class=RawTextHelpFormatter)
    parser.set_defaults(func=lambda args: parser.print_help())
    subparsers = parser.add_subparsers(dest="subparser")
    common = _common_parser()

    extract = subparsers.add_parser(
        "extract", parents=[common],
        help="Extract features from recording files.")
    extract.add_argument(
        "inputs", type=str, nargs="+",
        help="Recording files (.json, .csv) or directories holding them.")
    extract.add_argument(
        "-j", "--jobs", type=int, default=1,
        help="Number of worker processes. [Default: %(default)d]")
    extract.add_argument(
        "--segments-out", type=str,
        help="Directory for the segments of stand-up-and-walk recordings.")
    extract.add_argument(
        "--format", type=str, choices=["csv", "json"], default="csv",
        help="Feature table format. [Default: %(default)s]")
    extract.set_defaults(func=extract_cmd)

    classify = subparsers.add_parser(
        "classify", parents=[common],
        help="Cross-validate a normal/abnormal classifier.")
    _add_table_args(classify)
    classify.add_argument(
        "--model", type=str,
        choices=sorted(ClassifierFactory.get_valid_classifiers()),
        help="Classifier. [Default: the configured model]")
    classify.add_argument(
        "--split", type=str, choices=sorted(SPLIT_ALIASES),
        help="Fold assignment. [Default: the configured split]")
    classify.add_argument(
        "--model-out", type=str,
        help="Directory for model bundles trained on every labeled row.")
    classify.set_defaults(func=classify_cmd)

    pca_parser = subparsers.add_parser(
        "pca", parents=[common],
        help="Principal component projection of a feature table.")
    _add_table_args(pca_parser)
    pca_parser.add_argument(
        "-k", type=int,
        help="Number of components. [Default: the configured k]")
    pca_parser.set_defaults(func=pca_cmd)

    distance = subparsers.add_parser(
        "distance", parents=[common],
        help="A-A, N-N and N-A feature distances per subject.")
    _add_table_args(distance)
    distance.set_defaults(func=distance_cmd)

    density = subparsers.add_parser(
        "density", parents=[common],
        help="Class-wise kernel densities of every feature.")
    _add_table_args(density)
    density.add_argument(
        "--grid-points", type=int,
        help="Density grid size. [Default: the configured size]")
    density.set_defaults(func=density_cmd)

    synth = subparsers.add_parser(
        "synth", parents=[common],
        help="Generate synthetic recordings.")
    synth.add_argument(
        "--kind", type=str, choices=[k.value for k in ExamKind],
        help="Exam to simulate. [Default: the configured exam]")
    synth.add_argument(
        "--cohort", action="store_true", default=False,
        help="Generate a cohort of normal and impaired subjects.")
    synth.add_argument(
        "-n", "--n-subjects", type=int,
        help="Cohort size. [Default: the configured size]")
    synth.add_argument(
        "--profile", type=str, choices=list(PROFILES),
        help="Impairment profile of the cohort. "
        "[Default: the profile of the exam]")
    synth.add_argument(
        "--device-noise", type=float,
        help="Relative parameter change between the two devices.")
    synth.add_argument(
        "--format", type=str, choices=list(FORMATS), default="json",
        help="Recording format. [Default: %(default)s]")
    synth.set_defaults(func=synth_cmd)

    predict = subparsers.add_parser(
        "predict", parents=[common],
        help="Score a feature table with a saved model bundle.")
    predict.add_argument(
        "features", type=str,
        help="Feature table written by 'extract' (CSV or JSON).")
    predict.add_argument(
        "-m", "--model", type=str, required=True,
        help="Model bundle written by 'classify --model-out'.")
    predict.set_defaults(func=predict_cmd)

    # global options
    parser.add_argument(
        "-l", "--logpath", type=str,
        help="Alternate path to store program logging.")
    parser.add_argument(
        "-d", "--debug_lvl", type=int, default=2,
        help="Level of logging messages to be output:\n"
        "5 - Critical\n"
        "4 - Error\n"
        "3 - Warning\n"
        "2 - Info (Default)\n"
        "1 - Debug")
    parser.add_argument(
        "-v", "--version", action="version", version="%(prog)s " +
        __version__)

    return parser


def main(argv=None):
    """
    Execute the main program's functionality.

    :param argv: Argument list; defaults to ``sys.argv[1:]``.
    :returns: Exit code. 0 on success, 1 on usage or configuration errors,
        2 when processing failed and 3 on internal errors.
    """
    parser = setup_argparser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_OK if not exc.code else EXIT_USAGE

    lformat = DEBUG_FORMAT if args.debug_lvl == 1 else LFORMAT
    LOG_UTIL.configure(lformat, args.debug_lvl)
    if args.logpath:
        create_parentdir(os.path.dirname(os.path.abspath(args.logpath)))
        LOG_UTIL.add_file_handler(args.logpath, lformat, args.debug_lvl)

    try:
        rc = args.func(args)
    except ConfigError as exc:
        LOGGER.error("Configuration error: %s", exc)
        return EXIT_USAGE
    except (NeuroExamError, OSError, ValueError) as exc:
        LOGGER.error("%s: %s", type(exc).__name__, exc)
        return EXIT_FAILED
    except Exception:
        LOGGER.exception("Unexpected error.")
        return EXIT_INTERNAL

    return EXIT_OK if rc is None else rc


if __name__ == "__main__":
    sys.exit(main())
