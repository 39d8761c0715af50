"""Command-line entry point: synth, train, classify, evaluate.

Exit codes: 0 success, 2 data/input errors, 1 internal errors.  Every
subcommand is deterministic under a fixed --seed and writes only inside its
output directory.
"""

import argparse
import sys
from pathlib import Path

from . import evalmap, forest, geodata, pipeline, synth
from .errors import DataError


def _forest_params(args):
    return forest.ForestParams(
        n_classes=len(pipeline.MaterialClass),
        n_trees=args.trees,
        impurity=args.impurity,
        mode={"ccf": "ccf", "axis": "axis_aligned"}[args.mode],
        gamma=args.gamma,
        seed=args.seed,
    )


def cmd_synth(args):
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    prototypes = synth.default_prototypes()
    layout = synth.quadrant_layout(args.width, args.height)
    scene, mask, truth = synth.generate_scene(
        args.width, args.height, layout, prototypes, args.seed,
        unknown_fraction=args.unknown_fraction)
    geodata.write_scene(scene, out / "scene.hdr", out / "scene.bsq")
    geodata.write_mask(mask, out / "mask.png")
    survey, environment = synth.sample_points(scene, truth,
                                              args.points_per_class, args.seed)
    geodata.write_points(survey, out / "points.csv")
    geodata.write_points(environment, out / "env_points.csv")
    print(f"wrote scene.hdr scene.bsq mask.png points.csv env_points.csv to {out}")
    return 0


def cmd_train(args):
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    scene = geodata.load_scene(args.scene_header, args.scene_data)
    points = geodata.load_points(args.points)
    samples, report = pipeline.extract_samples(scene, points)
    if args.env_points:
        env_points = geodata.load_points(args.env_points)
        env_samples, env_report = pipeline.extract_samples(
            scene, env_points, force_class=pipeline.MaterialClass.ENVIRONMENT)
        samples.extend(env_samples)
        report.accepted += env_report.accepted
        report.counts.update(env_report.counts)

    balanced = pipeline.balance(samples, args.per_class, args.seed)
    model = forest.train_forest(balanced, _forest_params(args),
                                class_names=pipeline.MATERIAL_NAMES)
    (out / "model.ccf").write_bytes(forest.serialize(model))
    (out / "rejection_report.txt").write_text(report.to_text_table())
    (out / "rejection_report.kv").write_text(report.to_kv())
    print(report.to_text_table(), end="")
    print(f"wrote model.ccf to {out}")
    return 0


def cmd_classify(args):
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    model = forest.deserialize(Path(args.model).read_bytes())
    scene = geodata.load_scene(args.scene_header, args.scene_data)
    try:
        class_map = evalmap.classify_scene(model, scene)
    except ValueError as exc:
        raise DataError(str(exc)) from None
    (out / "map.png").write_bytes(evalmap.render_png(class_map))
    (out / "class_grid.png").write_bytes(evalmap.grid_png_bytes(class_map))
    print(f"wrote map.png and class_grid.png to {out}")
    return 0


def cmd_evaluate(args):
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    try:
        class_map = evalmap.load_grid(args.classes)
    except ValueError as exc:
        raise DataError(str(exc)) from None
    mask = geodata.load_mask(args.mask)
    try:
        report = evalmap.evaluate_against_mask(class_map, mask)
    except ValueError as exc:
        raise DataError(str(exc)) from None
    (out / "eval_report.txt").write_text(report.to_text_table())
    (out / "eval_report.kv").write_text(report.to_kv())
    print(report.to_text_table(), end="")
    return 0


def _add_forest_flags(p):
    p.add_argument("--trees", type=int, default=10,
                   help="number of trees (default 10, as in the figures; "
                        "15 trades a little compute for accuracy)")
    p.add_argument("--per-class", type=int, default=11, dest="per_class",
                   help="balanced samples per class (default 11)")
    p.add_argument("--impurity", choices=["gini", "entropy"], default="gini")
    p.add_argument("--mode", choices=["ccf", "axis"], default="ccf")
    p.add_argument("--gamma", type=float, default=None,
                   help="CCA ridge; default scales with the data")


def build_parser():
    parser = argparse.ArgumentParser(
        prog="ccfmap",
        description="Canonical correlation forests for per-pixel material mapping")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("synth", help="generate a synthetic fixture set")
    p.add_argument("--out", required=True)
    p.add_argument("--width", type=int, default=64)
    p.add_argument("--height", type=int, default=64)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--unknown-fraction", type=float, default=0.3,
                   dest="unknown_fraction")
    p.add_argument("--points-per-class", type=int, default=30,
                   dest="points_per_class")
    p.set_defaults(func=cmd_synth)

    p = sub.add_parser("train", help="extract, balance, and train a model")
    p.add_argument("--scene-header", required=True, dest="scene_header")
    p.add_argument("--scene-data", required=True, dest="scene_data")
    p.add_argument("--points", required=True)
    p.add_argument("--env-points", dest="env_points",
                   help="second CSV of analyst-chosen environment points")
    p.add_argument("--out", required=True)
    p.add_argument("--seed", type=int, default=0)
    _add_forest_flags(p)
    p.set_defaults(func=cmd_train)

    p = sub.add_parser("classify", help="classify every pixel of a scene")
    p.add_argument("--model", required=True)
    p.add_argument("--scene-header", required=True, dest="scene_header")
    p.add_argument("--scene-data", required=True, dest="scene_data")
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_classify)

    p = sub.add_parser("evaluate", help="score a class grid against a mask")
    p.add_argument("--classes", required=True)
    p.add_argument("--mask", required=True)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_evaluate)
    return parser


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (DataError, FileNotFoundError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except Exception as exc:  # internal failure
        print(f"internal error: {exc}", file=sys.stderr)
        return 1


def console_main():
    raise SystemExit(main())
