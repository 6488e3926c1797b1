"""Command-line entry point: ``track``, ``eval``, ``synth`` and ``selftest``."""

from __future__ import annotations

import argparse
import dataclasses
import logging
import sys
import time
from pathlib import Path

from . import checkpoint, config, evaluation, results, selftest, tracker
from .geometry import BBox
from .sequences import SequenceError, SequenceSpec, SyntheticParams, generate_synthetic, \
    load_sequence, read_groundtruth

log = logging.getLogger("woselm_track")


class CliError(RuntimeError):
    pass


# -- runners ----------------------------------------------------------------

def run_track(cfg: config.RunConfig) -> dict:
    """Track one sequence and write every artifact into ``cfg.output_dir``."""
    if cfg.sequence is None:
        raise CliError("no sequence given (use --config or --images)")
    seq = load_sequence(cfg.sequence)
    if cfg.init_box is not None:
        x, y, w, h = cfg.init_box
        box0 = BBox(x - 1, y - 1, w, h)
    elif seq.groundtruth is not None:
        box0 = seq.groundtruth[0]
    else:
        raise CliError("no initial box: give ground truth or --init-box")

    out = Path(cfg.output_dir)
    out.mkdir(parents=True, exist_ok=True)
    (out / "config.ini").write_text(config.to_text(cfg))
    log.info("tracking %d frames from %s, initial box %s", len(seq.frames),
             cfg.sequence.image_dir, box0.as_tuple())
    log.info("seeds: projection=%d hidden=%d", cfg.tracker.projection_seed,
             cfg.tracker.hidden_seed)

    t0 = time.perf_counter()
    state = tracker.init(seq.frames[0], box0, cfg.tracker)
    records = [tracker.TrackRecord(0, box0, ms=(time.perf_counter() - t0) * 1e3)]
    for i, frame in enumerate(seq.frames[1:], start=1):
        try:
            state, box, diag = tracker.step(state, frame)
        except Exception as exc:
            raise tracker.TrackingError(f"frame {i}: {exc}") from exc
        if diag["held"]:
            log.warning("frame %d: no candidates, holding previous box", i)
        log.debug("frame %d box=%s max=%.4f rho=%.3g votes=%d", i, box.as_tuple(),
                  diag["max_score"], diag["rho"], len(diag["votes"]))
        records.append(tracker.TrackRecord(i, box, diag["max_score"], diag["rho"], diag["ms"],
                                           diag["n_candidates"], diag))

    results.write_results_csv(out / "results.csv", records)
    results.write_timing_csv(out / "timing.csv", records)
    (out / "state.bin").write_bytes(checkpoint.dumps(state))
    ms = [r.ms for r in records[1:]]
    fps = 1e3 * len(ms) / sum(ms) if ms and sum(ms) > 0 else float("nan")
    summary = {"frames": len(records), "fps": fps, "output_dir": str(out)}
    log.info("mean %.1f frames/s over %d tracked frames", fps, len(ms))

    if seq.groundtruth is not None:
        res = evaluation.evaluate([r.box for r in records], seq.groundtruth, ms)
        _write_eval(out, res, cfg.plots)
        summary["success_rate"] = res.success_rate_at_05
        summary["mean_overlap"] = res.mean_overlap
    return summary


def _write_eval(out: Path, res: evaluation.EvalResult, plots: bool) -> None:
    evaluation.write_metrics_csv(out / "metrics.csv", res)
    evaluation.write_summary_csv(out / "summary.csv", res)
    if plots:
        evaluation.write_plots(out, res)


def run_eval(results_path, groundtruth, output_dir, plots: bool = True) -> evaluation.EvalResult:
    pred = results.read_results_csv(results_path)
    gt = read_groundtruth(groundtruth)
    if len(gt) < len(pred):
        raise CliError(f"{groundtruth}: {len(gt)} boxes for {len(pred)} result rows")
    res = evaluation.evaluate(pred, gt[:len(pred)])
    out = Path(output_dir)
    out.mkdir(parents=True, exist_ok=True)
    _write_eval(out, res, plots)
    return res


# -- argument handling -------------------------------------------------------

def _box_arg(text: str) -> tuple[int, int, int, int]:
    parts = text.replace(" ", "").split(",")
    if len(parts) != 4:
        raise argparse.ArgumentTypeError("expected x,y,w,h")
    try:
        return tuple(int(p) for p in parts)
    except ValueError:
        raise argparse.ArgumentTypeError("box values must be integers") from None


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="woselm-track",
                                description="Weighted online-sequential ELM object tracker.")
    p.add_argument("-v", "--verbose", action="count", default=0,
                   help="more logging (repeat for debug)")
    sub = p.add_subparsers(dest="command", required=True)

    t = sub.add_parser("track", help="track a sequence and evaluate it when ground truth exists")
    t.add_argument("--config", type=Path, help="INI run configuration")
    t.add_argument("--images", type=Path, help="frame directory (overrides [sequence] image_dir)")
    t.add_argument("--pattern", help="frame filename pattern, e.g. '{:04d}.jpg'")
    t.add_argument("--groundtruth", type=Path, help="ground-truth file, one x,y,w,h per line")
    t.add_argument("--start-index", type=int, help="number of the first frame file")
    t.add_argument("--frames", type=int, help="number of frames to read")
    t.add_argument("--init-box", type=_box_arg, help="1-based x,y,w,h of the target in frame 1")
    t.add_argument("-o", "--output", type=Path, help=f"output directory (default ${config.OUTPUT_ENV} "
                   f"or ./{config.DEFAULT_OUTPUT})")
    t.add_argument("--set", dest="overrides", action="append", default=[], metavar="SEC.KEY=VAL",
                   help="override a config value, e.g. tracker.C=10")
    t.add_argument("--no-plots", action="store_true", help="skip SVG plots")

    e = sub.add_parser("eval", help="score stored results against ground truth")
    e.add_argument("results", type=Path, help="results.csv written by 'track'")
    e.add_argument("groundtruth", type=Path)
    e.add_argument("-o", "--output", type=Path, help="output directory (default: next to results)")
    e.add_argument("--no-plots", action="store_true")

    s = sub.add_parser("synth", help="write a synthetic translating-square sequence")
    s.add_argument("output", type=Path)
    d = SyntheticParams()
    s.add_argument("--width", type=int, default=d.width)
    s.add_argument("--height", type=int, default=d.height)
    s.add_argument("--frames", type=int, default=d.n_frames)
    s.add_argument("--target-size", type=int, default=d.target_size)
    s.add_argument("--amplitude", type=float, default=d.amplitude, help="motion amplitude (px)")
    s.add_argument("--noise", type=float, default=d.noise, help="noise sigma (gray levels)")
    s.add_argument("--seed", type=int, default=d.seed)

    sub.add_parser("selftest", help="run the recursive-vs-batch oracle checks")
    return p


def _track_config(args) -> config.RunConfig:
    cfg = config.load(args.config) if args.config else config.RunConfig()
    seq = cfg.sequence
    if args.images is not None:
        seq = dataclasses.replace(seq, image_dir=args.images) if seq else SequenceSpec(args.images)
    if seq is not None:
        changes = {k: v for k, v in (("pattern", args.pattern), ("groundtruth", args.groundtruth),
                                     ("start_index", args.start_index),
                                     ("n_frames", args.frames)) if v is not None}
        seq = dataclasses.replace(seq, **changes)
    elif args.groundtruth or args.pattern:
        raise CliError("--groundtruth/--pattern need a sequence (--images or --config)")
    cfg = dataclasses.replace(cfg, sequence=seq)
    if args.init_box is not None:
        cfg = dataclasses.replace(cfg, init_box=args.init_box)
    if args.output is not None:
        cfg = dataclasses.replace(cfg, output_dir=args.output)
    if args.no_plots:
        cfg = dataclasses.replace(cfg, plots=False)
    return config.apply_overrides(cfg, args.overrides)


def _write_sequence_ini(out: Path, spec: SequenceSpec, params: SyntheticParams) -> Path:
    """Sequence section usable as ``track --config``; paths are relative to ``out``."""
    path = out / "sequence.ini"
    path.write_text(
        f"# synthetic: {params.width}x{params.height}, amplitude {params.amplitude:g}, "
        f"noise {params.noise:g}, seed {params.seed}\n"
        "[sequence]\n"
        f"image_dir = {Path(spec.image_dir).name}\n"
        f"pattern = {spec.pattern}\n"
        f"groundtruth = {Path(spec.groundtruth).name}\n"
        f"start_index = {spec.start_index}\n"
        f"n_frames = {spec.n_frames}\n")
    return path


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.WARNING - 10 * min(args.verbose, 2),
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        if args.command == "track":
            summary = run_track(_track_config(args))
            line = f"{summary['frames']} frames, {summary['fps']:.1f} fps"
            if "success_rate" in summary:
                line += (f", success rate {summary['success_rate']:.1f}%"
                         f", mean overlap {summary['mean_overlap']:.3f}")
            print(f"{line} -> {summary['output_dir']}")
        elif args.command == "eval":
            out = args.output or args.results.parent
            res = run_eval(args.results, args.groundtruth, out, plots=not args.no_plots)
            print(f"{res.overlaps.size} frames, success rate {res.success_rate_at_05:.1f}%, "
                  f"AUC {res.auc:.3f}, precision@20px {res.precision_at(20.0):.3f} -> {out}")
        elif args.command == "synth":
            params = SyntheticParams(width=args.width, height=args.height, n_frames=args.frames,
                                     target_size=args.target_size, amplitude=args.amplitude,
                                     noise=args.noise, seed=args.seed)
            spec = generate_synthetic(args.output, params)
            ini = _write_sequence_ini(Path(args.output), spec, params)
            print(f"wrote {params.n_frames} frames to {spec.image_dir} ({ini})")
        elif args.command == "selftest":
            checks = selftest.run_all()
            for c in checks:
                print(c.line())
            return 0 if all(c.passed for c in checks) else 1
    except (config.ConfigError, CliError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except (SequenceError, tracker.TrackingError, ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
