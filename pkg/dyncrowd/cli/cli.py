"""
dyncrowd Command Line Interface

This module implements the dyncrowd command-line tool.
"""

import argparse
import os
import sys
from pathlib import Path
from typing import Any, Dict, List, Optional

from .. import __version__
from ..core.config import EngineConfig, read_config, write_config
from ..core.events import EventStats, replay_memberships
from ..core.exceptions import DynCrowdError, MetricsError, RunDirectoryError
from ..core.logging import LOG_ENV_VAR, get_logger, setup_logging
from ..core.performance import ResourceMonitor
from ..engine import DynamicClusteringEngine
from ..io import (
    format_substitution,
    format_summary,
    read_events,
    read_mot,
    read_yaml,
    tracks_from_points,
    write_centroids,
    write_columns,
    write_events,
    write_labels,
    write_mot_points,
    write_report,
    write_yaml,
)
from ..metrics import (
    build_report,
    cluster_census,
    cluster_frames,
    cmdd_samples,
    displacement_series,
    mean_position_tracks,
)
from ..predictor import PROTOCOLS, SOURCES, evaluate_substitution
from ..synth import SceneSpec, generate

logger = get_logger("dyncrowd.cli")

CENTROIDS_FILE = "centroids.txt"
EVENTS_FILE = "events.jsonl"
STATS_FILE = "stats.yaml"
TIMING_FILE = "timing.yaml"
CONFIG_FILE = "config.yaml"
RUN_FILE = "run.yaml"


class DynCrowdCtl:
    """dyncrowd Control Tool"""

    def __init__(self):
        """Initialize the CLI tool."""
        self._setup_argparse()

    def _setup_argparse(self):
        """Set up the argument parser."""
        self.parser = argparse.ArgumentParser(
            prog="dyncrowd",
            description="Dynamic clustering of dense-crowd pedestrian tracks",
            formatter_class=argparse.RawDescriptionHelpFormatter,
        )
        self.parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
        self.parser.add_argument(
            "-v", "--verbose",
            action="store_true",
            help=f"Enable debug logging (default level from ${LOG_ENV_VAR}, else INFO)"
        )
        self.parser.add_argument(
            "--log-format",
            choices=["text", "json"],
            default="text",
            help="Log line format on stderr"
        )

        common = argparse.ArgumentParser(add_help=False)
        common.add_argument("-c", "--config", help="Engine configuration file (YAML)")

        subparsers = self.parser.add_subparsers(dest="command", required=True)

        # cluster command
        cluster_parser = subparsers.add_parser(
            "cluster", parents=[common],
            help="Cluster a MOT tracking file into centroid tracks"
        )
        cluster_parser.add_argument("-i", "--input", required=True, help="MOT tracking file")
        cluster_parser.add_argument("-o", "--output", required=True, help="Run directory to write")

        # evaluate command
        evaluate_parser = subparsers.add_parser(
            "evaluate", parents=[common],
            help="Compute CMDD, CTEO, CTEL and pedestrian counts"
        )
        evaluate_parser.add_argument("-i", "--input", help="Run directory supplying defaults for the files below")
        evaluate_parser.add_argument("--centroids", help="Centroid MOT file")
        evaluate_parser.add_argument("--events", help="Engine event log (JSON lines)")
        evaluate_parser.add_argument("--truth", help="Pedestrian MOT file the run clustered")
        evaluate_parser.add_argument("-o", "--output", help="Directory for the report files")

        # predict command
        predict_parser = subparsers.add_parser(
            "predict", parents=[common],
            help="Compare trajectory prediction from pedestrians, clusters and random subsets"
        )
        predict_parser.add_argument("--truth", required=True, help="Ground-truth MOT file")
        predict_parser.add_argument("-i", "--input", help="Tracker MOT file (default: the ground truth)")
        predict_parser.add_argument(
            "--source", choices=list(SOURCES) + ["all"], default="all", help="Data source to evaluate"
        )
        predict_parser.add_argument(
            "--protocol", choices=sorted(PROTOCOLS), default="short", help="History/horizon preset"
        )
        predict_parser.add_argument("--history", type=int, help="History length in frames")
        predict_parser.add_argument("--horizon", type=int, help="Prediction horizon in frames")
        predict_parser.add_argument(
            "--keep-fraction", type=float,
            help="Random-source keep probability (default: cluster compression ratio)"
        )
        predict_parser.add_argument("--seed", type=int, default=0, help="Random-source seed")
        predict_parser.add_argument("--repeats", type=int, default=1, help="Random-source repetitions")
        predict_parser.add_argument(
            "--threads", type=int, default=os.cpu_count() or 1, help="Prediction worker threads"
        )
        predict_parser.add_argument("-o", "--output", help="File for the comparison table")

        # synth command
        synth_parser = subparsers.add_parser(
            "synth",
            help="Generate a synthetic crowd scene"
        )
        synth_parser.add_argument("-i", "--input", help="Scene spec file (YAML); defaults when omitted")
        synth_parser.add_argument("--seed", type=int, help="Override the scene seed")
        synth_parser.add_argument("-o", "--output", required=True, help="Directory for the scene files")

        # report command
        report_parser = subparsers.add_parser(
            "report",
            help="Write a summary and plot data for a run directory"
        )
        report_parser.add_argument("-i", "--input", required=True, help="Run directory")

    def run(self, argv: Optional[List[str]] = None) -> int:
        """Run the CLI tool."""
        args = self.parser.parse_args(argv)
        setup_logging("DEBUG" if args.verbose else os.environ.get(LOG_ENV_VAR, "INFO"), args.log_format)

        handler = getattr(self, f"handle_{args.command.replace('-', '_')}", None)
        if not handler:
            logger.error("unknown_command", command=args.command)
            return 1

        try:
            return handler(args)
        except KeyboardInterrupt:
            logger.info("cancelled")
            return 130  # SIGINT exit code
        except DynCrowdError as e:
            logger.debug("command_failed", command=args.command, error=e.to_dict())
            print(f"error: {e}", file=sys.stderr)
            return 1

    # ------------------------------------------------------------------

    def _config(self, path: Optional[str]) -> EngineConfig:
        return read_config(path)

    def handle_cluster(self, args) -> int:
        """Handle cluster command."""
        cfg = self._config(args.config)
        data = read_mot(args.input)
        for warning in data.warnings:
            print(f"warning: {warning}", file=sys.stderr)

        engine = DynamicClusteringEngine(cfg)
        with ResourceMonitor() as monitor:
            result = engine.run(data.frames)
        usage = monitor.usage

        output = Path(args.output)
        output.mkdir(parents=True, exist_ok=True)
        write_centroids(result.tracks, output / CENTROIDS_FILE, result.memberships)
        write_events(result.events, output / EVENTS_FILE)
        write_config(cfg, output / CONFIG_FILE)
        write_yaml({"input": str(Path(args.input).resolve())}, output / RUN_FILE)

        single, multi = cluster_census(result.memberships)
        events = EventStats.from_events(result.events)
        n_frames = result.last_frame - result.first_frame + 1
        stats = {
            "first_frame": result.first_frame + 1,
            "last_frame": result.last_frame + 1,
            "n_frames": n_frames,
            "n_peds": len({pid for obs in data.frames.values() for pid in obs}),
            "n_clusters_single": single,
            "n_clusters_multi": multi,
            "n_events": events.total_events,
            "events_by_kind": events.events_by_kind,
            "malformed_lines": len(data.warnings),
        }
        write_yaml(stats, output / STATS_FILE)
        write_yaml({
            "elapsed_seconds": usage.elapsed_seconds,
            "frames_per_second": usage.rate(n_frames),
            "peak_mib": usage.peak_mib,
            "peak_growth_mib": usage.peak_delta_mib,
        }, output / TIMING_FILE)

        logger.info("run_written", output=str(output), frames=n_frames, clusters=single + multi)
        print(f"clusters: {multi} multi-member, {single} single-member")
        print(f"pedestrians: {stats['n_peds']}, frames: {n_frames}")
        print(f"time: {usage.elapsed_seconds:.3f} s ({usage.rate(n_frames):.1f} frames/s), "
              f"peak memory: {usage.peak_mib:.1f} MiB")
        return 0

    def _run_inputs(self, args) -> Dict[str, Any]:
        paths = {"centroids": args.centroids, "events": args.events, "truth": args.truth, "config": args.config}
        if args.input:
            run_dir = _run_directory(args.input)
            paths["centroids"] = paths["centroids"] or run_dir / CENTROIDS_FILE
            paths["events"] = paths["events"] or run_dir / EVENTS_FILE
            paths["config"] = paths["config"] or run_dir / CONFIG_FILE
            if not paths["truth"]:
                paths["truth"] = read_yaml(run_dir / RUN_FILE).get("input")
        missing = [name for name in ("centroids", "events", "truth") if not paths[name]]
        if missing:
            raise RunDirectoryError(f"no {missing[0]} file given")
        return paths

    def _evaluation(self, paths: Dict[str, Any]):
        cfg = self._config(paths["config"])
        pedestrians = read_mot(paths["truth"])
        first, last = pedestrians.first_frame, pedestrians.last_frame
        truth = pedestrians.frames
        tracks = tracks_from_points(read_mot(paths["centroids"]).frames)
        frames = [f for track in tracks.values() for f in (track.first_frame, track.last_frame)]
        if frames and (min(frames) < first or max(frames) > last):
            raise MetricsError(
                f"centroid frames {min(frames) + 1}-{max(frames) + 1} fall outside "
                f"the pedestrian frames {first + 1}-{last + 1}"
            )
        memberships = replay_memberships(read_events(paths["events"]), range(first, last + 1))
        return cfg, truth, tracks, memberships

    def handle_evaluate(self, args) -> int:
        """Handle evaluate command."""
        cfg, truth, tracks, memberships = self._evaluation(self._run_inputs(args))
        report = build_report(tracks, memberships, truth, cfg)
        print(format_summary(report), end="")
        if args.output:
            output = Path(args.output)
            output.mkdir(parents=True, exist_ok=True)
            write_report(report, output)
        return 0

    def handle_predict(self, args) -> int:
        """Handle predict command."""
        cfg = self._config(args.config)
        protocol = PROTOCOLS[args.protocol]
        truth = read_mot(args.truth).frames
        observations = read_mot(args.input).frames if args.input else None
        sources = SOURCES if args.source == "all" else (args.source,)
        report = evaluate_substitution(
            truth,
            cfg,
            horizon=args.horizon or protocol.horizon,
            history=args.history or protocol.history,
            observations=observations,
            sources=sources,
            keep_fraction=args.keep_fraction,
            seed=args.seed,
            repeats=args.repeats,
            threads=max(1, args.threads),
        )
        table = format_substitution(report)
        print(table, end="")
        if args.output:
            Path(args.output).write_text(table, encoding="utf-8")
        return 0

    def handle_synth(self, args) -> int:
        """Handle synth command."""
        data = read_yaml(args.input) if args.input else {}
        if args.seed is not None:
            data = {**data, "seed": args.seed}
        spec = SceneSpec.from_dict(data)
        scene = generate(spec)

        output = Path(args.output)
        output.mkdir(parents=True, exist_ok=True)
        write_mot_points(scene.observations, output / "observations.txt", spec.head_size)
        write_mot_points(scene.truth, output / "truth.txt", spec.head_size)
        write_labels(scene.labels, output / "labels.txt")
        print(f"scene: {scene.n_pedestrians} pedestrians, {spec.n_groups} groups, {spec.n_frames} frames")
        return 0

    def handle_report(self, args) -> int:
        """Handle report command."""
        run_dir = _run_directory(args.input)
        paths = {
            "centroids": run_dir / CENTROIDS_FILE,
            "events": run_dir / EVENTS_FILE,
            "config": run_dir / CONFIG_FILE,
            "truth": read_yaml(run_dir / RUN_FILE).get("input"),
        }
        if not paths["truth"]:
            raise RunDirectoryError(f"{run_dir / RUN_FILE} names no input file")
        cfg, truth, tracks, memberships = self._evaluation(paths)
        report = build_report(tracks, memberships, truth, cfg)
        write_report(report, run_dir)

        frames = cluster_frames(tracks, memberships, truth)
        location, direction = cmdd_samples(frames, cfg.min_cmdd_members)
        write_columns(location, run_dir / "deviations_location.dat", ("frame", "cluster", "deviation_px"))
        write_columns(direction, run_dir / "deviations_direction.dat", ("frame", "cluster", "deviation_deg"))
        write_columns(
            [(frame, cid, value) for cid, track in sorted(tracks.items())
             for frame, value in displacement_series(track)],
            run_dir / "displacement_delta.dat", ("frame", "cluster", "displacement_px"),
        )
        write_columns(
            [(frame, cid, value) for cid, samples in sorted(mean_position_tracks(frames).items())
             for frame, value in displacement_series(samples)],
            run_dir / "displacement_mean.dat", ("frame", "cluster", "displacement_px"),
        )
        print(format_summary(report), end="")
        return 0


def _run_directory(path: str) -> Path:
    run_dir = Path(path)
    if not run_dir.is_dir():
        raise RunDirectoryError(f"run directory {path} does not exist")
    return run_dir


def main(argv: Optional[List[str]] = None) -> int:
    """Main entry point for the CLI."""
    # Enable ANSI colors on Windows
    if sys.platform == "win32":
        import colorama
        colorama.init()

    return DynCrowdCtl().run(argv)


if __name__ == "__main__":
    sys.exit(main())
