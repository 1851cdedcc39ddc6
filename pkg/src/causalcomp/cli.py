"""Command-line interface: ``causalcomp {synth,segment,bipartite,threshold,rerun}``.

Every command that writes files also writes ``<output>.manifest.json`` with
the full argument vector, input and output checksums and timestamps;
``causalcomp rerun`` replays a manifest and can verify that the outputs come
out byte-identical.

Exit codes: 0 success, 2 invalid input, 3 numerical failure, 4 internal error.
"""

from __future__ import annotations

import argparse
import contextlib
import json
import logging
import os
import platform
import sys
from datetime import datetime, timezone
from pathlib import Path

import numpy as np

from . import __version__, _kernels, formats
from .copula import ESTIMATORS, estimate
from .errors import ContractViolation, DegenerateColumnError, DomainError, SingularityError
from .solver import FAMILIES, SolverConfig, null_scores
from .synth import LinkSpec, default_fixture, null_spec, sample
from .tasks import bipartite, segment

log = logging.getLogger("causalcomp")

EXIT_OK, EXIT_INPUT, EXIT_NUMERIC, EXIT_INTERNAL = 0, 2, 3, 4


class ReplayMismatch(RuntimeError):
    pass


# --------------------------------------------------------------------------
# argument parsing


def _threshold_arg(text: str):
    """``<value>``, ``null`` or ``null:<reps>:<quantile>``."""
    if text == "null":
        return ("null", None, None)
    if text.startswith("null:"):
        parts = text.split(":")
        if len(parts) != 3:
            raise argparse.ArgumentTypeError("expected null:<reps>:<quantile>")
        try:
            return ("null", int(parts[1]), float(parts[2]))
        except ValueError:
            raise argparse.ArgumentTypeError(f"bad null threshold {text!r}") from None
    try:
        value = float(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"threshold must be a number or null:<reps>:<quantile>, got {text!r}") from None
    if not value >= 0:
        raise argparse.ArgumentTypeError("threshold must be nonnegative")
    return ("value", value, None)


def _solver_flags(p: argparse.ArgumentParser) -> None:
    g = p.add_argument_group("solver")
    g.add_argument("--epsilon", type=float, default=0.01, help="stagewise step size (default 0.01)")
    g.add_argument("--kappa", type=float, default=None, help="L1 budget (default n/2)")
    g.add_argument("--target-kappa", type=float, default=None, help="per-target budget (default kappa/(n-1))")
    g.add_argument("--max-steps", type=int, default=None)
    g.add_argument("--gradient", choices=("analytic", "finite_difference"), default="analytic")
    g.add_argument("--workers", type=int, default=1, help="threads for independent solves")


def _analysis_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("input", help="CSV with columns x1..xn, y1..yn")
    p.add_argument("--out", required=True, help="result JSON path")
    p.add_argument("--estimator", choices=sorted(ESTIMATORS), default="copula")
    p.add_argument(
        "--threshold",
        type=_threshold_arg,
        default=("null", None, None),
        help="score threshold: a number, 'null' or 'null:<reps>:<quantile>' (default null)",
    )
    p.add_argument("--reps", type=int, default=50, help="null replicates when calibrating (default 50)")
    p.add_argument("--quantile", type=float, default=0.95, help="null quantile (default 0.95)")
    p.add_argument("--seed", type=int, default=0, help="seed of the null replicates")
    p.add_argument("--null-spec", help="LinkSpec JSON for the null dynamics (cross links are dropped)")
    _solver_flags(p)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="causalcomp", description="Causal segmentation and bipartite causal graphs for paired time series.")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    parser.add_argument("-v", "--verbose", action="count", default=0, help="-v for progress, -vv for debug output")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("synth", help="sample a synthetic panel")
    p.add_argument("--spec", help="LinkSpec JSON (default: the built-in 12-point fixture)")
    p.add_argument("--samples", type=int, default=500)
    p.add_argument("--seed", type=int, default=None, help="overrides the spec's seed")
    p.add_argument("--out", required=True, help="output CSV")
    p.add_argument("--write-spec", help="also write the effective LinkSpec JSON here")

    p = sub.add_parser("segment", help="causal segmentation of X")
    _analysis_flags(p)
    p.add_argument("--swap", action="store_true", help="segment Y instead of X")

    p = sub.add_parser("bipartite", help="bipartite causal graph")
    _analysis_flags(p)
    p.add_argument("--dot", help="also write a Graphviz DOT file")
    p.add_argument("--one-sided-couplings", action="store_true")

    p = sub.add_parser("threshold", help="null-calibrated information-score threshold")
    p.add_argument("--n", type=int, required=True, help="time points per series")
    p.add_argument("--samples", type=int, default=500)
    p.add_argument("--reps", type=int, default=50)
    p.add_argument("--quantile", type=float, default=0.95)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--family", choices=FAMILIES + ("all",), default="all")
    p.add_argument("--estimator", choices=sorted(ESTIMATORS), default="copula")
    p.add_argument("--null-spec")
    p.add_argument("--out", help="CSV of the pooled null scores")
    _solver_flags(p)

    p = sub.add_parser("rerun", help="replay a run manifest")
    p.add_argument("manifest")
    p.add_argument("--check", action="store_true", help="fail unless outputs are byte-identical")
    return parser


# --------------------------------------------------------------------------
# helpers


def _config(args) -> SolverConfig:
    return SolverConfig(
        kappa_max=args.kappa,
        epsilon=args.epsilon,
        max_steps=args.max_steps,
        gradient_mode=args.gradient,
        target_kappa=args.target_kappa,
    )


def _load_spec(path) -> LinkSpec:
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise ContractViolation(f"cannot read spec {path}: {exc.strerror}") from None
    return LinkSpec.from_json(text)


def _thresholds(args, n: int, d_samples: int, families, config: SolverConfig):
    mode, a, b = args.threshold
    if mode == "value":
        return a, None
    reps = args.reps if a is None else a
    q = args.quantile if b is None else b
    if reps < 20:
        raise ContractViolation("null calibration needs --reps >= 20")
    if not 0 < q <= 1:
        raise DomainError(f"quantile must lie in (0, 1], got {q}")
    spec = _load_spec(args.null_spec) if args.null_spec else null_spec(n)
    log.info("calibrating thresholds on %d null panels", reps)
    ns = null_scores(n, d_samples, families, config, reps, args.seed, spec, args.estimator)
    return {f: ns.threshold(f, q) for f in families}, ns


def _write(path: Path, text: str, outputs: list[Path]) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(text, encoding="utf-8", newline="\n")
    outputs.append(path)


def _manifest(args, argv, inputs, outputs, started, extra=None) -> Path:
    primary = outputs[0]
    doc = {
        "command": args.command,
        "argv": list(argv),
        "cwd": os.getcwd(),
        "inputs": {str(p): formats.sha256_file(p) for p in inputs},
        "outputs": {str(p): formats.sha256_file(p) for p in outputs},
        "config": {k: v for k, v in sorted(vars(args).items()) if k not in ("func", "verbose")},
        "version": __version__,
        "backend": _kernels.BACKEND,
        "python": platform.python_version(),
        "numpy": np.__version__,
        "started": started,
        "finished": _now(),
    }
    if extra:
        doc.update(extra)
    if isinstance(doc["config"].get("threshold"), tuple):
        doc["config"]["threshold"] = list(doc["config"]["threshold"])
    path = primary.with_name(primary.name + ".manifest.json")
    path.write_text(formats.dumps(doc), encoding="utf-8", newline="\n")
    return path


def _now() -> str:
    return datetime.now(timezone.utc).isoformat(timespec="seconds")


# --------------------------------------------------------------------------
# commands


def cmd_synth(args, argv) -> int:
    started = _now()
    spec = _load_spec(args.spec) if args.spec else default_fixture()
    if args.samples < 0:
        raise ContractViolation("--samples must be nonnegative")
    panel = sample(spec, args.samples, seed=args.seed)
    outputs: list[Path] = []
    out = Path(args.out)
    out.parent.mkdir(parents=True, exist_ok=True)
    formats.write_panel_csv(panel, out)
    outputs.append(out)
    if args.write_spec:
        _write(Path(args.write_spec), spec.to_json() + "\n", outputs)
    inputs = [Path(args.spec)] if args.spec else []
    _manifest(args, argv, inputs, outputs, started)
    log.info("wrote %d x %d panel to %s", panel.d_samples, 2 * panel.n, out)
    return EXIT_OK


def _analysis_setup(args):
    panel = formats.read_panel_csv(args.input)
    cov = estimate(panel, args.estimator)
    return panel, cov, _config(args)


def cmd_segment(args, argv) -> int:
    started = _now()
    panel, cov, config = _analysis_setup(args)
    if args.swap:
        cov = cov.swapped()
    thr, ns = _thresholds(args, panel.n, panel.d_samples, ("out", "in", "eq"), config)
    seg = segment(cov, config, thr, workers=args.workers)
    outputs: list[Path] = []
    out = Path(args.out)
    _write(out, formats.dumps(formats.segmentation_doc(seg)), outputs)
    stem = out.with_suffix("")
    for fam, path in seg.paths.items():
        _write(stem.with_name(f"{stem.name}.path-{fam}.csv"), formats.path_csv(path), outputs)
    _manifest(args, argv, [Path(args.input)], outputs, started)
    return EXIT_OK


def cmd_bipartite(args, argv) -> int:
    started = _now()
    panel, cov, config = _analysis_setup(args)
    thr, _ = _thresholds(args, panel.n, panel.d_samples, ("arrow", "eq"), config)
    graph = bipartite(cov, config, thr, one_sided_couplings=args.one_sided_couplings, workers=args.workers)
    outputs: list[Path] = []
    _write(Path(args.out), formats.dumps(formats.bipartite_doc(graph, thr)), outputs)
    if args.dot:
        _write(Path(args.dot), formats.graph_to_dot(graph), outputs)
    _manifest(args, argv, [Path(args.input)], outputs, started)
    return EXIT_OK


def cmd_threshold(args, argv) -> int:
    started = _now()
    if args.reps < 20:
        raise ContractViolation("null calibration needs --reps >= 20")
    if not 0 < args.quantile <= 1:
        raise DomainError(f"quantile must lie in (0, 1], got {args.quantile}")
    if args.n < 2:
        raise ContractViolation("--n must be at least 2")
    families = FAMILIES if args.family == "all" else (args.family,)
    spec = _load_spec(args.null_spec) if args.null_spec else null_spec(args.n)
    ns = null_scores(args.n, args.samples, families, _config(args), args.reps, args.seed, spec, args.estimator)
    values = {f: ns.threshold(f, args.quantile) for f in families}
    if args.family == "all":
        for f in families:
            print(f"{f}\t{values[f]!r}")
    else:
        print(repr(values[args.family]))
    if args.out:
        outputs: list[Path] = []
        _write(Path(args.out), formats.null_scores_csv(ns.scores), outputs)
        _manifest(args, argv, [], outputs, started, {"thresholds": values})
    return EXIT_OK


def cmd_rerun(args, argv) -> int:
    try:
        doc = json.loads(Path(args.manifest).read_text(encoding="utf-8"))
        replay, cwd, recorded = list(doc["argv"]), doc["cwd"], doc["outputs"]
    except (OSError, ValueError, KeyError, TypeError) as exc:
        raise ContractViolation(f"unreadable manifest {args.manifest}: {exc}") from None
    if replay and replay[0] == "rerun":
        raise ContractViolation("a manifest cannot replay another rerun")
    with _chdir(cwd):
        code = main(replay)
        if code != EXIT_OK or not args.check:
            return code
        changed = [p for p, h in recorded.items() if not Path(p).exists() or formats.sha256_file(p) != h]
    if changed:
        raise ReplayMismatch(f"outputs differ from the manifest: {changed}")
    print("outputs identical to manifest")
    return EXIT_OK


@contextlib.contextmanager
def _chdir(path):
    old = os.getcwd()
    os.chdir(path)
    try:
        yield
    finally:
        os.chdir(old)


COMMANDS = {
    "synth": cmd_synth,
    "segment": cmd_segment,
    "bipartite": cmd_bipartite,
    "threshold": cmd_threshold,
    "rerun": cmd_rerun,
}


def main(argv=None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    logging.basicConfig(
        level=logging.WARNING - 10 * min(args.verbose, 2),
        format="%(levelname)s %(name)s: %(message)s",
    )
    try:
        return COMMANDS[args.command](args, argv)
    except (ContractViolation, DegenerateColumnError, DomainError, FileNotFoundError, IsADirectoryError) as exc:
        print(f"causalcomp: error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except (SingularityError, np.linalg.LinAlgError, FloatingPointError) as exc:
        print(f"causalcomp: numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except ReplayMismatch as exc:
        print(f"causalcomp: {exc}", file=sys.stderr)
        return EXIT_INTERNAL
    except Exception as exc:  # noqa: BLE001 - last-resort exit code
        log.debug("internal error", exc_info=True)
        print(f"causalcomp: internal error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_INTERNAL


if __name__ == "__main__":
    sys.exit(main())
