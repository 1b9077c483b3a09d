"""Command-line front end.

Subcommands: fuse one pair, evaluate a fused product, run a manifest of
pairs in batch, generate a synthetic test pair, and turn a metric CSV
into SVG charts. Exit codes: 0 on success, 1 when processing failed
(including partial batch failures), 2 for usage and manifest problems.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from pathlib import Path

from .fusion import METHOD_NAMES, fuse, normalize_method
from .metrics import DEFAULT_CSA_PERCENTILE, MetricRecord, evaluate_all
from .raster import (
    MultiBandImage,
    Raster,
    SensorPairMeta,
    load_pnm,
    resample_nearest,
    save_pnm,
)
from .report import read_csv, render_reports, write_csv
from .synthetic import SyntheticSpec, generate_pair

__all__ = [
    "EXIT_OK",
    "EXIT_FAILURE",
    "EXIT_USAGE",
    "UsageError",
    "PairSpec",
    "BatchManifest",
    "load_manifest",
    "run_batch",
    "main",
    "entrypoint",
]

EXIT_OK = 0
EXIT_FAILURE = 1
EXIT_USAGE = 2

THREADS_ENV = "PANFUSE_THREADS"

_PAIR_KEYS = {
    "pair_id",
    "ms_path",
    "pan_path",
    "ms_sensor",
    "pan_sensor",
    "ms_resolution_m",
    "pan_resolution_m",
    "location",
}
_MANIFEST_KEYS = {"pairs", "methods", "output_dir", "csa_percentile"}


class UsageError(ValueError):
    """Bad manifest, bad method name, bad environment: exit code 2."""


@dataclass(frozen=True)
class PairSpec:
    """One manifest entry with its input paths already resolved."""

    meta: SensorPairMeta
    ms_path: Path
    pan_path: Path


@dataclass(frozen=True)
class BatchManifest:
    pairs: tuple[PairSpec, ...]
    methods: tuple[str, ...]
    output_dir: Path
    csa_percentile: float = DEFAULT_CSA_PERCENTILE


def _manifest_str(entry: dict, key: str, where: str) -> str:
    value = entry.get(key)
    if not isinstance(value, str) or not value:
        raise UsageError(f"{where}: {key!r} must be a non-empty string")
    return value


def load_manifest(path) -> BatchManifest:
    """Parse and validate a batch manifest JSON file.

    All validation happens up front: duplicate pair ids, unknown method
    names, unknown keys, and missing input files are rejected before any
    work starts.
    """
    manifest_path = Path(path)
    try:
        raw = json.loads(manifest_path.read_text())
    except OSError as e:
        raise UsageError(f"cannot read manifest: {e}") from None
    except json.JSONDecodeError as e:
        raise UsageError(f"manifest is not valid JSON: {e}") from None
    if not isinstance(raw, dict):
        raise UsageError("manifest must be a JSON object")
    unknown = sorted(set(raw) - _MANIFEST_KEYS)
    if unknown:
        raise UsageError(f"unknown manifest keys: {', '.join(unknown)}")
    for key in ("pairs", "methods", "output_dir"):
        if key not in raw:
            raise UsageError(f"manifest is missing {key!r}")

    if not isinstance(raw["methods"], list) or not raw["methods"]:
        raise UsageError("'methods' must be a non-empty list")
    methods = []
    for m in raw["methods"]:
        if not isinstance(m, str):
            raise UsageError(f"'methods' entries must be strings, got {m!r}")
        try:
            name = normalize_method(m)
        except ValueError as e:
            raise UsageError(str(e)) from None
        if name in methods:
            raise UsageError(f"duplicate method {name!r}")
        methods.append(name)

    if not isinstance(raw["output_dir"], str) or not raw["output_dir"]:
        raise UsageError("'output_dir' must be a non-empty string")
    base = manifest_path.parent
    output_dir = base / raw["output_dir"]

    percentile = raw.get("csa_percentile", DEFAULT_CSA_PERCENTILE)
    if not isinstance(percentile, (int, float)) or isinstance(percentile, bool):
        raise UsageError("'csa_percentile' must be a number")
    if not 0.0 < float(percentile) < 100.0:
        raise UsageError(f"'csa_percentile' must be in (0, 100), got {percentile}")

    if not isinstance(raw["pairs"], list) or not raw["pairs"]:
        raise UsageError("'pairs' must be a non-empty list")
    pairs: list[PairSpec] = []
    seen_ids = set()
    for index, entry in enumerate(raw["pairs"]):
        where = f"pairs[{index}]"
        if not isinstance(entry, dict):
            raise UsageError(f"{where}: must be a JSON object")
        unknown = sorted(set(entry) - _PAIR_KEYS)
        if unknown:
            raise UsageError(f"{where}: unknown keys: {', '.join(unknown)}")
        pair_id = _manifest_str(entry, "pair_id", where)
        if pair_id in seen_ids:
            raise UsageError(f"{where}: duplicate pair_id {pair_id!r}")
        seen_ids.add(pair_id)
        ms_path = base / _manifest_str(entry, "ms_path", where)
        pan_path = base / _manifest_str(entry, "pan_path", where)
        for p in (ms_path, pan_path):
            if not p.is_file():
                raise UsageError(f"{where}: input file not found: {p}")
        try:
            meta = SensorPairMeta(
                pair_id=pair_id,
                ms_sensor=entry.get("ms_sensor"),
                pan_sensor=entry.get("pan_sensor"),
                ms_resolution_m=entry.get("ms_resolution_m"),
                pan_resolution_m=entry.get("pan_resolution_m"),
                location=entry.get("location"),
            )
        except (TypeError, ValueError) as e:
            raise UsageError(f"{where}: {e}") from None
        pairs.append(PairSpec(meta=meta, ms_path=ms_path, pan_path=pan_path))

    return BatchManifest(
        pairs=tuple(pairs),
        methods=tuple(methods),
        output_dir=output_dir,
        csa_percentile=float(percentile),
    )


def _as_multiband(image) -> MultiBandImage:
    if isinstance(image, Raster):
        return MultiBandImage((image,))
    return image


def _load_pan(path) -> Raster:
    image = load_pnm(path)
    if not isinstance(image, Raster):
        raise ValueError(f"PAN input must be a single-band grayscale image: {path}")
    return image


def _thread_count(pair_count: int) -> int:
    env = os.environ.get(THREADS_ENV)
    if env is not None:
        try:
            threads = int(env)
        except ValueError:
            raise UsageError(f"{THREADS_ENV} must be a positive integer, got {env!r}") from None
        if threads < 1:
            raise UsageError(f"{THREADS_ENV} must be a positive integer, got {env!r}")
        return min(threads, pair_count)
    return max(1, min(pair_count, os.cpu_count() or 1))


@dataclass
class _PairResult:
    pair: PairSpec
    records: list
    lines: list
    failures: list


def _run_pair(pair: PairSpec, manifest: BatchManifest) -> _PairResult:
    """Fuse and score one pair with every requested method.

    A load failure fails every method of the pair; a single method
    failure is recorded and the remaining methods still run.
    """
    result = _PairResult(pair=pair, records=[], lines=[], failures=[])
    pair_id = pair.meta.pair_id
    try:
        ms = _as_multiband(load_pnm(pair.ms_path))
        pan = _load_pan(pair.pan_path)
        if ms.width != pan.width or ms.height != pan.height:
            ms_full = resample_nearest(ms, pan.width, pan.height)
        else:
            ms_full = ms
    except (ValueError, OSError) as e:
        for method in manifest.methods:
            result.failures.append((pair_id, method, str(e)))
            result.lines.append(f"  {method}: failed: {e}")
        return result

    pair_dir = manifest.output_dir / pair_id
    pair_dir.mkdir(parents=True, exist_ok=True)
    for method in manifest.methods:
        try:
            fused = fuse(method, ms, pan)
            out_path = pair_dir / f"{method}.ppm"
            save_pnm(fused, out_path)
            result.records.extend(
                evaluate_all(
                    ms_full, pan, fused, pair_id, method, manifest.csa_percentile
                )
            )
        except (ValueError, OSError) as e:
            result.failures.append((pair_id, method, str(e)))
            result.lines.append(f"  {method}: failed: {e}")
        else:
            result.lines.append(f"  {method}: ok -> {out_path}")
    return result


def run_batch(manifest: BatchManifest) -> tuple[list, list]:
    """Run every pair/method combination; returns (records, failures).

    Pairs run concurrently (thread count from PANFUSE_THREADS, default
    one per pair up to the CPU count) but results are assembled in
    manifest order, so outputs and the CSV are deterministic.
    """
    threads = _thread_count(len(manifest.pairs))
    manifest.output_dir.mkdir(parents=True, exist_ok=True)
    if threads == 1:
        results = [_run_pair(p, manifest) for p in manifest.pairs]
    else:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            results = list(pool.map(lambda p: _run_pair(p, manifest), manifest.pairs))

    records: list[MetricRecord] = []
    failures: list[tuple[str, str, str]] = []
    for result in results:
        print(result.pair.meta.label())
        for line in result.lines:
            print(line)
        records.extend(result.records)
        failures.extend(result.failures)
    return records, failures


def cmd_fuse(args) -> int:
    try:
        method = normalize_method(args.method)
    except ValueError as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_USAGE
    ms = _as_multiband(load_pnm(args.ms))
    pan = _load_pan(args.pan)
    fused = fuse(method, ms, pan)
    save_pnm(fused, args.out)
    print(
        f"{method}: {ms.width}x{ms.height} ms + {pan.width}x{pan.height} pan "
        f"-> {args.out}"
    )
    return EXIT_OK


def cmd_evaluate(args) -> int:
    try:
        method = normalize_method(args.method)
    except ValueError as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_USAGE
    ms = _as_multiband(load_pnm(args.ms))
    pan = _load_pan(args.pan)
    fused = _as_multiband(load_pnm(args.fused))
    if ms.width != pan.width or ms.height != pan.height:
        ms = resample_nearest(ms, pan.width, pan.height)
    records = evaluate_all(ms, pan, fused, args.pair_id, method, args.csa_percentile)
    write_csv(records, args.csv, append=True)
    print(f"wrote {len(records)} records for {args.pair_id}/{method} to {args.csv}")
    return EXIT_OK


def cmd_batch(args) -> int:
    try:
        manifest = load_manifest(args.manifest)
        records, failures = run_batch(manifest)
    except UsageError as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_USAGE
    csv_path = manifest.output_dir / "metrics.csv"
    if records:
        write_csv(records, csv_path)
        print(f"wrote {len(records)} records to {csv_path}")
    if failures:
        total = len(manifest.pairs) * len(manifest.methods)
        print(f"{len(failures)} of {total} fusion tasks failed", file=sys.stderr)
        return EXIT_FAILURE
    return EXIT_OK


def cmd_gen_synthetic(args) -> int:
    try:
        spec = SyntheticSpec(
            seed=args.seed,
            width=args.width,
            height=args.height,
            scale_factor=args.scale,
            smoothing_passes=args.passes,
        )
    except ValueError as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_USAGE
    paths = generate_pair(spec, args.out)
    for p in paths:
        print(f"wrote {p}")
    return EXIT_OK


def cmd_report(args) -> int:
    try:
        records = read_csv(args.csv)
    except ValueError as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_USAGE
    for p in render_reports(records, args.out):
        print(f"wrote {p}")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="panfuse",
        description="Pan-sharpen multispectral imagery and score the results.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("fuse", help="fuse one MS/PAN pair")
    p.add_argument("--ms", required=True, help="multispectral input (PPM/PGM)")
    p.add_argument("--pan", required=True, help="panchromatic input (PGM)")
    p.add_argument(
        "--method", required=True, help=f"one of: {', '.join(METHOD_NAMES)}"
    )
    p.add_argument("--out", required=True, help="fused output path (PPM)")
    p.set_defaults(handler=cmd_fuse)

    p = sub.add_parser("evaluate", help="score a fused product against its inputs")
    p.add_argument("--ms", required=True)
    p.add_argument("--pan", required=True)
    p.add_argument("--fused", required=True)
    p.add_argument("--pair-id", required=True)
    p.add_argument("--method", required=True)
    p.add_argument("--csv", required=True, help="CSV to append records to")
    p.add_argument(
        "--csa-percentile",
        type=float,
        default=DEFAULT_CSA_PERCENTILE,
        help="edge-class threshold percentile (default %(default)s)",
    )
    p.set_defaults(handler=cmd_evaluate)

    p = sub.add_parser("batch", help="run a JSON manifest of pairs and methods")
    p.add_argument("--manifest", required=True)
    p.set_defaults(handler=cmd_batch)

    p = sub.add_parser("gen-synthetic", help="generate a synthetic MS/PAN/reference trio")
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--width", type=int, required=True)
    p.add_argument("--height", type=int, required=True)
    p.add_argument("--scale", type=int, default=4, help="MS downscale factor")
    p.add_argument("--passes", type=int, default=3, help="smoothing passes")
    p.add_argument("--out", required=True, help="output directory")
    p.set_defaults(handler=cmd_gen_synthetic)

    p = sub.add_parser("report", help="render SVG charts from a metric CSV")
    p.add_argument("--csv", required=True)
    p.add_argument("--out", required=True, help="directory for SVG files")
    p.set_defaults(handler=cmd_report)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        code = e.code
        return code if isinstance(code, int) else EXIT_USAGE
    try:
        return args.handler(args)
    except (ValueError, OSError) as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_FAILURE


def entrypoint() -> None:
    sys.exit(main())


if __name__ == "__main__":
    entrypoint()
