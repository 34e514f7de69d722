"""Command-line entry point.

Exit status: 0 success, 1 statistical failure, 2 usage or I/O error.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path

import numpy as np

from . import calibration, crc, entropy, sts
from .accumulator import PoolSet
from .pipeline import boot_generator, boot_sequences, seeded_generator
from .sources import SourceConfig, default_config, run_harvest, sram_deviation_stream

EXIT_OK, EXIT_FAIL, EXIT_USAGE = 0, 1, 2


class UsageError(Exception):
    pass


def _config(args) -> SourceConfig:
    cfg = SourceConfig.load(args.config) if getattr(args, "config", None) else default_config()
    if getattr(args, "noise_seed", None) is not None:
        cfg.noise_seed = args.noise_seed
    return cfg


def _emit(obj) -> None:
    print(json.dumps(obj, indent=2))


def cmd_seed_extract(args) -> int:
    data = Path(args.image).read_bytes()
    try:
        seed = crc.extract_seed(data)
    except crc.MalformedImage as exc:
        raise UsageError(str(exc)) from exc
    if args.out:
        Path(args.out).write_bytes(seed)
    print(seed.hex())
    return EXIT_OK


def cmd_generate(args) -> int:
    if args.bytes < 1:
        raise UsageError("byte count must be >= 1")
    if args.seed_file:
        seed = Path(args.seed_file).read_bytes()
        if len(seed) != crc.SEED_SIZE:
            raise UsageError(f"seed file must hold {crc.SEED_SIZE} bytes, got {len(seed)}")
        gen = seeded_generator(seed)
    elif args.image:
        try:
            gen = boot_generator(Path(args.image).read_bytes())
        except crc.MalformedImage as exc:
            raise UsageError(str(exc)) from exc
    else:
        gen = boot_generator(_config(args).sram_model().power_on())
    data = gen.random_bytes(args.bytes)
    if args.out:
        Path(args.out).write_bytes(data)
    else:
        sys.stdout.buffer.write(data)
    return EXIT_OK


def cmd_simulate(args) -> int:
    if args.count < 1:
        raise UsageError("count must be >= 1")
    cfg = _config(args)
    if args.source == "vlo":
        model = cfg.vlo_model()
        samples, rate = model.samples(args.count), model.rate
    elif args.source == "temp":
        model = cfg.temp_model()
        samples, rate = model.samples(args.count), model.rate
    else:
        images = cfg.sram_model().boots(args.count)
        samples = sram_deviation_stream(images).samples if args.deviation else images.ravel()
        rate = None
    out = Path(args.out)
    out.write_bytes(np.asarray(samples, dtype=np.uint8).tobytes())
    meta = {"source_kind": args.source, "rate": rate, "count": int(np.size(samples))}
    if args.source == "sram":
        meta["startups"] = args.count
        meta["deviation"] = bool(args.deviation)
    Path(str(out) + ".json").write_text(json.dumps(meta, indent=2))
    _emit(meta)
    return EXIT_OK


def cmd_estimate(args) -> int:
    data = Path(args.input).read_bytes()
    kind = "external"
    side = Path(args.input + ".json")
    if side.exists():
        kind = json.loads(side.read_text()).get("source_kind", kind)
    try:
        report = entropy.full_report(entropy.SampleStream.from_bytes(data, source_kind=kind))
    except entropy.StreamTooShort as exc:
        raise UsageError(str(exc)) from exc
    _emit(report.to_dict())
    if args.table:
        print(entropy.render_table({Path(args.input).name: report}))
    return EXIT_OK


def cmd_sts(args) -> int:
    if args.inputs:
        streams = [sts.load_bits(p) for p in args.inputs]
    elif args.generate:
        streams = boot_sequences(_config(args), args.generate, args.bits, args.harvest)
    else:
        raise UsageError("give input files or --generate N")
    try:
        report = sts.run_batch(streams, block_m=args.block_m)
    except (sts.InputTooShort, ValueError) as exc:
        raise UsageError(str(exc)) from exc
    print(report.to_json())
    if args.table:
        print(report.table())
    return EXIT_OK if report.ok else EXIT_FAIL


def cmd_harvest(args) -> int:
    cfg = _config(args)
    pools = PoolSet(threshold=args.threshold)
    gen = boot_generator(cfg.sram_model().power_on())
    stats = run_harvest(cfg.vlo_model(), cfg.temp_model(), pools, gen, args.duration)
    out = stats.to_dict()
    out["pools"] = pools.diagnostics()
    _emit(out)
    return EXIT_OK


def cmd_pipeline(args) -> int:
    args.inputs = []
    args.generate = args.count
    return cmd_sts(args)


def cmd_calibrate(args) -> int:
    logging.basicConfig(level=logging.INFO, format="%(message)s")
    _emit(calibration.calibrate(args.iters))
    return EXIT_OK


def cmd_config(args) -> int:
    print(default_config().dump())
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="embrng", description=__doc__.splitlines()[0])
    sub = p.add_subparsers(dest="command", required=True)

    def with_config(sp):
        sp.add_argument("--config", help="source-model JSON config")
        sp.add_argument("--noise-seed", type=int, help="override the simulation noise seed")

    sp = sub.add_parser("seed-extract", help="collapse a 10240-byte SRAM image to a 64-byte seed")
    sp.add_argument("image")
    sp.add_argument("-o", "--out")
    sp.set_defaults(func=cmd_seed_extract)

    sp = sub.add_parser("generate", help="boot the generator and write pseudo-random bytes")
    src = sp.add_mutually_exclusive_group()
    src.add_argument("--seed-file")
    src.add_argument("--image")
    sp.add_argument("-n", "--bytes", type=int, required=True)
    sp.add_argument("-o", "--out")
    with_config(sp)
    sp.set_defaults(func=cmd_generate)

    sp = sub.add_parser("simulate", help="dump samples from a simulated source")
    sp.add_argument("source", choices=["vlo", "temp", "sram"])
    sp.add_argument("-c", "--count", type=int, required=True,
                    help="samples (vlo/temp) or power-on cycles (sram)")
    sp.add_argument("-o", "--out", required=True)
    sp.add_argument("--deviation", action="store_true",
                    help="sram: write boot-to-boot deviation bytes instead of raw images")
    with_config(sp)
    sp.set_defaults(func=cmd_simulate)

    sp = sub.add_parser("estimate", help="min-entropy estimates of a raw sample file")
    sp.add_argument("input")
    sp.add_argument("--table", action="store_true")
    sp.set_defaults(func=cmd_estimate)

    sp = sub.add_parser("sts", help="statistical test batch")
    sp.add_argument("inputs", nargs="*")
    sp.add_argument("--generate", type=int, metavar="N", help="generate N sequences from SRAM boots")
    sp.add_argument("--bits", type=int, default=1_000_000)
    sp.add_argument("--harvest", type=float, default=0.0, help="simulated harvest seconds per boot")
    sp.add_argument("--block-m", type=int, default=sts.BLOCK_FREQUENCY_M)
    sp.add_argument("--table", action="store_true")
    with_config(sp)
    sp.set_defaults(func=cmd_sts)

    sp = sub.add_parser("harvest", help="run the runtime sources into the pools")
    sp.add_argument("-d", "--duration", type=float, default=0.2)
    sp.add_argument("--threshold", type=int, default=58)
    with_config(sp)
    sp.set_defaults(func=cmd_harvest)

    sp = sub.add_parser("pipeline", help="simulate -> harvest -> generate -> sts")
    sp.add_argument("--count", type=int, default=100)
    sp.add_argument("--bits", type=int, default=1_000_000)
    sp.add_argument("--harvest", type=float, default=0.2)
    sp.add_argument("--block-m", type=int, default=sts.BLOCK_FREQUENCY_M)
    sp.add_argument("--table", action="store_true")
    with_config(sp)
    sp.set_defaults(func=cmd_pipeline)

    sp = sub.add_parser("calibrate", help="re-fit default source noise parameters")
    sp.add_argument("--iters", type=int, default=12)
    sp.set_defaults(func=cmd_calibrate)

    sp = sub.add_parser("config", help="print the default source config")
    sp.set_defaults(func=cmd_config)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (OSError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
