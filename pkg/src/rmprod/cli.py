"""Command-line front end.

Subcommands:
  construct  print code parameters and write the frozen vector
  encode     encode a message with a product or concatenated code
  decode     decode one LLR vector
  simulate   run a Monte-Carlo experiment described by a TOML file
  analyze    minimum-distance data, ensemble averages, and bound curves

Exit codes: 0 on success, 2 for configuration errors (bad descriptors,
flags, or experiment files), 3 for runtime failures.
"""

from __future__ import annotations

import argparse
import sys

import numpy as np

try:
    import tomllib
except ModuleNotFoundError:
    import tomli as tomllib

from . import analysis, bp, scl, sim
from .codes import format_bits, kernel_transform, parse_bits
from .concat import CRC_POLYS, ConcatenatedCode, Interleaver, crc_concat
from .product import ProductCode, parse_product


class ConfigError(Exception):
    pass


# --------------------------------------------------------------- helpers

def _build_code(descriptor: str, crc_degree: int | None,
                interleaver: str = "trivial", interleaver_seed: int = 0):
    product = parse_product(descriptor)
    if crc_degree is None:
        return product
    if interleaver == "trivial":
        pi = Interleaver.trivial(product.k)
    elif interleaver == "random":
        pi = Interleaver.random(product.k, interleaver_seed)
    else:
        raise ConfigError(f"unknown interleaver {interleaver!r}")
    return crc_concat(product, crc_degree, pi)


def _read_bits(text: str) -> np.ndarray:
    if text.startswith("@"):
        with open(text[1:]) as fh:
            text = fh.read()
    return parse_bits("".join(text.split()))


def _read_llrs(text: str) -> np.ndarray:
    if text.startswith("@"):
        with open(text[1:]) as fh:
            text = fh.read()
    return np.array([float(v) for v in text.replace(",", " ").split()])


def _open_output(args):
    return open(args.output, "w") if args.output else sys.stdout


def _parse_grid(text: str) -> tuple[float, ...]:
    """SNR grids as '1,2,3' or 'start:stop:step' (stop inclusive)."""
    if ":" in text:
        parts = [float(v) for v in text.split(":")]
        if len(parts) != 3 or parts[2] <= 0:
            raise ConfigError(f"bad grid {text!r}; want start:stop:step")
        start, stop, step = parts
        count = int(round((stop - start) / step)) + 1
        grid = tuple(round(start + i * step, 12) for i in range(count))
        if not grid or grid[-1] > stop + 1e-9:
            raise ConfigError(f"bad grid {text!r}")
        return grid
    return tuple(float(v) for v in text.split(","))


# ------------------------------------------------------------ subcommands

def cmd_construct(args) -> int:
    code = _build_code(" ".join(args.descriptor), args.crc)
    inner = code.inner if isinstance(code, ConcatenatedCode) else code
    d, a_d = inner.d, inner.a_d
    print(f"({code.n},{code.k},{d}), A_d={a_d}")
    f_text = format_bits(inner.frozen)
    if args.output:
        with open(args.output, "w") as fh:
            fh.write(f_text + "\n")
    else:
        print(f_text)
    return 0


def cmd_encode(args) -> int:
    code = _build_code(" ".join(args.descriptor), args.crc)
    msg = _read_bits(args.message)
    if isinstance(code, ConcatenatedCode):
        cw = code.encode(msg)
    elif args.mode == "systematic":
        cw = code.encode_systematic(msg)
    else:
        cw = code.encode_nonsystematic(msg)
    print(format_bits(cw), file=_open_output(args))
    return 0


def cmd_decode(args) -> int:
    code = _build_code(" ".join(args.descriptor), args.crc)
    spec = sim.parse_decoder(args.decoder)
    concat = isinstance(code, ConcatenatedCode)
    if spec.outer and not concat:
        raise ConfigError(f"{spec.label} needs --crc")
    inner = code.inner if concat else code
    llrs = _read_llrs(args.llrs)
    if llrs.shape != (code.n,):
        raise ConfigError(f"expected {code.n} LLRs, got {llrs.shape[0]}")
    if spec.kind == "scl":
        checker = scl.outer_checker_from_crc(code) if spec.outer else None
        out = scl.scl_decode(llrs, inner.frozen, spec.list_size,
                             checker=checker, metric=args.metric)
        print(f"metric={out.metric:.6g}", file=sys.stderr)
    else:
        if spec.outer:
            out = bp.bp_decode_concat_batch(llrs, code,
                                            max_iter=spec.max_iter).outcome(
                0, inner.info_positions)
        else:
            out = bp.bp_decode(llrs, inner, max_iter=spec.max_iter)
        print(f"converged={out.converged} iterations={out.iterations}",
              file=sys.stderr)
    if concat:
        bits = code.extract_message(out.chosen_codeword)
    elif args.mode == "systematic":
        bits = out.chosen_codeword[inner.info_positions]
    else:
        # the kernel transform is an involution, so this recovers u
        bits = kernel_transform(out.chosen_codeword)[inner.info_positions]
    print(format_bits(bits), file=_open_output(args))
    return 0


_EXPERIMENT_KEYS = {
    "code", "crc", "interleaver", "interleaver_seed", "decoders", "ebn0_db",
    "seed", "min_block_errors", "max_trials", "batch_size", "workers",
    "metric", "genie", "output",
}


def _load_experiment(path: str) -> dict:
    try:
        with open(path, "rb") as fh:
            raw = tomllib.load(fh)
    except tomllib.TOMLDecodeError as exc:
        raise ConfigError(f"{path}: {exc}") from exc
    except OSError as exc:
        raise ConfigError(f"{path}: {exc}") from exc
    if set(raw) != {"experiment"}:
        raise ConfigError(
            f"{path}: expected exactly one [experiment] section, "
            f"found {sorted(raw) or 'nothing'}")
    table = raw["experiment"]
    unknown = set(table) - _EXPERIMENT_KEYS
    if unknown:
        raise ConfigError(f"{path}: unknown keys {sorted(unknown)}")
    for key in ("code", "decoders", "ebn0_db"):
        if key not in table:
            raise ConfigError(f"{path}: missing required key {key!r}")
    return table


def cmd_simulate(args) -> int:
    table = _load_experiment(args.config)
    code = _build_code(table["code"], table.get("crc"),
                       table.get("interleaver", "trivial"),
                       table.get("interleaver_seed", 0))
    decoders = [sim.parse_decoder(d) for d in table["decoders"]]
    grid = tuple(float(v) for v in table["ebn0_db"])
    records = []
    try:
        configs = [sim.SimConfig(
            code=code, decoder=spec, ebn0_grid=grid,
            seed=args.seed if args.seed is not None else table.get("seed", 0),
            min_block_errors=table.get("min_block_errors", 100),
            max_trials=table.get("max_trials", 10**7),
            batch_size=table.get("batch_size", 256),
            workers=args.workers or table.get("workers", 1),
            metric=table.get("metric", "hard"),
            genie=table.get("genie", True)) for spec in decoders]
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc
    for cfg in configs:
        records.extend(sim.run_experiment(cfg))
    out_path = args.output or table.get("output")
    if out_path:
        with open(out_path, "w") as fh:
            sim.write_csv(records, fh)
    else:
        sim.write_csv(records, sys.stdout)
    return 0


def cmd_analyze(args) -> int:
    inner = parse_product(" ".join(args.descriptor))
    print(f"({inner.n},{inner.k},{inner.d}), A_d={inner.a_d}")
    print(f"A_{inner.d} = {inner.a_d}")
    if args.crc is not None:
        iowe = analysis.min_weight_iowe_product(inner)
        outer = crc_concat(inner, args.crc).outer
        avg = analysis.ensemble_avg_min_weight(
            outer.weight_enumerator(), iowe, inner.k)
        print(f"A_bar_{inner.d} = {float(avg):.1f}")
    if args.ebn0 is not None:
        grid = _parse_grid(args.ebn0)
        terms = {inner.d: inner.a_d}
        curve = analysis.tub_curve(terms, inner.d, inner.rate, grid)
        fh = _open_output(args)
        fh.write(curve.to_csv())
        if fh is not sys.stdout:
            fh.close()
    return 0


# ------------------------------------------------------------------ main

def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="rmprod",
        description="Product codes from Hadamard-kernel components: "
                    "construction, decoding, bounds, and simulation.")
    parser.add_argument("--seed", type=int, default=None,
                        help="master seed override")
    parser.add_argument("--workers", type=int, default=None,
                        help="worker process count for simulations")
    parser.add_argument("--output", default=None,
                        help="output file (default: standard output)")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("construct", help="print (n,k,d,A_d) and the frozen vector")
    p.add_argument("descriptor", nargs="+",
                   help="e.g. 'eH(16,11) x SPC(8,7)'")
    p.add_argument("--crc", type=int, choices=sorted(CRC_POLYS),
                   help="concatenate with the standard CRC of this degree")
    p.set_defaults(func=cmd_construct)

    p = sub.add_parser("encode", help="encode a message")
    p.add_argument("descriptor", nargs="+")
    p.add_argument("--crc", type=int, choices=sorted(CRC_POLYS))
    p.add_argument("--message", required=True,
                   help="bit string, or @file containing one")
    p.add_argument("--mode", choices=["systematic", "nonsystematic"],
                   default="systematic")
    p.set_defaults(func=cmd_encode)

    p = sub.add_parser("decode", help="decode one LLR vector")
    p.add_argument("descriptor", nargs="+")
    p.add_argument("--crc", type=int, choices=sorted(CRC_POLYS))
    p.add_argument("--decoder", required=True,
                   help="SC, SCL(L), SCL(L)+CRC, BP(I), or BP(I)+outer")
    p.add_argument("--llrs", required=True,
                   help="whitespace/comma separated floats, or @file")
    p.add_argument("--metric", choices=["hard", "exact"], default="hard")
    p.add_argument("--mode", choices=["systematic", "nonsystematic"],
                   default="systematic",
                   help="which information mapping to report bits in")
    p.set_defaults(func=cmd_decode)

    p = sub.add_parser("simulate", help="run the experiment in a TOML file")
    p.add_argument("config", help="experiment file path")
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("analyze", help="distance data, Ā_d, bound curves")
    p.add_argument("descriptor", nargs="+")
    p.add_argument("--crc", type=int, choices=sorted(CRC_POLYS),
                   help="also report the concatenated-ensemble average")
    p.add_argument("--ebn0", help="TUB grid: '1,2,3' or start:stop:step")
    p.set_defaults(func=cmd_analyze)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (ConfigError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
