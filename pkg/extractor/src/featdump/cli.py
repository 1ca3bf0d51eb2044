"""Command-line activation dumper.

    featdump --list images.txt --out feats/ --layers relu5,pool5

The list file names one image per line (blank lines and ``#`` comments
ignored); relative entries are resolved against the list file's directory so
a list can travel with its images.  Exit codes: 0 success (including partial
decode failures), 1 nothing was extracted, 2 bad invocation.
"""
from __future__ import annotations

import argparse
import os
import sys

from .errors import ConfigError, FeatDumpError
from .extract import VALID_INPUT_SIZES, extract_features


def read_list_file(path: str) -> list[str]:
    """Image paths from a list file, resolved against the file's directory."""
    base = os.path.dirname(os.path.abspath(path))
    try:
        with open(path, encoding="utf-8") as fh:
            lines = fh.readlines()
    except OSError as exc:
        raise ConfigError(f"cannot read list file {path}: {exc}") from exc
    paths = []
    for line in lines:
        entry = line.strip()
        if not entry or entry.startswith("#"):
            continue
        if not os.path.isabs(entry):
            entry = os.path.join(base, entry)
        paths.append(entry)
    if not paths:
        raise ConfigError(f"list file {path} names no images")
    return paths


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="featdump",
        description="dump CNN activation tensors as NPY files")
    parser.add_argument("--list", dest="list_file", required=True,
                        help="file naming one input image per line")
    parser.add_argument("--out", required=True, help="output directory")
    parser.add_argument("--model", default="vgg16", help="backbone id")
    parser.add_argument("--layers", default="relu5,pool5",
                        help="comma-separated taps (conv5, relu5, pool5)")
    parser.add_argument("--input-size", dest="input_size", type=int,
                        default=448, choices=VALID_INPUT_SIZES)
    parser.add_argument("--weights", default="default",
                        help="'default', 'none', or a state-dict path")
    parser.add_argument("--batch-size", dest="batch_size", type=int, default=4)
    parser.add_argument("--dump-images", dest="dump_images",
                        action="store_true",
                        help="also write each resized RGB frame as NPY")
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    layers = tuple(name.strip() for name in args.layers.split(",") if name.strip())
    try:
        paths = read_list_file(args.list_file)
        manifest = extract_features(
            paths, args.out, model_id=args.model, layers=layers,
            input_size=args.input_size, weights=args.weights,
            batch_size=args.batch_size, dump_images=args.dump_images)
    except ConfigError as exc:
        print(f"featdump: {exc}", file=sys.stderr)
        return 2
    except FeatDumpError as exc:
        print(f"featdump: {exc}", file=sys.stderr)
        return 1

    for entry in manifest.images:
        if entry.status == "ok":
            print(f"ok     {entry.stem}")
        else:
            print(f"failed {entry.stem}: {entry.error}")
    total = len(manifest.images)
    print(f"{manifest.ok_count}/{total} images extracted -> "
          f"{os.path.join(args.out, 'manifest.json')}")
    return 0 if manifest.ok_count else 1


if __name__ == "__main__":
    sys.exit(main())
