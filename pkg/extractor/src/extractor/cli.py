"""Command line: extract --video PATH --out DIR [--fps 1.0]
[--subject-model ID] [--scene-model ID]

Exit codes: 0 success, 1 usage, 2 decode or I/O failure, 3 model load
failure.
"""

import argparse
import sys

from .errors import DecodeError, ModelLoadError, UsageError
from .extract import ExtractionJob, extract


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def build_parser() -> _Parser:
    parser = _Parser(prog="extract", description=__doc__)
    parser.add_argument("--video", required=True, help="input video file")
    parser.add_argument("--out", required=True, help="output directory")
    parser.add_argument("--fps", type=float, default=1.0, help="sampling rate (default 1.0)")
    parser.add_argument("--subject-model", default="seeded:1000",
                        help="seeded:<classes>[:<seed>] or torchvision:<name>")
    parser.add_argument("--scene-model", default="seeded:205")
    return parser


def main(argv=None) -> int:
    try:
        args = build_parser().parse_args(argv)
        job = ExtractionJob(
            video=args.video,
            out_dir=args.out,
            fps=args.fps,
            subject_model=args.subject_model,
            scene_model=args.scene_model,
        )
        result = extract(job)
    except (UsageError, ValueError) as exc:
        print(f"extract: {exc}", file=sys.stderr)
        return 1
    except (DecodeError, OSError) as exc:
        print(f"extract: {exc}", file=sys.stderr)
        return 2
    except ModelLoadError as exc:
        print(f"extract: {exc}", file=sys.stderr)
        return 3
    print(f"frames={result.frames}")
    print(f"fps={result.fps}")
    for key in sorted(result.paths):
        print(f"{key}={result.paths[key]}")
    return 0


def entrypoint() -> None:
    sys.exit(main())
