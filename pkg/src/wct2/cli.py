"""Command-line surface: stylize, metrics, verify, inspect-weights.

Exit codes: 0 success, 1 runtime failure, 2 argument/usage error. Flag
combinations are validated before any file is opened. WCT2_WEIGHTS provides
the default weights path.
"""

from __future__ import annotations

import argparse
import os
import sys

from . import verify as verify_suite
from .errors import PipelineError, WeightFormatError
from .metrics import compute_report
from .network import decoder_parameter_count, encoder_parameter_count
from .pipeline import ImageBuffer, StylizeOptions, load_model, run_stylize
from . import weights as weights_io

WEIGHTS_ENV = "WCT2_WEIGHTS"


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="wct2",
        description="Photorealistic style transfer with wavelet pooling, plus metrics and verification tools.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    stylize = sub.add_parser("stylize", help="stylize a content image with a style image")
    stylize.add_argument("--content", required=True, help="content image (PNG or JPEG)")
    stylize.add_argument("--style", required=True, help="style image (PNG or JPEG)")
    stylize.add_argument("--output", required=True, help="output PNG path")
    stylize.add_argument("--weights", default=None, help=f"weight container (default: ${WEIGHTS_ENV})")
    stylize.add_argument("--plumbing", action="store_true", help="bypass convolutions (no weights needed)")
    stylize.add_argument("--content-seg", default=None, help="grayscale label map for the content image")
    stylize.add_argument("--style-seg", default=None, help="grayscale label map for the style image")
    stylize.add_argument("--unpool", choices=("sum", "concat"), default=None, help="decoder unpooling (default concat)")
    stylize.add_argument("--transform", choices=("wct", "adain"), default="wct", help="stylization transform")
    stylize.add_argument("--alpha", type=float, default=1.0, help="blend weight in [0, 1] (default 1.0)")
    stylize.add_argument("--skip-wct", action="store_true", help="also stylize the high-frequency skip components")
    stylize.add_argument("--decoder-wct", action="store_true", help="also stylize decoder convX_2 outputs")
    stylize.add_argument("--multi-level", action="store_true", help="repeat the full pass coarse-to-fine (4 passes)")
    stylize.add_argument("--pooling", choices=("haar", "average", "split", "max"), default="haar", help="pooling ablation")
    stylize.add_argument("--max-side", type=int, default=None, help="downscale so the longer side fits this")
    stylize.add_argument("--report", default=None, help="write key=value metrics for the run to this path")

    metrics = sub.add_parser("metrics", help="evaluate a stylized image against its content and style")
    metrics.add_argument("--content", required=True)
    metrics.add_argument("--style", required=True)
    metrics.add_argument("--stylized", required=True)
    metrics.add_argument("--weights", default=None, help=f"weight container (default: ${WEIGHTS_ENV})")
    metrics.add_argument("--plumbing", action="store_true", help="bypass convolutions (no weights needed)")
    metrics.add_argument("--report", default=None, help="also write the key=value lines to this path")

    verify = sub.add_parser("verify", help="run the invariant suite on seeded random data")
    verify.add_argument("--seed", type=int, default=42, help="seed for all randomized checks (default 42)")
    verify.add_argument(
        "--perturb-haar",
        type=float,
        default=0.0,
        metavar="EPS",
        help="self-test hook: add EPS to one Haar kernel entry so frame checks must fail",
    )

    inspect = sub.add_parser("inspect-weights", help="list container tensors and parameter totals")
    inspect.add_argument("--weights", default=None, help=f"weight container (default: ${WEIGHTS_ENV})")
    return parser


def _resolve_weights(value: str | None) -> str | None:
    if value:
        return value
    return os.environ.get(WEIGHTS_ENV) or None


def _usage_error(parser: argparse.ArgumentParser, message: str) -> int:
    print(f"error: {message}", file=sys.stderr)
    parser.print_usage(sys.stderr)
    return 2


def cmd_stylize(args, parser) -> int:
    if not 0.0 <= args.alpha <= 1.0:
        return _usage_error(parser, f"--alpha must lie in [0, 1], got {args.alpha}")
    if (args.content_seg is None) != (args.style_seg is None):
        return _usage_error(parser, "--content-seg and --style-seg must be given together")
    if args.plumbing and args.weights:
        return _usage_error(parser, "--plumbing and --weights are mutually exclusive")
    if args.max_side is not None and args.max_side < 8:
        return _usage_error(parser, "--max-side must be at least 8")
    unpool = args.unpool
    if args.plumbing:
        if unpool == "concat":
            return _usage_error(parser, "--plumbing supports sum unpooling only")
        unpool = "sum"
    elif unpool is None:
        unpool = "concat"
    if unpool == "concat" and args.pooling in ("average", "max"):
        return _usage_error(parser, f"--pooling {args.pooling} provides one component; use --unpool sum")

    options = StylizeOptions(
        weights_path=None if args.plumbing else _resolve_weights(args.weights),
        plumbing=args.plumbing,
        unpool=unpool,
        pooling=args.pooling,
        transform=args.transform,
        alpha=args.alpha,
        skip_wct=args.skip_wct,
        decoder_wct=args.decoder_wct,
        multi_level=args.multi_level,
        max_side=args.max_side,
        compute_metrics=args.report is not None,
    )
    output, report = run_stylize(
        args.content,
        args.style,
        content_seg_path=args.content_seg,
        style_seg_path=args.style_seg,
        options=options,
    )
    output.to_file(args.output)
    if report is not None:
        with open(args.report, "w", encoding="utf-8") as fh:
            fh.write(report.to_text() + "\n")
    print(f"wrote {args.output}")
    return 0


def cmd_metrics(args, parser) -> int:
    if args.plumbing and args.weights:
        return _usage_error(parser, "--plumbing and --weights are mutually exclusive")
    options = StylizeOptions(
        weights_path=None if args.plumbing else _resolve_weights(args.weights),
        plumbing=args.plumbing,
        unpool="sum" if args.plumbing else "concat",
    )
    model = load_model(options)
    content = ImageBuffer.from_file(args.content, role="content image").to_features()
    style = ImageBuffer.from_file(args.style, role="style image").to_features()
    stylized = ImageBuffer.from_file(args.stylized, role="stylized image").to_features()
    if content.shape != stylized.shape:
        raise PipelineError(
            f"content and stylized images must share dimensions, got {content.shape} vs {stylized.shape}"
        )
    report = compute_report(content, style, stylized, model)
    text = report.to_text()
    print(text)
    if args.report:
        with open(args.report, "w", encoding="utf-8") as fh:
            fh.write(text + "\n")
    return 0


def cmd_verify(args) -> int:
    results = verify_suite.run_all(seed=args.seed, perturb_haar=args.perturb_haar)
    print(verify_suite.format_table(results))
    return 0 if all(r.passed for r in results) else 1


def cmd_inspect_weights(args, parser) -> int:
    path = _resolve_weights(args.weights)
    if not path:
        return _usage_error(parser, f"no weights file given (use --weights or ${WEIGHTS_ENV})")
    store = weights_io.load(path)
    total = 0
    for name in sorted(store.names()):
        tensor = store.get(name)
        total += tensor.size
        print(f"{name:<28} {'x'.join(str(d) for d in tensor.shape):<16} {tensor.size}")
    print(f"tensors: {len(store)}")
    print(f"parameters: {total}")
    mode = None
    if "decoder.conv3_4.weight" in store:
        mode = "concat" if store.get("decoder.conv3_4.weight").shape[1] == 1280 else "sum"
        print(f"decoder mode: {mode}")
    print(f"encoder parameters (plan): {encoder_parameter_count()}")
    print(f"decoder parameters (plan, sum): {decoder_parameter_count('sum')}")
    print(f"decoder parameters (plan, concat): {decoder_parameter_count('concat')}")
    ratio = decoder_parameter_count("concat") / decoder_parameter_count("sum")
    print(f"concat/sum decoder ratio: {ratio:.4f}")
    return 0


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code) if exc.code is not None else 0
    try:
        if args.command == "stylize":
            return cmd_stylize(args, parser)
        if args.command == "metrics":
            return cmd_metrics(args, parser)
        if args.command == "verify":
            return cmd_verify(args)
        if args.command == "inspect-weights":
            return cmd_inspect_weights(args, parser)
        return _usage_error(parser, f"unknown command {args.command!r}")
    except (PipelineError, WeightFormatError, OSError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
