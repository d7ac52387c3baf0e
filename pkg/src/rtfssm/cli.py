"""Command-line interface.

Exit codes: 0 success, 1 domain error (bad file contents, unstable system,
failed check, ...), 2 usage error.
"""

from __future__ import annotations

import argparse
import csv
import json
import logging
import sys

import numpy as np

from . import selftest
from .bench import run_bench, write_csv
from .convert import ssm_to_tf, tf_to_dense, tf_to_modal
from .core import RtfParams
from .errors import ChannelMismatch, RtfError, SchemaError
from .serialize import (
    fmt_float,
    load_params,
    load_signal,
    modal_to_doc,
    read_json,
    save_params,
    save_signal,
    ssm_from_doc,
    ssm_to_doc,
    write_json,
)
from .spectral import fft_conv
from .stability import stability_report
from .statespace import companion_bank, impulse_response, run_recurrent, to_corrected, to_truncated
from .train import TrainConfig, distill, train_delay


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(f"{self.format_help()}\n{self.prog}: error: {message}")


def _int_list(text: str) -> list:
    try:
        values = [int(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}")
    if not values or min(values) < 1:
        raise argparse.ArgumentTypeError("values must be positive integers")
    return values


def cmd_kernel(args):
    params = load_params(args.params)
    save_signal(impulse_response(params, args.len), args.out)


def apply_params(params: RtfParams, u: np.ndarray, mode: str) -> np.ndarray:
    """Filter ``u`` (channels, L) in parallel (``fft``) or step-by-step (``recurrent``)."""
    if u.shape[0] != params.channels:
        raise ChannelMismatch(f"signal has {u.shape[0]} channels, params have {params.channels}")
    if mode == "fft":
        return fft_conv(u, impulse_response(params, u.shape[-1]))
    y, _ = run_recurrent(companion_bank(to_corrected(params)), u)
    return y


def cmd_apply(args):
    params = load_params(args.params)
    u = load_signal(args.input)
    save_signal(apply_params(params, u, args.mode), args.out)


def cmd_convert(args):
    if args.direction == "ssm2tf":
        systems = ssm_from_doc(read_json(args.infile), args.infile)
        tfs = [ssm_to_tf(s) for s in systems]
        n = {tf.state_size for tf in tfs}
        if len(n) != 1:
            raise SchemaError("all systems must share one state size")
        params = RtfParams(
            a=np.concatenate([tf.a for tf in tfs]),
            b=np.concatenate([tf.b for tf in tfs]),
            h0=np.concatenate([tf.h0 for tf in tfs]),
        )
        save_params(params, args.out)
        return
    params = to_corrected(load_params(args.infile))
    channels = range(params.channels)
    if args.direction == "tf2ssm":
        write_json(ssm_to_doc([tf_to_dense(params, c) for c in channels]), args.out)
    else:
        write_json(modal_to_doc([tf_to_modal(params, c) for c in channels]), args.out)


def cmd_check(args):
    params = load_params(args.params)
    reports = []
    for r in range(params.num_denominators):
        doc = {"denominator": r}
        doc.update(stability_report(params.a[r]).to_dict())
        reports.append(doc)
    doc = {"all_stable": all(r["jury_stable"] for r in reports), "denominators": reports}
    print(json.dumps(doc, indent=2))


def cmd_correct(args):
    params = load_params(args.params)
    if params.numerator_form == "truncated":
        if args.len is not None and args.len != params.trained_length:
            raise SchemaError(
                f"--len {args.len} disagrees with trained_length {params.trained_length}"
            )
        out = to_corrected(params)
    else:
        if args.len is None:
            raise UsageError("--len is required to truncate a corrected numerator")
        out = to_truncated(params, args.len)
    save_params(out, args.out)


def cmd_train_delay(args):
    config = TrainConfig.from_dict(read_json(args.config))
    report = train_delay(config)
    with open(args.out, "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["step", "loss"])
        for k, loss in enumerate(report.loss_trace):
            writer.writerow([str(k), fmt_float(loss)])
    if args.params_out:
        save_params(report.params, args.params_out)
    summary = {
        "final_rmse": report.final_rmse,
        "zero_init_rmse": report.baseline_rmse,
        "steps": config.steps,
    }
    print(json.dumps(summary))


def cmd_distill(args):
    target = load_signal(args.target)
    params, mse = distill(target, args.state_size, args.iterations, args.lr, args.seed)
    save_params(params, args.out)
    print(json.dumps({"mse": mse}))


def cmd_bench(args):
    rows = run_bench(args.lens, args.states, args.channels, args.repeats)
    write_csv(rows, args.out)


def cmd_selftest(args):
    failures = selftest.run()
    if failures:
        print(f"{failures} check(s) failed", file=sys.stderr)
        return 1
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="rtf", description="Rational transfer function state-space models")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", parser_class=_Parser)

    p = sub.add_parser("kernel", help="write the first L kernel samples as a signal CSV")
    p.add_argument("--params", required=True)
    p.add_argument("--len", type=int, required=True)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_kernel)

    p = sub.add_parser("apply", help="filter a signal CSV")
    p.add_argument("--params", required=True)
    p.add_argument("--input", required=True)
    p.add_argument("--mode", choices=["fft", "recurrent"], default="fft")
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_apply)

    p = sub.add_parser("convert", help="convert between representations")
    p.add_argument("direction", choices=["ssm2tf", "tf2ssm", "tf2modal"])
    p.add_argument("--in", dest="infile", required=True)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_convert)

    p = sub.add_parser("check", help="print a stability report as JSON")
    p.add_argument("--params", required=True)
    p.set_defaults(func=cmd_check)

    p = sub.add_parser("correct", help="switch between truncated and corrected numerators")
    p.add_argument("--params", required=True)
    p.add_argument("--len", type=int)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_correct)

    p = sub.add_parser("train-delay", help="train on the delay task; writes step,loss CSV")
    p.add_argument("--config", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--params-out")
    p.set_defaults(func=cmd_train_delay)

    p = sub.add_parser("distill", help="fit RTF parameters to a target kernel CSV")
    p.add_argument("--target", required=True)
    p.add_argument("--state-size", type=int, required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--iterations", type=int, default=5000)
    p.add_argument("--lr", type=float, default=3e-2)
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(func=cmd_distill)

    p = sub.add_parser("bench", help="latency/memory scaling benchmark; writes CSV")
    p.add_argument("--lens", type=_int_list, required=True)
    p.add_argument("--states", type=_int_list, required=True)
    p.add_argument("--repeats", type=int, default=7)
    p.add_argument("--channels", type=int, default=1)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_bench)

    p = sub.add_parser("selftest", help="run the oracle suites")
    p.set_defaults(func=cmd_selftest)
    return parser


def dispatch(argv) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        if args.command is None:
            raise UsageError(parser.format_help() + "\nrtf: error: a subcommand is required")
        logging.basicConfig(
            level=logging.INFO if args.verbose else logging.WARNING,
            format="%(levelname)s %(name)s: %(message)s",
        )
        return args.func(args) or 0
    except UsageError as exc:
        print(exc, file=sys.stderr)
        return 2
    except RtfError as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 1
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


def main():
    sys.exit(dispatch(sys.argv[1:]))


if __name__ == "__main__":
    main()
