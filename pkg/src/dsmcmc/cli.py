"""Command-line entry point.

Subcommands map one-to-one onto the experiment runners, plus `validate`,
which runs a quick self-check battery.  Options can come from a flat
``key = value`` config file (--config); explicit command-line flags win.
Exit codes: 0 success, 1 configuration error, 2 runtime or numeric error.
"""

from __future__ import annotations

import argparse
import math
import sys
from pathlib import Path

import numpy as np

from . import plots
from .augmented import (
    AugmentedState,
    mod_one,
    shift_uniform,
    step_continuous,
    step_discrete,
)
from .diagnostics import Trace, effective_sample_size
from .errors import ParameterError, StreamFormatError
from .experiments import (
    DEFAULT_P_GRID,
    ExperimentConfig,
    run_experiment,
)
from .kernels import ARKernel, norm_cdf
from .mh import GaussianRandomWalkProposal, MHState, mh_step
from .slice_sampler import SliceParams, SliceState, slice_step, slice_step_reverse
from .streams import ReplayStream, StreamRecorder
from .targets import unit_gaussian_logpdf
from .validation import (
    brute_force_discrete_step,
    enumerated_small_kernels,
    invariance_check,
)

# Flags whose values may also appear in a config file, with their parsers.
_CONFIG_PARSERS = {
    "stream": str,
    "p": lambda s: tuple(float(tok) for tok in str(s).split(",") if tok.strip()),
    "seed": int,
    "sampler": lambda s: tuple(tok.strip() for tok in str(s).split(",") if tok.strip()),
    "updates": int,
    "scale": int,
    "thin": int,
    "out": str,
    "constant": float,
    "stream-file": str,
    "on-exhaust": str,
    "k": int,
    "w": float,
    "alpha": float,
    "pattern": str,
    "mode": lambda s: tuple(tok.strip() for tok in str(s).split(",") if tok.strip()),
    "trials": int,
    "r": float,
    "plot": lambda s: str(s).strip().lower() not in ("0", "false", "no", "off"),
    "workers": int,
}

_DEST_BY_KEY = {
    "stream": "stream",
    "p": "p",
    "seed": "seed",
    "sampler": "sampler",
    "updates": "updates",
    "scale": "scale",
    "thin": "thin",
    "out": "out",
    "constant": "constant",
    "stream-file": "stream_file",
    "on-exhaust": "on_exhaust",
    "k": "k_max",
    "w": "w",
    "alpha": "alpha",
    "pattern": "pattern",
    "mode": "mode",
    "trials": "trials",
    "r": "r",
    "plot": "plot",
    "workers": "workers",
}


class _Parser(argparse.ArgumentParser):
    """argparse that reports usage problems with the config-error exit code."""

    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(1, f"{self.prog}: error: {message}\n")


def _comma_floats(text: str) -> tuple[float, ...]:
    return tuple(float(tok) for tok in text.split(",") if tok.strip())


def _comma_names(text: str) -> tuple[str, ...]:
    return tuple(tok.strip() for tok in text.split(",") if tok.strip())


def _add_common_flags(parser):
    parser.add_argument("--stream", choices=["iid", "sticky", "constant", "file"],
                        default=None, help="driving stream type (default sticky)")
    parser.add_argument("--p", type=_comma_floats, default=None, metavar="P[,P...]",
                        help="sticking probabilities to sweep")
    parser.add_argument("--seed", type=int, default=None, help="master seed (default 0)")
    parser.add_argument("--updates", type=int, default=None,
                        help="updates per variable (funnel/interleave) or samples (ar)")
    parser.add_argument("--scale", type=int, default=None,
                        help="divide all iteration counts by this factor")
    parser.add_argument("--thin", type=int, default=None,
                        help="record every n-th sweep in the trace CSV (default 120)")
    parser.add_argument("--out", type=str, default=None, metavar="PATH",
                        help="write the result CSV here (prints CSV to stdout if omitted)")
    parser.add_argument("--config", type=str, default=None, metavar="PATH",
                        help="flat key = value option file; flags override it")
    parser.add_argument("--constant", type=float, default=None,
                        help="value emitted by --stream constant (default 0.5)")
    parser.add_argument("--stream-file", type=str, default=None, metavar="PATH",
                        help="value file for --stream file (one real per line)")
    parser.add_argument("--on-exhaust", choices=["error", "cycle"], default=None,
                        help="file stream behaviour at end of file (default cycle)")
    parser.add_argument("--no-plot", dest="plot", action="store_false", default=None,
                        help="skip rendering figures next to the CSV")
    parser.add_argument("--workers", type=int, default=None,
                        help="run independent grid cells in this many processes")


def build_parser() -> _Parser:
    parser = _Parser(prog="dsmcmc",
                     description="MCMC experiments driven by dependent random streams")
    sub = parser.add_subparsers(dest="command", required=True)

    funnel = sub.add_parser("funnel", parents=[], help="funnel bias sweep",
                            description="Estimate E[v] on the 10-d funnel per (sampler, p) cell.")
    _add_common_flags(funnel)
    funnel.add_argument("--sampler", type=_comma_names, default=None, metavar="ds|naive",
                        help="sampler(s) to run; comma list allowed (default ds)")
    funnel.add_argument("--k", dest="k_max", type=int, default=None,
                        help="uniform budget per slice update (default 10)")
    funnel.add_argument("--w", type=float, default=None,
                        help="slice step size (default 1.0)")

    ar = sub.add_parser("ar", help="autoregression variance demonstration",
                        description="Even-step variance of the AR chain under paired noise.")
    _add_common_flags(ar)
    ar.add_argument("--alpha", type=float, default=None,
                    help="autoregression coefficient (default 0.5)")
    ar.add_argument("--pattern", choices=["iid", "duplicate-pairs"], default=None,
                    help="driving noise pattern (default duplicate-pairs)")
    ar.add_argument("--mode", type=_comma_names, default=None, metavar="naive|adapted",
                    help="simulation mode(s); comma list allowed (default naive,adapted)")

    ring = sub.add_parser("ring", help="ring walk hitting times",
                          description="Steps for the +-1 walk on the 100-ring to reach x=50.")
    _add_common_flags(ring)
    ring.add_argument("--trials", type=int, default=None,
                      help="number of independent trials (default 200)")

    inter = sub.add_parser("interleave", help="funnel with interleaved ideal draws",
                           description="Funnel run driving a fraction r of sweeps with ideal uniforms.")
    _add_common_flags(inter)
    inter.add_argument("--r", type=float, default=None,
                       help="fraction of sweeps driven by the ideal source (default 0.001)")
    inter.add_argument("--k", dest="k_max", type=int, default=None)
    inter.add_argument("--w", type=float, default=None)

    val = sub.add_parser("validate", help="run the self-check battery",
                         description="Round trips, oracle agreement, and invariance checks.")
    val.add_argument("--seed", type=int, default=0)
    val.add_argument("--samples", type=int, default=20_000,
                     help="sample count for the invariance checks (default 20000)")
    return parser


def load_config_file(path) -> dict:
    """Parse a flat ``key = value`` file into typed option values."""
    options = {}
    with open(path, "r", encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, start=1):
            text = raw.strip()
            if not text or text.startswith("#"):
                continue
            key, sep, value = text.partition("=")
            if not sep:
                raise ParameterError(f"{path}:{lineno}: expected 'key = value', got {text!r}")
            key = key.strip().lower()
            if key not in _CONFIG_PARSERS:
                raise ParameterError(f"{path}:{lineno}: unknown option {key!r}")
            try:
                options[_DEST_BY_KEY[key]] = _CONFIG_PARSERS[key](value.strip())
            except ValueError as exc:
                raise ParameterError(f"{path}:{lineno}: bad value for {key!r}: {exc}") from None
    return options


def _resolve_config(args) -> ExperimentConfig:
    base = ExperimentConfig(experiment=args.command)
    merged = {}
    if getattr(args, "config", None):
        merged.update(load_config_file(args.config))
    for dest in _DEST_BY_KEY.values():
        cli_value = getattr(args, dest, None)
        if cli_value is not None:
            merged[dest] = cli_value
    if args.command == "funnel" and "p" not in merged:
        merged["p"] = DEFAULT_P_GRID
    if args.command in ("ring", "interleave") and "p" not in merged:
        merged["p"] = (0.999,) if args.command == "ring" else (1.0,)
    if args.command == "ring" and "stream" not in merged:
        merged["stream"] = "iid"
    from dataclasses import replace

    return replace(base, **merged).validate()


def _emit(result, config) -> None:
    if config.out is None:
        print(result.to_text())
        return
    csv_path = result.to_csv(config.out)
    written = [csv_path]
    written += result.write_traces(csv_path)
    if config.plot:
        written += _render_figures(result, config, csv_path)
    for path in written:
        print(f"wrote {path}")


def _render_figures(result, config, csv_path: Path) -> list[Path]:
    base = Path(csv_path)
    out = []
    if config.experiment == "funnel":
        out.append(plots.funnel_bias_figure(result.rows, base.with_suffix(".png")))
        for name, (steps, values) in sorted(result.traces.items()):
            out.append(plots.trace_figure(
                steps, values, base.with_name(f"{base.stem}_{name}.png"),
                title=name.replace("_", " ")))
    elif config.experiment == "ar":
        out.append(plots.ar_variance_figure(result.rows, base.with_suffix(".png")))
    elif config.experiment == "ring":
        out.append(plots.ring_figure(result.rows, base.with_suffix(".png")))
    elif config.experiment == "interleave":
        out.append(plots.interleave_figure(result.rows, base.with_suffix(".png")))
    return out


def _cmd_experiment(args) -> int:
    config = _resolve_config(args)
    result = run_experiment(config)
    _emit(result, config)
    return 0


def _cmd_validate(args) -> int:
    """Self-check battery printing one PASS/FAIL line per check."""
    checks = []
    seed = args.seed
    n = args.samples

    def check(name, ok, detail=""):
        checks.append(ok)
        status = "PASS" if ok else "FAIL"
        suffix = f"  ({detail})" if detail else ""
        print(f"[{status}] {name}{suffix}")

    ok = abs(mod_one(9.1) - 0.1) < 1e-12 and abs(mod_one(-8.3) - 0.7) < 1e-12
    check("mod-one wraparound", ok)

    worst = 0.0
    for _name, kernel, _target in enumerated_small_kernels():
        for x in kernel.support:
            for u in np.linspace(0.0, 0.999, 200):
                fast = step_discrete(kernel, AugmentedState(x, float(u)))
                slow = brute_force_discrete_step(kernel, x, float(u))
                worst = max(worst, abs(fast.u - slow[1]), float(fast.x != slow[0]))
    check("discrete update matches enumeration oracle", worst <= 1e-12, f"max dev {worst:.2e}")

    kernel = ARKernel(0.6)
    rng = np.random.default_rng(seed)
    worst = 0.0
    for _ in range(200):
        state = AugmentedState(float(rng.standard_normal()), float(rng.random()))
        mid = step_continuous(kernel, state)
        back = step_continuous(kernel, mid)
        worst = max(worst, abs(back.x - state.x), abs(back.u - state.u))
    check("continuous kernel round trip", worst <= 1e-9, f"max dev {worst:.2e}")

    proposal = GaussianRandomWalkProposal(1.0)
    worst = 0.0
    trips = 0
    for _ in range(500):
        state = MHState(float(rng.standard_normal()), float(rng.random()), float(rng.random()))
        recorder = StreamRecorder(ReplayStream([rng.random(), rng.random()]))
        stepped = mh_step(state, unit_gaussian_logpdf, proposal, recorder)
        if stepped.x == state.x:
            continue
        trips += 1
        back = mh_step(stepped, unit_gaussian_logpdf, proposal, ReplayStream([0.0], on_exhaust="cycle"))
        refreshed_q = shift_uniform(state.u_q, recorder.log[0])
        refreshed_a = shift_uniform(state.u_a, recorder.log[1])
        worst = max(worst, abs(back.x - state.x), abs(back.u_q - refreshed_q),
                    abs(back.u_a - refreshed_a))
    check("MH accepted-branch round trip", trips > 0 and worst <= 1e-9,
          f"{trips} accepted, max dev {worst:.2e}")

    params = SliceParams(w=1.0, k_max=6)
    worst = 0.0
    for _ in range(300):
        state = SliceState(float(rng.standard_normal()), [float(rng.random()) for _ in range(6)])
        recorder = StreamRecorder(ReplayStream(rng.random(32).tolist()))
        stepped = slice_step(state, unit_gaussian_logpdf, params, recorder)
        undone = slice_step_reverse(stepped, unit_gaussian_logpdf, params, recorder.log)
        worst = max(worst, abs(undone.x - state.x),
                    max(abs(a - b) for a, b in zip(undone.u, state.u)))
    check("slice update round trip", worst <= 1e-9, f"max dev {worst:.2e}")

    def gaussian_pair(gen):
        return AugmentedState(float(gen.standard_normal()), float(gen.random()))

    report = invariance_check(
        lambda st, stream: AugmentedState(st.x, shift_uniform(st.u, stream.next())),
        gaussian_pair, n, d_sequence=[0.37], target_cdf=norm_cdf, seed=seed,
    )
    check("uniform-refresh invariance", report.passed,
          f"x p={report.x_pvalue:.3f}, u p={report.u_pvalue:.3f}")

    report = invariance_check(
        lambda st, stream: step_continuous(kernel, AugmentedState(st.x, shift_uniform(st.u, stream.next()))),
        gaussian_pair, n, d_sequence=[0.123], target_cdf=norm_cdf, seed=seed + 1,
    )
    check("kernel-step invariance", report.passed,
          f"x p={report.x_pvalue:.3f}, u p={report.u_pvalue:.3f}")

    iid = Trace(np.random.default_rng(seed).standard_normal(100_000))
    ratio = effective_sample_size(iid) / len(iid)
    check("ESS on i.i.d. trace", 0.9 <= ratio <= 1.1, f"ESS/N = {ratio:.3f}")

    if all(checks):
        print(f"all {len(checks)} checks passed")
        return 0
    print(f"{sum(not c for c in checks)} of {len(checks)} checks FAILED")
    return 2


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        if args.command == "validate":
            return _cmd_validate(args)
        return _cmd_experiment(args)
    except (ParameterError, StreamFormatError, FileNotFoundError, IsADirectoryError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except Exception as exc:  # numeric / runtime failures
        print(f"runtime error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
