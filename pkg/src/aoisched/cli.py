"""Command-line front end: solve, simulate, sweep, export, validate.

Exit codes: 0 success, 1 solver or simulation failure, 2 usage/config error.
All outputs are deterministic for a fixed seed, so repeated invocations of
the same command produce byte-identical files.
"""

from __future__ import annotations

import argparse
import os
import sys

import numpy as np

from . import policy_io
from .baselines import PRESETS, RestrictionError, solve_restricted
from .config import ConfigError, SystemParams, load_config, read_config
from .link import NOMA, mc_outage_estimate
from .mdp import InfeasibleActionError, State, TransitionKernel, cost_table
from .simulate import SimConfig, estimate_ewsaoi, run_episode, snr_sweep, write_trace_csv
from .solver import SolverError

USAGE_ERROR = 2
RUN_ERROR = 1


class CliError(Exception):
    def __init__(self, message, code=USAGE_ERROR):
        super().__init__(message)
        self.code = code


def _common_flags(parser):
    parser.add_argument("--config", help="config file (flat key = value); defaults used if omitted")
    parser.add_argument("--seed", type=int, default=0, help="base RNG seed (default 0)")
    parser.add_argument("--out", required=True, help="output file or directory")
    parser.add_argument("--threads", type=int, default=1,
                        help="reserved; computations are single-threaded and deterministic")
    parser.add_argument("--quiet", action="store_true", help="suppress progress messages")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="aoisched",
        description="Freshness-aware scheduling: MDP solver and link simulator "
                    "for a two-device wireless-powered network",
    )
    sub = parser.add_subparsers(dest="cmd", required=True)

    p = sub.add_parser("solve", help="solve for an optimal (possibly scheme-restricted) policy")
    _common_flags(p)
    p.add_argument("--preset", default="adaptive", choices=sorted(PRESETS),
                   help="scheme restriction (default adaptive)")

    p = sub.add_parser("export-policy", help="export a (delta1, delta2) scheme grid at a battery slice")
    _common_flags(p)
    p.add_argument("--policy", required=True, help="policy .bin file from solve")
    p.add_argument("--e1", type=int, required=True, help="device-1 battery level of the slice")
    p.add_argument("--e2", type=int, required=True, help="device-2 battery level of the slice")

    p = sub.add_parser("simulate", help="Monte Carlo EWSAoI estimate for a stored policy")
    _common_flags(p)
    p.add_argument("--policy", required=True)
    p.add_argument("--s0", required=True, help="initial state as d1,d2,e1,e2")
    p.add_argument("--horizon", type=int, default=1000)
    p.add_argument("--episodes", type=int, default=1000)
    p.add_argument("--mode", default="kernel", choices=["kernel", "physical"])
    p.add_argument("--harvest-mode", default="deterministic", choices=["deterministic", "sampled"])
    p.add_argument("--trace-out", help="also write the first episode's slot trace to this CSV")

    p = sub.add_parser("sweep", help="EWSAoI of several presets across an SNR list")
    _common_flags(p)
    p.add_argument("--presets", required=True, help="comma-separated preset names")
    p.add_argument("--snrs", required=True, help="comma-separated SNR values in dB")
    p.add_argument("--s0", required=True, help="initial state as d1,d2,e1,e2")
    p.add_argument("--horizon", type=int, default=1000)
    p.add_argument("--episodes", type=int, default=1000)

    p = sub.add_parser("validate-outage", help="analytic outage vs Monte Carlo audit table")
    _common_flags(p)
    p.add_argument("--samples", type=int, default=1_000_000)

    p = sub.add_parser("export-kernel", help="dump the full transition kernel as CSV (diagnostic)")
    _common_flags(p)

    return parser


def _load_params(args) -> SystemParams:
    if args.config:
        try:
            return read_config(args.config)
        except OSError as exc:
            raise CliError(f"cannot read config {args.config}: {exc}")
        except ConfigError as exc:
            raise CliError(f"config error: {exc}")
    return load_config("")


def _parse_s0(text: str) -> State:
    parts = text.split(",")
    if len(parts) != 4:
        raise CliError(f"--s0 expects d1,d2,e1,e2 (got {text!r})")
    try:
        return State(*(int(p) for p in parts))
    except ValueError:
        raise CliError(f"--s0 expects four integers (got {text!r})") from None


def _command_line(args) -> str:
    return "aoisched " + " ".join(args.raw_argv)


def _say(args, message):
    if not args.quiet:
        print(message, file=sys.stderr)


def _out_dir(args):
    try:
        os.makedirs(args.out, exist_ok=True)
    except OSError as exc:
        raise CliError(f"cannot create output directory {args.out}: {exc}")
    if not os.access(args.out, os.W_OK):
        raise CliError(f"output directory {args.out} is not writable")
    return args.out


def _out_file(path_arg):
    parent = os.path.dirname(os.path.abspath(path_arg))
    if not os.path.isdir(parent) or not os.access(parent, os.W_OK):
        raise CliError(f"cannot write to {path_arg}")
    return path_arg


def cmd_solve(args) -> int:
    params = _load_params(args)
    out = _out_dir(args)
    kernel = TransitionKernel(params)
    costs = cost_table(kernel.space, params)
    _say(args, f"solving preset {args.preset} at {params.snr_db} dB "
               f"({kernel.n_states} states x {kernel.n_actions} actions)")
    result = solve_restricted(kernel, costs, args.preset, params.gamma, params.eps_star)
    _say(args, f"stable after {result.log.n_rounds} rounds, "
               f"final residual {result.log.final_residual:.2e}")

    meta = policy_io.metadata_lines(params, _command_line(args), args.seed,
                                    {"preset": args.preset})
    policy_io.save_policy_bin(os.path.join(out, "policy.bin"), result.policy)
    policy_io.write_csv_artifact(
        os.path.join(out, "policy.csv"), meta,
        lambda fh: policy_io.policy_rows(result.policy, kernel, fh), content_hash=True,
    )
    policy_io.write_csv_artifact(
        os.path.join(out, "value.csv"), meta,
        lambda fh: policy_io.value_rows(result.value, fh), content_hash=True,
    )
    policy_io.write_csv_artifact(
        os.path.join(out, "solvelog.csv"), meta,
        result.log.write_csv, content_hash=True,
    )
    return 0


def _load_policy_for(kernel, path) -> np.ndarray:
    try:
        policy = policy_io.load_policy_bin(path)
    except (OSError, ValueError) as exc:
        raise CliError(f"cannot load policy: {exc}")
    if len(policy) != kernel.n_states:
        raise CliError(
            f"policy has {len(policy)} states but the config implies {kernel.n_states}"
        )
    if policy.max() >= kernel.n_actions:
        raise CliError(f"policy contains action code {policy.max()} outside the alphabet")
    return policy


def cmd_export_policy(args) -> int:
    params = _load_params(args)
    kernel = TransitionKernel(params)
    policy = _load_policy_for(kernel, args.policy)
    m = params.battery_levels
    if not (0 <= args.e1 <= m and 0 <= args.e2 <= m):
        raise CliError(f"battery slice ({args.e1}, {args.e2}) outside [0, {m}]")
    meta = policy_io.metadata_lines(params, _command_line(args), args.seed,
                                    {"battery_slice": f"({args.e1}, {args.e2})"})
    policy_io.write_csv_artifact(
        _out_file(args.out), meta,
        lambda fh: policy_io.grid_rows(policy, kernel, args.e1, args.e2, fh),
    )
    return 0


def cmd_simulate(args) -> int:
    params = _load_params(args)
    kernel = TransitionKernel(params)
    policy = _load_policy_for(kernel, args.policy)
    s0 = _parse_s0(args.s0)
    try:
        kernel.space.index(s0)
    except ValueError as exc:
        raise CliError(str(exc))
    try:
        config = SimConfig(
            horizon=args.horizon, n_episodes=args.episodes, base_seed=args.seed,
            mode=args.mode, harvest_mode=args.harvest_mode,
        )
    except ValueError as exc:
        raise CliError(str(exc))
    _say(args, f"simulating {args.episodes} episodes of {args.horizon} slots ({args.mode} mode)")
    report = estimate_ewsaoi(policy, s0, kernel, config)

    meta = policy_io.metadata_lines(
        params, _command_line(args), args.seed,
        {"s0": args.s0, "horizon": args.horizon, "episodes": args.episodes,
         "mode": args.mode, "harvest_mode": args.harvest_mode},
    )

    def body(fh):
        import csv as _csv

        writer = _csv.writer(fh)
        writer.writerow(
            ["ewsaoi_mean", "stderr", "ci_low", "ci_high", "aoi1_mean", "aoi2_mean",
             "freq_wet", "freq_oma", "freq_noma", "freq_wet_oma"]
        )
        se = "" if report.stderr is None else repr(report.stderr)
        lo, hi = ("", "") if report.ci95 is None else (repr(report.ci95[0]), repr(report.ci95[1]))
        writer.writerow(
            [repr(report.ewsaoi_mean), se, lo, hi,
             repr(report.per_device_aoi[0]), repr(report.per_device_aoi[1]),
             repr(report.scheme_freq["wet"]), repr(report.scheme_freq["oma"]),
             repr(report.scheme_freq["noma"]), repr(report.scheme_freq["wet+oma"])]
        )

    policy_io.write_csv_artifact(_out_file(args.out), meta, body)

    if args.trace_out:
        rng = np.random.default_rng(config.base_seed)
        trace = run_episode(policy, s0, kernel, config, rng)
        policy_io.write_csv_artifact(
            _out_file(args.trace_out), meta, lambda fh: write_trace_csv(trace, fh)
        )
    _say(args, f"EWSAoI = {report.ewsaoi_mean:.4f}"
               + (f" +- {1.96 * report.stderr:.4f} (95% CI)" if report.stderr else ""))
    return 0


def cmd_sweep(args) -> int:
    params = _load_params(args)
    presets = [p.strip() for p in args.presets.split(",") if p.strip()]
    for p in presets:
        if p not in PRESETS:
            raise CliError(f"unknown preset {p!r}; choose from {', '.join(sorted(PRESETS))}")
    try:
        snrs_raw = [float(s) for s in args.snrs.split(",") if s.strip()]
    except ValueError:
        raise CliError(f"--snrs expects comma-separated numbers (got {args.snrs!r})") from None
    snrs = list(dict.fromkeys(snrs_raw))
    if len(snrs) != len(snrs_raw):
        _say(args, "warning: duplicate SNR entries removed")
    s0 = _parse_s0(args.s0)
    try:
        config = SimConfig(horizon=args.horizon, n_episodes=args.episodes, base_seed=args.seed)
    except ValueError as exc:
        raise CliError(str(exc))

    rows = snr_sweep(params, presets, snrs, s0, config,
                     progress=None if args.quiet else (lambda msg: _say(args, msg)))

    meta = policy_io.metadata_lines(
        params, _command_line(args), args.seed,
        {"s0": args.s0, "horizon": args.horizon, "episodes": args.episodes},
    )

    def body(fh):
        import csv as _csv

        writer = _csv.writer(fh)
        writer.writerow(["snr_db", "preset", "ewsaoi_mean", "stderr"])
        for row in rows:
            se = "" if row["stderr"] is None else repr(row["stderr"])
            writer.writerow([row["snr_db"], row["preset"], repr(row["ewsaoi_mean"]), se])

    policy_io.write_csv_artifact(_out_file(args.out), meta, body)
    return 0


def cmd_validate_outage(args) -> int:
    if args.samples < 10_000:
        raise CliError(f"--samples must be at least 1e4, got {args.samples}")
    params = _load_params(args)
    kernel = TransitionKernel(params)
    derived = kernel.derived

    def body(fh):
        import csv as _csv

        writer = _csv.writer(fh)
        writer.writerow(
            ["scheme", "action", "device", "analytic", "mc_estimate", "mc_stderr",
             "pass_4se", "mc_instantaneous"]
        )
        seed = args.seed
        for a in range(kernel.n_actions):
            scheme = kernel.actions.scheme(a)
            if scheme.tag == "wet":
                continue
            powers = kernel.actions.powers(a, derived)
            analytic = kernel.action_outage[a].astuple()
            mc = mc_outage_estimate(scheme, powers, derived, args.samples, seed, order="mean")
            inst = None
            if scheme.tag == NOMA:
                inst = mc_outage_estimate(
                    scheme, powers, derived, args.samples, seed + 1, order="instantaneous"
                )
            for dev in (1, 2):
                if not scheme.transmitting(dev):
                    continue
                i = dev - 1
                gap = abs(analytic[i] - mc.estimate[i])
                ok = gap <= 4.0 * mc.stderr[i] if mc.stderr[i] > 0 else gap == 0.0
                writer.writerow(
                    [scheme.tag, kernel.actions.describe(a), dev,
                     repr(analytic[i]), repr(mc.estimate[i]), repr(mc.stderr[i]),
                     int(ok), "" if inst is None else repr(inst.estimate[i])]
                )
            seed += 2

    meta = policy_io.metadata_lines(params, _command_line(args), args.seed,
                                    {"samples": args.samples})
    policy_io.write_csv_artifact(_out_file(args.out), meta, body)
    return 0


def cmd_export_kernel(args) -> int:
    params = _load_params(args)
    kernel = TransitionKernel(params)
    meta = policy_io.metadata_lines(params, _command_line(args), args.seed)
    policy_io.write_csv_artifact(
        _out_file(args.out), meta, lambda fh: policy_io.kernel_rows(kernel, fh)
    )
    return 0


_COMMANDS = {
    "solve": cmd_solve,
    "export-policy": cmd_export_policy,
    "simulate": cmd_simulate,
    "sweep": cmd_sweep,
    "validate-outage": cmd_validate_outage,
    "export-kernel": cmd_export_kernel,
}


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    args.raw_argv = list(argv) if argv is not None else sys.argv[1:]
    try:
        return _COMMANDS[args.cmd](args)
    except CliError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return exc.code
    except (ConfigError, RestrictionError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return USAGE_ERROR
    except (SolverError, InfeasibleActionError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return RUN_ERROR
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return USAGE_ERROR


if __name__ == "__main__":
    sys.exit(main())
