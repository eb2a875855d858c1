"""Batch command-line front end.

Usage: losmimo <subcommand> --config <path> --out <dir> [--trials N] [--seed S]

Configs are flat ``key = value`` text with ``#`` comments; only physical SI
quantities appear (plus the dimensionless area ratio as an alternative to
the disc radius). Derived dimensionless parameters (gamma*g, |S|/(lam d), c)
are computed and echoed in the outputs, never read. Every output file starts
with a ``# schema=<name>/1`` line and is byte-identical across reruns with
the same config and seed.

Exit codes: 0 success, 2 config error, 3 invariant violation,
4 numerical failure. On failure an ``error.json`` record lands in the
output directory.
"""

from __future__ import annotations

import argparse
import dataclasses
import json
import math
import sys
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from . import achievability, capacity, moments, montecarlo, prolate
from .channel import build_full_matrix, build_reduced_matrix, singular_spectrum
from .errors import ConfigError, InvariantViolation, LosMimoError, NumericalFailure
from .geometry import project_to_disc, sample_ball_cluster
from .linkbudget import LinkBudget, channel_gain, input_snr, siso_spectral_efficiency
from .util import fingerprint

SUBCOMMANDS = (
    "siso",
    "mimo-sample",
    "ergodic",
    "bounds",
    "prolate",
    "achievability",
    "design",
    "moments",
    "scan",
)

_BUDGET_KEYS = (
    "wavelength_m",
    "range_m",
    "tx_aperture_m2",
    "rx_aperture_m2",
    "loss_factor",
    "power_W",
    "bandwidth_Hz",
    "noise_psd_W_per_Hz",
)

_FLOAT_KEYS = set(_BUDGET_KEYS) | {"disc_radius_m", "area_over_lambda_d"}
_INT_KEYS = {"streams", "trials", "seed", "quadrature_order", "mc_budget", "independent_partitions"}
_LIST_INT_KEYS = {"cell_counts", "scan_streams"}
_LIST_FLOAT_KEYS = {"scan_area_over_lambda_d", "scan_power_W"}
_ALL_KEYS = _FLOAT_KEYS | _INT_KEYS | _LIST_INT_KEYS | _LIST_FLOAT_KEYS


def parse_config(path: str | Path) -> dict:
    """Read a key=value config file into a typed mapping."""
    raw: dict = {}
    try:
        lines = Path(path).read_text(encoding="utf-8").splitlines()
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    for lineno, line in enumerate(lines, start=1):
        stripped = line.split("#", 1)[0].strip()
        if not stripped:
            continue
        if "=" not in stripped:
            raise ConfigError(f"line {lineno}: expected 'key = value', got {line.strip()!r}")
        key, _, value = stripped.partition("=")
        key = key.strip()
        value = value.strip()
        if key not in _ALL_KEYS:
            raise ConfigError(f"line {lineno}: unknown key {key!r}")
        if key in raw:
            raise ConfigError(f"line {lineno}: duplicate key {key!r}")
        try:
            if key in _FLOAT_KEYS:
                raw[key] = float(value)
            elif key in _INT_KEYS:
                raw[key] = int(value)
            elif key in _LIST_INT_KEYS:
                raw[key] = [int(v.strip()) for v in value.split(",") if v.strip()]
            else:
                raw[key] = [float(v.strip()) for v in value.split(",") if v.strip()]
        except ValueError as exc:
            raise ConfigError(f"line {lineno}: bad value for {key!r}: {value!r}") from exc
    return raw


@dataclass(frozen=True)
class ScenarioConfig:
    """Validated run description; geometry is exactly one of radius or ratio."""

    budget: LinkBudget
    seed: int
    streams: int | None = None
    disc_radius_m: float | None = None
    trials: int | None = None
    quadrature_order: int = 0
    cell_counts: tuple = ()
    scan_streams: tuple = ()
    scan_area_over_lambda_d: tuple = ()
    scan_power_W: tuple = ()
    mc_budget: int = 0
    independent_partitions: bool = False
    raw: dict = dataclasses.field(default_factory=dict)

    @classmethod
    def from_mapping(cls, raw: dict) -> "ScenarioConfig":
        missing = [k for k in _BUDGET_KEYS if k not in raw]
        if missing:
            raise ConfigError(f"missing required budget keys: {', '.join(missing)}")
        if "seed" not in raw:
            raise ConfigError("missing required key 'seed'")
        budget = LinkBudget(**{k: raw[k] for k in _BUDGET_KEYS})
        has_radius = "disc_radius_m" in raw
        has_ratio = "area_over_lambda_d" in raw
        if has_radius and has_ratio:
            raise ConfigError("give exactly one of disc_radius_m / area_over_lambda_d, not both")
        disc_radius = raw.get("disc_radius_m")
        if has_ratio:
            if raw["area_over_lambda_d"] <= 0:
                raise ConfigError("area_over_lambda_d must be positive")
            lambda_d = budget.wavelength_m * budget.range_m
            disc_radius = math.sqrt(raw["area_over_lambda_d"] * lambda_d / math.pi)
        if disc_radius is not None and disc_radius <= 0:
            raise ConfigError("disc_radius_m must be positive")
        return cls(
            budget=budget,
            seed=raw["seed"],
            streams=raw.get("streams"),
            disc_radius_m=disc_radius,
            trials=raw.get("trials"),
            quadrature_order=raw.get("quadrature_order", 0),
            cell_counts=tuple(raw.get("cell_counts", ())),
            scan_streams=tuple(raw.get("scan_streams", ())),
            scan_area_over_lambda_d=tuple(raw.get("scan_area_over_lambda_d", ())),
            scan_power_W=tuple(raw.get("scan_power_W", ())),
            mc_budget=raw.get("mc_budget", 0),
            independent_partitions=bool(raw.get("independent_partitions", 0)),
            raw=dict(raw),
        )

    def require(self, *keys: str) -> None:
        labels = {
            "streams": self.streams,
            "disc_radius_m": self.disc_radius_m,
            "trials": self.trials,
            "cell_counts": self.cell_counts or None,
            "scan_streams": self.scan_streams or None,
            "scan_area_over_lambda_d": self.scan_area_over_lambda_d or None,
            "scan_power_W": self.scan_power_W or None,
        }
        for key in keys:
            if labels[key] is None:
                hint = "disc_radius_m or area_over_lambda_d" if key == "disc_radius_m" else key
                raise ConfigError(f"subcommand requires config key '{hint}'")

    @property
    def scenario_id(self) -> str:
        return fingerprint({"config": self.raw})


def _fmt(value) -> str:
    if isinstance(value, (bool, np.bool_)):
        return "1" if value else "0"
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    if isinstance(value, (float, np.floating)):
        return repr(float(value))
    return str(value)


def emit_csv(path: str | Path, schema: str, header: list[str], rows: list) -> None:
    """Write one report: schema comment, header, rows; LF endings, UTF-8,
    floats in shortest round-trip decimal form."""
    lines = [f"# schema={schema}/1", ",".join(header)]
    for row in rows:
        if len(row) != len(header):
            raise InvariantViolation("emit_csv: row width does not match header")
        lines.append(",".join(_fmt(v) for v in row))
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8", newline="\n")


def _gamma_g(budget: LinkBudget) -> tuple[float, float, float]:
    gamma = input_snr(budget)
    g = channel_gain(budget)
    return gamma, g, gamma * g


def _run_siso(cfg: ScenarioConfig, out: Path) -> None:
    gamma, g, gg = _gamma_g(cfg.budget)
    xi1 = siso_spectral_efficiency(gamma, g)
    emit_csv(
        out / "siso.csv",
        "siso",
        ["gamma", "g", "gamma_g", "xi1"],
        [[gamma, g, gg, xi1]],
    )


def _run_mimo_sample(cfg: ScenarioConfig, out: Path) -> None:
    cfg.require("streams", "disc_radius_m")
    gamma, g, gg = _gamma_g(cfg.budget)
    lam, d = cfg.budget.wavelength_m, cfg.budget.range_m
    tx = sample_ball_cluster(cfg.disc_radius_m, cfg.streams, cfg.seed, counter=0)
    rx = sample_ball_cluster(cfg.disc_radius_m, cfg.streams, cfg.seed, counter=1)
    full = build_full_matrix(tx, rx, d, lam)
    reduced = build_reduced_matrix(project_to_disc(tx), project_to_disc(rx), lam, d)
    spec_full = singular_spectrum(full)
    spec_reduced = singular_spectrum(reduced)
    xi_full = capacity.uniform_spectral_efficiency(spec_full, gamma, g, cfg.streams)
    xi_reduced = capacity.uniform_spectral_efficiency(spec_reduced, gamma, g, cfg.streams)
    xi_wf = capacity.waterfilling_spectral_efficiency(spec_reduced, gamma, g, cfg.streams)
    emit_csv(
        out / "sample_summary.csv",
        "mimo_sample",
        ["streams", "gamma_g", "xi_uniform_full", "xi_uniform_reduced", "xi_waterfilling", "norm_sq"],
        [[cfg.streams, gg, xi_full, xi_reduced, xi_wf, spec_full.norm_sq]],
    )
    emit_csv(
        out / "sample_spectrum.csv",
        "spectrum",
        ["rank", "value"],
        [[i + 1, v] for i, v in enumerate(spec_full.values)],
    )
    for name, cluster in (("tx", tx), ("rx", rx)):
        emit_csv(
            out / f"sample_cluster_{name}.csv",
            "cluster3d",
            ["idx", "x", "y", "z"],
            [[i, p[0], p[1], p[2]] for i, p in enumerate(cluster.nodes)],
        )
    emit_csv(
        out / "sample_matrix_full.csv",
        "matrix",
        ["i", "j", "re", "im"],
        [
            [i, j, full.entries[i, j].real, full.entries[i, j].imag]
            for i in range(cfg.streams)
            for j in range(cfg.streams)
        ],
    )


def _run_ergodic(cfg: ScenarioConfig, out: Path) -> None:
    cfg.require("streams", "disc_radius_m", "trials")
    gamma, g, gg = _gamma_g(cfg.budget)
    est = montecarlo.ergodic_uniform_xi(
        cfg.budget, cfg.streams, cfg.disc_radius_m, cfg.trials, cfg.seed
    )
    s_over_ld = math.pi * cfg.disc_radius_m**2 / (cfg.budget.wavelength_m * cfg.budget.range_m)
    emit_csv(
        out / "ergodic.csv",
        "ergodic",
        ["scenario_id", "streams", "S_over_ld", "gamma_g", "trials", "mean_xi", "std_error"],
        [[est.scenario_id, cfg.streams, s_over_ld, gg, est.trials, est.mean_xi, est.std_error]],
    )


_SCAN_HEADER = [
    "scenario_id",
    "M",
    "S_over_ld",
    "gamma_g",
    "mean_xi",
    "se",
    "lb15",
    "ub14",
    "det_cap",
    "ub_violations",
]


def _scan_rows(rows: list) -> list:
    return [
        [
            r.scenario_id,
            r.streams,
            r.s_over_ld,
            r.gamma_g,
            r.mean_xi,
            r.std_error,
            r.lower_bound,
            r.upper_bound,
            r.deterministic_xi,
            r.ub_violations,
        ]
        for r in rows
    ]


def _run_bounds(cfg: ScenarioConfig, out: Path) -> None:
    cfg.require("streams", "disc_radius_m", "trials")
    scenario = montecarlo.ScanScenario(
        budget=cfg.budget, streams=cfg.streams, disc_radius_m=cfg.disc_radius_m
    )
    rows = montecarlo.bound_scan([scenario], cfg.trials, cfg.seed)
    emit_csv(out / "bounds.csv", "scan", _SCAN_HEADER, _scan_rows(rows))


def _run_scan(cfg: ScenarioConfig, out: Path) -> None:
    cfg.require("scan_streams", "scan_area_over_lambda_d", "scan_power_W", "trials")
    lambda_d = cfg.budget.wavelength_m * cfg.budget.range_m
    scenarios = []
    for power in cfg.scan_power_W:
        for ratio in cfg.scan_area_over_lambda_d:
            for m in cfg.scan_streams:
                budget = dataclasses.replace(cfg.budget, power_W=power)
                radius = math.sqrt(ratio * lambda_d / math.pi)
                scenarios.append(
                    montecarlo.ScanScenario(budget=budget, streams=m, disc_radius_m=radius)
                )
    rows = montecarlo.bound_scan(scenarios, cfg.trials, cfg.seed)
    emit_csv(out / "scan.csv", "scan", _SCAN_HEADER, _scan_rows(rows))


def _run_prolate(cfg: ScenarioConfig, out: Path) -> None:
    cfg.require("disc_radius_m")
    lam, d = cfg.budget.wavelength_m, cfg.budget.range_m
    loss = cfg.budget.loss_factor
    problem = prolate.ProlateProblem.from_geometry(
        cfg.disc_radius_m, lam, d, quadrature_order=cfg.quadrature_order
    )
    modes = prolate.operator_modes(problem, loss, cfg.disc_radius_m, lam, d)
    spectrum = prolate.spectrum_from_modes(modes)
    emit_csv(
        out / "prolate_spectrum.csv",
        "prolate_spectrum",
        ["rank", "order_N", "mode_m", "alpha_sq", "nu_sq"],
        [
            [i + 1, mode.order_n, mode.mode_m, mode.alpha_sq, mode.nu_sq]
            for i, mode in enumerate(modes)
        ],
    )
    area = math.pi * cfg.disc_radius_m**2
    emit_csv(
        out / "prolate_summary.csv",
        "prolate_summary",
        [
            "c",
            "quadrature_order",
            "dof",
            "significant_modes",
            "sum_alpha_sq",
            "sum_nu_sq",
            "frobenius_target",
        ],
        [
            [
                problem.c,
                problem.effective_quadrature_order,
                prolate.dof_count(cfg.disc_radius_m, lam, d),
                prolate.significant_mode_count(spectrum, loss),
                sum(m.alpha_sq for m in modes),
                spectrum.norm_sq,
                loss * area**2 / (lam * d) ** 2,
            ]
        ],
    )


def _run_achievability(cfg: ScenarioConfig, out: Path) -> None:
    cfg.require("streams", "disc_radius_m", "cell_counts")
    points = achievability.convergence_curve(
        cfg.budget,
        cfg.streams,
        cfg.disc_radius_m,
        list(cfg.cell_counts),
        shared_partition=not cfg.independent_partitions,
        quadrature_order=cfg.quadrature_order,
    )
    emit_csv(
        out / "convergence.csv",
        "achievability",
        ["N", "xi_discrete", "xi_limit", "gap", "gram_defect"],
        [[p.cell_count, p.xi_discrete, p.xi_limit, p.gap, p.gram_defect] for p in points],
    )


def _run_design(cfg: ScenarioConfig, out: Path) -> None:
    gamma, g, gg = _gamma_g(cfg.budget)
    res = capacity.optimal_stream_count(gamma, g)
    area = capacity.required_array_area(
        res.m_opt, cfg.budget.wavelength_m, cfg.budget.range_m
    )
    emit_csv(
        out / "design.csv",
        "design",
        [
            "gamma_g",
            "t_star",
            "x_opt",
            "m_low",
            "m_high",
            "m_opt",
            "xi_opt_bits",
            "ratio_bits",
            "ratio_nats",
            "reported_snr_constant",
            "reported_peak_ratio_nats",
            "array_area_m2",
        ],
        [
            [
                gg,
                res.t_star,
                res.x_opt,
                res.m_low,
                res.m_high,
                res.m_opt,
                res.xi_bits,
                res.ratio_bits,
                res.ratio_nats,
                capacity.REPORTED_SNR_CONSTANT,
                capacity.REPORTED_PEAK_RATIO,
                area,
            ]
        ],
    )


def _run_moments(cfg: ScenarioConfig, out: Path) -> None:
    cfg.require("streams", "disc_radius_m", "trials")
    gamma, g, _ = _gamma_g(cfg.budget)
    report = moments.moment_report(
        cfg.streams,
        gamma,
        g,
        cfg.disc_radius_m,
        cfg.budget.wavelength_m,
        cfg.budget.range_m,
        cfg.trials,
        cfg.seed,
        mc_budget=cfg.mc_budget,
    )
    emit_csv(
        out / "moments.csv",
        "moments",
        ["c", "M", "f_est", "f_se", "f_bound", "m4_closed", "m4_emp", "m4_se", "bound_closed", "bound_tight"],
        [
            [
                report.c,
                report.streams,
                report.f_estimate,
                report.f_std_error,
                report.f_bound,
                report.fourth_moment_closed,
                report.fourth_moment_empirical,
                report.fourth_moment_std_error,
                report.bound_closed,
                report.bound_tight,
            ]
        ],
    )


_RUNNERS = {
    "siso": _run_siso,
    "mimo-sample": _run_mimo_sample,
    "ergodic": _run_ergodic,
    "bounds": _run_bounds,
    "prolate": _run_prolate,
    "achievability": _run_achievability,
    "design": _run_design,
    "moments": _run_moments,
    "scan": _run_scan,
}

_EXIT_CODES = {ConfigError: 2, InvariantViolation: 3, NumericalFailure: 4}


def run(
    subcommand: str,
    config_path: str | Path,
    out_dir: str | Path,
    trials: int | None = None,
    seed: int | None = None,
) -> int:
    """Execute one subcommand; returns the process exit code."""
    out = Path(out_dir)
    try:
        if subcommand not in _RUNNERS:
            raise ConfigError(f"unknown subcommand {subcommand!r}; choose from {SUBCOMMANDS}")
        raw = parse_config(config_path)
        if trials is not None:
            raw["trials"] = trials
        if seed is not None:
            raw["seed"] = seed
        cfg = ScenarioConfig.from_mapping(raw)
        out.mkdir(parents=True, exist_ok=True)
        _RUNNERS[subcommand](cfg, out)
        return 0
    except LosMimoError as exc:
        code = next((v for k, v in _EXIT_CODES.items() if isinstance(exc, k)), 1)
        record = {"error": type(exc).__name__, "exit_code": code, "message": str(exc)}
        try:
            out.mkdir(parents=True, exist_ok=True)
            (out / "error.json").write_text(json.dumps(record, indent=2) + "\n", encoding="utf-8")
        except OSError:
            pass
        print(f"losmimo: {type(exc).__name__}: {exc}", file=sys.stderr)
        return code


def main(argv: list[str] | None = None) -> int:
    parser = argparse.ArgumentParser(
        prog="losmimo",
        description="Long-range free-space LOS MIMO capacity toolbox (batch CSV reports).",
    )
    parser.add_argument("subcommand", choices=SUBCOMMANDS)
    parser.add_argument("--config", required=True, help="path to key=value scenario config")
    parser.add_argument("--out", required=True, help="output directory for CSV reports")
    parser.add_argument("--trials", type=int, default=None, help="override config trials")
    parser.add_argument("--seed", type=int, default=None, help="override config seed")
    args = parser.parse_args(argv)
    return run(args.subcommand, args.config, args.out, trials=args.trials, seed=args.seed)


if __name__ == "__main__":
    sys.exit(main())
