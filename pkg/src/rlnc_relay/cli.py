"""Command-line harness: scenario sweeps, figure presets, enumeration checks.

Experiments are described by INI files (one scenario template, one sweep
variable, the methods to run); results are CSV rows, one per sweep point
and method, with a fixed column order and 9 significant digits for
probabilities. Built-in presets regenerate the bundled experiment
configurations. Exit codes: 0 success, 1 usage or configuration error,
2 enumeration-oracle mismatch.
"""

from __future__ import annotations

import argparse
import configparser
import csv
import io
import sys
from dataclasses import dataclass
from importlib import resources

from . import exhaustive, netcalc, rankprob
from .netcalc import MulticastScenario, RelayScenario
from .simulator import run_multicast_sim, run_relay_sim

CSV_COLUMNS = ["experiment_id", "method", "q", "K", "N_S", "N_R",
               "p_SD", "p_SR", "p_RD", "probability", "ci_halfwidth",
               "trials", "seed", "topology"]

RELAY_METHODS = ("analytic", "simulation",
                 "active_only_analytic", "active_only_simulation")
MULTICAST_METHODS = ("analytic", "simulation", "bound")
# canonical output order within one sweep point
METHOD_ORDER = ("analytic", "simulation", "bound",
                "active_only_analytic", "active_only_simulation")

DEFAULT_TRIALS = 100_000
DEFAULT_SEED = 12345
DEFAULT_Z = 3.0


class ConfigError(ValueError):
    """Invalid experiment configuration; the message names the violation."""


@dataclass(frozen=True)
class SweepConfig:
    """One experiment: a scenario template swept over one variable."""

    experiment_id: str
    topology: str
    template: dict
    variable: str
    values: tuple
    methods: tuple[str, ...]
    trials: int
    seed: int
    z: float
    link_n_r: bool  # relay only: N_R follows N_S through the sweep


@dataclass(frozen=True)
class ExperimentResult:
    """One CSV row: a method evaluated at one sweep point."""

    experiment_id: str
    topology: str
    method: str
    scenario: object
    probability: float
    ci_halfwidth: float
    trials: int | None
    seed: int | None

    def csv_row(self) -> list[str]:
        s = self.scenario
        g = _fmt_float
        if self.topology == "relay":
            fields = [s.q, s.K, s.N_S, s.N_R, g(s.p_SD), g(s.p_SR), g(s.p_RD)]
        else:
            fields = [s.q, s.K, s.N, "", g(s.p1), g(s.p2), ""]
        return ([self.experiment_id, self.method] + [str(v) for v in fields]
                + [g(self.probability), g(self.ci_halfwidth),
                   "" if self.trials is None else str(self.trials),
                   "" if self.seed is None else str(self.seed),
                   self.topology])


def _fmt_float(x: float) -> str:
    return f"{x:.9g}"


# ---------------------------------------------------------------------------
# configuration parsing


def _get(section, key, conv, what, required=True, default=None):
    if key not in section:
        if required:
            raise ConfigError(f"missing {what} key '{key}'")
        return default
    raw = section[key].strip()
    try:
        return conv(raw)
    except ValueError as exc:
        raise ConfigError(f"bad value for {what} key '{key}': {raw!r}") from exc


def parse_config(text: str, experiment_id: str | None = None) -> SweepConfig:
    """Parse one INI experiment description into a validated SweepConfig."""
    cp = configparser.ConfigParser(inline_comment_prefixes=("#", ";"))
    try:
        cp.read_string(text)
    except configparser.Error as exc:
        raise ConfigError(f"cannot parse config: {exc}") from exc
    for sec in ("scenario", "sweep", "run"):
        if sec not in cp:
            raise ConfigError(f"missing [{sec}] section")
    scen = cp["scenario"]
    topology = _get(scen, "topology", str, "[scenario]")
    if topology not in ("relay", "multicast"):
        raise ConfigError(
            f"topology must be 'relay' or 'multicast', got {topology!r}")
    template: dict = {"q": _get(scen, "q", int, "[scenario]"),
                      "K": _get(scen, "K", int, "[scenario]")}
    link_n_r = False
    if topology == "relay":
        template["N_S"] = _get(scen, "N_S", int, "[scenario]",
                               required=False, default=template["K"])
        n_r_raw = scen.get("N_R", "N_S").strip()
        if n_r_raw == "N_S":
            link_n_r = True
            template["N_R"] = template["N_S"]
        else:
            template["N_R"] = _get(scen, "N_R", int, "[scenario]")
        for key in ("p_SD", "p_SR", "p_RD"):
            template[key] = _get(scen, key, float, "[scenario]")
    else:
        template["N"] = _get(scen, "N", int, "[scenario]",
                             required=False, default=template["K"])
        for key in ("p1", "p2"):
            template[key] = _get(scen, key, float, "[scenario]")

    sweep = cp["sweep"]
    allowed = (("N_S", "N_R", "K", "q", "p_SD", "p_SR", "p_RD")
               if topology == "relay" else ("N", "K", "q", "p1", "p2"))
    variable = _get(sweep, "variable", str, "[sweep]")
    if variable not in allowed:
        raise ConfigError(
            f"sweep variable {variable!r} not valid for {topology} "
            f"(allowed: {', '.join(allowed)})")
    conv = float if variable.startswith("p") else int
    if "values" in sweep:
        values = tuple(conv(tok) for tok in sweep["values"].replace(",", " ").split())
    elif "start" in sweep and "stop" in sweep:
        start = _get(sweep, "start", int, "[sweep]")
        stop = _get(sweep, "stop", int, "[sweep]")
        step = _get(sweep, "step", int, "[sweep]", required=False, default=1)
        if step < 1:
            raise ConfigError("sweep step must be positive")
        values = tuple(range(start, stop + 1, step))
    else:
        raise ConfigError("sweep needs either 'values' or 'start'/'stop'")
    if not values:
        raise ConfigError("sweep produced no values")

    run = cp["run"]
    methods_raw = _get(run, "methods", str, "[run]")
    methods = tuple(tok.strip() for tok in methods_raw.replace(",", " ").split())
    if not methods:
        raise ConfigError("no methods requested")
    valid = RELAY_METHODS if topology == "relay" else MULTICAST_METHODS
    for m in methods:
        if m not in valid:
            raise ConfigError(
                f"method {m!r} not valid for {topology} "
                f"(allowed: {', '.join(valid)})")
    methods = tuple(m for m in METHOD_ORDER if m in methods)
    trials = _get(run, "trials", int, "[run]", required=False,
                  default=DEFAULT_TRIALS)
    if trials < 1 and any("simulation" in m for m in methods):
        raise ConfigError(f"trials must be at least 1, got {trials}")
    seed = _get(run, "seed", int, "[run]", required=False, default=DEFAULT_SEED)
    z = _get(run, "z", float, "[run]", required=False, default=DEFAULT_Z)
    if experiment_id is None:
        experiment_id = cp["experiment"]["id"].strip() if "experiment" in cp \
            and "id" in cp["experiment"] else "experiment"
    return SweepConfig(experiment_id, topology, template, variable, values,
                       methods, trials, seed, z, link_n_r)


def _scenario_at(cfg: SweepConfig, value):
    fields = dict(cfg.template)
    fields[cfg.variable] = value
    if cfg.link_n_r and cfg.variable == "N_S":
        fields["N_R"] = value
    cls = RelayScenario if cfg.topology == "relay" else MulticastScenario
    try:
        return cls(**fields)
    except ValueError as exc:
        raise ConfigError(
            f"sweep point {cfg.variable}={value} violates a scenario "
            f"invariant: {exc}") from exc


# ---------------------------------------------------------------------------
# sweep evaluation


def run_sweep(cfg: SweepConfig) -> list[ExperimentResult]:
    """Evaluate every (sweep point, method) pair, in deterministic order.

    Each sweep point gets seed = cfg.seed + point index; the full and
    active-only simulation estimates at a point come from the same run.
    """
    rows: list[ExperimentResult] = []
    for i, value in enumerate(cfg.values):
        s = _scenario_at(cfg, value)
        seed = cfg.seed + i
        sim = None
        if any("simulation" in m for m in cfg.methods):
            if cfg.topology == "relay":
                sim = run_relay_sim(s, cfg.trials, seed, mode="full", z=cfg.z)
            else:
                sim = run_multicast_sim(s, cfg.trials, seed, z=cfg.z)
        for method in cfg.methods:
            if method == "analytic":
                p = (netcalc.p_relay_total(s, "full") if cfg.topology == "relay"
                     else netcalc.p_multicast(s))
                rows.append(ExperimentResult(cfg.experiment_id, cfg.topology,
                                             method, s, p, 0.0, None, None))
            elif method == "bound":
                p = netcalc.p_multicast_lower_bound(s)
                rows.append(ExperimentResult(cfg.experiment_id, cfg.topology,
                                             method, s, p, 0.0, None, None))
            elif method == "active_only_analytic":
                p = netcalc.p_relay_total(s, "active_only")
                rows.append(ExperimentResult(cfg.experiment_id, cfg.topology,
                                             method, s, p, 0.0, None, None))
            elif method == "simulation":
                rows.append(ExperimentResult(cfg.experiment_id, cfg.topology,
                                             method, s, sim.estimate,
                                             sim.ci_halfwidth, cfg.trials, seed))
            elif method == "active_only_simulation":
                succ = sim.direct_successes + sim.active_successes
                est = succ / cfg.trials
                ci = cfg.z * (est * (1.0 - est) / cfg.trials) ** 0.5
                rows.append(ExperimentResult(cfg.experiment_id, cfg.topology,
                                             method, s, est, ci,
                                             cfg.trials, seed))
    return rows


def write_csv(rows: list[ExperimentResult], out) -> None:
    w = csv.writer(out, lineterminator="\n")
    w.writerow(CSV_COLUMNS)
    for row in rows:
        w.writerow(row.csv_row())


def rows_to_csv_text(rows: list[ExperimentResult]) -> str:
    buf = io.StringIO()
    write_csv(rows, buf)
    return buf.getvalue()


# ---------------------------------------------------------------------------
# presets


PRESET_GROUPS: dict[str, list[str]] = {
    "fig1": ["fig1_p10.ini", "fig1_p20.ini", "fig1_p30.ini"],
    "fig2": ["fig2_k10.ini", "fig2_k20.ini", "fig2_k30.ini"],
    "fig3": ["fig3_psd030.ini", "fig3_psd060.ini", "fig3_psd090.ini",
             "fig3_psd100.ini"],
    "fig4": ["fig4_q2.ini", "fig4_q256.ini"],
}

PRESET_NOTES = {
    "fig1": "two-destination multicast, K=20, N=20..50, equal link PEP "
            "p in {0.1, 0.2, 0.3} (the swept p values are this package's choice)",
    "fig2": "relay network, PEPs (0.3, 0.1, 0.2), N_S=N_R=K..K+30, "
            "K in {10, 20, 30} (the K values are this package's choice)",
    "fig3": "relay network, K=10, p_SR=0.1, p_RD=0.2, N_S=N_R=10..40, "
            "p_SD in {0.3, 0.6, 0.9, 1.0}",
    "fig4": "relay network, K=10, PEPs (0.5, 0.3, 0.4), N_S=N_R=10..40, "
            "q in {2, 256}",
}


def load_preset_config(filename: str) -> str:
    return (resources.files("rlnc_relay") / "presets" / filename).read_text()


def run_preset(name: str, trials: int | None = None,
               seed: int | None = None) -> list[ExperimentResult]:
    """Rows for one figure preset; optional trial/seed overrides."""
    if name not in PRESET_GROUPS:
        raise ConfigError(
            f"unknown preset {name!r} (available: {', '.join(PRESET_GROUPS)})")
    rows: list[ExperimentResult] = []
    for i, filename in enumerate(PRESET_GROUPS[name]):
        cfg = parse_config(load_preset_config(filename))
        if trials is not None:
            cfg = SweepConfig(cfg.experiment_id, cfg.topology, cfg.template,
                              cfg.variable, cfg.values, cfg.methods, trials,
                              cfg.seed, cfg.z, cfg.link_n_r)
        if seed is not None:
            cfg = SweepConfig(cfg.experiment_id, cfg.topology, cfg.template,
                              cfg.variable, cfg.values, cfg.methods,
                              cfg.trials, seed + 10_000 * i, cfg.z,
                              cfg.link_n_r)
        rows.extend(run_sweep(cfg))
    return rows


# ---------------------------------------------------------------------------
# enumeration-oracle command


def run_oracle_report(max_dim: int = 4, q: int = 2, tol: float = 1e-12,
                      formulas: dict | None = None) -> tuple[list[str], int]:
    """Compare the closed forms against exhaustive enumeration.

    Returns (report lines, number of mismatches). Refuses dimension
    requests whose enumeration would exceed the state budget.
    """
    if q != 2:
        raise ConfigError("the enumeration oracle only supports q = 2")
    if max_dim < 1:
        raise ConfigError("--max-dim must be at least 1")
    worst = (2 * max_dim - 0) * (max_dim - 1)  # joint family, m12 = 0
    if worst > exhaustive.BUDGET_BITS:
        raise ConfigError(
            f"--max-dim {max_dim} needs enumeration over 2^{worst} states, "
            f"beyond the 2^{exhaustive.BUDGET_BITS} budget; use a smaller "
            f"dimension")
    f = {"count_full_rank": rankprob.count_full_rank,
         "count_rank_r": rankprob.count_rank_r,
         "p_full_rank": rankprob.p_full_rank,
         "p_rank_r": rankprob.p_rank_r,
         "p_stack_full_rank": rankprob.p_stack_full_rank,
         "p_joint_full_rank": rankprob.p_joint_full_rank}
    if formulas:
        f.update(formulas)
    lines: list[str] = []
    bad = 0

    def report(ok: bool, label: str) -> None:
        nonlocal bad
        if not ok:
            bad += 1
        lines.append(f"{'PASS' if ok else 'FAIL'}  {label}")

    for m in range(max_dim + 1):
        for k in range(max_dim + 1):
            counts = exhaustive.count_matrices_by_rank(m, k)
            cells = 1 << (m * k)
            ok = f["count_full_rank"](m, k, 2) == exhaustive.count_full_rank(m, k)
            ok &= abs(f["p_full_rank"](m, k, 2)
                      - exhaustive.count_full_rank(m, k) / cells) <= tol
            for r, cnt in enumerate(counts):
                ok &= f["count_rank_r"](m, k, r, 2) == cnt
                ok &= abs(f["p_rank_r"](m, k, r, 2) - cnt / cells) <= tol
            report(ok, f"counts/probabilities m={m} k={k}")
    for a in range(max_dim):
        for b in range(max_dim):
            for k in range(max_dim):
                exact = exhaustive.stack_full_rank_fraction(a, b, k)
                ok = abs(f["p_stack_full_rank"](a, b, k, 2) - exact) <= tol
                report(ok, f"stacked full rank a={a} b={b} k={k}")
    for m1 in range(max_dim + 1):
        for m2 in range(max_dim + 1):
            for k in range(max_dim):
                for m12 in range(min(m1, m2) + 1):
                    exact = exhaustive.joint_full_rank_fraction(m1, m2, m12, k)
                    ok = abs(f["p_joint_full_rank"](m1, m2, m12, k, 2)
                             - exact) <= tol
                    report(ok, f"joint full rank m1={m1} m2={m2} "
                               f"m12={m12} k={k}")
    return lines, bad


# ---------------------------------------------------------------------------
# entry point


class _Parser(argparse.ArgumentParser):
    def error(self, message):  # usage problems exit 1, not argparse's 2
        self.print_usage(sys.stderr)
        print(f"{self.prog}: error: {message}", file=sys.stderr)
        raise SystemExit(1)


def _build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="rlnc-relay",
                description="decoding probabilities for RLNC over a "
                            "single-relay erasure network")
    sub = p.add_subparsers(dest="command", required=True)

    p_eval = sub.add_parser("eval", help="run one experiment config")
    p_eval.add_argument("config", help="path to an INI experiment file")
    p_eval.add_argument("--out", help="CSV output path (default stdout)")
    p_eval.add_argument("--trials", type=int, help="override [run] trials")
    p_eval.add_argument("--seed", type=int, help="override [run] seed")

    p_or = sub.add_parser("oracle", help="check closed forms by enumeration")
    p_or.add_argument("--max-dim", type=int, default=4)
    p_or.add_argument("--q", type=int, default=2)

    p_pre = sub.add_parser("presets", help="bundled figure experiments")
    sub_pre = p_pre.add_subparsers(dest="presets_command", required=True)
    sub_pre.add_parser("list", help="list available presets")
    p_run = sub_pre.add_parser("run", help="run one preset to CSV")
    p_run.add_argument("name", choices=sorted(PRESET_GROUPS))
    p_run.add_argument("--out", help="CSV output path (default stdout)")
    p_run.add_argument("--trials", type=int, help="override preset trials")
    p_run.add_argument("--seed", type=int, help="override preset seeds")
    return p


def _emit(rows, out_path: str | None) -> None:
    if out_path:
        with open(out_path, "w", newline="") as fh:
            write_csv(rows, fh)
    else:
        write_csv(rows, sys.stdout)


def main(argv: list[str] | None = None) -> int:
    args = _build_parser().parse_args(argv)
    try:
        if args.command == "eval":
            try:
                with open(args.config) as fh:
                    text = fh.read()
            except OSError as exc:
                raise ConfigError(f"cannot read config: {exc}") from exc
            cfg = parse_config(text)
            if args.trials is not None:
                cfg = SweepConfig(cfg.experiment_id, cfg.topology,
                                  cfg.template, cfg.variable, cfg.values,
                                  cfg.methods, args.trials, cfg.seed, cfg.z,
                                  cfg.link_n_r)
            if args.seed is not None:
                cfg = SweepConfig(cfg.experiment_id, cfg.topology,
                                  cfg.template, cfg.variable, cfg.values,
                                  cfg.methods, cfg.trials, args.seed, cfg.z,
                                  cfg.link_n_r)
            _emit(run_sweep(cfg), args.out)
        elif args.command == "oracle":
            lines, bad = run_oracle_report(args.max_dim, args.q)
            print("\n".join(lines))
            if bad:
                print(f"{bad} mismatches beyond tolerance", file=sys.stderr)
                return 2
            print("all enumeration checks passed")
        elif args.command == "presets":
            if args.presets_command == "list":
                for name in sorted(PRESET_GROUPS):
                    print(f"{name}: {PRESET_NOTES[name]}")
            else:
                rows = run_preset(args.name, args.trials, args.seed)
                _emit(rows, args.out)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
