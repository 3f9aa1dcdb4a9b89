"""``hpsgd`` command line: run experiments from an INI config, write CSVs.

Exit status: 0 success, 1 usage or config error, 2 runtime failure, 3 selftest failure.
"""
from __future__ import annotations

import argparse
import csv
import logging
import math
import sys
from pathlib import Path

from . import harness
from .bounds import MartingaleSpec, mc_lemma1, mc_max_bound, violation_slack
from .config import ConcentrationConfig, format_config, format_float, load
from .harness import ConfigError, EnsembleResult, ExperimentConfig
from .optimizer import DivergenceError

log = logging.getLogger("hpsgd")

EXIT_OK, EXIT_USAGE, EXIT_RUNTIME, EXIT_SELFTEST = 0, 1, 2, 3

TRIALS_HEADER = ["trial", "T", "min_grad_sq", "f_final", "lemma2_holds", "theorem_holds", "theorem_rhs"]
SUMMARY_HEADER = ["T", "n_trials", "delta", "theorem", "theorem_rhs", "q50", "q90", "q_1_minus_delta",
                  "quantile_below_rhs", "lemma2_violation_frac", "lemma3_first_violation_frac",
                  "lemma3_second_violation_frac", "theorem_violation_frac",
                  "theorem2_intermediate_violation_frac"]
RATES_HEADER = ["T", "median_min_grad_sq", "q90", "slope_running"]


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(f"{self.prog}: {message}")


def _cell(v) -> str:
    if v is None:
        return ""
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, float):
        return format_float(v) if math.isfinite(v) else repr(v)
    return str(v)


def _write_csv(path: Path, header, rows) -> None:
    try:
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(header)
            for row in rows:
                w.writerow([_cell(v) for v in row])
    except OSError as exc:
        raise OSError(f"cannot write {path}: {exc.strerror or exc}") from exc


def trial_rows(res: EnsembleResult):
    for i in range(res.n_trials):
        yield [i, res.T, float(res.min_grad_sq[i]), float(res.f_final[i]), res.lemma2[i].holds,
               None if res.theorem is None else res.theorem[i].holds, res.theorem_rhs]


def summary_row(res: EnsembleResult):
    q = res.quantiles
    qd = q[1.0 - res.config.delta]
    vf = res.violation_fractions
    below = None if res.theorem_rhs is None else bool(qd <= res.theorem_rhs)
    return [res.T, res.n_trials, res.config.delta, res.theorem_name, res.theorem_rhs, q[0.5], q[0.9], qd, below,
            vf["lemma2"], vf["lemma3_first"], vf["lemma3_second"], vf["theorem"], vf["theorem2_intermediate"]]


def _write_effective(out: Path, cfg: ExperimentConfig, conc=None, notes=()) -> None:
    text = "".join(f"# {n}\n" for n in notes) + format_config(cfg, conc)
    try:
        (out / "effective_config").write_text(text)
    except OSError as exc:
        raise OSError(f"cannot write {out / 'effective_config'}: {exc.strerror or exc}") from exc


def _resolve(cfg: ExperimentConfig, seen=None):
    resolved, notes = cfg.resolve()
    for line in notes:
        if seen is not None:
            if line in seen:
                continue
            seen.add(line)
        (log.warning if line.startswith("WARNING") else log.info)(line)
    return resolved, notes


def cmd_run(cfg, conc, out: Path) -> int:
    resolved, notes = _resolve(cfg)
    res = harness.run_ensemble(cfg)
    _write_effective(out, resolved, notes=notes)
    _write_csv(out / "trials.csv", TRIALS_HEADER, trial_rows(res))
    _write_csv(out / "summary.csv", SUMMARY_HEADER, [summary_row(res)])
    vf = res.violation_fractions
    log.info("T=%d trials=%d q(1-delta)=%s theorem_rhs=%s lemma2_viol=%s theorem_viol=%s", res.T, res.n_trials,
             format_float(res.quantiles[1 - cfg.delta]), res.theorem_rhs, vf["lemma2"], vf["theorem"])
    return EXIT_OK


def _grid(cfg: ExperimentConfig):
    if not cfg.T_grid:
        raise ConfigError("this command needs experiment.T_grid")
    return list(cfg.T_grid)


def cmd_sweep(cfg, conc, out: Path) -> int:
    results, all_notes, seen = [], [], set()
    for T in _grid(cfg):
        _, notes = _resolve(cfg.at(T), seen)
        all_notes += [f"T={T}: {n}" for n in notes]
        results.append(harness.run_ensemble(cfg.at(T)))
    _write_effective(out, cfg, notes=all_notes)
    _write_csv(out / "trials.csv", TRIALS_HEADER, (r for res in results for r in trial_rows(res)))
    _write_csv(out / "summary.csv", SUMMARY_HEADER, [summary_row(res) for res in results])
    return EXIT_OK


def cmd_rates(cfg, conc, out: Path) -> int:
    _grid(cfg)
    all_notes, seen = [], set()
    for T in cfg.T_grid:
        _, notes = _resolve(cfg.at(T), seen)
        all_notes += [f"T={T}: {n}" for n in notes]
    rep = harness.rate_experiment(cfg)
    _write_effective(out, cfg, notes=all_notes)
    _write_csv(out / "rates.csv", RATES_HEADER, rep.rows())
    _write_csv(out / "summary.csv", SUMMARY_HEADER, [summary_row(res) for res in rep.ensembles])
    fit = rep.slope_fit
    _write_csv(out / "rate_fit.csv", ["slope", "intercept", "r_squared"], [[fit.slope, fit.intercept, fit.r_squared]])
    log.info("slope=%s r2=%s", format_float(fit.slope), format_float(fit.r_squared))
    return EXIT_OK


def cmd_compare_forms(cfg, conc, out: Path) -> int:
    rep = harness.momentum_form_comparison(cfg)
    _write_effective(out, cfg, notes=[f"constant c={rep['c']!r}", f"delayed_adagrad alpha={rep['alpha']!r}"])
    _write_csv(out / "forms.csv", ["T", "constant_gap", "delayed_adagrad_gap"],
               zip(rep["T"], rep["constant"], rep["delayed_adagrad"]))
    return EXIT_OK


def cmd_concentration(cfg, conc: ConcentrationConfig, out: Path) -> int:
    rows = []
    for delta in conc.deltas:
        for label, spec in (("lemma1", MartingaleSpec(T=conc.T)),
                            ("lemma1_understated", MartingaleSpec(T=conc.T, understate=conc.understate))):
            if label == "lemma1_understated" and conc.understate == 1.0:
                continue
            r = mc_lemma1(spec, conc.lam, delta, conc.n_trials, conc.seed)
            rows.append([label, delta, conc.T, "", r["n_trials"], r["violation_rate"],
                         delta + violation_slack(delta, conc.n_trials)])
    for d in conc.max_d:
        r = mc_max_bound(conc.sigma, conc.max_T, conc.max_delta, d, conc.n_trials, conc.seed)
        rows.append(["max_bound", conc.max_delta, conc.max_T, d, r["n_trials"], r["violation_rate"],
                     conc.max_delta + violation_slack(conc.max_delta, conc.n_trials)])
    _write_effective(out, cfg, conc)
    _write_csv(out / "concentration.csv", ["check", "delta", "T", "d", "n_trials", "violation_rate", "threshold"],
               rows)
    return EXIT_OK


COMMANDS = {
    "run": cmd_run,
    "sweep": cmd_sweep,
    "concentration": cmd_concentration,
    "rates": cmd_rates,
    "compare-forms": cmd_compare_forms,
}


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="hpsgd", description="Momentum SGD high-probability bound experiments.")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)
    for name in COMMANDS:
        s = sub.add_parser(name)
        s.add_argument("--config", required=True, type=Path)
        s.add_argument("--out", required=True, type=Path)
        s.add_argument("--override", action="append", default=[], metavar="SECTION.KEY=VALUE")
        s.add_argument("--force", action="store_true", help="allow step sizes above the theorem caps")
    sub.add_parser("selftest")
    return p


def main(argv=None) -> int:
    logging.basicConfig(level=logging.INFO, format="%(levelname)s %(message)s", stream=sys.stderr)
    try:
        args = build_parser().parse_args(argv)
    except UsageError as exc:
        print(exc, file=sys.stderr)
        return EXIT_USAGE
    if args.command == "selftest":
        from .selftest import run_selftest

        return EXIT_OK if run_selftest() else EXIT_SELFTEST
    try:
        cfg, conc = load(args.config, args.override, force=True if args.force else None)
        if cfg.force:
            log.warning("--force: theorem step-size caps are not enforced; bound checks may not apply")
        cfg.resolve()
    except ConfigError as exc:
        log.error("config error: %s", exc)
        return EXIT_USAGE
    try:
        args.out.mkdir(parents=True, exist_ok=True)
        return COMMANDS[args.command](cfg, conc, args.out)
    except ConfigError as exc:
        log.error("config error: %s", exc)
        return EXIT_USAGE
    except DivergenceError as exc:
        log.error("run diverged: %s", exc)
        return EXIT_RUNTIME
    except (OSError, FloatingPointError, ValueError) as exc:
        log.error("runtime failure: %s", exc)
        return EXIT_RUNTIME


if __name__ == "__main__":
    sys.exit(main())
