"""Experiment harness CLI: single runs, sweeps, cost tables, and self-tests.

Subcommands
-----------
simulate  run one protocol once and print/save a JSON report
sweep     Monte Carlo grid over (eta × bits × eps × shots), CSV output
costs     evaluate the closed-form cost model at one parameter point
fig1      emit the cost-ratio table (eta, k, cost_improved, cost_sql, ratio)
selftest  run the reduced invariant suite

Conventions: all offsets are given in units of π (the fraction T = ωt/π);
every run is seeded (``--seed``, default 0) and reruns are bit-identical;
CSV output is RFC-4180 with a header row; exit codes are 0 (success),
2 (configuration error), 3 (invariant failure).
"""

from __future__ import annotations

import argparse
import csv
import hashlib
import io
import json
import math
import sys
from concurrent.futures import ProcessPoolExecutor

from . import cost_model, selfcheck
from .channel import LossyChannel, expected_bounces
from .protocols import (
    ONE_WAY_FRINGE,
    TWO_WAY_FRINGE,
    ProtocolReport,
    QuadratureMode,
    TruthModel,
    entangled_bitwise,
    entangled_oneshot,
    hybrid_estimate,
    improved_estimate,
    repetitions_per_bit,
    select_k1,
    simple_one_way,
    simple_two_way,
)
from .simulator import RngStream

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_INVARIANT = 3

PROTOCOLS = (
    "one-way",
    "two-way",
    "improved",
    "entangled",
    "entangled-bitwise",
    "hybrid",
)

_MODES = {
    "two-quadrature": QuadratureMode.TWO_QUADRATURE,
    "cosine-only": QuadratureMode.COSINE_ONLY,
}


class ConfigError(Exception):
    """A configuration value violates a protocol precondition."""


# ---------------------------------------------------------------------------
# configuration plumbing
# ---------------------------------------------------------------------------


def _load_config(args: argparse.Namespace, keys: tuple[str, ...]) -> dict:
    """Resolve the effective config: file values first, explicit flags win."""
    cfg: dict = {}
    if getattr(args, "config", None):
        try:
            with open(args.config, "r", encoding="utf-8") as fh:
                loaded = json.load(fh)
        except (OSError, json.JSONDecodeError) as exc:
            raise ConfigError(f"cannot read config file {args.config!r}: {exc}")
        if not isinstance(loaded, dict):
            raise ConfigError("config file must hold a JSON object")
        for key, value in loaded.items():
            cfg[key.replace("-", "_")] = value
    for key in keys:
        value = getattr(args, key, None)
        if value is not None:
            cfg[key] = value
    return cfg


def fingerprint(payload: dict) -> str:
    """Stable 16-hex-digit digest of all parameters including the seed."""
    canon = json.dumps(payload, sort_keys=True, separators=(",", ":"), default=str)
    return hashlib.sha256(canon.encode("utf-8")).hexdigest()[:16]


def _require(cfg: dict, key: str, kind, default=None):
    if key not in cfg or cfg[key] is None:
        if default is not None:
            return default
        raise ConfigError(f"missing required parameter --{key.replace('_', '-')}")
    try:
        return kind(cfg[key])
    except (TypeError, ValueError):
        raise ConfigError(f"parameter {key}={cfg[key]!r} is not a valid {kind.__name__}")


def _parse_offset(value, rng: RngStream, protocol: str, m_qubits: int = 1) -> float:
    """Offset fraction T ∈ [0, 1) from a literal or 'random' (drawn in the
    protocol's valid window)."""
    lo, hi = _offset_window(protocol, m_qubits)
    if isinstance(value, str) and value.strip().lower() == "random":
        return lo + (hi - lo) * rng.child("offset").uniform()
    try:
        t = float(value)
    except (TypeError, ValueError):
        raise ConfigError(f"offset {value!r} is neither a number nor 'random'")
    return t


def _offset_window(protocol: str, m_qubits: int = 1) -> tuple[float, float]:
    if protocol == "one-way":
        return ONE_WAY_FRINGE[0] / math.pi, ONE_WAY_FRINGE[1] / math.pi
    if protocol == "two-way":
        return TWO_WAY_FRINGE[0] / math.pi, TWO_WAY_FRINGE[1] / math.pi
    if protocol == "entangled":
        return 0.0, 1.0 / m_qubits
    return 0.0, 1.0


def _check_offset(protocol: str, t_frac: float, m_qubits: int = 1) -> None:
    lo, hi = _offset_window(protocol, m_qubits)
    name = {
        "one-way": "fringe",
        "two-way": "fringe",
        "entangled": "inversion window",
    }.get(protocol, "estimation window")
    if not lo <= t_frac <= hi:
        raise ConfigError(
            f"offset T={t_frac!r} violates the {protocol} {name} "
            f"[{lo:.6g}, {hi:.6g}] (in units of pi)"
        )


# ---------------------------------------------------------------------------
# simulate
# ---------------------------------------------------------------------------

_SIM_KEYS = (
    "protocol",
    "omega",
    "offset",
    "eta",
    "shots",
    "bits",
    "k1",
    "eps",
    "mode",
    "qubits",
    "seed",
    "count_lost_sends",
    "out",
)


def run_single(cfg: dict) -> tuple[dict, ProtocolReport]:
    """Execute one configured protocol run; returns (resolved config, report)."""
    protocol = _require(cfg, "protocol", str)
    if protocol not in PROTOCOLS:
        raise ConfigError(f"unknown protocol {protocol!r}; choose from {PROTOCOLS}")
    omega = _require(cfg, "omega", float, default=1.0)
    if omega <= 0:
        raise ConfigError(f"omega must be positive, got {omega}")
    eta = _require(cfg, "eta", float, default=1.0)
    if not 0.0 < eta <= 1.0:
        raise ConfigError(f"eta={eta} outside (0, 1]")
    seed = _require(cfg, "seed", int, default=0)
    mode_name = str(cfg.get("mode") or "two-quadrature")
    if mode_name not in _MODES:
        raise ConfigError(f"unknown mode {mode_name!r}; choose from {sorted(_MODES)}")
    mode = _MODES[mode_name]
    count_lost = _parse_yesno(cfg.get("count_lost_sends", "yes"))
    m_qubits = _require(cfg, "qubits", int, default=1) if protocol == "entangled" else 1

    rng = RngStream(seed)
    t_frac = _parse_offset(cfg.get("offset", "random"), rng, protocol, m_qubits)
    _check_offset(protocol, t_frac, m_qubits)
    truth = TruthModel(omega=omega, t_ba=math.pi * t_frac / omega)
    ch = LossyChannel(eta)
    run_rng = rng.child("run", 0)

    resolved = {
        "protocol": protocol,
        "omega": omega,
        "offset": t_frac,
        "eta": eta,
        "seed": seed,
        "mode": mode_name,
        "count_lost_sends": count_lost,
    }

    if protocol == "one-way":
        shots = _require(cfg, "shots", int)
        resolved["shots"] = shots
        report = simple_one_way(truth, shots, ch, run_rng, count_lost)
    elif protocol == "two-way":
        shots = _require(cfg, "shots", int)
        resolved["shots"] = shots
        report = simple_two_way(truth, shots, ch, run_rng, count_lost)
    elif protocol == "improved":
        bits = _require(cfg, "bits", int)
        eps = _require(cfg, "eps", float)
        resolved.update(bits=bits, eps=eps)
        report = improved_estimate(
            truth, bits, eps, mode=mode, ch=ch, rng=run_rng,
            count_lost_sends=count_lost,
        )
    elif protocol == "entangled":
        if eta < 1.0:
            raise ConfigError("the entangled one-shot protocol is lossless-only")
        shots = _require(cfg, "shots", int)
        resolved.update(shots=shots, qubits=m_qubits)
        report = entangled_oneshot(truth, m_qubits, shots, run_rng)
    elif protocol == "entangled-bitwise":
        bits = _require(cfg, "bits", int)
        eps = _require(cfg, "eps", float)
        resolved.update(bits=bits, eps=eps)
        report = entangled_bitwise(
            truth, bits, eps, ch=ch, rng=run_rng, mode=mode,
            count_lost_sends=count_lost,
        )
    else:  # hybrid
        bits = _require(cfg, "bits", int)
        eps = _require(cfg, "eps", float)
        k1 = cfg.get("k1")
        if k1 is None:
            k1 = select_k1(eta, bits, eps)
            resolved["k1_selected"] = True
        k1 = int(k1)
        resolved.update(bits=bits, eps=eps, k1=k1)
        report = hybrid_estimate(
            truth, k1, bits, eps, ch=ch, rng=run_rng, mode=mode,
            count_lost_sends=count_lost,
        )
    _check_report_invariants(report)
    return resolved, report


def _parse_yesno(value) -> bool:
    if isinstance(value, bool):
        return value
    text = str(value).strip().lower()
    if text in ("yes", "true", "1"):
        return True
    if text in ("no", "false", "0"):
        return False
    raise ConfigError(f"expected yes/no, got {value!r}")


class InvariantError(Exception):
    """A completed run violated internal bookkeeping identities."""


def _check_report_invariants(report: ProtocolReport) -> None:
    if report.bit_records:
        recorded = sum(r.sends_used for r in report.bit_records)
        phase2 = report.extra.get("phase2", {}).get("sends_used", 0)
        if recorded + phase2 != report.total_one_way_sends:
            raise InvariantError(
                f"send bookkeeping mismatch: per-bit {recorded} + stage-2 "
                f"{phase2} != total {report.total_one_way_sends}"
            )
    if not 0.0 <= report.estimate_phi <= math.pi + 1e-12:
        raise InvariantError(f"estimate_phi={report.estimate_phi!r} outside [0, pi]")


def _cmd_simulate(args: argparse.Namespace) -> int:
    cfg = _load_config(args, _SIM_KEYS)
    resolved, report = run_single(cfg)
    fp = fingerprint(resolved)
    payload = {"fingerprint": fp, "config": resolved, "report": report.to_dict()}
    lines = [
        f"protocol          : {report.protocol}",
        f"mode              : {report.mode or '-'}",
        f"offset T (truth)  : {resolved['offset']!r}",
        f"estimate T        : {report.estimate_phi / math.pi!r}",
        f"estimate t        : {report.estimate_t_ba!r}",
        f"one-way sends     : {report.total_one_way_sends}",
        f"bounces (done/try): {report.completed_bounces}/{report.attempted_bounces}",
        f"succeeded         : {report.succeeded}",
        f"fingerprint       : {fp}",
    ]
    print("\n".join(lines))
    text = json.dumps(payload, sort_keys=True)
    print(text)
    if cfg.get("out"):
        with open(cfg["out"], "w", encoding="utf-8") as fh:
            fh.write(text + "\n")
    return EXIT_OK


# ---------------------------------------------------------------------------
# sweep
# ---------------------------------------------------------------------------

_SWEEP_KEYS = (
    "protocol",
    "omega",
    "offset",
    "eta",
    "shots",
    "bits",
    "k1",
    "eps",
    "mode",
    "qubits",
    "seed",
    "runs",
    "workers",
    "count_lost_sends",
    "out",
)

SWEEP_COLUMNS = (
    "fingerprint",
    "protocol",
    "mode",
    "eta",
    "bits",
    "eps",
    "shots",
    "offset",
    "runs",
    "mean_estimate_t",
    "rms_error_t",
    "failure_rate",
    "mean_sends",
    "analytic_sends",
    "ratio",
    "status",
)


def _csv_list(value, kind) -> list:
    if value is None:
        return [None]
    if isinstance(value, (list, tuple)):
        return [kind(v) for v in value]
    return [kind(v) for v in str(value).split(",") if v != ""]


def expected_sends(protocol: str, eta: float, *, shots: int = 0, bits: int = 0,
                   eps: float = 0.0, k1: int = 0, mode: str = "two-quadrature",
                   m_qubits: int = 1) -> float:
    """Expected one-way sends under the simulator's counting conventions.

    Unlike the idealized cost model (which books two sends per attempted
    bounce), these expectations track the simulated counters exactly: a lost
    first leg costs one send, so an attempted bounce costs 1 + η sends on
    average, and one-way deliveries cost 1/η each.
    """
    quads = 2 if mode == "two-quadrature" else 1
    if protocol == "one-way":
        return shots / eta
    if protocol == "two-way":
        return shots * (1.0 + eta) * expected_bounces(1, eta)
    if protocol == "improved":
        n = repetitions_per_bit(bits, eps)
        total = sum(expected_bounces(2**j, eta) for j in range(bits))
        return quads * n * (1.0 + eta) * total
    if protocol == "entangled":
        return float(shots * m_qubits)
    if protocol == "entangled-bitwise":
        n = repetitions_per_bit(bits, eps)
        return quads * n * sum(
            2 ** (j + 1) / eta ** (2 ** (j + 1)) for j in range(bits)
        )
    if protocol == "hybrid":
        if k1 == bits:
            return expected_sends(
                "improved", eta, bits=bits, eps=eps, mode=mode
            )
        phase1 = expected_sends("improved", eta, bits=k1, eps=eps / 2.0, mode=mode)
        shots2 = cost_model.hybrid_phase2_shots(k1, bits, eps)
        phase2 = quads * shots2 * (1.0 + eta) * expected_bounces(2**k1, eta)
        return phase1 + phase2
    raise ConfigError(f"unknown protocol {protocol!r}")


def _run_sweep_row(row_cfg: dict) -> list:
    """One grid point: aggregate `runs` independent protocol runs."""
    runs = row_cfg.pop("runs")
    seed = row_cfg["seed"]
    row_index = row_cfg.pop("row_index")
    fp = fingerprint({**row_cfg, "runs": runs})
    base = [
        fp,
        row_cfg["protocol"],
        row_cfg.get("mode") or "two-quadrature",
        row_cfg.get("eta"),
        row_cfg.get("bits"),
        row_cfg.get("eps"),
        row_cfg.get("shots"),
        row_cfg.get("offset"),
        runs,
    ]
    try:
        estimates = []
        errors = []
        fails = 0
        sends = []
        rng = RngStream(seed).child("row", row_index)
        for i in range(runs):
            cfg = dict(row_cfg)
            run_rng = rng.child("run", i)
            protocol = cfg["protocol"]
            m_qubits = int(cfg.get("qubits") or 1)
            t_frac = _parse_offset(
                cfg.get("offset", "random"), run_rng, protocol, m_qubits
            )
            _check_offset(protocol, t_frac, m_qubits)
            single = dict(cfg)
            single["offset"] = t_frac
            single["seed"] = seed
            _, report = _run_row_protocol(single, run_rng.child("draws"))
            truth_t = math.pi * t_frac / float(cfg.get("omega") or 1.0)
            estimates.append(report.estimate_t_ba)
            errors.append(report.estimate_t_ba - truth_t)
            fails += 0 if report.succeeded else 1
            sends.append(report.total_one_way_sends)
        mean_est = sum(estimates) / runs
        rms = math.sqrt(sum(e * e for e in errors) / runs)
        mean_sends = sum(sends) / runs
        eta_val = float(row_cfg.get("eta") or 1.0)
        bits_val = int(row_cfg.get("bits") or 0)
        eps_val = float(row_cfg.get("eps") or 0.0)
        k1_val = row_cfg.get("k1")
        if k1_val is None and row_cfg["protocol"] == "hybrid":
            k1_val = select_k1(eta_val, bits_val, eps_val)
        analytic = expected_sends(
            row_cfg["protocol"],
            eta_val,
            shots=int(row_cfg.get("shots") or 0),
            bits=bits_val,
            eps=eps_val,
            k1=int(k1_val or 0),
            mode=row_cfg.get("mode") or "two-quadrature",
            m_qubits=int(row_cfg.get("qubits") or 1),
        )
        ratio = mean_sends / analytic if analytic else math.inf
        return base + [
            repr(mean_est),
            repr(rms),
            repr(fails / runs),
            repr(mean_sends),
            repr(analytic),
            repr(ratio),
            "ok",
        ]
    except (ConfigError, ValueError) as exc:
        return base + ["", "", "", "", "", "", f"error: {exc}"]
    except (KeyError, TypeError) as exc:
        return base + ["", "", "", "", "", "", f"error: missing parameter {exc}"]


def _run_row_protocol(cfg: dict, rng: RngStream) -> tuple[dict, ProtocolReport]:
    protocol = cfg["protocol"]
    omega = float(cfg.get("omega") or 1.0)
    eta = float(cfg.get("eta") or 1.0)
    truth = TruthModel(omega=omega, t_ba=math.pi * float(cfg["offset"]) / omega)
    ch = LossyChannel(eta)
    mode = _MODES[cfg.get("mode") or "two-quadrature"]
    count_lost = _parse_yesno(cfg.get("count_lost_sends", "yes"))
    if protocol == "one-way":
        return cfg, simple_one_way(truth, int(cfg["shots"]), ch, rng, count_lost)
    if protocol == "two-way":
        return cfg, simple_two_way(truth, int(cfg["shots"]), ch, rng, count_lost)
    if protocol == "improved":
        return cfg, improved_estimate(
            truth, int(cfg["bits"]), float(cfg["eps"]), mode=mode, ch=ch, rng=rng,
            count_lost_sends=count_lost,
        )
    if protocol == "entangled":
        if eta < 1.0:
            raise ConfigError("the entangled one-shot protocol is lossless-only")
        return cfg, entangled_oneshot(truth, int(cfg.get("qubits") or 1),
                                      int(cfg["shots"]), rng)
    if protocol == "entangled-bitwise":
        return cfg, entangled_bitwise(
            truth, int(cfg["bits"]), float(cfg["eps"]), ch=ch, rng=rng, mode=mode,
            count_lost_sends=count_lost,
        )
    if protocol == "hybrid":
        bits = int(cfg["bits"])
        eps = float(cfg["eps"])
        k1 = cfg.get("k1")
        k1 = select_k1(eta, bits, eps) if k1 is None else int(k1)
        return cfg, hybrid_estimate(
            truth, k1, bits, eps, ch=ch, rng=rng, mode=mode,
            count_lost_sends=count_lost,
        )
    raise ConfigError(f"unknown protocol {protocol!r}")


def run_sweep(cfg: dict) -> str:
    """Execute the full grid and return the CSV text (header + one row per
    grid point, RFC-4180 line endings, deterministic order)."""
    protocol = _require(cfg, "protocol", str)
    if protocol not in PROTOCOLS:
        raise ConfigError(f"unknown protocol {protocol!r}; choose from {PROTOCOLS}")
    etas = _csv_list(cfg.get("eta"), float) if cfg.get("eta") is not None else [1.0]
    bits_list = _csv_list(cfg.get("bits"), int)
    eps_list = _csv_list(cfg.get("eps"), float)
    shots_list = _csv_list(cfg.get("shots"), int)
    runs = _require(cfg, "runs", int, default=100)
    if runs < 1:
        raise ConfigError(f"runs must be >= 1, got {runs}")
    seed = _require(cfg, "seed", int, default=0)
    workers = _require(cfg, "workers", int, default=1)
    rows = []
    index = 0
    for eta in etas:
        for bits in bits_list:
            for eps in eps_list:
                for shots in shots_list:
                    row = {
                        "protocol": protocol,
                        "omega": float(cfg.get("omega") or 1.0),
                        "offset": cfg.get("offset", "random"),
                        "eta": eta,
                        "bits": bits,
                        "eps": eps,
                        "shots": shots,
                        "k1": cfg.get("k1"),
                        "qubits": cfg.get("qubits"),
                        "mode": cfg.get("mode") or "two-quadrature",
                        "count_lost_sends": cfg.get("count_lost_sends", "yes"),
                        "seed": seed,
                        "runs": runs,
                        "row_index": index,
                    }
                    rows.append(row)
                    index += 1
    if not rows:
        raise ConfigError("sweep grid is empty")

    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(_run_sweep_row, rows))
    else:
        results = [_run_sweep_row(row) for row in rows]

    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\r\n")
    writer.writerow(SWEEP_COLUMNS)
    writer.writerows(results)
    return buf.getvalue()


def _cmd_sweep(args: argparse.Namespace) -> int:
    cfg = _load_config(args, _SWEEP_KEYS)
    text = run_sweep(cfg)
    if cfg.get("out"):
        with open(cfg["out"], "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    return EXIT_OK


# ---------------------------------------------------------------------------
# costs and fig1
# ---------------------------------------------------------------------------


def _cmd_costs(args: argparse.Namespace) -> int:
    cfg = _load_config(args, ("bits", "eps", "eta", "k1", "out"))
    k = _require(cfg, "bits", int)
    eps = _require(cfg, "eps", float)
    eta = _require(cfg, "eta", float, default=1.0)
    try:
        k1 = int(cfg["k1"]) if cfg.get("k1") is not None else select_k1(eta, k, eps)
        values = [
            ("sql_one_way", cost_model.sql_one_way_cost(k, eps)),
            ("sql_two_way", cost_model.sql_two_way_cost(k, eps)),
            ("improved", cost_model.improved_cost(k, eps)),
            ("lossy_sql", cost_model.lossy_sql_cost(k, eps, eta)),
            ("lossy_improved", cost_model.lossy_improved_cost(k, eps, eta)),
            ("hybrid", cost_model.hybrid_cost(k1, k, eps, eta)),
            ("selected_k1", k1),
            (
                "sql_over_hybrid",
                cost_model.lossy_sql_cost(k, eps, eta)
                / cost_model.hybrid_cost(k1, k, eps, eta),
            ),
        ]
    except ValueError as exc:
        raise ConfigError(str(exc))
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\r\n")
    writer.writerow(("quantity", "value"))
    for name, value in values:
        writer.writerow((name, repr(float(value)) if name != "selected_k1" else value))
    text = buf.getvalue()
    if cfg.get("out"):
        with open(cfg["out"], "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    return EXIT_OK


def emit_fig1_data(etas: list[float], k_max: int) -> str:
    """Cost-ratio CSV at the budget rule ε = 2^{−k}: one row per (η, k)."""
    if not etas:
        raise ConfigError("at least one eta is required")
    for eta in etas:
        if not 0.0 < eta <= 1.0:
            raise ConfigError(f"eta={eta} outside (0, 1]")
    if k_max < 1:
        raise ConfigError(f"k-max must be >= 1, got {k_max}")
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\r\n")
    writer.writerow(("eta", "k", "cost_improved", "cost_sql", "ratio"))
    for eta in etas:
        for k in range(1, k_max + 1):
            eps = 2.0**-k
            improved = cost_model.lossy_improved_cost(k, eps, eta)
            sql = cost_model.lossy_sql_cost(k, eps, eta)
            ratio = improved / sql
            writer.writerow((repr(eta), k, repr(improved), repr(sql), repr(ratio)))
    return buf.getvalue()


def _cmd_fig1(args: argparse.Namespace) -> int:
    cfg = _load_config(args, ("etas", "kmax", "out"))
    etas = _csv_list(cfg.get("etas", "0.9,0.99,0.999"), float)
    k_max = _require(cfg, "kmax", int, default=16)
    text = emit_fig1_data(etas, k_max)
    if cfg.get("out"):
        with open(cfg["out"], "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    return EXIT_OK


def _cmd_selftest(args: argparse.Namespace) -> int:
    results = selfcheck.run_all(verbose=True)
    failed = [name for name, ok, _ in results if not ok]
    if failed:
        print(f"selftest: {len(failed)} of {len(results)} checks failed: "
              + ", ".join(failed))
        return EXIT_INVARIANT
    print(f"selftest: all {len(results)} checks passed")
    return EXIT_OK


# ---------------------------------------------------------------------------
# argument parsing
# ---------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="tickclock",
        description="Clock-offset estimation protocols: simulation and costs.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    sim = sub.add_parser("simulate", help="run one protocol once")
    _add_common(sim)
    sim.add_argument("--shots", type=int, help="shot count for repetition protocols")
    sim.add_argument("--qubits", type=int, help="entangled block size")
    sim.set_defaults(fn=_cmd_simulate)

    swp = sub.add_parser("sweep", help="Monte Carlo grid, CSV output")
    _add_common(swp)
    swp.add_argument("--shots", type=str, help="comma list of shot counts")
    swp.add_argument("--qubits", type=int, help="entangled block size")
    swp.add_argument("--runs", type=int, help="runs per grid point (default 100)")
    swp.add_argument("--workers", type=int, help="parallel workers (default 1)")
    swp.set_defaults(fn=_cmd_sweep)

    costs = sub.add_parser("costs", help="closed-form cost table")
    costs.add_argument("--bits", type=int, help="precision bits k")
    costs.add_argument("--eps", type=float, help="failure budget")
    costs.add_argument("--eta", type=float, help="survival probability")
    costs.add_argument("--k1", type=int, help="hybrid split (default: optimized)")
    costs.add_argument("--config", type=str, help="JSON config file")
    costs.add_argument("--out", type=str, help="output CSV path")
    costs.set_defaults(fn=_cmd_costs)

    fig = sub.add_parser("fig1", help="cost-ratio table vs bits per eta")
    fig.add_argument("--etas", type=str, help="comma list (default 0.9,0.99,0.999)")
    fig.add_argument("--kmax", type=int, help="largest k (default 16)")
    fig.add_argument("--config", type=str, help="JSON config file")
    fig.add_argument("--out", type=str, help="output CSV path")
    fig.set_defaults(fn=_cmd_fig1)

    st = sub.add_parser("selftest", help="run the reduced invariant suite")
    st.set_defaults(fn=_cmd_selftest)
    return parser


def _add_common(p: argparse.ArgumentParser) -> None:
    p.add_argument("--protocol", type=str, choices=PROTOCOLS)
    p.add_argument("--omega", type=float, help="angular frequency (default 1.0)")
    p.add_argument("--offset", type=str,
                   help="true offset in units of pi, or 'random'")
    p.add_argument("--eta", type=str, help="survival probability (sweep: comma list)")
    p.add_argument("--bits", type=str, help="precision bits k (sweep: comma list)")
    p.add_argument("--k1", type=int, help="hybrid coherent-stage bits")
    p.add_argument("--eps", type=str, help="failure budget (sweep: comma list)")
    p.add_argument("--mode", type=str, choices=sorted(_MODES),
                   help="bit-decision mode (default two-quadrature)")
    p.add_argument("--seed", type=int, help="master seed (default 0)")
    p.add_argument("--count-lost-sends", dest="count_lost_sends",
                   type=str, choices=("yes", "no"),
                   help="count transmissions that were lost (default yes)")
    p.add_argument("--config", type=str, help="JSON config file")
    p.add_argument("--out", type=str, help="output path")


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.fn(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except InvariantError as exc:
        print(f"invariant failure: {exc}", file=sys.stderr)
        return EXIT_INVARIANT
    except ValueError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
