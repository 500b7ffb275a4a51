"""Experiment runner: configuration, execution, persistence, tables.

Configs are JSON documents with floating-point parameters written as
decimal strings (parse-drift safe); every run appends one checksummed
record to a JSON Lines results file and renders a table to stdout.
Identical config + seed reproduces a byte-identical payload for any
worker count.

Exit codes: 0 success, 1 hypothesis failure in ct-report, 2 invalid
configuration.
"""
from __future__ import annotations

import argparse
import datetime
import hashlib
import json
import sys
from dataclasses import dataclass, field

import numpy as np

from . import __version__
from .criterion import (
    BowenPropertyConfig,
    bowen_property_check,
    ct_report,
    expansivity_profile,
    random_core_segments,
    specification_search,
)
from .decomposition import classify, decompose
from .errors import ErgolabError
from .foliation import eps_minimality_check, minimal_radius_search
from .grids import GridSpec
from .hyperbolicity import default_observables, entropy_gap_report
from .potentials import potential_from_spec
from .pressure import pressure_at_scale
from .systems import (
    CocycleToy,
    FullShift,
    ToralAuto,
    builtin_system,
    builtin_system_names,
    load_system,
    system_from_spec,
)

SUBCOMMANDS = ("pressure", "entropy-gap", "decompose", "bowen-check",
               "spec-check", "expansivity", "minimality", "ct-report")


class ConfigError(ValueError):
    pass


def _num(value, name):
    """Decimal-string (or numeric) scalar from the config."""
    if isinstance(value, str):
        try:
            return float(value)
        except ValueError as exc:
            raise ConfigError(f"{name}: bad decimal string {value!r}") from exc
    if isinstance(value, (int, float)):
        return float(value)
    raise ConfigError(f"{name}: expected number, got {type(value).__name__}")


@dataclass
class ExperimentConfig:
    raw: dict
    system: object
    potential: object
    scales: dict
    n_range: range
    grid: GridSpec
    seed: int
    workers: int
    out: str
    extra: dict = field(default_factory=dict)

    def config_hash(self):
        blob = json.dumps(self.raw, sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(blob.encode()).hexdigest()


def parse_config(doc, overrides=None):
    overrides = overrides or {}
    raw = dict(doc)
    sys_spec = raw.get("system")
    if sys_spec is None:
        raise ConfigError("config needs a 'system'")
    if isinstance(sys_spec, str):
        if sys_spec in builtin_system_names():
            system = builtin_system(sys_spec)
        else:
            system = load_system(sys_spec)
    elif isinstance(sys_spec, dict) and "path" in sys_spec:
        system = load_system(sys_spec["path"])
    elif isinstance(sys_spec, dict):
        system = system_from_spec(sys_spec)
    else:
        raise ConfigError("bad 'system' entry")

    potential = potential_from_spec(raw.get("potential", {"kind": "zero"}))

    scales = {}
    for key, val in raw.get("scales", {}).items():
        scales[key] = _num(val, f"scales.{key}")
    for key in ("delta", "eps", "r"):
        if key in scales and scales[key] < 0:
            raise ConfigError(f"scales.{key} must be >= 0")
        if key in scales and key != "eps" and scales[key] == 0:
            raise ConfigError(f"scales.{key} must be positive")

    nr = raw.get("n_range", [1, 10])
    if (not isinstance(nr, (list, tuple)) or len(nr) != 2
            or int(nr[0]) > int(nr[1])):
        raise ConfigError("n_range must be [lo, hi] with lo <= hi")
    n_range = range(int(nr[0]), int(nr[1]) + 1)

    gspec = raw.get("grid", {"kind": "eigen_box"})

    def _coerce_grid(k, v):
        if k == "kind" or not isinstance(v, str):
            return v
        try:
            return float(v)
        except ValueError:
            return v

    grid = GridSpec.from_spec({k: _coerce_grid(k, v)
                               for k, v in gspec.items()})
    seed = int(overrides.get("seed", raw.get("seed", 0)))
    workers = int(overrides.get("workers", raw.get("workers", 1)))
    out = overrides.get("out", raw.get("out", "ergolab_results.jsonl"))
    known = {"system", "potential", "scales", "n_range", "grid", "seed",
             "workers", "out"}
    extra = {k: v for k, v in raw.items() if k not in known}
    return ExperimentConfig(raw=raw, system=system, potential=potential,
                            scales=scales, n_range=n_range, grid=grid,
                            seed=seed, workers=workers, out=out, extra=extra)


@dataclass
class ResultRecord:
    experiment_id: str
    timestamp: str
    config_hash: str
    subcommand: str
    payload: dict
    tool_version: str = __version__

    def to_dict(self):
        return {"experiment_id": self.experiment_id,
                "timestamp": self.timestamp,
                "config_hash": self.config_hash,
                "subcommand": self.subcommand,
                "payload": self.payload,
                "tool_version": self.tool_version}


def canonical_payload(payload):
    return json.dumps(payload, sort_keys=True, separators=(",", ":"))


def _segments_from_config(cfg, r):
    spec = cfg.extra.get("segments", {"count": 10, "n": 16})
    if isinstance(spec, list):
        segs = []
        for item in spec:
            x = _point_from_json(cfg.system, item["x"])
            segs.append((x, int(item["n"])))
        return segs
    observables = default_observables(cfg.system)
    if isinstance(cfg.system, CocycleToy):
        lo = min(p.lo for p in cfg.system.forward.values())
        n = int(spec.get("n", 16))
        return [(float(lo), n)] * int(spec.get("count", 1))
    return random_core_segments(cfg.system, observables,
                                int(spec.get("count", 10)),
                                int(spec.get("n", 16)), r, seed=cfg.seed)


def _point_from_json(system, obj):
    if isinstance(system, FullShift):
        return system.point(obj["symbols"], int(obj.get("offset", 0)))
    if isinstance(system, ToralAuto):
        return system.point(obj)
    return float(obj)


# ---------------------------------------------------------------------------
# Subcommand pipelines
# ---------------------------------------------------------------------------

def _run_pressure(cfg):
    est = pressure_at_scale(cfg.system, cfg.potential, None,
                            cfg.scales["delta"], cfg.scales.get("eps", 0.0),
                            cfg.n_range, cfg.grid, workers=cfg.workers)
    return est.to_dict()


def _run_entropy_gap(cfg):
    ex = cfg.extra
    deltas = [_num(v, "delta_list") for v in
              ex.get("delta_list", [cfg.scales["delta"]])]
    u_nr = ex.get("u_n_range", [3, 10])
    rep = entropy_gap_report(
        cfg.system, cfg.potential, deltas, cfg.n_range, cfg.grid,
        u_sep=_num(ex.get("u_sep", "0.05"), "u_sep"),
        u_radius=_num(ex.get("u_radius", "0.5"), "u_radius"),
        u_n_range=range(int(u_nr[0]), int(u_nr[1]) + 1),
        seeds=[None] * int(ex.get("seeds", 2)),
        osc_grid=GridSpec.uniform(int(ex.get("osc_resolution", 12))),
        workers=cfg.workers)
    return rep.to_dict()


def _run_decompose(cfg):
    r = cfg.scales["r"]
    observables = default_observables(cfg.system)
    segments = _segments_from_config(cfg, r)
    records = []
    for x, n in segments:
        triple = decompose(cfg.system, observables, x, n, r)
        flags = classify(cfg.system, observables, x, n, r)
        records.append({"x": _point_to_json(cfg.system, x), "n": n, "r": r,
                        "p": triple.p, "g": triple.g, "s": triple.s,
                        "flags": {"in_P": flags.in_P, "in_G": flags.in_G,
                                  "in_S": flags.in_S}})
    return {"records": records}


def _point_to_json(system, x):
    if isinstance(system, FullShift):
        return {"symbols": list(x.symbols), "offset": x.offset}
    if isinstance(system, ToralAuto):
        return [float(c) for c in np.asarray(x)]
    return float(x)


def _run_bowen_check(cfg):
    r = cfg.scales["r"]
    eps = cfg.scales["eps"]
    segments = _segments_from_config(cfg, r)
    if isinstance(cfg.system, ToralAuto):
        bc = BowenPropertyConfig.for_linear_model(cfg.system, cfg.potential, r)
    else:
        bc = BowenPropertyConfig(C=1.0,
                                 delta0=cfg.system.ambient_diameter / 2.0,
                                 r=r, Q=max(cfg.potential.holder_Q, 1e-12),
                                 alpha=cfg.potential.holder_alpha)
    rep = bowen_property_check(cfg.system, cfg.potential, segments, eps, bc,
                               seed=cfg.seed)
    return rep.to_dict()


def _run_spec_check(cfg):
    r = cfg.scales.get("r", 0.25)
    delta = cfg.scales["delta"]
    pairs = int(cfg.extra.get("pairs", 100))
    seg_len = int(cfg.extra.get("segment_len", 8))
    observables = default_observables(cfg.system)
    pool = random_core_segments(cfg.system, observables, 2 * pairs, seg_len,
                                r, seed=cfg.seed)
    successes = 0
    max_gap = 0
    worst = 0.0
    for i in range(pairs):
        res = specification_search(cfg.system,
                                   [pool[2 * i], pool[2 * i + 1]], delta)
        successes += int(res.success)
        max_gap = max(max_gap, res.max_gap())
        worst = max(worst, max(res.distances))
    return {"pairs": pairs, "successes": successes,
            "success_rate": successes / pairs, "max_gap": max_gap,
            "worst_distance": worst, "delta": delta}


def _run_expansivity(cfg):
    eps = cfg.scales["eps"]
    nl = cfg.extra.get("N_list", [2, 4, 6, 8])
    seeds = int(cfg.extra.get("seeds", 3))
    rng = np.random.default_rng(cfg.seed)
    profiles = []
    for i in range(seeds):
        if isinstance(cfg.system, ToralAuto):
            x = rng.random(cfg.system.dim)
        else:
            reach = max(nl) + 16
            x = cfg.system.random_point(rng, -reach, reach)
        prof = expansivity_profile(cfg.system, x, eps,
                                   [int(n) for n in nl], seed=cfg.seed + i)
        profiles.append({str(k): v for k, v in prof.items()})
    return {"eps": eps, "N_list": [int(n) for n in nl], "profiles": profiles}


def _run_minimality(cfg):
    ex = cfg.extra
    eps = cfg.scales["eps"]
    seeds_n = int(ex.get("seeds", 2))
    rng = np.random.default_rng(cfg.seed)
    seed_points = [rng.random(cfg.system.dim) for _ in range(seeds_n)]
    direction = ex.get("direction")
    if direction is not None:
        direction = [_num(v, "direction") if isinstance(v, str) else float(v)
                     for v in direction]
    res_cfg = int(ex.get("target_resolution", 32))
    if ex.get("search_radius", True):
        R0, rep = minimal_radius_search(cfg.system, eps, res_cfg, seed_points,
                                        R_cap=_num(ex.get("R_cap", "1024"),
                                                   "R_cap"),
                                        direction=direction)
        return {"R0": R0, "report": rep.to_dict()}
    rep = eps_minimality_check(cfg.system, _num(ex["R"], "R"), eps, res_cfg,
                               seed_points, direction=direction)
    return {"R0": None, "report": rep.to_dict()}


def _run_ct_report(cfg):
    rep = ct_report(cfg.system, cfg.potential, cfg.scales["delta"],
                    cfg.scales["eps"], cfg.scales["r"],
                    cfg.scales.get("a", 0.5), cfg.n_range, cfg.grid,
                    seed=cfg.seed, workers=cfg.workers,
                    spec_pairs=int(cfg.extra.get("spec_pairs", 100)),
                    spec_segment_len=int(cfg.extra.get("spec_segment_len", 8)),
                    bowen_segments=int(cfg.extra.get("bowen_segments", 10)),
                    bowen_len=int(cfg.extra.get("bowen_len", 40)))
    return rep.to_dict()


_PIPELINES = {
    "pressure": _run_pressure,
    "entropy-gap": _run_entropy_gap,
    "decompose": _run_decompose,
    "bowen-check": _run_bowen_check,
    "spec-check": _run_spec_check,
    "expansivity": _run_expansivity,
    "minimality": _run_minimality,
    "ct-report": _run_ct_report,
}


def run(subcommand, cfg):
    """Execute one pipeline; returns (record, exit_code)."""
    if subcommand not in _PIPELINES:
        raise ConfigError(f"unknown subcommand {subcommand!r}")
    payload = _PIPELINES[subcommand](cfg)
    record = ResultRecord(
        experiment_id=cfg.config_hash()[:12],
        timestamp=datetime.datetime.now(datetime.timezone.utc).isoformat(),
        config_hash=cfg.config_hash(),
        subcommand=subcommand,
        payload=payload)
    code = 0
    if subcommand == "ct-report" and payload.get("overall") != "pass":
        code = 1
    return record, code


def append_record(path, record):
    body = record.to_dict()
    line_core = json.dumps(body, sort_keys=True, separators=(",", ":"))
    checksum = hashlib.sha256(line_core.encode()).hexdigest()[:16]
    body["checksum"] = checksum
    with open(path, "a") as fh:
        fh.write(json.dumps(body, sort_keys=True, separators=(",", ":"))
                 + "\n")


def verify_records(path):
    """Checksum scan of a results file; returns (valid, corrupt) counts."""
    valid = corrupt = 0
    with open(path) as fh:
        for line in fh:
            line = line.strip()
            if not line:
                continue
            try:
                body = json.loads(line)
                ck = body.pop("checksum", None)
                core = json.dumps(body, sort_keys=True, separators=(",", ":"))
                if hashlib.sha256(core.encode()).hexdigest()[:16] == ck:
                    valid += 1
                else:
                    corrupt += 1
            except json.JSONDecodeError:
                corrupt += 1
    return valid, corrupt


def _render_table(payload, indent=0, key=""):
    pad = "  " * indent
    lines = []
    if isinstance(payload, dict):
        for k, v in payload.items():
            if isinstance(v, (dict, list)) and not _is_short(v):
                lines.append(f"{pad}{k}:")
                lines.extend(_render_table(v, indent + 1, k))
            else:
                lines.append(f"{pad}{k}: {_fmt(v)}")
    elif isinstance(payload, list):
        if len(payload) > 12:
            lines.append(f"{pad}[{len(payload)} entries]")
        else:
            for v in payload:
                lines.append(f"{pad}- {_fmt(v)}")
    else:
        lines.append(f"{pad}{_fmt(payload)}")
    return lines


def _is_short(v):
    return isinstance(v, list) and len(v) <= 8 and all(
        not isinstance(x, (dict, list)) for x in v)


def _fmt(v):
    if isinstance(v, float):
        return f"{v:.6g}"
    if isinstance(v, list):
        return "[" + ", ".join(_fmt(x) for x in v) + "]"
    return str(v)


def main(argv=None):
    parser = argparse.ArgumentParser(
        prog="ergolab",
        description="numerical thermodynamic-formalism laboratory")
    sub = parser.add_subparsers(dest="subcommand", required=True)
    for name in SUBCOMMANDS:
        p = sub.add_parser(name)
        p.add_argument("--config", required=True)
        p.add_argument("--out", default=None)
        p.add_argument("--workers", type=int, default=None)
        p.add_argument("--seed", type=int, default=None)
        p.add_argument("--csv", default=None,
                       help="write sample tables as CSV for external plotters")
    args = parser.parse_args(argv)
    overrides = {}
    for key in ("out", "workers", "seed"):
        val = getattr(args, key)
        if val is not None:
            overrides[key] = val
    try:
        with open(args.config) as fh:
            doc = json.load(fh)
        cfg = parse_config(doc, overrides)
    except (OSError, json.JSONDecodeError, ConfigError, ErgolabError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    try:
        record, code = run(args.subcommand, cfg)
    except (ConfigError, ErgolabError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    append_record(cfg.out, record)
    print(f"ergolab {args.subcommand}  [{record.experiment_id}]")
    for line in _render_table(record.payload):
        print(line)
    if args.csv:
        rows = _csv_rows(record.payload)
        if rows:
            with open(args.csv, "w") as fh:
                fh.write("\n".join(",".join(str(v) for v in row)
                                    for row in rows) + "\n")
            print(f"sample table written to {args.csv}")
    print(f"result appended to {cfg.out}")
    return code


def _csv_rows(payload):
    """Sample tables from slope-type payloads: (n, log lower, log upper)."""
    if "samples" in payload:
        return [("n", "log_lambda_lower", "log_lambda_upper")] + [
            tuple(s) for s in payload["samples"]]
    if "detail" in payload and "h_top_samples" in payload.get("detail", {}):
        return [("n", "log_lambda_lower", "log_lambda_upper")] + [
            tuple(s) for s in payload["detail"]["h_top_samples"]]
    return []


if __name__ == "__main__":
    sys.exit(main())
