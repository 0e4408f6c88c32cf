"""Command-line scenario runner.

    ainf run CONFIG.json [--seed S] [--caps k=v,...] [--out REPORT.json] [--jobs J]
    ainf list-checks
    ainf explain CHECK

Exit codes: 0 when every check passed (or was uncertified), 1 when some
check failed or raised, 2 for configuration errors.
"""
from __future__ import annotations

import argparse
import json
import sys
from concurrent.futures import ProcessPoolExecutor
from datetime import datetime, timezone

import numpy as np

from . import __version__, cech, lens
from .checks import CATALOG, list_checks, resolve_params, run_check
from .errors import ConfigInvalid

TOP_KEYS = {"seed", "prime", "budget", "caps", "checks", "description"}
BUDGET_KEYS = {"n", "D", "N", "DT"}
SAMPLE_PARAMS = ("samples", "triples", "pairs", "bruteforce_samples", "cross_samples")
CAP_KEYS = {"samples", "max_dim", "enumeration"}


def parse_caps(text):
    """``"samples=20,max_dim=800"`` -> dict of ints."""
    out = {}
    if not text:
        return out
    for part in text.split(","):
        key, sep, val = part.partition("=")
        key = key.strip()
        if not sep or key not in CAP_KEYS:
            raise ConfigInvalid(f"bad cap {part!r}; known caps: {', '.join(sorted(CAP_KEYS))}")
        try:
            out[key] = int(val)
        except ValueError:
            raise ConfigInvalid(f"cap {key} needs an integer, got {val!r}") from None
        if out[key] <= 0:
            raise ConfigInvalid(f"cap {key} must be positive")
    return out


def load_config(path):
    try:
        with open(path) as fh:
            cfg = json.load(fh)
    except OSError as exc:
        raise ConfigInvalid(f"cannot read {path}: {exc}") from None
    except json.JSONDecodeError as exc:
        raise ConfigInvalid(f"{path} is not valid JSON: {exc}") from None
    return validate_config(cfg)


def validate_config(cfg):
    if not isinstance(cfg, dict):
        raise ConfigInvalid("config must be a JSON object")
    unknown = set(cfg) - TOP_KEYS
    if unknown:
        raise ConfigInvalid(f"unknown config keys: {sorted(unknown)}")
    seed = cfg.get("seed", 0)
    if isinstance(seed, bool) or not isinstance(seed, int) or seed < 0:
        raise ConfigInvalid("seed must be a nonnegative integer")
    prime = cfg.get("prime")
    if prime is not None and (not isinstance(prime, int) or prime < 2):
        raise ConfigInvalid("prime must be an integer >= 2")
    budget = cfg.get("budget", {})
    if not isinstance(budget, dict) or set(budget) - BUDGET_KEYS:
        raise ConfigInvalid(f"budget must be an object with keys among {sorted(BUDGET_KEYS)}")
    caps = cfg.get("caps", {})
    if not isinstance(caps, dict) or set(caps) - CAP_KEYS:
        raise ConfigInvalid(f"caps must be an object with keys among {sorted(CAP_KEYS)}")
    checks = cfg.get("checks", [])
    if not isinstance(checks, list):
        raise ConfigInvalid("checks must be a list")
    resolved = []
    for i, item in enumerate(checks):
        if not isinstance(item, dict) or not isinstance(item.get("name"), str):
            raise ConfigInvalid(f"checks[{i}] needs a string 'name'")
        if set(item) - {"name", "params"}:
            raise ConfigInvalid(f"checks[{i}] has unknown keys {sorted(set(item) - {'name', 'params'})}")
        params = item.get("params", {})
        if not isinstance(params, dict):
            raise ConfigInvalid(f"checks[{i}].params must be an object")
        # config-wide defaults apply only where the check takes that parameter
        spec = CATALOG[item["name"]].params if item["name"] in CATALOG else {}
        merged = {}
        if prime is not None and "p" in spec:
            merged["p"] = prime
        merged.update({k: v for k, v in budget.items() if k in spec})
        merged.update(params)
        resolve_params(item["name"], merged)
        resolved.append({"name": item["name"], "params": merged})
    return {"seed": seed, "caps": dict(caps), "checks": resolved,
            "description": cfg.get("description", "")}


def _set_resource_caps(caps):
    if "max_dim" in caps:
        cech.MAX_DIM = caps["max_dim"]
    if "enumeration" in caps:
        lens.ENUMERATION_CAP = caps["enumeration"]


def _run_one(args):
    name, params, seed, index, caps = args
    saved = (cech.MAX_DIM, lens.ENUMERATION_CAP)
    _set_resource_caps(caps)
    try:
        rng = np.random.default_rng([seed, index])
        return run_check(name, params, rng)
    finally:
        cech.MAX_DIM, lens.ENUMERATION_CAP = saved


def _with_sample_caps(name, params, caps):
    if "samples" not in caps:
        return params
    full = resolve_params(name, params)
    out = dict(params)
    for key in SAMPLE_PARAMS:
        if key in full:
            out[key] = min(int(full[key]), caps["samples"])
    return out


def run(config, seed=None, caps=None, jobs=1):
    """Execute a validated config; returns the report dict."""
    seed = config["seed"] if seed is None else seed
    caps = {**config.get("caps", {}), **(caps or {})}
    started = datetime.now(timezone.utc).isoformat(timespec="seconds")
    tasks = [(c["name"], _with_sample_caps(c["name"], c["params"], caps), seed, i, caps)
             for i, c in enumerate(config["checks"])]
    if jobs > 1 and len(tasks) > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            entries = list(pool.map(_run_one, tasks))
    else:
        entries = [_run_one(t) for t in tasks]
    counts = {s: 0 for s in ("pass", "fail", "uncertified", "error")}
    for e in entries:
        counts[e["status"]] += 1
    overall = "fail" if counts["fail"] or counts["error"] else "pass"
    return {
        "tool": "ainf",
        "version": __version__,
        "seed": seed,
        "caps": caps,
        "config": {"description": config.get("description", ""), "checks": config["checks"]},
        "checks": entries,
        "summary": {"total": len(entries), **counts, "status": overall},
        "timestamps": {"started": started,
                       "finished": datetime.now(timezone.utc).isoformat(timespec="seconds")},
    }


def dumps(report):
    return json.dumps(report, indent=2, ensure_ascii=False) + "\n"


def strip_timing(report):
    """Copy of a report without timestamps and wall times (the nondeterministic parts)."""
    out = {k: v for k, v in report.items() if k != "timestamps"}
    out["checks"] = [{k: v for k, v in e.items() if k != "wall_time"} for e in report["checks"]]
    return out


def _build_parser():
    ap = argparse.ArgumentParser(prog="ainf", description="Exact finite-stage checks for Witt vector geometry.")
    sub = ap.add_subparsers(dest="command", required=True)
    r = sub.add_parser("run", help="run a scenario config")
    r.add_argument("config")
    r.add_argument("--seed", type=int, default=None)
    r.add_argument("--caps", default=None, help="comma list of k=v among samples, max_dim, enumeration")
    r.add_argument("--out", default=None, help="write the report here instead of stdout")
    r.add_argument("--jobs", type=int, default=1)
    sub.add_parser("list-checks", help="print the check catalog")
    e = sub.add_parser("explain", help="describe one check")
    e.add_argument("check")
    return ap


def main(argv=None):
    ap = _build_parser()
    try:
        args = ap.parse_args(argv)
    except SystemExit as exc:
        return 2 if exc.code else 0
    if args.command == "list-checks":
        for c in list_checks():
            params = ", ".join(f"{k}={v}" for k, v in c["params"].items())
            print(f"{c['name']}\t\"{c['anchor']}\"\t{params}")
        return 0
    if args.command == "explain":
        if args.check not in CATALOG:
            print(f"unknown check {args.check!r}", file=sys.stderr)
            return 2
        print(json.dumps(CATALOG[args.check].describe(), indent=2, ensure_ascii=False))
        return 0
    try:
        config = load_config(args.config)
        caps = parse_caps(args.caps)
        if args.seed is not None and args.seed < 0:
            raise ConfigInvalid("seed must be nonnegative")
        if args.jobs < 1:
            raise ConfigInvalid("--jobs must be >= 1")
    except ConfigInvalid as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    report = run(config, seed=args.seed, caps=caps, jobs=args.jobs)
    text = dumps(report)
    if args.out:
        with open(args.out, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    s = report["summary"]
    print(f"{s['total']} checks: {s['pass']} pass, {s['fail']} fail, "
          f"{s['uncertified']} uncertified, {s['error']} error", file=sys.stderr)
    return 0 if s["status"] == "pass" else 1


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
