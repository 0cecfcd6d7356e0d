"""Command-line front end: verification campaigns, top evolution, RS bridge checks, BD census.

Exit codes: 0 all expectations met, 1 verification failure, 2 usage or config
error, 3 unexpected error inside a check, 4 invalid parameters (poles,
coincident positions, unsupported models).
"""

from __future__ import annotations

import argparse
import csv
import json
import sys
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path

import numpy as np

from . import __version__
from .bd import ENUMERATION_BOUND, BDError, enumerate_bd, worked_example
from .rmatrix import PoleError, RMatrixSpec, SpecError, UnsupportedFamily
from .serialize import dumps

EXIT_OK, EXIT_FAIL, EXIT_CONFIG, EXIT_INTERNAL, EXIT_PARAM = 0, 1, 2, 3, 4
SCHEMA_VERSION = 1

DEFAULT_VERIFY = {
    "version": SCHEMA_VERSION,
    "seed": 7,
    "samples": 100,
    "n_list": [2, 3, 4, 5],
    "families": [{"family": "NonStandard", "lambda": [0.0, 0.0]}],
    "identities": ["aybe", "ybe", "skew", "unitarity", "fourier"],
    "tolerances": {},
}

IDENTITIES = ("aybe", "ybe", "skew", "unitarity", "fourier", "degenerate-aybe", "xxz-defect", "xxz-defect-constancy")


class ConfigError(ValueError):
    pass


def _load_config(path: str | None, default: dict) -> dict:
    cfg = json.loads(json.dumps(default))
    if path is None:
        return cfg
    try:
        with open(path) as fh:
            user = json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    if not isinstance(user, dict):
        raise ConfigError("config must be a JSON object")
    if user.get("version", SCHEMA_VERSION) != SCHEMA_VERSION:
        raise ConfigError(f"unsupported config version {user.get('version')}")
    cfg.update(user)
    return cfg


def _write(text: str, out: str | None) -> None:
    if out is None:
        sys.stdout.write(text)
    else:
        Path(out).write_text(text)


# --------------------------------------------------------------------------
# verify


def _spec_for(entry: dict, n: int) -> RMatrixSpec:
    data = {k: v for k, v in entry.items() if k not in ("expect", "n")}
    data["n"] = n
    if data.get("bd") == "worked_example":
        data["bd"] = worked_example(n).to_json()
    return RMatrixSpec.from_json(data)


def _verify_tasks(cfg: dict) -> list[tuple]:
    samples = cfg["samples"]
    if not isinstance(samples, int) or samples < 1:
        raise ConfigError("samples must be a positive integer")
    n_list = cfg["n_list"]
    if not n_list or any(not isinstance(n, int) or n < 2 for n in n_list):
        raise ConfigError("n_list must hold integers >= 2")
    tols = cfg.get("tolerances", {})
    if any(not isinstance(v, (int, float)) or v <= 0 for v in tols.values()):
        raise ConfigError("tolerances must be positive")
    idents = cfg["identities"]
    unknown = set(idents) - set(IDENTITIES)
    if unknown:
        raise ConfigError(f"unknown identities {sorted(unknown)}")
    tasks = []
    for entry in cfg["families"]:
        if not isinstance(entry, dict) or "family" not in entry:
            raise ConfigError("each family entry needs a 'family' key")
        expect = entry.get("expect", {})
        for n in entry.get("n", n_list):
            try:
                spec = _spec_for(entry, n)
            except (SpecError, BDError, KeyError, TypeError, ValueError) as exc:
                raise ConfigError(f"bad family entry {entry}: {exc}") from exc
            for ident in idents:
                tasks.append((ident, spec.to_json(), samples, int(cfg["seed"]), tols.get(ident), expect.get(ident)))
    return tasks


def _run_verify_task(task) -> list[dict]:
    from . import verify as V

    ident, spec_json, samples, seed, tol, expect = task
    spec = RMatrixSpec.from_json(spec_json)
    exp = expect or V.default_expectation(ident, spec)
    if ident == "aybe":
        reps = [V.check_aybe(spec, samples, seed, tol or V.DEFAULT_TOL, exp)]
    elif ident == "ybe":
        reps = [V.check_ybe(spec, samples, seed, tol or V.DEFAULT_TOL, exp)]
    elif ident in ("skew", "unitarity", "fourier"):
        reps = [r for r in V.check_skew_unitarity_fourier(spec, samples, seed, tol or V.DEFAULT_TOL)
                if r.identity == ident]
        if expect:
            reps = [V.CheckReport(**{**r.__dict__, "expect": expect}) for r in reps]
    elif ident == "degenerate-aybe":
        reps = V.check_degenerate_aybe(spec, min(samples, 20), seed, tol or V.DEGENERATE_TOL)
    elif ident == "xxz-defect":
        reps = [V.check_xxz_defect(spec.n, samples, seed, tol)]
    else:
        reps = [V.check_xxz_constancy(spec.n, samples, seed, tol or V.XXZ_CONSTANCY_TOL)]
    return [r.to_json() for r in reps]


def _map(fn, tasks, jobs: int):
    if jobs <= 1 or len(tasks) <= 1:
        return [fn(t) for t in tasks]
    with ProcessPoolExecutor(max_workers=jobs) as pool:
        return list(pool.map(fn, tasks))


def _report_exit(reports: list[dict]) -> int:
    from .verify import CheckReport

    ok = all(CheckReport.from_json(r).ok for r in reports)
    return EXIT_OK if ok else EXIT_FAIL


def _sorted_reports(reports: list[dict]) -> list[dict]:
    return sorted(reports, key=lambda r: (r["identity"], json.dumps(r["spec"], sort_keys=True), r["spec"]["n"]))


def cmd_verify(args) -> int:
    cfg = _load_config(args.config, DEFAULT_VERIFY)
    if args.seed is not None:
        cfg["seed"] = args.seed
    tasks = _verify_tasks(cfg)
    reports = [r for chunk in _map(_run_verify_task, tasks, args.jobs) for r in chunk]
    reports = _sorted_reports(reports)
    code = _report_exit(reports)
    doc = {"version": __version__, "seed": cfg["seed"], "reports": reports,
           "summary": {"checks": len(reports), "ok": code == EXIT_OK}}
    _write(dumps(doc), args.out or cfg.get("output_path"))
    _summarize(reports)
    return code


def _summarize(reports: list[dict]) -> None:
    from .verify import CheckReport

    for r in reports:
        rep = CheckReport.from_json(r)
        mark = "ok  " if rep.ok else "FAIL"
        print(f"{mark} {rep.identity:<26} {rep.spec.label():<48} residual={rep.max_residual:.3e} "
              f"expect={rep.expect}", file=sys.stderr)


# --------------------------------------------------------------------------
# evolve

DEFAULT_EVOLVE = {
    "version": SCHEMA_VERSION,
    "seed": 7,
    "model": {"spec": {"family": "NonStandard", "n": 2, "lambda": [0.0, 0.0]}, "kind": "relativistic",
              "eta": [0.5, 0.1], "c": [1.0, 0.0]},
    "state": None,
    "t_final": 1.0,
    "dt": 1e-3,
    "monitor_z": [[0.4, 0.3], [0.9, -0.2], [-0.6, 0.5]],
    "drift_tolerance": 1e-6,
}


def _cx(v) -> complex:
    if isinstance(v, (list, tuple)):
        return complex(v[0], v[1])
    return complex(v)


def _build_model(cfg: dict):
    from .tops import TopModel

    m = cfg["model"]
    spec = RMatrixSpec.from_json(m["spec"])
    eta = _cx(m["eta"]) if m.get("eta") is not None else None
    return TopModel(spec, m.get("kind", "relativistic"), eta=eta, c=_cx(m.get("c", 1.0)))


def _initial_state(cfg: dict, n: int) -> np.ndarray:
    st = cfg.get("state")
    if st is None:
        rng = np.random.default_rng(int(cfg["seed"]))
        return (rng.normal(size=(n, n)) + 1j * rng.normal(size=(n, n))) * 0.3
    arr = np.array([[_cx(v) for v in row] for row in st], dtype=complex)
    if arr.shape != (n, n):
        raise ConfigError(f"state must be {n}x{n}")
    return arr


def cmd_evolve(args) -> int:
    from .tops import ModelError, SpinState, StepOverflow, evolve, spectral_invariants

    cfg = _load_config(args.config, DEFAULT_EVOLVE)
    if args.seed is not None:
        cfg["seed"] = args.seed
    dt, t_final = float(cfg["dt"]), float(cfg["t_final"])
    if dt <= 0 or t_final < 0:
        raise ConfigError("need dt > 0 and t_final >= 0")
    try:
        model = _build_model(cfg)
        s0 = _initial_state(cfg, model.n)
        zs = [_cx(z) for z in cfg["monitor_z"]]
        times, traj = evolve(model, SpinState(s0), t_final, dt)
        inv0 = [spectral_invariants(model, traj[0], z) for z in zs]
    except (PoleError, UnsupportedFamily, ModelError, StepOverflow) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_PARAM
    except (SpecError, KeyError, TypeError, ValueError) as exc:
        raise ConfigError(str(exc)) from exc
    n = model.n
    header = ["t"]
    for i in range(1, n + 1):
        for j in range(1, n + 1):
            header += [f"re_S{i}{j}", f"im_S{i}{j}"]
    for a in range(len(zs)):
        header += [f"drift_z{a}_k{k}" for k in range(1, n + 1)]
    rows = []
    max_drift = 0.0
    for t, st in zip(times, traj):
        row = [f"{t:.17g}"]
        for v in st.s.ravel():
            row += [f"{v.real:.17g}", f"{v.imag:.17g}"]
        for a, z in enumerate(zs):
            inv = spectral_invariants(model, st, z)
            drift = np.abs(inv - inv0[a]) / (1 + np.abs(inv0[a]))
            max_drift = max(max_drift, float(np.max(drift)))
            row += [f"{d:.17g}" for d in drift]
        rows.append(row)
    out = args.out
    if out is None:
        w = csv.writer(sys.stdout, lineterminator="\n")
        w.writerow(header)
        w.writerows(rows)
    else:
        with open(out, "w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(header)
            w.writerows(rows)
    tol = float(cfg["drift_tolerance"])
    summary = {"version": __version__, "seed": cfg["seed"], "steps": len(times) - 1, "dt": dt, "t_final": t_final,
               "max_invariant_drift": max_drift, "drift_tolerance": tol, "ok": max_drift <= tol}
    text = dumps(summary)
    if out is not None:
        Path(out).with_suffix(".summary.json").write_text(text)
    sys.stderr.write(text)
    return EXIT_OK if max_drift <= tol else EXIT_FAIL


# --------------------------------------------------------------------------
# bridge

DEFAULT_BRIDGE = {"version": SCHEMA_VERSION, "seed": 7, "n": 3, "point": None, "samples": 5, "eta": 0.3, "nu": 0.5,
                  "c": 1.0, "pushforward": True}


def cmd_bridge(args) -> int:
    from .rs import BridgeError, PhasePoint, bridge_checks, random_point

    cfg = _load_config(args.config, DEFAULT_BRIDGE)
    if args.seed is not None:
        cfg["seed"] = args.seed
    try:
        if cfg.get("point") is not None:
            point = PhasePoint.from_json(cfg["point"])
        else:
            n = int(cfg["n"])
            if n < 2:
                raise ConfigError("n must be at least 2")
            eta = _cx(cfg["eta"]) if cfg.get("eta") is not None else None
            nu = _cx(cfg["nu"]) if cfg.get("nu") is not None else None
            point = random_point(np.random.default_rng(int(cfg["seed"])), n, float(cfg["c"]), eta, nu)
        reports = bridge_checks(point, int(cfg["samples"]), int(cfg["seed"]), bool(cfg["pushforward"]))
    except (BridgeError, PoleError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_PARAM
    except (KeyError, TypeError) as exc:
        raise ConfigError(str(exc)) from exc
    reps = [r.to_json() for r in reports]
    code = _report_exit(reps)
    doc = {"version": __version__, "seed": cfg["seed"], "point": point.to_json(), "reports": reps,
           "summary": {"checks": len(reps), "ok": code == EXIT_OK}}
    _write(dumps(doc), args.out)
    _summarize(reps)
    return code


# --------------------------------------------------------------------------
# census


def _census_task(task) -> dict:
    from .bd import BDStructure
    from .verify import check_aybe

    bd_json, samples, seed = task
    bd = BDStructure.from_json(bd_json)
    rep = check_aybe(RMatrixSpec(bd.n, "FromBD", bd=bd), samples, seed)
    return {
        "structure": bd_json,
        "p1": [list(p) for p in sorted(bd.p1)],
        "p2": [list(p) for p in sorted(bd.p2)],
        "aybe_residual": rep.max_residual,
        "aybe_passed": rep.passed,
    }


def cmd_census(args) -> int:
    cfg = _load_config(args.config, {"version": SCHEMA_VERSION, "seed": 7, "samples": 3})
    if args.seed is not None:
        cfg["seed"] = args.seed
    n = args.n if args.n is not None else cfg.get("n")
    if n is None:
        raise ConfigError("census needs n")
    n = int(n)
    if n < 2 or n > ENUMERATION_BOUND:
        raise ConfigError(f"n must lie in 2..{ENUMERATION_BOUND}")
    structures = enumerate_bd(n)
    tasks = [(bd.to_json(), int(cfg["samples"]), int(cfg["seed"])) for bd in structures]
    rows = _map(_census_task, tasks, args.jobs)
    example = worked_example(n).to_json()
    for row in rows:
        row["worked_example"] = row["structure"] == example
    hits = [r for r in rows if r["worked_example"]]
    example_ok = bool(hits) and all(r["aybe_passed"] for r in hits)
    doc = {"version": __version__, "seed": cfg["seed"], "n": n, "count": len(rows),
           "aybe_pass_count": sum(r["aybe_passed"] for r in rows), "worked_example_ok": example_ok,
           "structures": rows}
    _write(dumps(doc), args.out)
    print(f"n={n}: {len(rows)} structures, {doc['aybe_pass_count']} pass AYBE, worked example "
          f"{'present and passing' if example_ok else 'MISSING OR FAILING'}", file=sys.stderr)
    return EXIT_OK if example_ok else EXIT_FAIL


# --------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="trigtops", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="JSON config file")
    common.add_argument("--seed", type=int, help="overrides the config seed")
    common.add_argument("--out", help="output path (default: stdout)")
    common.add_argument("--jobs", type=int, default=1, help="worker processes")
    sub.add_parser("verify", parents=[common], help="R-matrix identity campaign").set_defaults(func=cmd_verify)
    sub.add_parser("evolve", parents=[common], help="integrate a top, write a CSV trajectory").set_defaults(
        func=cmd_evolve)
    sub.add_parser("bridge", parents=[common], help="Ruijsenaars-Schneider / Calogero checks").set_defaults(
        func=cmd_bridge)
    census = sub.add_parser("census", parents=[common], help="enumerate BD structures and screen AYBE")
    census.add_argument("n", type=int, nargs="?")
    census.set_defaults(func=cmd_census)
    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_CONFIG if exc.code else EXIT_OK
    if args.jobs < 1:
        print("error: --jobs must be >= 1", file=sys.stderr)
        return EXIT_CONFIG
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (PoleError, UnsupportedFamily) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_PARAM
    except Exception as exc:  # noqa: BLE001
        print(f"internal error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_INTERNAL


if __name__ == "__main__":
    sys.exit(main())
