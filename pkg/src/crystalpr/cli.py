"""Command-line entry point: seeded experiments with manifest-tracked artifacts.

Every run writes its data files plus a manifest.json echoing the fully
resolved parameters, the RNG identifier, and a sha256 per output, so reruns
with the same spec and seed are byte-identical.  Randomized commands require
an explicit --seed.  Exit codes: 0 success, 2 invalid parameters, 3 resource
cap exceeded.
"""

from __future__ import annotations

import argparse
import csv
import hashlib
import itertools
import json
import os
import sys
from pathlib import Path

import numpy as np

from . import __version__
from .groups import AbelianGroup, Field, SupportSet
from .rng import RNG_NAME
from .symmetry import SupportEnumerationCap


def _write_csv(path: Path, metadata: dict, header: list[str], rows) -> None:
    with open(path, "w", newline="") as f:
        f.write("# " + json.dumps(metadata, sort_keys=True) + "\n")
        w = csv.writer(f)
        w.writerow(header)
        for row in rows:
            w.writerow(list(row))


def _sha256(path: Path) -> str:
    h = hashlib.sha256()
    h.update(path.read_bytes())
    return h.hexdigest()


def _write_manifest(out_dir: Path, spec: dict, seed, outputs: list[Path]) -> Path:
    manifest = {
        "spec": spec,
        "seed": seed,
        "rng": RNG_NAME,
        "outputs": [
            {"path": p.name, "sha256": _sha256(p)} for p in sorted(outputs)
        ],
        "versions": {
            "crystalpr": __version__,
            "numpy": np.__version__,
            "python": ".".join(str(v) for v in sys.version_info[:3]),
        },
    }
    path = out_dir / "manifest.json"
    path.write_text(json.dumps(manifest, indent=2, sort_keys=True) + "\n")
    return path


def _parse_k_list(text: str) -> list[int]:
    return [int(t) for t in text.split(",") if t.strip()]


def _out_dir(args) -> Path:
    d = Path(args.out_dir)
    d.mkdir(parents=True, exist_ok=True)
    return d


def _threads(args) -> int | None:
    if args.threads is not None:
        return args.threads
    env = os.environ.get("CRYSTALPR_THREADS")
    return int(env) if env else None


# --- commands ---------------------------------------------------------------

def cmd_diffset_hist(args) -> int:
    from .diffsets import diffset_histogram_experiment

    out = _out_dir(args)
    exp = diffset_histogram_experiment(args.N, args.K, args.trials, args.seed)
    csv_path = out / f"diffset_hist_N{args.N}_K{args.K}.csv"
    _write_csv(csv_path, exp.metadata(), ["value", "count"], exp.rows())
    outputs = [csv_path]
    if args.plot:
        from .plotting import plot_csv

        svg = csv_path.with_suffix(".svg")
        plot_csv(csv_path, "histogram", svg)
        outputs.append(svg)
    spec = {"command": "diffset-hist", "N": args.N, "K": args.K,
            "trials": args.trials, "seed": args.seed, "plot": args.plot}
    _write_manifest(out, spec, args.seed, outputs)
    print(f"|S-S| histogram: {exp.trials} trials, {exp.violations} with |S-S| <= K -> {csv_path}")
    return 0


def cmd_collisions(args) -> int:
    from .diffsets import collision_experiment

    out = _out_dir(args)
    k_values = _parse_k_list(args.K)
    rows = []
    for k in k_values:
        exp = collision_experiment(args.N, k, args.trials, args.seed)
        rows.append((k, exp.collision_free_count, exp.mean_collisions))
    csv_path = out / f"collisions_N{args.N}.csv"
    meta = {"N": args.N, "K": k_values, "trials": args.trials, "seed": args.seed, "rng": RNG_NAME}
    _write_csv(csv_path, meta, ["K", "collision_free_count", "mean_collisions"], rows)
    spec = {"command": "collisions", "N": args.N, "K": k_values,
            "trials": args.trials, "seed": args.seed}
    outputs = [csv_path]
    _write_manifest(out, spec, args.seed, outputs)
    for k, cf, mc in rows:
        print(f"K={k}: collision-free {cf}/{args.trials}, mean collisions {mc:.3f}")
    return 0


def cmd_solve(args) -> int:
    from .datagen import plant_generic
    from .solvers import SolverConfig, Variant, solve

    out = _out_dir(args)
    group = AbelianGroup(args.N)
    inst = plant_generic(group, args.K, args.seed)
    config = SolverConfig(
        beta=args.beta, max_iter=args.max_iter, success_tol=args.tol,
        seed=args.seed, variant=Variant(args.variant), log_every=args.log_every,
    )
    res = solve(inst.y0, args.K, config, x_true=inst.x_true)
    result_path = out / f"solve_N{args.N}_K{args.K}.json"
    doc = {"config": config.to_json_dict(), "instance_seed": inst.seed,
           "result": res.to_json_dict()}
    result_path.write_text(json.dumps(doc, indent=2, sort_keys=True) + "\n")
    outputs = [result_path]
    if res.trajectory:
        traj_path = out / f"solve_trajectory_N{args.N}_K{args.K}.csv"
        meta = {"N": args.N, "K": args.K, "trials": 1, "seed": args.seed, "rng": RNG_NAME}
        _write_csv(traj_path, meta, ["iter", "error", "eta"], res.trajectory)
        outputs.append(traj_path)
    spec = {"command": "solve", "N": args.N, "K": args.K, "beta": args.beta,
            "max_iter": args.max_iter, "tol": args.tol, "variant": args.variant,
            "seed": args.seed, "log_every": args.log_every}
    _write_manifest(out, spec, args.seed, outputs)
    state = "converged" if res.converged else "hit the iteration cap"
    print(f"{state} after {res.iterations} iterations "
          f"(error {res.final_error:.3e}, eta {res.final_eta:.6f}) -> {result_path}")
    return 0


def cmd_iteration_study(args) -> int:
    from .solvers import SolverConfig, Variant, iteration_study

    out = _out_dir(args)
    k_values = _parse_k_list(args.K)
    config = SolverConfig(beta=args.beta, max_iter=args.max_iter,
                          success_tol=args.tol, seed=args.seed,
                          variant=Variant(args.variant))
    study = iteration_study(args.N, k_values, args.trials, config,
                            require_diffset_gt_k=args.require_diffset_gt_k,
                            threads=_threads(args))
    csv_path = out / f"iteration_study_N{args.N}.csv"
    rows = [
        (s.K, s.median_iterations, s.success_rate, s.p10_iterations, s.p90_iterations)
        for s in study.per_k
    ]
    _write_csv(csv_path, study.metadata(),
               ["K", "median_iters", "success_rate", "p10", "p90"], rows)
    counts_path = out / f"iteration_counts_N{args.N}.csv"
    count_rows = [
        (s.K, t, s.iteration_counts[t], int(s.converged[t]))
        for s in study.per_k for t in range(s.trials)
    ]
    _write_csv(counts_path, study.metadata(),
               ["K", "trial", "iterations", "converged"], count_rows)
    outputs = [csv_path, counts_path]
    if args.plot:
        from .plotting import plot_csv

        svg = csv_path.with_suffix(".svg")
        plot_csv(csv_path, "line", svg, log_y=True)
        outputs.append(svg)
    spec = {"command": "iteration-study", "N": args.N, "K": k_values,
            "trials": args.trials, "beta": args.beta, "max_iter": args.max_iter,
            "tol": args.tol, "variant": args.variant, "seed": args.seed,
            "require_diffset_gt_k": args.require_diffset_gt_k, "plot": args.plot}
    _write_manifest(out, spec, args.seed, outputs)
    for s in study.per_k:
        print(f"K={s.K}: median {s.median_iterations:.0f} iters, "
              f"success {s.success_rate:.1%} ({s.success_count}/{s.trials})")
    return 0


def cmd_transversality(args) -> int:
    from .verify import check_transversality

    out = _out_dir(args)
    group = AbelianGroup(args.N)
    field_ = Field(args.field)
    per_s = []
    failures = []
    verdict = True
    for s_index, combo in enumerate(itertools.combinations(range(args.N), args.K)):
        s = SupportSet.from_indices(group, combo)
        report = check_transversality(s, field_, seed=args.seed * 1000003 + s_index,
                                      draws_per_component=args.draws)
        per_s.append({"S": list(combo), "verdict": report.verdict})
        verdict = verdict and report.verdict
        if not report.verdict:
            failures.append(report.to_json_dict())
    doc = {
        "N": args.N, "K": args.K, "field": args.field, "seed": args.seed,
        "draws_per_component": args.draws, "rng": RNG_NAME,
        "verdict": verdict, "per_S": per_s, "failures": failures,
    }
    path = out / f"transversality_N{args.N}_K{args.K}_{args.field}.json"
    path.write_text(json.dumps(doc, indent=2, sort_keys=True) + "\n")
    spec = {"command": "transversality", "N": args.N, "K": args.K,
            "field": args.field, "seed": args.seed, "draws": args.draws}
    outputs = [path]
    _write_manifest(out, spec, args.seed, outputs)
    print(f"transversality over all {len(per_s)} supports: "
          f"{'all full rank' if verdict else f'{len(failures)} failing supports'} -> {path}")
    return 0


def cmd_uniqueness_sweep(args) -> int:
    from .verify import support_recovery_sweep

    out = _out_dir(args)
    group = AbelianGroup(args.N)
    result = support_recovery_sweep(group, args.K, starts=args.starts, seed=args.seed,
                                    signals_per_pair=args.signals_per_pair)
    json_path = out / f"uniqueness_sweep_N{args.N}_K{args.K}.json"
    json_path.write_text(json.dumps(result.to_json_dict(), indent=2, sort_keys=True) + "\n")
    csv_path = out / f"uniqueness_sweep_N{args.N}_K{args.K}.csv"
    meta = {"N": args.N, "K": args.K, "trials": args.starts, "seed": args.seed, "rng": RNG_NAME}
    rows = [
        (";".join(map(str, r.s.to_index_list())), ";".join(map(str, r.s_prime.to_index_list())),
         r.diffset_size, int(r.informational), r.verdict.value, r.n_solutions, r.n_extra)
        for r in result.rows
    ]
    _write_csv(csv_path, meta,
               ["S", "Sprime", "diffset_size", "informational", "verdict", "solutions", "extra"],
               rows)
    outputs = [json_path, csv_path]
    _write_manifest(out, {"command": "uniqueness-sweep", "N": args.N, "K": args.K,
                          "starts": args.starts, "signals_per_pair": args.signals_per_pair,
                          "seed": args.seed}, args.seed, outputs)
    n_extra = sum(r.n_extra > 0 for r in result.rows)
    print(f"{len(result.rows)} support pairs swept; {n_extra} with extra solutions -> {csv_path}")
    return 0


def cmd_stabilizers(args) -> int:
    from .diffsets import difference_set
    from .symmetry import enumerate_support_classes, stabilizer

    out = _out_dir(args)
    group = AbelianGroup(args.N)
    field_ = Field(args.field)
    classes = enumerate_support_classes(group, args.K, cap=args.cap)
    rows = []
    detailed = []
    for s in classes:
        ds = difference_set(s)
        st = stabilizer(s, field_)
        rows.append((";".join(map(str, s.to_index_list())),
                     ";".join(str(r[0]) if group.rank == 1 else str(r) for r in ds.representatives()),
                     ds.cardinality, st.order))
        detailed.append(st.to_json_dict())
    csv_path = out / f"stabilizers_N{args.N}_K{args.K}.csv"
    meta = {"N": args.N, "K": args.K, "field": args.field, "classes": len(classes)}
    _write_csv(csv_path, meta, ["S", "diffset", "diffset_size", "stabilizer_order"], rows)
    json_path = out / f"stabilizers_N{args.N}_K{args.K}.json"
    json_path.write_text(json.dumps(detailed, indent=2, sort_keys=True) + "\n")
    outputs = [csv_path, json_path]
    _write_manifest(out, {"command": "stabilizers", "N": args.N, "K": args.K,
                          "field": args.field, "cap": args.cap}, None, outputs)
    print(f"{len(classes)} support classes -> {csv_path}")
    return 0


def cmd_gen(args) -> int:
    from .datagen import plant_binary, plant_generic, poissonize, ValueDist
    from .rng import substream

    out = _out_dir(args)
    group = AbelianGroup(args.N)
    if args.binary:
        inst = plant_binary(group, args.K, args.seed)
    else:
        dist = ValueDist.STD_NORMAL if args.dist == "std_normal" else ValueDist.UNIFORM01
        inst = plant_generic(group, args.K, args.seed, dist)
    if args.photon_scale is not None:
        noisy = poissonize(inst.y0, args.photon_scale, substream(args.seed, 1))
        from .datagen import PlantedInstance

        inst = PlantedInstance(inst.x_true, noisy, inst.support, inst.seed,
                               {"photon_scale": args.photon_scale})
    path = out / f"instance_N{args.N}_K{args.K}_seed{args.seed}.json"
    path.write_text(json.dumps(inst.to_json_dict(), sort_keys=True) + "\n")
    spec = {"command": "gen", "N": args.N, "K": args.K, "seed": args.seed,
            "binary": args.binary, "dist": args.dist, "photon_scale": args.photon_scale}
    outputs = [path]
    _write_manifest(out, spec, args.seed, outputs)
    print(f"planted instance with support {inst.support} -> {path}")
    return 0


def cmd_plot(args) -> int:
    from .plotting import plot_csv

    out_path = Path(args.out) if args.out else Path(args.csv).with_suffix(".svg")
    plot_csv(args.csv, args.kind, out_path, log_y=args.log_y)
    print(f"wrote {out_path}")
    return 0


# --- parser -----------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="crystalpr",
        description="Seeded experiments for sparse phase retrieval over cyclic groups.",
    )
    parser.add_argument("--config", help="JSON file of parameter overrides", default=None)
    sub = parser.add_subparsers(dest="command", required=True)

    def add_common(p, seeded=True):
        p.add_argument("--out-dir", default=".", help="directory for artifacts")
        p.add_argument("--threads", type=int, default=None,
                       help="worker threads (default: CRYSTALPR_THREADS)")
        if seeded:
            p.add_argument("--seed", type=int, required=True)

    p = sub.add_parser("diffset-hist", help="histogram of |S-S| over random supports")
    p.add_argument("--N", type=int, required=True)
    p.add_argument("--K", type=int, required=True)
    p.add_argument("--trials", type=int, default=10000)
    p.add_argument("--plot", action="store_true")
    add_common(p)
    p.set_defaults(func=cmd_diffset_hist)

    p = sub.add_parser("collisions", help="collision statistics per sparsity level")
    p.add_argument("--N", type=int, required=True)
    p.add_argument("--K", required=True, help="comma-separated sparsity levels")
    p.add_argument("--trials", type=int, default=1000)
    add_common(p)
    p.set_defaults(func=cmd_collisions)

    p = sub.add_parser("solve", help="plant a sparse instance and run the solver")
    p.add_argument("--N", type=int, required=True)
    p.add_argument("--K", type=int, required=True)
    p.add_argument("--beta", type=float, default=0.5)
    p.add_argument("--max-iter", type=int, default=10_000_000)
    p.add_argument("--tol", type=float, default=1e-8)
    p.add_argument("--variant", choices=["rrr", "ap"], default="rrr")
    p.add_argument("--log-every", type=int, default=0,
                   help="trajectory stride (0 = no log; forces the reference path)")
    add_common(p)
    p.set_defaults(func=cmd_solve)

    p = sub.add_parser("iteration-study", help="iteration counts vs sparsity")
    p.add_argument("--N", type=int, required=True)
    p.add_argument("--K", required=True, help="comma-separated sparsity levels")
    p.add_argument("--trials", type=int, default=100)
    p.add_argument("--beta", type=float, default=0.5)
    p.add_argument("--max-iter", type=int, default=10_000_000)
    p.add_argument("--tol", type=float, default=1e-8)
    p.add_argument("--variant", choices=["rrr", "ap"], default="rrr")
    p.add_argument("--require-diffset-gt-k", action="store_true",
                   help="resample supports until |S-S| > K")
    p.add_argument("--plot", action="store_true")
    add_common(p)
    p.set_defaults(func=cmd_iteration_study)

    p = sub.add_parser("transversality", help="translated-subspace rank test over all supports")
    p.add_argument("--N", type=int, required=True)
    p.add_argument("--K", type=int, required=True)
    p.add_argument("--field", choices=["real", "complex"], default="real")
    p.add_argument("--draws", type=int, default=3, help="draws per connected component")
    add_common(p)
    p.set_defaults(func=cmd_transversality)

    p = sub.add_parser("uniqueness-sweep", help="fiber search over support-class pairs")
    p.add_argument("--N", type=int, required=True)
    p.add_argument("--K", type=int, required=True)
    p.add_argument("--starts", type=int, default=200)
    p.add_argument("--signals-per-pair", type=int, default=3)
    add_common(p)
    p.set_defaults(func=cmd_uniqueness_sweep)

    p = sub.add_parser("stabilizers", help="support classes with difference sets and stabilizer orders")
    p.add_argument("--N", type=int, required=True)
    p.add_argument("--K", type=int, required=True)
    p.add_argument("--field", choices=["real", "complex"], default="real")
    p.add_argument("--cap", type=int, default=5_000_000,
                   help="refuse when C(N, K) exceeds this")
    add_common(p, seeded=False)
    p.set_defaults(func=cmd_stabilizers)

    p = sub.add_parser("gen", help="write a planted instance as JSON")
    p.add_argument("--N", type=int, required=True)
    p.add_argument("--K", type=int, required=True)
    p.add_argument("--binary", action="store_true")
    p.add_argument("--dist", choices=["uniform01", "std_normal"], default="uniform01")
    p.add_argument("--photon-scale", type=float, default=None,
                   help="Poisson-sample the intensities at this scale")
    add_common(p)
    p.set_defaults(func=cmd_gen)

    p = sub.add_parser("plot", help="render an experiment CSV to deterministic SVG")
    p.add_argument("--csv", required=True)
    p.add_argument("--kind", choices=["histogram", "line"], required=True)
    p.add_argument("--out", default=None)
    p.add_argument("--log-y", action="store_true")
    p.set_defaults(func=cmd_plot)

    return parser


def _apply_config(parser: argparse.ArgumentParser, args: argparse.Namespace) -> None:
    """Values from --config override defaults but not explicit flags."""
    if not args.config:
        return
    overrides = json.loads(Path(args.config).read_text())
    sub_actions = [a for a in parser._actions if isinstance(a, argparse._SubParsersAction)]
    subparser = sub_actions[0].choices[args.command] if sub_actions else None
    for key, value in overrides.items():
        attr = key.replace("-", "_")
        if not hasattr(args, attr):
            raise ValueError(f"unknown config key {key!r}")
        default = subparser.get_default(attr) if subparser else None
        if getattr(args, attr) == default:
            setattr(args, attr, value)


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        _apply_config(parser, args)
        return args.func(args)
    except SupportEnumerationCap as exc:
        print(f"resource cap exceeded: {exc}", file=sys.stderr)
        return 3
    except (ValueError, OSError, json.JSONDecodeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
