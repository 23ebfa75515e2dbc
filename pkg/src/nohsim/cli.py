"""Command-line harness: ``simulate``, ``theory``, ``fit`` and ``compare``.

Settings come from a flat ``key = value`` config file (``--config``) and
can be overridden by flags. Exit status is 0 on success, 1 for invalid
configuration and 2 for runtime failures (I/O, unreadable input).
"""

from __future__ import annotations

import argparse
import csv
import json
import os
import sys

from . import __version__
from .errors import EdgeListParseError
from .experiments import (ExperimentConfig, ModelSpec, averaged_skewness, compare, fit,
                          pooled_degree_histogram, pooled_size_histogram, resolve_model,
                          simulate, window_mean_size)
from .graph import GeneratorSpec, load_edge_list
from .process import NohParams, write_degree_csv, write_size_csv, write_snapshot_json
from .stats import REPORT_COLUMNS, kl_divergence, write_histogram_csv, write_report_csv
from .theory import (TheoryParams, expected_size, stationary_pmf, variance_size,
                     write_pmf_csv, write_rate_matrix_csv)

EXIT_OK, EXIT_CONFIG, EXIT_RUNTIME = 0, 1, 2

# key -> (type, default)
CONFIG_KEYS = {
    "generator": (str, "sf"),
    "n": (int, 2000),
    "m": (str, "5"),
    "k": (int, 20),
    "p": (float, 0.2),
    "nve_mu": (float, 2.0),
    "nve_sigma": (float, 0.5),
    "edge_list": (str, None),
    "graph_seed": (int, 0),
    "lambda": (float, 0.01),
    "mu": (float, 0.005),
    "seed": (int, 0),
    "burn_in": (float, 1e4),
    "t_lo": (float, 1e4),
    "t_hi": (float, 2e4),
    "sample_interval": (float, 200.0),
    "size_interval": (float, 1.0),
    "replicas": (int, 10),
    "max_snapshots": (int, 50),
    "snapshot_times": (str, ""),
    "initial_online": (str, "all"),
    "workers": (int, 1),
    "out": (str, None),
}


class ConfigError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_CONFIG, f"{self.prog}: error: {message}\n")


def read_config(path) -> dict[str, str]:
    """Parse ``key = value`` lines; ``#`` starts a comment."""
    out = {}
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, 1):
            line = line.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise ConfigError(f"{path}:{lineno}: expected 'key = value'")
            key, value = (s.strip() for s in line.split("=", 1))
            key = key.replace("-", "_")
            if key not in CONFIG_KEYS:
                raise ConfigError(f"{path}:{lineno}: unknown key {key!r}")
            out[key] = value
    return out


def _settings(args) -> dict:
    raw = read_config(args.config) if args.config else {}
    for key in CONFIG_KEYS:
        v = getattr(args, key, None)
        if v is not None:
            raw[key] = v
    out = {}
    for key, (typ, default) in CONFIG_KEYS.items():
        if key in raw and raw[key] is not None:
            try:
                out[key] = typ(raw[key])
            except ValueError:
                raise ConfigError(f"bad value for {key}: {raw[key]!r}") from None
        else:
            out[key] = default
    return out


def _floats(text: str) -> list[float]:
    try:
        return [float(x) for x in text.split(",") if x.strip()]
    except ValueError:
        raise ConfigError(f"expected comma-separated numbers, got {text!r}") from None


def _generator(s: dict) -> GeneratorSpec:
    kind = s["generator"]
    if kind == "edgelist":
        return GeneratorSpec("edgelist", path=s["edge_list"])
    try:
        m = int(s["m"])
    except ValueError:
        raise ConfigError(f"m must be an integer here (got {s['m']!r})") from None
    return GeneratorSpec(kind, n_vertices=s["n"], seed=s["graph_seed"], m=m, k=s["k"],
                         p=s["p"], nve_mu=s["nve_mu"], nve_sigma=s["nve_sigma"])


def _experiment(s: dict, generator=None) -> ExperimentConfig:
    init = s["initial_online"]
    init = init if init == "all" else float(init)
    return ExperimentConfig(
        generator=generator, noh=NohParams(s["lambda"], s["mu"]), seed=s["seed"],
        burn_in=s["burn_in"], window=(s["t_lo"], s["t_hi"]),
        sample_interval=s["sample_interval"], size_interval=s["size_interval"],
        replicas=s["replicas"], max_snapshots=s["max_snapshots"],
        snapshot_times=tuple(_floats(s["snapshot_times"])), initial_online=init,
        workers=s["workers"], outputs=s["out"])


def _outdir(s: dict) -> str:
    out = s["out"]
    if not out:
        raise ConfigError("an output directory is required (--out)")
    os.makedirs(out, exist_ok=True)
    return out


def _fmt(x) -> str:
    return "" if x is None else f"{x:.4f}"


def _report_cells(rep) -> list[str]:
    return [rep.model] + [_fmt(v) for v in (rep.kl, rep.clustering, rep.mean_degree,
                                            rep.assortativity, rep.skewness,
                                            rep.initial_mean_degree)]


def _stdout_csv():
    return csv.writer(sys.stdout, lineterminator="\n")


# ---------------------------------------------------------------------------

def cmd_simulate(args) -> int:
    s = _settings(args)
    gen = _generator(s)
    cfg = _experiment(s, gen)
    out = _outdir(s)
    graph = gen.build()
    results = simulate(cfg, graph)
    snapdir = os.path.join(out, "snapshots")
    if cfg.snapshot_times:
        os.makedirs(snapdir, exist_ok=True)
    for i, r in enumerate(results):
        write_size_csv(r.sizes, os.path.join(out, f"sizes_r{i:03d}.csv"))
        write_degree_csv(r.snapshots, os.path.join(out, f"online_degrees_r{i:03d}.csv"))
        for snap in r.extra_snapshots:
            write_snapshot_json(snap, os.path.join(snapdir, f"r{i:03d}_t{snap.t:g}.json"))
    size_hist = pooled_size_histogram(results, cfg.window)
    write_histogram_csv(size_hist, os.path.join(out, "size_histogram.csv"))
    theory = TheoryParams(graph.n_vertices, cfg.noh.lam, cfg.noh.mu)
    summary = {
        "graph": {"description": gen.describe(), "n_vertices": graph.n_vertices,
                  "n_edges": graph.n_edges},
        "lambda": cfg.noh.lam, "mu": cfg.noh.mu, "seed": cfg.seed,
        "replicas": cfg.replicas, "window": list(cfg.window),
        "expected_size": expected_size(theory), "variance_size": variance_size(theory),
        "window_mean_size": window_mean_size(results, cfg.window),
        "size_kl": kl_divergence(stationary_pmf(theory), size_hist),
    }
    if any(r.snapshots for r in results):
        write_histogram_csv(pooled_degree_histogram(results),
                            os.path.join(out, "degree_histogram.csv"))
        try:
            summary["degree_skewness"] = averaged_skewness(results)
        except ValueError:
            summary["degree_skewness"] = None
    with open(os.path.join(out, "summary.json"), "w", encoding="utf-8") as fh:
        json.dump(summary, fh, indent=2, sort_keys=True)
        fh.write("\n")
    print(f"E[N]={summary['expected_size']:.2f} observed={summary['window_mean_size']:.2f} "
          f"KL={summary['size_kl']:.4f} -> {out}")
    return EXIT_OK


def cmd_theory(args) -> int:
    p = TheoryParams(args.n0, args.lam, args.mu)
    line = f"# E={expected_size(p)!r} D={variance_size(p)!r}"
    if args.out:
        os.makedirs(args.out, exist_ok=True)
        write_pmf_csv(p, os.path.join(args.out, "pmf.csv"))
        if args.rate_matrix:
            write_rate_matrix_csv(p, os.path.join(args.out, "rate_matrix.csv"))
    else:
        write_pmf_csv(p, sys.stdout)
    print(line)
    return EXIT_OK


def _target_graph(args, s):
    if args.edge_list:
        return load_edge_list(args.edge_list), "Real"
    if args.target:
        spec = parse_model(args.target)
        if spec.noh is not None:
            raise ConfigError("target must be a static generator")
        gen = GeneratorSpec(spec.kind, **{"seed": s["graph_seed"], **spec.params})
        return gen.build(), f"Target {gen.describe()}"
    raise ConfigError("give an edge list or --target")


def cmd_fit(args) -> int:
    s = _settings(args)
    lam_grid, mu_grid = _floats(args.lambda_grid), _floats(args.mu_grid)
    if not lam_grid or not mu_grid:
        raise ConfigError("lambda and mu grids must be non-empty")
    cfg = _experiment(s)
    target, _ = _target_graph(args, s)
    initial = None
    if args.initial != "self":
        spec = parse_model(args.initial)
        noh = NohParams(lam_grid[0], mu_grid[0])
        initial = resolve_model(ModelSpec(spec.kind, spec.params, noh), target,
                                seed=s["graph_seed"]).build()
    ranked = fit(target, lam_grid, mu_grid, cfg, initial=initial)
    w = _stdout_csv()
    w.writerow(("lambda", "mu") + REPORT_COLUMNS)
    for lam, mu, rep in ranked:
        w.writerow([repr(lam), repr(mu)] + _report_cells(rep))
    if s["out"]:
        out = _outdir(s)
        write_report_csv([r for _, _, r in ranked], os.path.join(out, "fit_report.csv"))
    return EXIT_OK


def cmd_compare(args) -> int:
    s = _settings(args)
    if not args.model:
        raise ConfigError("at least one --model is required")
    models = [parse_model(m) for m in args.model]
    cfg = _experiment(s)
    target, name = _target_graph(args, s)
    reports = compare(target, models, cfg, target_name=name)
    w = _stdout_csv()
    w.writerow(REPORT_COLUMNS)
    for rep in reports:
        w.writerow(_report_cells(rep))
    if s["out"]:
        out = _outdir(s)
        write_report_csv(reports, os.path.join(out, "compare_report.csv"))
    return EXIT_OK


# ---------------------------------------------------------------------------

MODEL_KEYS = {"n": ("n_vertices", int), "seed": ("seed", int), "m": ("m", None),
              "k": ("k", int), "p": ("p", float), "nve_mu": ("nve_mu", float),
              "nve_sigma": ("nve_sigma", float)}


def parse_model(text: str) -> ModelSpec:
    """Parse e.g. ``"sf m=5"``, ``"sw k=4 p=0.4"``,
    ``"nve nve_mu=2 nve_sigma=0.5"`` or ``"noh sf m=auto lambda=0.01 mu=0.013"``."""
    tokens = text.split()
    if not tokens:
        raise ConfigError("empty model description")
    kind = tokens.pop(0).lower()
    with_noh = kind == "noh"
    if with_noh:
        if not tokens:
            raise ConfigError("noh model needs an initial generator kind")
        kind = tokens.pop(0).lower()
    if kind not in ("sf", "sw", "nve"):
        raise ConfigError(f"unknown model kind {kind!r}")
    params, lam, mu = {}, None, None
    for tok in tokens:
        if "=" not in tok:
            raise ConfigError(f"expected key=value in model, got {tok!r}")
        key, value = tok.split("=", 1)
        try:
            if key == "lambda":
                lam = float(value)
            elif key == "mu":
                mu = float(value)
            elif key in MODEL_KEYS:
                name, typ = MODEL_KEYS[key]
                if key == "m":
                    params[name] = value if value == "auto" else int(value)
                else:
                    params[name] = typ(value)
            else:
                raise ConfigError(f"unknown model parameter {key!r}")
        except ValueError:
            raise ConfigError(f"bad value in model token {tok!r}") from None
    noh = None
    if with_noh:
        if lam is None or mu is None:
            raise ConfigError("noh model needs lambda= and mu=")
        noh = NohParams(lam, mu)
    elif lam is not None or mu is not None:
        raise ConfigError("lambda/mu only apply to 'noh' models")
    return ModelSpec(kind, params, noh)


def _add_config_flags(p):
    p.add_argument("--config", help="flat key = value config file")
    p.add_argument("--seed", type=int)
    p.add_argument("--out")
    for key, (typ, _) in CONFIG_KEYS.items():
        if key in ("seed", "out"):
            continue
        p.add_argument("--" + key.replace("_", "-"), dest=key, default=None)


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="nohsim", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("simulate", help="run replicated simulations and write series")
    _add_config_flags(p)
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("theory", help="stationary distribution and moments")
    p.add_argument("--n0", type=int, required=True)
    p.add_argument("--lambda", dest="lam", type=float, required=True)
    p.add_argument("--mu", type=float, required=True)
    p.add_argument("--out")
    p.add_argument("--rate-matrix", action="store_true",
                   help="also write the dense generator matrix (needs --out)")
    p.set_defaults(func=cmd_theory)

    for name, func, helptext in (("fit", cmd_fit, "grid search of (lambda, mu)"),
                                 ("compare", cmd_compare, "model comparison table")):
        p = sub.add_parser(name, help=helptext)
        p.add_argument("edge_list", nargs="?", help="edge-list file of the target network")
        p.add_argument("--target", help="synthetic target model instead of an edge list")
        _add_config_flags(p)
        if name == "fit":
            p.add_argument("--lambda-grid", required=True)
            p.add_argument("--mu-grid", required=True)
            p.add_argument("--initial", default="self",
                           help="'self' or a generator, e.g. 'sf m=auto'")
        else:
            p.add_argument("--model", action="append", default=[])
        p.set_defaults(func=func)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (OSError, EdgeListParseError) as exc:
        print(f"nohsim: error: {exc}", file=sys.stderr)
        return EXIT_RUNTIME
    except (ConfigError, ValueError) as exc:
        print(f"nohsim: config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
