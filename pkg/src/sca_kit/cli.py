"""Command-line interface.

Subcommands: decompose | consensus | icm | align | simulate | sweep | sparsity.

Exit codes: 0 success, 1 runtime or data error (a JSON error record goes to
stderr), 2 usage error. Every command that writes an output directory also
writes ``manifest.json`` there. ``--config FILE`` reads a TOML file whose
keys (at any nesting depth) name command options; explicit flags win.
"""

from __future__ import annotations

import csv
import functools
import hashlib
import io as _io
import json
import math
import re
import sys
import time
from pathlib import Path

import click
import numpy as np

from . import __version__
from .alignment import EncodingConfig, build_rdm, cms, encoding_score, rsa_score, sca_score
from .consensus import (
    DEFAULT_COMPONENTS,
    DEFAULT_OUTLIER_THRESHOLD,
    DEFAULT_RUNS,
    bnmf_runs,
    run_consensus,
    run_seed,
    save_consensus,
)
from .alignment.connectivity import icm_from_responses
from .data import GibbsConfig, PriorSpec
from .decomposition import decompose, explained_variance, preprocess
from .errors import ScaKitError
from .io import (
    infer_format,
    load_connectivity,
    load_factorization,
    load_matrix,
    read_binary,
    read_csv,
    save_factorization,
    save_matrix,
    write_binary,
    write_json,
)
from .parallel import default_jobs
from .simulation import (
    LatentSpec,
    RotationSpec,
    default_plane_counts,
    gen_latent_data,
    latent_recovery,
    max_planes,
    rotated_component_similarity,
    sensitivity_sweep,
)
from .sparsity import factor_sparsity_report

try:
    import tomllib
except ModuleNotFoundError:  # Python < 3.11
    import tomli as tomllib


# -- parameter types ---------------------------------------------------------

_ANGLE = re.compile(r"^\s*(?:(?P<num>[0-9.eE+-]+)\s*\*?\s*)?pi\s*(?:/\s*(?P<den>[0-9.eE+-]+))?\s*$")


def parse_angle(value) -> float:
    """Float, or an expression like ``pi/20`` or ``3*pi/4``."""
    if isinstance(value, (int, float)):
        return float(value)
    text = str(value).strip()
    m = _ANGLE.match(text)
    if m:
        num = float(m.group("num")) if m.group("num") else 1.0
        den = float(m.group("den")) if m.group("den") else 1.0
        return num * math.pi / den
    return float(text)


class ListType(click.ParamType):
    """Comma-separated string or (from config files) a list."""

    def __init__(self, item, name):
        self.item = item
        self.name = name

    def convert(self, value, param, ctx):
        if isinstance(value, (list, tuple)):
            items = list(value)
        else:
            items = [v for v in str(value).split(",") if v.strip()]
        try:
            return [self.item(v.strip() if isinstance(v, str) else v) for v in items]
        except ValueError as exc:
            self.fail(f"{value!r}: {exc}", param, ctx)


ANGLES = ListType(parse_angle, "angles")
INTS = ListType(int, "ints")
FLOATS = ListType(float, "floats")
STRINGS = ListType(str, "strings")


# -- shared machinery --------------------------------------------------------


def _flatten(cfg, out=None):
    out = {} if out is None else out
    for key, value in cfg.items():
        if isinstance(value, dict):
            _flatten(value, out)
        else:
            out[key.replace("-", "_")] = value
    return out


def apply_config(ctx, params):
    """Fill options left at their defaults from ``params['config']``."""
    path = params.get("config")
    if not path:
        return params
    with open(path, "rb") as fh:
        cfg = _flatten(tomllib.load(fh))
    by_name = {p.name: p for p in ctx.command.params}
    for name, value in cfg.items():
        if name not in by_name or name == "config":
            continue
        source = ctx.get_parameter_source(name)
        if source in (None, click.core.ParameterSource.DEFAULT):
            params[name] = by_name[name].type_cast_value(ctx, value)
    return params


def sha256(path):
    h = hashlib.sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(1 << 20), b""):
            h.update(chunk)
    return h.hexdigest()


def write_manifest(outdir, command, params, inputs, started):
    outdir = Path(outdir)
    outputs = sorted(
        str(p.relative_to(outdir)) for p in outdir.rglob("*") if p.is_file() and p.name != "manifest.json"
    )
    write_json(
        outdir / "manifest.json",
        {
            "command": command,
            "params": _jsonable(params),
            "seed": params.get("seed"),
            "inputs": {str(p): sha256(p) for p in inputs},
            "outputs": outputs,
            "wall_time_s": round(time.perf_counter() - started, 3),
            "version": __version__,
        },
    )


def _jsonable(obj):
    if isinstance(obj, dict):
        return {k: _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (np.floating,)):
        return float(obj)
    if isinstance(obj, Path):
        return str(obj)
    return obj


def handle_errors(fn):
    """Map data/runtime errors to exit code 1 with a JSON record on stderr."""

    @functools.wraps(fn)
    def wrapper(*args, **kwargs):
        try:
            return fn(*args, **kwargs)
        except (ScaKitError, OSError, ValueError, KeyError, RuntimeError) as exc:
            record = {"error": type(exc).__name__, "message": str(exc)}
            click.echo(json.dumps(record, sort_keys=True), err=True)
            sys.exit(1)

    return wrapper


def command(name):
    """Register a subcommand with config merging and error mapping."""

    def deco(fn):
        @functools.wraps(fn)
        @click.pass_context
        def inner(ctx, **params):
            params = apply_config(ctx, params)
            if params.get("jobs") is None and "jobs" in params:
                params["jobs"] = default_jobs()
            return handle_errors(fn)(**params)

        return cli.command(name)(inner)

    return deco


def gibbs_options(fn):
    opts = [
        click.option("--n-sweeps", type=click.IntRange(min=1), default=400, show_default=True),
        click.option("--burn-in", type=click.IntRange(min=0), default=200, show_default=True),
        click.option(
            "--point-estimate",
            type=click.Choice(["posterior_mean", "last_sample"]),
            default="posterior_mean",
            show_default=True,
        ),
        click.option("--response-rate", type=click.FloatRange(min=0, min_open=True), default=1.0, show_default=True),
        click.option("--weight-rate", type=click.FloatRange(min=0, min_open=True), default=1.0, show_default=True),
        click.option("--noise-shape", type=click.FloatRange(min=0, min_open=True), default=1.0, show_default=True),
        click.option("--noise-scale", type=click.FloatRange(min=0, min_open=True), default=1.0, show_default=True),
    ]
    for opt in reversed(opts):
        fn = opt(fn)
    return fn


def common_options(fn):
    fn = click.option("--jobs", type=click.IntRange(min=1), default=None, help="Worker processes [env SCA_KIT_JOBS, else all cores].")(fn)
    fn = click.option("--seed", type=int, default=0, show_default=True)(fn)
    fn = click.option("--config", type=click.Path(dir_okay=False), default=None, help="TOML file of option values.")(fn)
    return fn


def gibbs_config(p) -> GibbsConfig:
    if p["burn_in"] >= p["n_sweeps"]:
        raise click.BadParameter("--burn-in must be smaller than --n-sweeps")
    priors = PriorSpec(p["response_rate"], p["weight_rate"], p["noise_shape"], p["noise_scale"])
    return GibbsConfig(p["n_sweeps"], p["burn_in"], priors, p["point_estimate"])


@click.group()
@click.version_option(__version__, prog_name="sca-kit")
def cli():
    """Sparse component decomposition and representational alignment."""


# -- decompose ---------------------------------------------------------------


@click.argument("outdir", type=click.Path(file_okay=False))
@click.argument("input", type=click.Path(dir_okay=False))
@click.option("--method", type=click.Choice(["pca", "nmf", "snmf", "bnmf"]), default="bnmf", show_default=True)
@click.option("--components", "-c", type=click.IntRange(min=1), default=DEFAULT_COMPONENTS, show_default=True)
@click.option("--runs", type=click.IntRange(min=1), default=1, show_default=True)
@click.option("--n-iter", type=click.IntRange(min=1), default=500, show_default=True, help="nmf/snmf iterations.")
@click.option("--l1-penalty", type=click.FloatRange(min=0), default=0.1, show_default=True, help="snmf penalty on W.")
@click.option("--preprocess", "preprocess_mode", type=click.Choice(["none", "max"]), default="none", show_default=True)
@gibbs_options
@common_options
@command("decompose")
def cmd_decompose(**p):
    """Factorize INPUT and write responses.bin, weights.bin, meta.json to OUTDIR.

    With --runs > 1, run i goes to OUTDIR/run_<i> with a derived seed.
    """
    started = time.perf_counter()
    d = preprocess(load_matrix(p["input"]), p["preprocess_mode"])
    cfg = gibbs_config(p)
    outdir = Path(p["outdir"])
    seeds = [p["seed"]] if p["runs"] == 1 else [run_seed(p["seed"], i) for i in range(p["runs"])]
    for i, seed in enumerate(seeds):
        f = decompose(
            d, p["method"], p["components"], seed=seed, cfg=cfg, n_iter=p["n_iter"], l1_penalty=p["l1_penalty"]
        )
        target = outdir if p["runs"] == 1 else outdir / f"run_{i:03d}"
        save_factorization(
            f, target, extra_meta={"explained_variance": explained_variance(d, f), "preprocess": p["preprocess_mode"]}
        )
        if target != outdir:
            write_manifest(target, "decompose", dict(p, seed=seed, runs=1), [p["input"]], started)
    write_manifest(outdir, "decompose", p, [p["input"]], started)


# -- consensus / icm ---------------------------------------------------------


@click.argument("outdir", type=click.Path(file_okay=False))
@click.argument("input", type=click.Path(dir_okay=False))
@click.option("--components", "-c", type=click.IntRange(min=1), default=DEFAULT_COMPONENTS, show_default=True)
@click.option("--runs", type=click.IntRange(min=2), default=DEFAULT_RUNS, show_default=True)
@click.option("--outlier-threshold", type=click.FloatRange(min=0), default=DEFAULT_OUTLIER_THRESHOLD, show_default=True)
@click.option("--preprocess", "preprocess_mode", type=click.Choice(["none", "max"]), default="none", show_default=True)
@gibbs_options
@common_options
@command("consensus")
def cmd_consensus(**p):
    """Consensus components over --runs Bayesian NMF chains of INPUT."""
    started = time.perf_counter()
    d = preprocess(load_matrix(p["input"]), p["preprocess_mode"])
    result = run_consensus(
        d, p["components"], p["runs"], gibbs_config(p), p["outlier_threshold"], seed=p["seed"], jobs=p["jobs"]
    )
    save_consensus(result, p["outdir"])
    write_manifest(p["outdir"], "consensus", p, [p["input"]], started)


@click.argument("outdir", type=click.Path(file_okay=False))
@click.argument("input", type=click.Path(dir_okay=False))
@click.option("--components", "-c", type=click.IntRange(min=1), default=DEFAULT_COMPONENTS, show_default=True)
@click.option("--runs", type=click.IntRange(min=1), default=DEFAULT_RUNS, show_default=True)
@click.option("--csv", "also_csv", is_flag=True, help="Also write icm.csv.")
@click.option("--preprocess", "preprocess_mode", type=click.Choice(["none", "max"]), default="none", show_default=True)
@gibbs_options
@common_options
@command("icm")
def cmd_icm(**p):
    """Image connectivity matrix of INPUT, written to OUTDIR/icm.bin."""
    started = time.perf_counter()
    d = preprocess(load_matrix(p["input"]), p["preprocess_mode"])
    runs = bnmf_runs(d, p["components"], p["runs"], cfg=gibbs_config(p), seed=p["seed"], jobs=p["jobs"])
    icm = icm_from_responses([f.responses for f in runs], d.stimulus_ids)
    outdir = Path(p["outdir"])
    outdir.mkdir(parents=True, exist_ok=True)
    save_matrix(icm, outdir / "icm.bin")
    if p["also_csv"]:
        save_matrix(icm, outdir / "icm.csv")
    write_manifest(outdir, "icm", p, [p["input"]], started)


# -- align -------------------------------------------------------------------


def _load_array(path):
    if infer_format(path) == "csv":
        data, _, _ = read_csv(path)
    else:
        data, _, _, _, _ = read_binary(path)
    return data


def _append_ledger(path, result, inputs):
    path = Path(path)
    new = not path.exists()
    with open(path, "a", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        if new:
            writer.writerow(["metric", "value", "n_stimuli", "input_a", "input_b", "params"])
        writer.writerow(
            [result["metric"], repr(result["value"]), result["n_stimuli"], *inputs, json.dumps(result["params"], sort_keys=True)]
        )


@click.argument("b", type=click.Path(dir_okay=False))
@click.argument("a", type=click.Path(dir_okay=False))
@click.option("--metric", type=click.Choice(["sca", "rsa", "cms", "encoding"]), required=True)
@click.option("--rdm-metric", type=click.Choice(["correlation", "euclidean"]), default="correlation", show_default=True)
@click.option("--precomputed", is_flag=True, help="rsa: A and B are dissimilarity matrices, not responses.")
@click.option("--a-kind", type=click.Choice(["icm", "rdm", "behavioral"]), default=None, help="Kind of A when read from CSV.")
@click.option("--b-kind", type=click.Choice(["icm", "rdm", "behavioral"]), default=None, help="Kind of B when read from CSV.")
@click.option("--train-fraction", type=click.FloatRange(0, 1, min_open=True, max_open=True), default=0.8, show_default=True)
@click.option("--penalties", type=FLOATS, default="0.01,0.1,1,10,100,1000,10000", show_default=True)
@click.option("--folds", type=click.IntRange(min=2), default=5, show_default=True)
@click.option("--ledger", type=click.Path(dir_okay=False), default=None, help="CSV file the result row is appended to.")
@click.option("--out", type=click.Path(file_okay=False), default=None, help="Directory for result.json + manifest.")
@click.option("--seed", type=int, default=0, show_default=True)
@click.option("--config", type=click.Path(dir_okay=False), default=None)
@command("align")
def cmd_align(**p):
    """Alignment score between A and B, printed as JSON.

    sca: A, B are ICMs. rsa: response matrices (RDMs built with
    --rdm-metric) or, with --precomputed, dissimilarity matrices.
    cms: S x C component matrices. encoding: A = features, B = targets.
    """
    started = time.perf_counter()
    a, b, metric = p["a"], p["b"], p["metric"]
    if metric == "sca":
        score = sca_score(load_connectivity(a, p["a_kind"] or _csv_default(a, "icm")), load_connectivity(b, p["b_kind"] or _csv_default(b, "icm")))
    elif metric == "rsa":
        if p["precomputed"]:
            ca = load_connectivity(a, p["a_kind"] or _csv_default(a, "behavioral"))
            cb = load_connectivity(b, p["b_kind"] or _csv_default(b, "behavioral"))
        else:
            ca, cb = build_rdm(load_matrix(a), p["rdm_metric"]), build_rdm(load_matrix(b), p["rdm_metric"])
        score = rsa_score(ca, cb)
    elif metric == "cms":
        score = cms(_load_array(a), _load_array(b))
    else:
        cfg = EncodingConfig(p["train_fraction"], tuple(p["penalties"]), p["folds"], p["seed"])
        score = encoding_score(load_matrix(a), load_matrix(b), cfg)
    result = score.to_dict()
    if metric == "cms":
        result["permutation"] = score.metadata["permutation"]
    if metric == "rsa" and not p["precomputed"]:
        result["params"]["rdm_metric"] = p["rdm_metric"]
    result = _jsonable(result)
    text = json.dumps(result, sort_keys=True)
    click.echo(text)
    if p["ledger"]:
        _append_ledger(p["ledger"], result, [a, b])
    if p["out"]:
        Path(p["out"]).mkdir(parents=True, exist_ok=True)
        write_json(Path(p["out"]) / "result.json", result)
        write_manifest(p["out"], "align", p, [a, b], started)


def _csv_default(path, kind):
    return kind if infer_format(path) == "csv" else None


# -- simulate / sweep --------------------------------------------------------


def latent_options(fn):
    opts = [
        click.option("--m", type=click.IntRange(min=2), default=200, show_default=True, help="Stimuli."),
        click.option("--n", type=click.IntRange(min=2), default=30, show_default=True, help="Units."),
        click.option("--k", type=click.IntRange(min=1), default=5, show_default=True, help="Latent components."),
        click.option("--sparsity", type=click.FloatRange(0, 1, max_open=True), default=0.3, show_default=True),
        click.option("--noise-sigma", type=click.FloatRange(min=0), default=0.01, show_default=True),
    ]
    for opt in reversed(opts):
        fn = opt(fn)
    return fn


def _write_rows(path, header, rows):
    buf = _io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(header)
    for row in rows:
        writer.writerow([repr(v) if isinstance(v, float) else v for v in row])
    Path(path).write_text(buf.getvalue(), encoding="utf-8")


@click.argument("outdir", type=click.Path(file_okay=False))
@click.option(
    "--experiment",
    type=click.Choice(["data", "recovery", "rotation"]),
    default="data",
    show_default=True,
    help="data: write X, L, A. recovery: latent-recovery scores per engine. "
    "rotation: component similarity after back-rotation, pca vs bnmf.",
)
@latent_options
@click.option("--n-seeds", type=click.IntRange(min=1), default=1, show_default=True, help="Replicates (seeds seed..seed+n-1).")
@click.option("--methods", type=STRINGS, default=None, help="Engines to run (recovery: pca,nmf,snmf,bnmf; rotation: pca,bnmf).")
@click.option("--l1-penalty", type=click.FloatRange(min=0), default=0.1, show_default=True)
@click.option("--thetas", type=ANGLES, default="pi/20,pi/40,pi/60,pi/80", show_default=True)
@click.option("--plane-counts", type=INTS, default=None, help="Default: 10 values from 0 to n(n-1)/2.")
@click.option("--components", "-c", type=click.IntRange(min=1), default=None, help="Default: k.")
@gibbs_options
@common_options
@command("simulate")
def cmd_simulate(**p):
    """Synthetic latent data and the recovery / rotation experiments."""
    started = time.perf_counter()
    outdir = Path(p["outdir"])
    outdir.mkdir(parents=True, exist_ok=True)
    cfg = gibbs_config(p)
    seeds = [p["seed"] + i for i in range(p["n_seeds"])]
    spec_kw = dict(m=p["m"], n=p["n"], k=p["k"], sparsity=p["sparsity"], noise_sigma=p["noise_sigma"])
    c = p["components"] or p["k"]

    if p["experiment"] == "data":
        for seed in seeds:
            data = gen_latent_data(LatentSpec(seed=seed, **spec_kw))
            sub = outdir if len(seeds) == 1 else outdir / f"seed_{seed}"
            sub.mkdir(parents=True, exist_ok=True)
            save_matrix(data.x, sub / "x.bin")
            save_matrix(data.x, sub / "x.csv")
            comps = [f"k{j}" for j in range(p["k"])]
            write_binary(sub / "latent_l.bin", data.l, data.x.stimulus_ids, comps, kind="factor")
            write_binary(sub / "latent_a.bin", data.a, comps, data.x.unit_ids, kind="factor")
            if sub != outdir:
                write_manifest(sub, "simulate", dict(p, seed=seed, n_seeds=1), [], started)
    elif p["experiment"] == "recovery":
        methods = p["methods"] or ["pca", "nmf", "snmf", "bnmf"]
        rows = []
        for seed in seeds:
            spec = LatentSpec(seed=seed, **spec_kw)
            data, out = latent_recovery(spec, methods=methods, cfg=cfg, l1_penalty=p["l1_penalty"])
            for method in methods:
                value, f = out[method]
                rep = factor_sparsity_report(f)
                rows.append(
                    [seed, method, float(value), rep["w_report"].aggregate["hoyer"], rep["r_report"].aggregate["hoyer"]]
                )
        _write_rows(outdir / "recovery.csv", ["seed", "method", "recovery", "hoyer_w", "hoyer_r"], rows)
    else:
        methods = p["methods"] or ["pca", "bnmf"]
        counts = p["plane_counts"] or default_plane_counts(p["n"])
        rows = []
        for seed in seeds:
            x = gen_latent_data(LatentSpec(seed=seed, **spec_kw)).x
            for theta in p["thetas"]:
                for count in counts:
                    spec = RotationSpec(p["n"], theta, min(count, max_planes(p["n"])), seed=seed)
                    for method in methods:
                        s = rotated_component_similarity(x, spec, method, c, seed=seed, cfg=cfg)
                        rows.append([float(theta), spec.n_planes, method, float(s.value), seed])
        _write_rows(outdir / "rotation.csv", ["theta", "n_planes", "method", "score", "seed"], rows)
    write_manifest(outdir, "simulate", p, [], started)


@latent_options
@click.option("--out", "outdir", type=click.Path(file_okay=False), default="results/sweep", show_default=True)
@click.option("--thetas", type=ANGLES, default="pi/20,pi/40,pi/60,pi/80", show_default=True)
@click.option("--plane-counts", type=INTS, default=None, help="Default: 10 values from 0 to n(n-1)/2.")
@click.option("--metrics", type=STRINGS, default="sca,rsa_euclidean,rsa_correlation", show_default=True)
@click.option("--n-runs-icm", type=click.IntRange(min=1), default=20, show_default=True)
@click.option("--components", "-c", type=click.IntRange(min=1), default=None, help="Default: k.")
@gibbs_options
@common_options
@command("sweep")
def cmd_sweep(**p):
    """Rotation-sensitivity sweep; writes OUT/sweep.csv (theta, n_planes, metric, score, seed)."""
    started = time.perf_counter()
    spec = LatentSpec(p["m"], p["n"], p["k"], p["sparsity"], p["noise_sigma"], seed=p["seed"])
    records = sensitivity_sweep(
        spec,
        thetas=p["thetas"],
        plane_counts=p["plane_counts"],
        metrics=p["metrics"],
        n_runs_icm=p["n_runs_icm"],
        seed=p["seed"],
        c=p["components"],
        cfg=gibbs_config(p),
        jobs=p["jobs"],
    )
    outdir = Path(p["outdir"])
    outdir.mkdir(parents=True, exist_ok=True)
    _write_rows(
        outdir / "sweep.csv",
        ["theta", "n_planes", "metric", "score", "seed"],
        [[r.theta, r.n_planes, r.metric, r.score, r.seed] for r in records],
    )
    inputs = [p["config"]] if p["config"] else []
    write_manifest(outdir, "sweep", p, inputs, started)


# -- sparsity ----------------------------------------------------------------


@click.argument("factor_dir", type=click.Path(file_okay=False))
@click.option("--out", "outdir", type=click.Path(file_okay=False), default=None, help="Default: FACTOR_DIR/sparsity.")
@click.option("--skew-power", type=click.Choice(["2", "3"]), default="3", show_default=True, help="Skewness denominator m2^power.")
@click.option("--config", type=click.Path(dir_okay=False), default=None)
@command("sparsity")
def cmd_sparsity(**p):
    """Hoyer sparsity, kurtosis and skewness of a saved factorization."""
    started = time.perf_counter()
    f = load_factorization(p["factor_dir"])
    reports = factor_sparsity_report(f, power=int(p["skew_power"]))
    report = {name: rep.to_dict() for name, rep in reports.items()}
    report["method"] = f.method
    outdir = Path(p["outdir"] or Path(p["factor_dir"]) / "sparsity")
    outdir.mkdir(parents=True, exist_ok=True)
    write_json(outdir / "sparsity.json", report)
    rows = []
    for matrix, rep in (("W", reports["w_report"]), ("R", reports["r_report"])):
        for j, stats in enumerate(rep.per_vector):
            if stats is None:
                rows.append([matrix, j, "", "", "", "skipped"])
            else:
                rows.append([matrix, j, stats["hoyer"], stats["kurtosis"], stats["skewness"], ""])
    _write_rows(outdir / "sparsity_components.csv", ["matrix", "component", "hoyer", "kurtosis", "skewness", "flag"], rows)
    click.echo(json.dumps(_jsonable({k: v["aggregate"] for k, v in report.items() if isinstance(v, dict)}), sort_keys=True))
    inputs = [Path(p["factor_dir"]) / n for n in ("responses.bin", "weights.bin", "meta.json")]
    write_manifest(outdir, "sparsity", p, inputs, started)


def main(argv=None):
    cli.main(args=argv, prog_name="sca-kit")


if __name__ == "__main__":
    main()
