"""Declarative scenarios: loading, overrides, validation and execution.

A scenario is a YAML or JSON mapping checked against the bundled JSON
schema plus a few semantic rules. Running one produces a report mapping
(the resolved scenario, the results, a status) and optional two-column
plot tables.
"""
import copy
import json
import math
import os
import tempfile
import time
from dataclasses import dataclass, field
from datetime import datetime, timezone
from importlib import resources

import numpy as np
import yaml
from jsonschema import Draft202012Validator

from . import __version__, kernels
from .certify import (EntropyModel, certify_integral, certify_series, clt_certify_integral,
                      clt_certify_series)
from .entropy import MetricMeasureSpace, build_net_hierarchy, covering_number, ball_function, \
    exact_covering_number
from .montecarlo import ParametricIntegralProblem, confidence_region, coverage_experiment
from .process import (ProcessModel, clt_empirical_check, empirical_mixed_norm,
                      natural_distance_matrix, rho_distance)
from .psi import PsiFunction, natural_function, rosenthal_transform
from .rispaces import RISpaceSpec, dual_geometry
from .transforms import orlicz_from_psi, tail_bound

COMMANDS = ("certify", "tailbound", "entropy", "mixed-norm", "clt-check",
            "mc-estimate", "mc-coverage", "demo-lacunary")
STOCHASTIC = ("mixed-norm", "clt-check", "mc-estimate", "mc-coverage", "demo-lacunary")
EXIT_CODES = {"certified": 0, "success": 0, "diverged": 2, "resolution-limited": 3}
SEED_ENV = "RIFIELDS_SEED"
DEFAULT_OUT_DIR = "rifields-out"


class ScenarioError(ValueError):
    """Scenario cannot be run; ``diagnostics`` lists every problem found."""

    def __init__(self, diagnostics):
        super().__init__("; ".join(diagnostics))
        self.diagnostics = list(diagnostics)


def _schema():
    text = resources.files("rifields").joinpath("schema/scenario.schema.json").read_text()
    return json.loads(text)


# -- loading -----------------------------------------------------------------


def load_text(path):
    with open(path, encoding="utf-8") as fh:
        return fh.read()


def parse(text):
    data = yaml.safe_load(text)
    if not isinstance(data, dict):
        raise ScenarioError(["scenario must be a mapping at top level"])
    return data


def _line_index(text):
    """Map key paths to 1-based line numbers using the YAML node tree."""
    index = {}
    try:
        root = yaml.compose(text)
    except yaml.YAMLError:
        return index

    def walk(node, path):
        index[path] = node.start_mark.line + 1
        if isinstance(node, yaml.MappingNode):
            for k, v in node.value:
                walk(v, path + (k.value,))
        elif isinstance(node, yaml.SequenceNode):
            for i, v in enumerate(node.value):
                walk(v, path + (i,))

    if root is not None:
        walk(root, ())
    return index


def _where(index, path):
    path = tuple(path)
    while path and path not in index:
        path = path[:-1]
    line = index.get(path)
    return f"line {line}: " if line else ""


def apply_overrides(data, overrides):
    """``key.sub=value`` assignments; values are parsed as YAML scalars."""
    data = copy.deepcopy(data)
    for item in overrides or ():
        if "=" not in item:
            raise ScenarioError([f"override {item!r} is not of the form key=value"])
        key, raw = item.split("=", 1)
        parts = key.strip().split(".")
        node = data
        for p in parts[:-1]:
            node = node.setdefault(p, {})
            if not isinstance(node, dict):
                raise ScenarioError([f"override {key!r} descends into a non-mapping"])
        node[parts[-1]] = yaml.safe_load(raw)
    return data


def resolve_seed(data, cli_seed=None):
    """Precedence: command line, then the environment variable, then the file."""
    data = dict(data)
    if cli_seed is not None:
        data["seed"] = int(cli_seed)
    elif os.environ.get(SEED_ENV, "") != "":
        data["seed"] = int(os.environ[SEED_ENV])
    return data


# -- validation ----------------------------------------------------------------


def _field(path):
    return ".".join(str(p) for p in path) or "<root>"


def semantic_checks(data, command):
    diags = []

    def need(key, why):
        if key not in data:
            diags.append(f"field {key}: required by {why}")

    cert = data.get("certify", {})
    model = cert.get("model", {})
    kind = model.get("kind")
    if kind == "power-law":
        k, s = model.get("kappa"), model.get("s")
        if k is None or s is None:
            diags.append("field certify.model: power-law needs kappa and s")
        elif not (s > 0 and 0 < k < 1 + s):
            diags.append(f"field certify.model.kappa: power-law needs κ in (0, 1 + s); got κ={k}, s={s}")
    elif kind == "log-corrected":
        s, b = model.get("s"), model.get("beta")
        if s is None or b is None:
            diags.append("field certify.model: log-corrected needs s and beta")
        elif not b > 1:
            diags.append(f"field certify.model.beta: log-corrected needs β > 1; got β={b}")
        elif not s > 0:
            diags.append("field certify.model.s: log-corrected needs s > 0")
    elif kind == "empirical":
        dist = model.get("distance", "space")
        if dist == "space":
            if "space" not in data:
                diags.append("field certify.model: empirical model with distance=space needs a space block")
        elif "process" not in data:
            diags.append(f"field certify.model: distance={dist} needs a process block")
    elif kind == "dual-family":
        if "dual_family" not in data.get("ri_space", {}):
            diags.append("field certify.model: dual-family model needs ri_space.dual_family")
    if cert.get("theorem") in ("integral", "clt-integral") and kind in ("power-law", "log-corrected", "constant"):
        if "diameter" not in cert:
            diags.append("field certify.diameter: analytic models need a diameter for the integral")
        elif not cert["diameter"] > 0:
            diags.append("field certify.diameter: must be positive")

    if command == "certify":
        need("certify", "certify")
        need("psi", "certify")
    elif command == "tailbound":
        need("tailbound", "tailbound")
        need("psi", "tailbound")
        if data.get("tailbound", {}).get("norm", "certify") == "certify":
            need("certify", "tailbound with norm=certify")
    elif command == "entropy":
        need("space", "entropy")
    elif command in ("mixed-norm", "clt-check"):
        need("process", command)
        need("ri_space", command)
        if command == "mixed-norm":
            need("psi", command)
    elif command in ("mc-estimate", "mc-coverage"):
        need("mc", command)
    if command in STOCHASTIC and "seed" not in data:
        diags.append(f"field seed: missing seed; command {command} is stochastic "
                     f"(set it in the file, with --seed or via {SEED_ENV})")

    psi = data.get("psi", {})
    if psi.get("family") == "natural" and "process" not in data:
        diags.append("field psi.family: the natural ψ needs a process block")
    if psi.get("family") == "table" and ("p" not in psi or "values" not in psi):
        diags.append("field psi: table family needs p and values")
    proc = data.get("process", {})
    if proc and proc.get("kind") not in ("gaussian", "deterministic") and "space" not in data:
        diags.append(f"field process.kind: {proc.get('kind')} needs a 1-D space for its points")
    if proc.get("kind") == "gaussian" and "covariance" not in proc:
        diags.append("field process.covariance: required for kind gaussian")
    if proc.get("kind") == "lacunary" and "coefficients" not in proc:
        diags.append("field process.coefficients: required for kind lacunary")
    if proc.get("kind") == "deterministic" and "values" not in proc:
        diags.append("field process.values: required for kind deterministic")
    ri = data.get("ri_space", {})
    if ri.get("kind") == "GLS" and "psi" not in ri:
        diags.append("field ri_space.psi: required for kind GLS")
    if ri.get("kind") == "Orlicz" and "psi" not in ri and "young_power" not in ri:
        diags.append("field ri_space: Orlicz needs psi or young_power")
    sp = data.get("space", {})
    if "weights" in sp:
        n = _space_size(sp)
        if n is not None and len(sp["weights"]) != n:
            diags.append(f"field space.weights: {len(sp['weights'])} weights for {n} points")
    return diags


def _space_size(sp):
    if "points" in sp:
        return len(sp["points"])
    if "matrix" in sp:
        return len(sp["matrix"])
    if "grid" in sp:
        return sp["grid"]["n"]
    return None


def validate_data(data, text="", command=None):
    """All diagnostics for a parsed scenario; empty means runnable."""
    index = _line_index(text) if text else {}
    diags = []
    for err in sorted(Draft202012Validator(_schema()).iter_errors(data), key=lambda e: list(map(str, e.path))):
        diags.append(f"{_where(index, err.path)}field {_field(err.path)}: {err.message}")
    if diags:
        return diags
    cmd = command or data.get("command")
    if cmd is None:
        return ["field command: no command given in the file or on the command line"]
    for d in semantic_checks(data, cmd):
        key = d.split(":", 1)[0].replace("field ", "").split(".")
        diags.append(f"{_where(index, key)}{d}")
    return diags


def validate_scenario(path, overrides=(), command=None):
    """Diagnostics for the scenario file, without running it."""
    try:
        text = load_text(path)
        data = apply_overrides(parse(text), overrides)
    except (OSError, yaml.YAMLError) as exc:
        return [f"cannot read scenario: {exc}"]
    except ScenarioError as exc:
        return exc.diagnostics
    return validate_data(resolve_seed(data), text, command)


# -- object builders ---------------------------------------------------------------


def _range(r):
    if r.get("log"):
        return np.geomspace(r["start"], r["stop"], r["num"])
    return np.linspace(r["start"], r["stop"], r["num"])


def build_space(sp):
    w = sp.get("weights")
    if "grid" in sp:
        g = sp["grid"]
        space = MetricMeasureSpace.uniform_grid(g["n"], g.get("start", 0.0), g.get("stop", 1.0))
        return space if w is None else MetricMeasureSpace(space.dist, w, space.coords)
    if "points" in sp:
        return MetricMeasureSpace.from_coords(np.asarray(sp["points"], dtype=float), w)
    return MetricMeasureSpace.from_matrix(sp["matrix"], w)


def _times(space):
    if space is None or space.coords is None or space.coords.shape[1] != 1:
        raise ScenarioError(["field space: this process needs 1-D points"])
    return space.coords[:, 0]


def build_process(pr, space):
    kind = pr["kind"]
    if kind == "brownian":
        return ProcessModel.brownian(_times(space))
    if kind == "squared-exponential":
        return ProcessModel.squared_exponential(_times(space), pr.get("length", 1.0), pr.get("variance", 1.0))
    if kind == "gaussian":
        return ProcessModel.gaussian_field(pr["covariance"])
    if kind == "bounded":
        if "basis" in pr:
            basis = np.asarray(pr["basis"], dtype=float)
        else:
            t = _times(space)
            basis = np.array([np.cos(np.pi * k * t) / k for k in range(1, pr.get("terms", 8) + 1)])
        return ProcessModel.bounded_field(basis, pr.get("distribution", "rademacher"))
    if kind == "lacunary":
        return ProcessModel.lacunary(_times(space), pr["coefficients"], pr.get("ratio", 2))
    return ProcessModel.deterministic(pr["values"])


def build_psi(ps, process=None):
    fam = ps["family"]
    if fam == "power":
        psi = PsiFunction.power(ps.get("m", 2.0))
    elif fam == "constant":
        sup = ps.get("support", [1.0, "inf"])
        psi = PsiFunction.constant(ps.get("c", 1.0), (float(sup[0]), math.inf if sup[1] == "inf" else float(sup[1])))
    elif fam == "table":
        sup = ps.get("support")
        if sup is not None:
            sup = (float(sup[0]), math.inf if sup[1] == "inf" else float(sup[1]))
        psi = PsiFunction.tabulated(ps["p"], ps["values"], sup)
    else:
        if process is None or process.marginal is None:
            raise ScenarioError(["field psi.family: the natural ψ needs a process with exact marginals"])
        psi = natural_function([process.marginal(i) for i in range(process.n_points)])
    if ps.get("rosenthal"):
        psi = rosenthal_transform(psi, ps.get("symmetric", False))
    return psi


def build_ri_space(ri, weights, process=None):
    fam = ri.get("dual_family")
    if ri["kind"] == "Lp":
        p = ri.get("p", 2.0)
        return RISpaceSpec.lp(math.inf if p == "inf" else p, weights, fam)
    if ri["kind"] == "GLS":
        return RISpaceSpec.gls(build_psi(ri["psi"], process), weights, fam)
    if "young_power" in ri:
        r = float(ri["young_power"])
        return RISpaceSpec.orlicz(lambda u: np.abs(np.asarray(u, dtype=float)) ** r, weights, fam)
    return RISpaceSpec.orlicz(orlicz_from_psi(build_psi(ri["psi"], process)), weights, fam)


@dataclass
class Context:
    data: dict
    threads: int = 1
    space: object = None
    process: object = None
    psi: object = None
    ri: object = None
    flags: list = field(default_factory=list)

    @classmethod
    def build(cls, data, threads=1):
        ctx = cls(data, threads)
        if "space" in data:
            ctx.space = build_space(data["space"])
        if "process" in data:
            ctx.process = build_process(data["process"], ctx.space)
        if "psi" in data:
            ctx.psi = build_psi(data["psi"], ctx.process)
        if "ri_space" in data:
            ctx.ri = build_ri_space(data["ri_space"], ctx.weights(), ctx.process)
        return ctx

    def weights(self):
        if self.space is not None:
            return self.space.weights
        if self.process is not None:
            return np.full(self.process.n_points, 1.0 / self.process.n_points)
        raise ScenarioError(["field space: weights are needed but neither space nor process is declared"])

    @property
    def seed(self):
        return self.data.get("seed")


# -- commands ------------------------------------------------------------------------


@dataclass
class Outcome:
    status: str
    result: dict
    flags: list = field(default_factory=list)
    plots: dict = field(default_factory=dict)
    dumps: dict = field(default_factory=dict)


def _entropy_model(ctx, cert):
    m = cert.get("model", {"kind": "empirical", "distance": "space"})
    kind = m["kind"]
    if kind == "power-law":
        return EntropyModel.power_law(m["kappa"], m["s"])
    if kind == "log-corrected":
        return EntropyModel.log_corrected(m["s"], m["beta"])
    if kind == "constant":
        return EntropyModel.constant(m.get("count", 1.0), m.get("measure", 1.0))
    if kind == "dual-family":
        return dual_geometry(ctx.ri, ctx.data["ri_space"].get("symmetrize", False))
    dist = m.get("distance", "space")
    if dist == "space":
        return EntropyModel.empirical(ctx.space)
    proc, n = ctx.process, ctx.process.n_points
    if dist == "natural":
        D = natural_distance_matrix(proc, ctx.psi, replicas=10_000, seed=ctx.seed)
    else:
        D = np.zeros((n, n))
        for i in range(n):
            for j in range(i + 1, n):
                D[i, j] = D[j, i] = rho_distance(proc, ctx.psi, i, j).value
    w = ctx.space.weights if ctx.space is not None else np.full(n, 1.0 / n)
    return EntropyModel.empirical(MetricMeasureSpace(D, w, check=False))


def _certificate(ctx):
    cert = ctx.data["certify"]
    source = _entropy_model(ctx, cert)
    theorem = cert["theorem"]
    diameter = cert.get("diameter")
    mean_zero = cert.get("mean_zero", ctx.process.mean_zero if ctx.process is not None else True)
    if theorem == "series":
        return certify_series(source, ctx.psi), source
    if theorem == "integral":
        return certify_integral(source, ctx.psi, diameter), source
    if theorem == "clt-series":
        return clt_certify_series(source, ctx.psi, mean_zero), source
    return clt_certify_integral(source, ctx.psi, mean_zero, diameter), source


def _table(x, y, names):
    return {"columns": names, "data": np.column_stack([np.asarray(x, float), np.asarray(y, float)])}


def run_certify(ctx):
    rep, source = _certificate(ctx)
    result = rep.to_record()
    if isinstance(source, EntropyModel):
        result["model"] = source.to_record()
    plots = {}
    if rep.tail_curve is not None:
        x, b = rep.tail_curve.table()
        plots["tail"] = _table(x, b, ["x", "tail_bound"])
    return Outcome(rep.status, result, list(rep.flags), plots)


def run_tailbound(ctx):
    tb = ctx.data["tailbound"]
    norm = tb.get("norm", "certify")
    flags = []
    if norm == "certify":
        rep, _ = _certificate(ctx)
        if math.isinf(rep.mixed_norm_bound):
            return Outcome("diverged", {"certificate": rep.to_record()}, list(rep.flags))
        norm, psi = rep.mixed_norm_bound, rep.psi
        flags = list(rep.flags)
    else:
        psi = ctx.psi
    x = np.asarray(tb["x"], dtype=float) if isinstance(tb["x"], list) else _range(tb["x"])
    bound = tail_bound(psi, norm, x)
    return Outcome("success", {"norm": norm, "x": x.tolist(), "bound": np.atleast_1d(bound).tolist()},
                   flags, {"tail": _table(x, bound, ["x", "tail_bound"])})


def run_entropy(ctx):
    en = ctx.data.get("entropy", {})
    sp = ctx.space
    if "radii" in en:
        radii = np.asarray(en["radii"], float) if isinstance(en["radii"], list) else _range(en["radii"])
    else:
        lo = sp.resolution if math.isfinite(sp.resolution) else 1.0
        radii = np.geomspace(lo / 2, max(sp.diameter, lo), 16)
    rows = []
    for eps in radii:
        b = covering_number(sp, float(eps))
        row = {"eps": float(eps), "upper": b.upper, "lower": b.lower,
               "entropy": math.log(b.upper), "ball": ball_function(sp, float(eps))}
        if en.get("exact") and sp.n <= 20:
            row["exact"] = exact_covering_number(sp, float(eps))
        rows.append(row)
    result = {"points": sp.n, "diameter": sp.diameter, "resolution": sp.resolution
              if math.isfinite(sp.resolution) else "inf", "rows": rows}
    if "q" in en:
        h = build_net_hierarchy(sp, en["q"])
        result["hierarchy"] = {"q": h.q, "base_radius": h.base_radius, "root": h.root,
                               "radii": [lv.radius for lv in h.levels],
                               "cardinalities": h.cardinalities(),
                               "next_upper": [lv.next_bracket.upper for lv in h.levels],
                               "resolution_limited": h.resolution_limited}
    return Outcome("success", result, [],
                   {"covering": _table(radii, [r["upper"] for r in rows], ["eps", "covering_upper"])})


def run_mixed_norm(ctx):
    reps = ctx.data.get("mixed_norm", {}).get("replicas", 10_000)
    est = empirical_mixed_norm(ctx.process, ctx.ri, ctx.psi, reps, ctx.seed, ctx.threads)
    result = {"value": est.value, "stderr": est.stderr, "replicas": est.replicas, "p_cap": est.p_cap}
    flags = []
    if "certify" in ctx.data:
        rep, _ = _certificate(ctx)
        result["certificate"] = rep.to_record()
        flags = list(rep.flags)
        if math.isfinite(rep.mixed_norm_bound):
            flags.append("mixed-norm-within-bound" if est.value <= rep.mixed_norm_bound
                         else "mixed-norm-exceeds-bound")
    dumps = {"norms": est.norms} if ctx.data.get("output", {}).get("dump_norms") else {}
    return Outcome("success", result, flags, {}, dumps)


def _clt_rows(ctx, model, spec, n_values, replicas):
    rows = clt_empirical_check(model, spec, n_values, replicas, ctx.seed, ctx.threads)
    return rows, {"ks": _table([r["n"] for r in rows], [r["ks"] for r in rows], ["n", "ks_distance"])}


def run_clt_check(ctx):
    cc = ctx.data.get("clt_check", {})
    rows, plots = _clt_rows(ctx, ctx.process, ctx.ri, cc.get("n", [1, 4, 16, 64, 256]),
                            cc.get("replicas", 2000))
    return Outcome("success", {"rows": rows}, [], plots)


def _problem(ctx):
    mc = ctx.data["mc"]
    grid = _range(mc.get("grid", {"start": 0.0, "stop": 2 * math.pi, "num": 33}))
    return ParametricIntegralProblem.builtin(mc["problem"], grid, values=mc.get("values", np.ones(len(grid))))


def _mc_spec(ctx, problem):
    m = len(problem.grid)
    if ctx.data.get("ri_space"):
        return build_ri_space(ctx.data["ri_space"], np.full(m, 1.0 / m))
    return RISpaceSpec.lp(2.0, np.full(m, 1.0 / m))


def run_mc_estimate(ctx):
    mc = ctx.data["mc"]
    problem = _problem(ctx)
    spec = _mc_spec(ctx, problem)
    reg = confidence_region(problem, mc.get("n", 10_000), spec, mc.get("delta", 0.05), ctx.seed,
                            mc.get("limit_replicas", 10_000))
    result = reg.to_record()
    if problem.truth is not None:
        result["error_norm"] = reg.distance(problem.truth(problem.grid), spec)
        result["covers_truth"] = bool(result["error_norm"] <= reg.radius)
    return Outcome("success", result, [], {"estimate": _table(problem.grid, reg.center, ["t", "I_n"])})


def run_mc_coverage(ctx):
    mc = ctx.data["mc"]
    problem = _problem(ctx)
    spec = _mc_spec(ctx, problem)
    res = coverage_experiment(problem, mc.get("n", 10_000), spec, mc.get("delta", 0.05),
                              mc.get("repetitions", 100), ctx.seed, mc.get("limit_replicas", 10_000))
    result = {"coverage": res.coverage, "covered": res.covered, "repetitions": res.repetitions,
              "ci95": [res.ci_low, res.ci_high], "nominal": 1.0 - mc.get("delta", 0.05)}
    ratio = res.distances / np.where(res.radii > 0, res.radii, 1.0)
    return Outcome("success", result, [],
                   {"coverage": _table(np.arange(res.repetitions), ratio, ["repetition", "error_over_radius"])})


def run_demo_lacunary(ctx):
    lc = ctx.data.get("lacunary", {})
    pts = lc.get("points", 64)
    t = np.linspace(0.0, 2 * math.pi, pts, endpoint=False)
    model = ProcessModel.lacunary(t, lc.get("coefficients", [1.0 / k for k in range(1, 9)]), lc.get("ratio", 2))
    spec = RISpaceSpec.lp(math.inf, np.full(pts, 1.0 / pts))
    rows, plots = _clt_rows(ctx, model, spec, lc.get("n", [1, 4, 16, 64]), lc.get("replicas", 1000))
    return Outcome("success", {"rows": rows, "norm": "sup"}, ["demonstration-only"], plots)


RUNNERS = {"certify": run_certify, "tailbound": run_tailbound, "entropy": run_entropy,
           "mixed-norm": run_mixed_norm, "clt-check": run_clt_check, "mc-estimate": run_mc_estimate,
           "mc-coverage": run_mc_coverage, "demo-lacunary": run_demo_lacunary}


# -- reports --------------------------------------------------------------------------


def _jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return _jsonable(obj.tolist())
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        v = float(obj)
        return v if math.isfinite(v) else ("inf" if v > 0 else "-inf" if v < 0 else "nan")
    return obj


def atomic_write(path, text):
    d = os.path.dirname(os.path.abspath(path))
    os.makedirs(d, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=d, prefix=".tmp-")
    try:
        with os.fdopen(fd, "w", encoding="utf-8") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def format_table(table):
    lines = ["# " + " ".join(table["columns"])]
    lines += [" ".join(f"{v:.17g}" for v in row) for row in table["data"]]
    return "\n".join(lines) + "\n"


def run_data(data, command, out_dir=None, threads=1, write=True):
    """Execute a validated scenario; returns (exit code, report dict, written paths)."""
    data = dict(data, command=command)
    t0 = time.perf_counter()
    ctx = Context.build(data, threads)
    outcome = RUNNERS[command](ctx)
    wall = time.perf_counter() - t0
    report = {
        "toolkit": {"name": "rifields", "version": __version__},
        "command": command,
        "seed": data.get("seed"),
        "status": outcome.status,
        "flags": outcome.flags,
        "result": outcome.result,
        "scenario": data,
        "run": {"timestamp": datetime.now(timezone.utc).isoformat(), "wall_time": wall,
                "backend": kernels.BACKEND, "threads": threads},
    }
    report = _jsonable(report)
    written = []
    if write:
        out = data.get("output", {})
        d = out_dir or out.get("dir", DEFAULT_OUT_DIR)
        rpath = os.path.join(d, out.get("report", f"{command}-report.json"))
        atomic_write(rpath, json.dumps(report, indent=2, sort_keys=True) + "\n")
        written.append(rpath)
        if out.get("plots", True):
            for name, table in outcome.plots.items():
                p = os.path.join(d, f"{command}-{name}.dat")
                atomic_write(p, format_table(table))
                written.append(p)
        for name, arr in outcome.dumps.items():
            p = os.path.join(d, f"{command}-{name}.txt")
            atomic_write(p, "".join(f"{v:.17g}\n" for v in np.asarray(arr).ravel()))
            written.append(p)
    return EXIT_CODES.get(outcome.status, 1), report, written


def deterministic_view(report):
    """The report without its run block (timestamp, wall time, backend)."""
    return {k: v for k, v in report.items() if k != "run"}
