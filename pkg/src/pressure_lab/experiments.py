"""Named experiments, their configuration, and CSV / plot-script output.

Each experiment is a frozen protocol: a function of ``(theta, seed, grid,
overrides)`` that returns data rows.  ``run`` fans out over the configured
``(theta, seed)`` pairs, merges rows in a fixed order and writes

* ``<name>.csv``          data rows,
* ``<name>_summary.csv``  per-theta aggregates, each row tagged with the
  package version and the config hash,
* ``<name>.gp``           a gnuplot script plotting the summary,
* ``<name>_failures.csv`` only when some job raised.

The config file is JSON; see ``ExperimentConfig`` for the schema.
"""

from __future__ import annotations

import csv
import hashlib
import json
import logging
import math
from dataclasses import asdict, dataclass, field
from functools import lru_cache
from pathlib import Path

import numpy as np

from . import __version__
from .disk import (
    QuadratureScheme,
    pressure_fd,
    pressure_representation,
    proof_split,
    test_function_library,
    weak_residual,
)
from .fields import (
    make_disk_field,
    make_torus_field,
    max_octave,
    mollify_and_correct,
    rigid_rotation,
    sample,
    sin_product_potential,
)
from .grid import DiskGrid, TorusGrid
from .holder import (
    Region,
    fit_exponent,
    gradient_exponent,
    holder_seminorm,
    log_lipschitz_ratios,
    oscillation_profile,
    spread,
)
from .kernel import check_difference_bound, check_pointwise_bound, defining_residuals
from .torus import (
    SpectralWorkspace,
    bilinear_pressure,
    divergence_decomposition,
    pressure_spectral,
    shell_decay_exponent,
)

log = logging.getLogger(__name__)


class ConfigError(ValueError):
    """Invalid experiment configuration."""


# ---------------------------------------------------------------------------
# configuration


@dataclass(frozen=True)
class ExperimentConfig:
    """Declarative description of one experiment run.

    JSON schema (all keys optional except ``experiment``)::

        {
          "experiment": "torus-double",      # one of EXPERIMENTS
          "thetas": [0.2, 0.3, 0.4],         # Hölder targets
          "grids": [1024],                   # torus N, or disk n_r (n_phi = 2 n_r)
          "seeds": [0, 1, 2],
          "overrides": {"drop_coarse": 2},   # experiment-specific knobs
          "out_dir": "results"
        }

    Missing lists take the experiment's defaults.
    """

    experiment: str
    thetas: tuple = ()
    grids: tuple = ()
    seeds: tuple = ()
    overrides: dict = field(default_factory=dict)
    out_dir: str | None = None

    def __post_init__(self):
        if self.experiment not in EXPERIMENTS:
            raise ConfigError(f"unknown experiment {self.experiment!r}; see list-experiments")
        spec = EXPERIMENTS[self.experiment]
        object.__setattr__(self, "thetas", tuple(float(t) for t in self.thetas) or spec.thetas)
        object.__setattr__(self, "grids", tuple(int(g) for g in self.grids) or spec.grids)
        object.__setattr__(self, "seeds", tuple(int(s) for s in self.seeds) or spec.seeds)
        object.__setattr__(self, "overrides", dict(self.overrides))
        if self.out_dir is not None:
            object.__setattr__(self, "out_dir", str(self.out_dir))
        if spec.thetas and not self.thetas:
            raise ConfigError("empty theta list")
        for t in self.thetas:
            if not 0.0 < t < 1.0:
                raise ConfigError(f"theta must lie in (0, 1), got {t}")
        unknown = set(self.overrides) - set(spec.knobs)
        if unknown:
            raise ConfigError(f"unknown overrides for {self.experiment}: {sorted(unknown)}")

    def payload(self) -> dict:
        d = asdict(self)
        d["thetas"], d["grids"], d["seeds"] = list(self.thetas), list(self.grids), list(self.seeds)
        return d

    def to_text(self) -> str:
        return json.dumps(self.payload(), indent=2, sort_keys=True) + "\n"

    @classmethod
    def from_text(cls, text: str) -> ExperimentConfig:
        try:
            d = json.loads(text)
        except json.JSONDecodeError as exc:
            raise ConfigError(f"config is not valid JSON: {exc}") from exc
        if not isinstance(d, dict) or "experiment" not in d:
            raise ConfigError("config must be an object with an 'experiment' key")
        extra = set(d) - {"experiment", "thetas", "grids", "seeds", "overrides", "out_dir"}
        if extra:
            raise ConfigError(f"unknown config keys {sorted(extra)}")
        if "thetas" in d and not d["thetas"] and EXPERIMENTS.get(d["experiment"], _NONE).thetas:
            raise ConfigError("empty theta list")
        return cls(
            experiment=d["experiment"],
            thetas=tuple(d.get("thetas", ())),
            grids=tuple(d.get("grids", ())),
            seeds=tuple(d.get("seeds", ())),
            overrides=d.get("overrides", {}),
            out_dir=d.get("out_dir"),
        )

    def config_hash(self) -> str:
        d = self.payload()
        d.pop("out_dir")
        return hashlib.sha256(json.dumps(d, sort_keys=True).encode()).hexdigest()[:16]

    def knob(self, name):
        return self.overrides.get(name, EXPERIMENTS[self.experiment].knobs[name])


# ---------------------------------------------------------------------------
# shared, memoised computations


@lru_cache(maxsize=6)
def torus_case(theta, seed, n, octaves=None, gradient_scale=0.0):
    j = max_octave(n) if octaves is None else octaves
    grad = sin_product_potential(2, gradient_scale) if gradient_scale else ()
    spec = make_torus_field(2, theta, j, seed=seed, gradient_part=grad)
    ws = SpectralWorkspace(n, 2)
    u = sample(spec, TorusGrid(n, 2))
    return spec, u, pressure_spectral(u, ws), ws


@lru_cache(maxsize=6)
def disk_case(theta, seed, n_r, octaves=None):
    n_phi = 2 * n_r
    j = max_octave(n_r) if octaves is None else octaves
    spec = make_disk_field(theta, j, seed=seed)
    return spec, pressure_fd(spec, n_r, n_phi)


def _fit(f, cfg, seed, region=None, prefix=""):
    prof = oscillation_profile(f, region=region, pair_budget=cfg.knob("pair_budget"), seed=seed)
    fit = fit_exponent(prof, cfg.knob("drop_fine"), cfg.knob("drop_coarse"))
    return {f"{prefix}exponent": fit.exponent, f"{prefix}r2": fit.r2, f"{prefix}seminorm": fit.seminorm}, prof


def _sup(f):
    return float(np.max(np.linalg.norm(f.values, axis=-1)))


# ---------------------------------------------------------------------------
# experiment protocols


def _torus_double(theta, seed, n, cfg):
    spec, u, p, _ = torus_case(theta, seed, n)
    ru, _ = _fit(u, cfg, seed, prefix="u_")
    rp, _ = _fit(p, cfg, seed, prefix="p_")
    j = max_octave(n)
    return [{
        "theta": theta, "seed": seed, "N": n, "octaves": j,
        **ru, **rp,
        "target_p": 2 * theta,
        "p_spectral_exponent": shell_decay_exponent(p, 2, j + 1),
        "u_sup": _sup(u), "p_sup": _sup(p),
    }]


def _torus_split(theta, seed, n, cfg):
    spec, u, _, ws = torus_case(theta, seed, n, gradient_scale=cfg.knob("gradient_scale"))
    split = divergence_decomposition(u, ws)
    rp, _ = _fit(split.p_direct, cfg, seed, prefix="p_")
    return [{
        "theta": theta, "seed": seed, "N": n,
        "split_error": split.split_error(),
        **rp,
        "target_p": 2 * theta,
        "g_sup": _sup(split.g),
        "p1_sup": _sup(split.p1), "p2_sup": _sup(split.p2), "p3_sup": _sup(split.p3),
    }]


def _torus_loglip(theta, seed, n, cfg):
    _, _, p, _ = torus_case(theta, seed, n)
    rp, prof = _fit(p, cfg, seed, prefix="p_")
    lo, hi = cfg.knob("drop_fine"), prof.scales.size - cfg.knob("drop_coarse")
    r = prof.scales[::-1][lo:hi]
    w = prof.oscillation[::-1][lo:hi]
    loglip = w / (r * np.abs(np.log(r)))
    lip = w / r
    _, all_ratio = log_lipschitz_ratios(prof)
    return [{
        "theta": theta, "seed": seed, "N": n, **rp,
        "loglip_constant": float(np.max(all_ratio)),
        "loglip_spread_fine3": spread(loglip[:3]),
        "lipschitz_growth_fine3": float(lip[0] / lip[2]),
        "lipschitz_growth_window": float(lip[0] / lip[-1]),
    }]


def _torus_gradient(theta, seed, n, cfg):
    _, _, p, _ = torus_case(theta, seed, n)
    fit = gradient_exponent(p, 2 * theta - 1, pair_budget=cfg.knob("pair_budget"), seed=seed,
                            drop_fine=cfg.knob("drop_fine"), drop_coarse=cfg.knob("drop_coarse"))
    rp, _ = _fit(p, cfg, seed, prefix="p_")
    return [{
        "theta": theta, "seed": seed, "N": n,
        "grad_exponent": fit.exponent, "grad_r2": fit.r2, "target_grad": 2 * theta - 1, **rp,
    }]


def _disk_boundary(theta, seed, n, cfg):
    spec, p = disk_case(theta, seed, n)
    u = sample(spec, p.geometry)
    w = cfg.knob("band")
    row = {"theta": theta, "seed": seed, "n_r": n, "n_phi": 2 * n, "octaves": max_octave(n)}
    for name, reg in (("full", Region.full()), ("interior", Region.interior(w)), ("boundary", Region.boundary_band(w))):
        row.update(_fit(p, cfg, seed, reg, prefix=f"p_{name}_")[0])
    row["u_full_exponent"] = _fit(u, cfg, seed)[0]["exponent"]
    return [row]


def _disk_gradient(theta, seed, n, cfg):
    spec, p = disk_case(theta, seed, n)
    fit = gradient_exponent(p, 2 * theta - 1, region=Region.interior(cfg.knob("band")),
                            pair_budget=cfg.knob("pair_budget"), seed=seed,
                            drop_fine=cfg.knob("drop_fine"), drop_coarse=cfg.knob("drop_coarse"))
    return [{"theta": theta, "seed": seed, "n_r": n, "grad_interior_exponent": fit.exponent,
             "grad_r2": fit.r2, "target_grad": 2 * theta - 1}]


def _disk_almost_double(theta, seed, n, cfg):
    spec, p = disk_case(theta, seed, n)
    rp, _ = _fit(p, cfg, seed, prefix="p_")
    return [{"theta": theta, "seed": seed, "n_r": n, **rp, "target_p": 2 * theta}]


def _kernel_bounds(theta, seed, n, cfg):
    rows = []
    for count in cfg.knob("sample_counts"):
        for beta in ((0, 0), (1, 0), (0, 1), (2, 0), (1, 1), (0, 2)):
            rows.append(check_pointwise_bound(beta, int(count), seed).row())
        rows.append(check_difference_bound(int(count), seed).row())
    return rows


def kernel_residual_rows(seed=0):
    return [{"check": k, "value": v} for k, v in defining_residuals(seed).items()]


def _proof_configs(seed, count):
    rng = np.random.default_rng(np.random.SeedSequence([seed, 4]))
    out = []
    for _ in range(count):
        r = 0.5 * math.sqrt(rng.uniform())
        a, b = rng.uniform(0, 2 * np.pi, 2)
        out.append((np.array([r * math.cos(a), r * math.sin(a)]), np.array([math.cos(b), math.sin(b)])))
    return out


def _proof_scaling(theta, seed, n, cfg):
    spec = make_disk_field(theta, cfg.knob("octaves"), seed=seed)
    rows = []
    for c, (xbar, e) in enumerate(_proof_configs(seed, cfg.knob("configurations"))):
        for k in cfg.knob("lambda_exponents"):
            lam = 2.0 ** (-k)
            ps = proof_split(spec, xbar + 0.5 * lam * e, xbar - 0.5 * lam * e)
            rows.append({"theta": theta, "seed": seed, "config": c, **ps.row(),
                         "reconstruction_error": ps.reconstruction_error()})
    return rows


def _approx_uniformity(theta, seed, n, cfg):
    spec = make_disk_field(theta, cfg.knob("octaves"), seed=seed)
    grid = DiskGrid(n, 2 * n)
    u = sample(spec, grid)
    prof_u = oscillation_profile(u, seed=seed)
    lo, hi = cfg.knob("drop_fine"), cfg.knob("drop_coarse")
    semi_u = holder_seminorm(prof_u, theta, lo, hi)
    rows = []
    for eps in cfg.knob("epsilons"):
        res = mollify_and_correct(spec, float(eps), grid=grid)
        prof = oscillation_profile(res.field, seed=seed)
        semi = holder_seminorm(prof, theta, lo, hi)
        rows.append({
            "theta": theta, "seed": seed, "epsilon": float(eps), "n_r": n,
            "sup_distance": res.sup_distance, "tangency": res.boundary_residual,
            "flux_mode0": res.flux_mode0, "seminorm_eps": semi, "seminorm_u": semi_u,
            "seminorm_ratio": semi / semi_u,
        })
    return rows


def _weak_suite(theta, seed, n, cfg):
    lib = test_function_library(cfg.knob("test_functions"), seed)
    rows = []
    cases = [("lacunary", *disk_case(theta, seed, n))]
    if theta == min(cfg.thetas) and seed == min(cfg.seeds):
        rot = rigid_rotation()
        cases.append(("rotation", rot, pressure_fd(rot, n, 2 * n)))
    for name, spec, p in cases:
        u2 = _sup(sample(spec, p.geometry)) ** 2
        res = max(weak_residual(p, spec, f) for f in lib)
        rows.append({"theta": theta, "seed": seed, "field": name, "solver": "fd", "n_r": n,
                     "max_residual": res, "u_sup_sq": u2, "relative": res / u2})
    return rows


def _bilinear_symmetry(theta, seed, n, cfg):
    ws = SpectralWorkspace(n, 2)
    g = TorusGrid(n, 2)
    j = max_octave(n)
    u = sample(make_torus_field(2, theta, j, seed=2 * seed), g)
    v = sample(make_torus_field(2, min(0.9, theta + 0.2), j, seed=2 * seed + 1), g)
    tuv = bilinear_pressure(u, v, ws).scalar
    tvu = bilinear_pressure(v, u, ws).scalar
    return [{"theta": theta, "seed": seed, "N": n,
             "symmetry_error": float(np.max(np.abs(tuv - tvu)) / np.max(np.abs(tuv)))}]


# ---------------------------------------------------------------------------
# registry


_FIT = {"pair_budget": None, "drop_fine": 2, "drop_coarse": 2}


@dataclass(frozen=True)
class Experiment:
    name: str
    claim: str
    runner: object
    thetas: tuple
    grids: tuple
    seeds: tuple
    knobs: dict
    plot: tuple = ()  # (x column, [(y column, title)], reference expression or "")


_NONE = Experiment("", "", None, (), (), (), {})

EXPERIMENTS: dict[str, Experiment] = {
    e.name: e
    for e in [
        Experiment("torus-double", "torus pressure is C^{2 theta} for divergence-free C^theta velocity",
                   _torus_double, (0.2, 0.3, 0.4), (1024,), (0, 1, 2), dict(_FIT),
                   ("theta", [("u_exponent", "u"), ("p_exponent", "p"), ("p_spectral_exponent", "p (spectral)")], "2*x")),
        Experiment("torus-divfree-split", "pressure split p1+p2+p3 for div u = g != 0",
                   _torus_split, (0.3,), (512,), (0, 1, 2), {**_FIT, "gradient_scale": 0.5},
                   ("theta", [("p_exponent", "p")], "2*x")),
        Experiment("torus-loglip", "pressure is log-Lipschitz at theta = 1/2",
                   _torus_loglip, (0.5,), (1024,), (0, 1, 2), dict(_FIT),
                   ("seed", [("loglip_spread_fine3", "log-Lipschitz spread"), ("lipschitz_growth_window", "Lipschitz growth")], "3")),
        Experiment("torus-gradient", "grad p is C^{2 theta - 1} for theta > 1/2",
                   _torus_gradient, (0.75,), (1024,), (0, 1, 2), dict(_FIT),
                   ("theta", [("grad_exponent", "grad p")], "2*x-1")),
        Experiment("disk-boundary", "disk pressure is C^theta up to the boundary",
                   _disk_boundary, (0.3,), (512,), (0, 1, 2), {**_FIT, "band": 0.1},
                   ("theta", [("p_full_exponent", "full"), ("p_interior_exponent", "interior"), ("p_boundary_exponent", "boundary band")], "x")),
        Experiment("disk-gradient", "disk pressure is C^{1, 2 theta - 1} for theta > 1/2",
                   _disk_gradient, (0.75,), (512,), (0, 1, 2), {**_FIT, "band": 0.1},
                   ("theta", [("grad_interior_exponent", "grad p (interior)")], "2*x-1")),
        Experiment("disk-almost-double", "disk pressure is C^{2 theta - eps}",
                   _disk_almost_double, (0.3,), (512,), (0, 1, 2), dict(_FIT),
                   ("theta", [("p_exponent", "p")], "2*x")),
        Experiment("kernel-bounds", "pointwise bounds on the Green-Neumann function",
                   _kernel_bounds, (), (0,), (0,), {"sample_counts": [10_000, 100_000]},
                   ("samples", [("sup_ratio", "sup ratio")], "")),
        Experiment("proof-scaling", "terms A, B1, B2 scale like lambda^theta",
                   _proof_scaling, (0.4,), (0,), (0,),
                   {"octaves": 6, "configurations": 4, "lambda_exponents": [3, 4, 5, 6, 7]},
                   ("lambda", [("A", "A"), ("B1", "B1"), ("B2", "B2")], "")),
        Experiment("approx-uniformity", "mollified, boundary-corrected velocities stay uniformly C^theta",
                   _approx_uniformity, (0.3,), (128,), (0,),
                   {"octaves": 5, "epsilons": [0.1, 0.05, 0.025], "drop_fine": 2, "drop_coarse": 2},
                   ("epsilon", [("sup_distance", "sup |u_eps - u|"), ("seminorm_ratio", "seminorm ratio")], "")),
        Experiment("weak-residual-suite", "solver outputs satisfy the weak formulation",
                   _weak_suite, (0.3, 0.4), (256,), (0, 1, 2), {"test_functions": 20},
                   ("theta", [("relative", "max residual / |u|^2")], "")),
        Experiment("bilinear-symmetry", "T(u, v) = T(v, u)",
                   _bilinear_symmetry, (0.3,), (256,), (0, 1, 2, 3, 4), {},
                   ("seed", [("symmetry_error", "relative asymmetry")], "")),
    ]
}


def list_experiments() -> list[tuple[str, str]]:
    return [(e.name, e.claim) for e in EXPERIMENTS.values()]


# ---------------------------------------------------------------------------
# running and output


@dataclass
class RegularityReport:
    config: ExperimentConfig
    rows: list
    summary: list
    failures: list
    files: list = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.failures

    def column(self, name, **where):
        return [r[name] for r in self.rows if all(r.get(k) == v for k, v in where.items())]


def _jobs(cfg: ExperimentConfig):
    thetas = cfg.thetas or (float("nan"),)
    for theta in thetas:
        for n in cfg.grids:
            for seed in cfg.seeds:
                yield theta, seed, n


def _summarise(cfg: ExperimentConfig, rows: list) -> list:
    numeric = sorted({k for r in rows for k, v in r.items() if isinstance(v, float) and k != "theta"})
    groups: dict = {}
    for r in rows:
        groups.setdefault(r.get("theta", float("nan")), []).append(r)
    out = []
    for theta, rs in groups.items():
        row = {"experiment": cfg.experiment, "version": __version__, "config_hash": cfg.config_hash(),
               "theta": theta, "rows": len(rs)}
        for k in numeric:
            vals = np.array([r[k] for r in rs if k in r and isinstance(r[k], float)], dtype=float)
            if vals.size:
                row[f"{k}_mean"] = float(np.mean(vals))
                row[f"{k}_min"] = float(np.min(vals))
                row[f"{k}_max"] = float(np.max(vals))
        out.append(row)
    return out


def write_csv(path: Path, rows: list):
    keys: list = []
    for r in rows:
        keys += [k for k in r if k not in keys]
    with open(path, "w", newline="") as fh:
        w = csv.DictWriter(fh, fieldnames=keys, lineterminator="\n")
        w.writeheader()
        for r in rows:
            w.writerow({k: (repr(v) if isinstance(v, float) else v) for k, v in r.items()})


def plot_script(cfg: ExperimentConfig) -> str:
    exp = EXPERIMENTS[cfg.experiment]
    if not exp.plot:
        return ""
    xcol, ycols, ref = exp.plot
    name = cfg.experiment
    lines = [
        f"# gnuplot script for {name} (pressure-lab {__version__}, config {cfg.config_hash()})",
        'set datafile separator ","',
        "set key autotitle columnhead",
        "set terminal pngcairo size 800,600",
        f'set output "{name}.png"',
        f'set xlabel "{xcol}"',
        f'set title "{exp.claim}"',
    ]
    if xcol in ("lambda", "epsilon", "samples"):
        lines.append("set logscale xy")
    plots = [f'"{name}.csv" using "{xcol}":"{y}" with points pt 7 title "{t}"' for y, t in ycols]
    if ref:
        plots.append(f'{ref} with lines dt 2 title "target"')
    lines.append("plot " + ", \\\n     ".join(plots))
    return "\n".join(lines) + "\n"


def run(cfg: ExperimentConfig, write: bool = True) -> RegularityReport:
    """Run every ``(theta, seed, grid)`` job of ``cfg`` and optionally write outputs."""
    exp = EXPERIMENTS[cfg.experiment]
    rows, failures = [], []
    for theta, seed, n in _jobs(cfg):
        try:
            rows.extend(exp.runner(theta, seed, n, cfg))
        except Exception as exc:  # one failed job must not sink the sweep
            log.exception("job theta=%s seed=%s grid=%s failed", theta, seed, n)
            failures.append({"theta": theta, "seed": seed, "grid": n,
                             "error": type(exc).__name__, "message": str(exc)})
    if cfg.experiment == "kernel-bounds":
        rows += [{"beta": "residual:" + r["check"], "sup_ratio": r["value"]} for r in kernel_residual_rows()]
    report = RegularityReport(cfg, rows, _summarise(cfg, rows), failures)
    if write and cfg.out_dir:
        out = Path(cfg.out_dir)
        try:
            out.mkdir(parents=True, exist_ok=True)
        except OSError as exc:
            raise ConfigError(f"cannot create output directory {out}: {exc}") from exc
        base = out / cfg.experiment
        write_csv(base.with_suffix(".csv"), rows)
        write_csv(out / f"{cfg.experiment}_summary.csv", report.summary)
        (out / f"{cfg.experiment}.gp").write_text(plot_script(cfg))
        (out / f"{cfg.experiment}_config.json").write_text(cfg.to_text())
        report.files = [base.with_suffix(".csv"), out / f"{cfg.experiment}_summary.csv", out / f"{cfg.experiment}.gp"]
        if failures:
            write_csv(out / f"{cfg.experiment}_failures.csv", failures)
            report.files.append(out / f"{cfg.experiment}_failures.csv")
    return report


__all__ = [
    "ConfigError",
    "EXPERIMENTS",
    "ExperimentConfig",
    "RegularityReport",
    "disk_case",
    "list_experiments",
    "plot_script",
    "run",
    "torus_case",
    "write_csv",
]
