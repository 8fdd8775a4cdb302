"""Acceptance criteria 1-14 as callable checks.

Every check returns a ``CriterionResult``; ``verify`` runs a selection and
prints one PASS/FAIL line per criterion.  Expected values are closed-form
oracles or the regularity targets themselves, never outputs of the code
under test.
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass, field

import numpy as np

from .disk import QuadratureScheme, pressure_fd, pressure_representation
from .experiments import EXPERIMENTS, ExperimentConfig, disk_case, run
from .fields import make_disk_field, rigid_rotation
from .grid import GridField, TorusGrid
from .torus import pressure_spectral


@dataclass
class CriterionResult:
    number: int
    name: str
    passed: bool
    detail: str
    seconds: float = 0.0
    measured: dict = field(default_factory=dict)

    def line(self) -> str:
        flag = "PASS" if self.passed else "FAIL"
        return f"criterion {self.number:2d} [{flag}] {self.name}: {self.detail} ({self.seconds:.1f}s)"


def _experiment(name, out_dir=None, **kw):
    cfg = ExperimentConfig(experiment=name, out_dir=out_dir, **kw)
    rep = run(cfg, write=out_dir is not None)
    if rep.failures:
        raise RuntimeError(f"{name}: {len(rep.failures)} job(s) failed: {rep.failures[0]['error']}")
    return rep


def _fmt(values):
    return "[" + ", ".join(f"{v:.3g}" for v in values) + "]"


# ---------------------------------------------------------------------------


def criterion_1(out_dir=None) -> CriterionResult:
    t0 = time.perf_counter()
    g = TorusGrid(64, 2)
    x = g.points()
    u = GridField(g, np.stack([np.cos(x[..., 1]), np.cos(x[..., 0])], axis=-1))
    p = pressure_spectral(u)
    err = float(np.max(np.abs(p.scalar - np.sin(x[..., 0]) * np.sin(x[..., 1]))))
    dt = time.perf_counter() - t0
    ok = err < 1e-10 and dt < 1.0
    return CriterionResult(1, "spectral oracle", ok, f"max error {err:.2e} (< 1e-10), runtime {dt:.3f}s (< 1s)",
                           measured={"error": err, "runtime": dt})


def criterion_2(out_dir=None) -> CriterionResult:
    t0 = time.perf_counter()
    rep = _experiment("torus-double", out_dir)
    dt = time.perf_counter() - t0
    bad = []
    for r in rep.rows:
        if abs(r["p_exponent"] - 2 * r["theta"]) > 0.10 or abs(r["u_exponent"] - r["theta"]) > 0.08:
            bad.append(f"theta={r['theta']} seed={r['seed']}: u {r['u_exponent']:.3f} p {r['p_exponent']:.3f}")
    ok = not bad and len(rep.rows) == 9 and dt < 300
    detail = f"{9 - len(bad)}/9 rows within tolerance, runtime {dt:.0f}s (< 300s)"
    if bad:
        detail += "; off: " + "; ".join(bad)
    return CriterionResult(2, "torus double regularity", ok, detail, measured={"rows": rep.rows})


def criterion_3(out_dir=None) -> CriterionResult:
    rep = _experiment("torus-gradient", out_dir)
    g = rep.column("grad_exponent")
    ok = all(abs(v - 0.5) <= 0.12 for v in g)
    return CriterionResult(3, "torus gradient regularity", ok, f"grad p exponents {_fmt(g)} vs 0.5 +- 0.12",
                           measured={"rows": rep.rows})


def criterion_4(out_dir=None) -> CriterionResult:
    rep = _experiment("torus-loglip", out_dir)
    sp = rep.column("loglip_spread_fine3")
    gr = rep.column("lipschitz_growth_window")
    ok = all(s < 3 for s in sp) and all(v > 3 for v in gr)
    return CriterionResult(4, "log-Lipschitz borderline", ok,
                           f"log-Lipschitz spread {_fmt(sp)} (< 3), omega/r growth {_fmt(gr)} (> 3)",
                           measured={"rows": rep.rows})


def criterion_5(out_dir=None) -> CriterionResult:
    rep = _experiment("torus-divfree-split", out_dir)
    err = rep.column("split_error")
    ex = rep.column("p_exponent")
    ok = all(e < 1e-10 for e in err) and all(abs(v - 0.6) <= 0.10 for v in ex)
    return CriterionResult(5, "divergence split", ok,
                           f"split error max {max(err):.2e} (< 1e-10), p exponents {_fmt(ex)} vs 0.6 +- 0.10",
                           measured={"rows": rep.rows})


def _rotation_oracle(x):
    return 0.5 * np.sum(np.asarray(x) ** 2, axis=-1) - 0.25


def criterion_6(out_dir=None) -> CriterionResult:
    rot = rigid_rotation()
    rng = np.random.default_rng(6)
    r = 0.99 * np.sqrt(rng.uniform(size=40))
    a = rng.uniform(0, 2 * np.pi, 40)
    tg = np.stack([r * np.cos(a), r * np.sin(a)], axis=-1)
    rep_err = float(np.max(np.abs(pressure_representation(rot, tg) - _rotation_oracle(tg))))
    errs = []
    for n in (64, 128, 256):
        p = pressure_fd(rot, n, n)
        errs.append(float(np.max(np.abs(p.scalar - _rotation_oracle(p.geometry.points())))))
    ratios = [errs[i] / errs[i + 1] for i in range(2)]
    ok = rep_err < 1e-3 and errs[-1] < 1e-4 and all(q >= 3.5 for q in ratios)
    return CriterionResult(6, "disk closed-form oracle", ok,
                           f"representation error {rep_err:.2e} (< 1e-3), FD 256 error {errs[-1]:.2e} (< 1e-4), "
                           f"refinement ratios {_fmt(ratios)} (>= 3.5)",
                           measured={"rep_error": rep_err, "fd_errors": errs})


def cross_solver_discrepancy(theta=0.4, seed=0, n_r=256, n_phi=256, scheme=None):
    """Relative L-infinity gap between representation and FD on a subset of FD nodes."""
    spec = make_disk_field(theta, int(math.log2(n_r / 8)), seed=seed)
    p = pressure_fd(spec, n_r, n_phi)
    sel = (slice(n_r // 32, n_r, n_r // 8), slice(0, n_phi, max(1, n_phi // 12)))
    tg = p.geometry.points()[sel].reshape(-1, 2)
    pr = pressure_representation(spec, tg, scheme or QuadratureScheme())
    return float(np.max(np.abs(pr - p.scalar[sel].ravel())) / np.max(np.abs(p.scalar)))


def criterion_7(out_dir=None) -> CriterionResult:
    d = [cross_solver_discrepancy(0.4, s) for s in (0, 1, 2)]
    ok = all(v < 1e-2 for v in d)
    return CriterionResult(7, "cross-solver agreement", ok, f"relative discrepancy {_fmt(d)} (< 1e-2)",
                           measured={"discrepancy": d})


def criterion_8(out_dir=None) -> CriterionResult:
    rep = _experiment("disk-boundary", out_dir)
    b = rep.column("p_boundary_exponent")
    i = rep.column("p_interior_exponent")
    theta = EXPERIMENTS["disk-boundary"].thetas[0]
    ok = all(v >= theta - 0.10 for v in b) and all(v >= 2 * theta - 0.15 for v in i)
    return CriterionResult(8, "boundary Hölder regularity", ok,
                           f"boundary band {_fmt(b)} (>= {theta - 0.1:.2f}), interior {_fmt(i)} (>= {2 * theta - 0.15:.2f})",
                           measured={"rows": rep.rows})


def criterion_9(out_dir=None) -> CriterionResult:
    rep = _experiment("disk-almost-double", out_dir)
    e = rep.column("p_exponent")
    theta = EXPERIMENTS["disk-almost-double"].thetas[0]
    ok = all(v >= 2 * theta - 0.20 for v in e)
    return CriterionResult(9, "almost-double regularity", ok, f"full-domain p exponents {_fmt(e)} (>= {2 * theta - 0.2:.2f})",
                           measured={"rows": rep.rows})


def criterion_10(out_dir=None) -> CriterionResult:
    rep = _experiment("weak-residual-suite", out_dir)
    rel = rep.column("relative")
    ok = all(v < 1e-2 for v in rel)
    return CriterionResult(10, "weak formulation", ok,
                           f"{len(rel)} solver outputs, max residual / |u|^2 = {max(rel):.2e} (< 1e-2)",
                           measured={"rows": rep.rows})


def criterion_11(out_dir=None) -> CriterionResult:
    from .kernel import RESIDUAL_TOLERANCES

    rep = _experiment("kernel-bounds", out_dir)
    res = {r["beta"].split(":", 1)[1]: r["sup_ratio"] for r in rep.rows if str(r["beta"]).startswith("residual:")}
    bad_res = [k for k, v in res.items() if not v < RESIDUAL_TOLERANCES[k]]
    ratios = {}
    for r in rep.rows:
        if str(r["beta"]).startswith("residual:"):
            continue
        ratios.setdefault(r["beta"], {})[r["samples"]] = r["sup_ratio"]
    labels = ["10", "01", "20", "11", "02", "diff"]
    factors = {k: max(ratios[k].values()) / min(ratios[k].values()) for k in labels}
    bad_ratio = [k for k, f in factors.items() if not (np.isfinite(f) and f <= 2.0)]
    ok = not bad_res and not bad_ratio
    detail = (f"residuals within tolerance: {len(res) - len(bad_res)}/{len(res)}"
              + (f" (failing: {bad_res})" if bad_res else "")
              + "; refinement factors " + ", ".join(f"{k}:{v:.3f}" for k, v in factors.items()) + " (<= 2)")
    return CriterionResult(11, "kernel bounds", ok, detail, measured={"residuals": res, "factors": factors})


def criterion_12(out_dir=None) -> CriterionResult:
    rep = _experiment("proof-scaling", out_dir)
    theta = EXPERIMENTS["proof-scaling"].thetas[0]
    lams = sorted({r["lambda"] for r in rep.rows})
    slopes = {}
    for term in ("A", "B1", "B2"):
        m = [max(abs(r[term]) for r in rep.rows if r["lambda"] == lam) for lam in lams]
        slopes[term] = float(np.polyfit(np.log(lams), np.log(m), 1)[0])
    rec = max(r["reconstruction_error"] for r in rep.rows)
    ok = all(s >= theta - 0.10 for s in slopes.values()) and rec < 1e-2
    return CriterionResult(12, "proof-term scaling", ok,
                           "slopes " + ", ".join(f"{k} {v:.3f}" for k, v in slopes.items())
                           + f" (>= {theta - 0.1:.2f}), max reconstruction error {rec:.2e} (< 1e-2)",
                           measured={"slopes": slopes, "reconstruction": rec})


def criterion_13(out_dir=None) -> CriterionResult:
    rep = _experiment("approx-uniformity", out_dir)
    rows = sorted(rep.rows, key=lambda r: -r["epsilon"])
    d = [r["sup_distance"] for r in rows]
    tang = max(r["tangency"] for r in rows)
    ratio = [r["seminorm_ratio"] for r in rows]
    ok = all(d[i + 1] < d[i] for i in range(len(d) - 1)) and tang < 1e-6 and all(q <= 3 for q in ratio)
    return CriterionResult(13, "approximation uniformity", ok,
                           f"sup distance {_fmt(d)} (strictly decreasing), tangency {tang:.1e} (< 1e-6), "
                           f"seminorm ratio {_fmt(ratio)} (<= 3)",
                           measured={"rows": rows})


def criterion_14(out_dir=None) -> CriterionResult:
    rep = _experiment("bilinear-symmetry", out_dir)
    e = rep.column("symmetry_error")
    ok = all(v < 1e-12 for v in e)
    return CriterionResult(14, "bilinear symmetry", ok, f"max relative asymmetry {max(e):.2e} (< 1e-12)",
                           measured={"errors": e})


CRITERIA = {i: globals()[f"criterion_{i}"] for i in range(1, 15)}


def evaluate(number: int, out_dir=None) -> CriterionResult:
    t0 = time.perf_counter()
    try:
        res = CRITERIA[number](out_dir)
    except Exception as exc:  # a crash is a failure, reported on the same line
        res = CriterionResult(number, CRITERIA[number].__name__, False, f"error {type(exc).__name__}: {exc}")
    res.seconds = time.perf_counter() - t0
    return res


def verify(numbers=None, out_dir=None, echo=print) -> list[CriterionResult]:
    results = []
    t0 = time.perf_counter()
    for n in numbers or sorted(CRITERIA):
        res = evaluate(n, out_dir)
        echo(res.line())
        results.append(res)
    passed = sum(r.passed for r in results)
    echo(f"{passed}/{len(results)} criteria passed in {time.perf_counter() - t0:.0f}s")
    return results


__all__ = ["CRITERIA", "CriterionResult", "cross_solver_discrepancy", "evaluate", "verify", "disk_case"]
