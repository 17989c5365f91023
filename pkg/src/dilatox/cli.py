"""Command-line front end: experiment configs in, CSV/JSON artifacts out.

Configs are TOML (or JSON with --json) with one block per subcommand.
Every text output embeds the resolved config and package version so a
result file is self-describing, and identical configs re-run to byte
identical files.  Exit codes: 0 success, 2 config error, 3 policy
refusal, 4 numerical failure.
"""
from __future__ import annotations

import argparse
import json
import os
import sys
from pathlib import Path

import numpy as np

try:
    import tomllib
except ModuleNotFoundError:  # pragma: no cover - python < 3.11
    import tomli as tomllib

from . import __version__, _io
from .ikeda import p_ch, p_st_ikeda
from .mfi import (
    FractalSpec,
    NormalizationError,
    cauchy_tail_bound,
    measure_charfn,
    mfi_eval,
    prefractal,
    weight_bound,
)
from .models import (
    DivergenceError,
    GaussianNoise,
    IkedaMap,
    KuboAndersen,
    LinearDet,
    MixedNoise,
    NoNoise,
    OrnsteinUhlenbeck,
    map_dim,
)
from .numkit import Grid1D, Grid2D
from .simulate import (
    EnsembleSpec,
    compare as compare_metrics,
    run_ensemble,
    write_samples_binary,
)
from .stationary import (
    CharFnResult,
    _frequency_points,
    charfn_gauss_ka,
    charfn_linear_det,
    charfn_linear_gauss,
    density_from_charfn,
    gauss_ka_values,
    linear_det_values,
    linear_gauss_values,
    noise_charfn,
)

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_POLICY = 3
EXIT_NUMERICAL = 4

_MATERIALIZE_CAP = 1 << 24


class ConfigError(Exception):
    """Invalid or missing configuration; exit code 2."""


class PolicyRefusal(Exception):
    """The request is well-formed but deliberately not served; exit 3."""


# -- config access ----------------------------------------------------------

_MISSING = object()


def _get(block: dict, where: str, key: str, default=_MISSING):
    if key in block:
        return block[key]
    if default is _MISSING:
        raise ConfigError(f"[{where}] missing required key '{key}'")
    return default


def _num(block, where, key, default=_MISSING) -> float:
    v = _get(block, where, key, default)
    if v is default and default is not _MISSING:
        return v
    if isinstance(v, bool) or not isinstance(v, (int, float)):
        raise ConfigError(f"[{where}] '{key}' must be a number, got {v!r}")
    return float(v)


def _int(block, where, key, default=_MISSING) -> int:
    v = _get(block, where, key, default)
    if v is default and default is not _MISSING:
        return v
    if isinstance(v, bool) or not isinstance(v, int):
        raise ConfigError(f"[{where}] '{key}' must be an integer, got {v!r}")
    return v


def _str(block, where, key, default=_MISSING) -> str:
    v = _get(block, where, key, default)
    if not isinstance(v, str):
        raise ConfigError(f"[{where}] '{key}' must be a string, got {v!r}")
    return v


def _dict(block, where, key, default=_MISSING) -> dict:
    v = _get(block, where, key, default)
    if v is default and default is not _MISSING:
        return v
    if not isinstance(v, dict):
        raise ConfigError(f"[{where}] '{key}' must be a table/object")
    return v


def _list(block, where, key, default=_MISSING) -> list:
    v = _get(block, where, key, default)
    if v is default and default is not _MISSING:
        return v
    if not isinstance(v, list):
        raise ConfigError(f"[{where}] '{key}' must be a list")
    return v


def _built(where: str, ctor, *a, **kw):
    """Constructor call whose ValueError is a config problem, not a
    numerical one.  Normalization defects stay policy refusals."""
    try:
        return ctor(*a, **kw)
    except NormalizationError:
        raise
    except (TypeError, ValueError) as e:
        raise ConfigError(f"[{where}] {e}")


def _grid1d(block: dict, where: str) -> Grid1D:
    return _built(where, Grid1D, _num(block, where, "lo"),
                  _num(block, where, "hi"), _int(block, where, "count"))


def _grid2d(block: dict, where: str) -> Grid2D:
    return _built(where, Grid2D,
                  _num(block, where, "xlo"), _num(block, where, "xhi"),
                  _int(block, where, "nx"),
                  _num(block, where, "ylo"), _num(block, where, "yhi"),
                  _int(block, where, "ny"))


def _grid_any(block: dict, where: str):
    return _grid1d(block, where) if "count" in block else _grid2d(block, where)


def _complex_list(raw: list, where: str, key: str) -> list:
    out = []
    for v in raw:
        if isinstance(v, (int, float)) and not isinstance(v, bool):
            out.append(complex(v))
        elif (isinstance(v, list) and len(v) == 2
              and all(isinstance(c, (int, float)) for c in v)):
            out.append(complex(v[0], v[1]))
        else:
            raise ConfigError(f"[{where}] '{key}' entries must be numbers "
                              f"or [re, im] pairs, got {v!r}")
    return out


# -- spec builders ----------------------------------------------------------


def _map_spec(block: dict, where: str):
    kind = _str(block, where, "kind")
    if kind == "linear":
        A = _get(block, where, "offset")
        return _built(where, LinearDet, offset=tuple(np.atleast_1d(A)),
                      kappa=_num(block, where, "kappa"))
    if kind == "ikeda":
        return _built(where, IkedaMap, kappa=_num(block, where, "kappa"),
                      lam=_num(block, where, "lam"),
                      theta0=_num(block, where, "theta0", 0.0))
    raise ConfigError(f"[{where}] unknown map kind {kind!r} "
                      "(expected 'linear' or 'ikeda')")


def _noise_spec(block: dict, where: str):
    kind = _str(block, where, "kind")
    if kind == "none":
        return NoNoise()
    if kind == "gaussian":
        return _built(where, GaussianNoise, R=_num(block, where, "R"),
                      d=_int(block, where, "d", 1))
    if kind == "jump":
        return _built(where, KuboAndersen,
                      points=tuple(_list(block, where, "points")),
                      probs=tuple(_list(block, where, "probs")))
    if kind == "ou":
        return _built(where, OrnsteinUhlenbeck, R=_num(block, where, "R"),
                      tau_cor=_num(block, where, "tau_cor"),
                      t_del=_num(block, where, "t_del"),
                      d=_int(block, where, "d", 1))
    if kind == "mixed":
        g = _noise_spec(_dict(block, where, "gaussian"), where + ".gaussian")
        j = _noise_spec(_dict(block, where, "jumps"), where + ".jumps")
        return _built(where, MixedNoise, gaussian=g, jumps=j)
    raise ConfigError(f"[{where}] unknown noise kind {kind!r} (expected "
                      "'none', 'gaussian', 'jump', 'ou', or 'mixed')")


def _ensemble_spec(block: dict, where: str, seed_override) -> EnsembleSpec:
    seed = seed_override if seed_override is not None else \
        _int(block, where, "seed")
    block["seed"] = seed  # resolved value lands in the embedded config
    x0 = block.get("x0")
    return _built(where, EnsembleSpec,
                  map=_map_spec(_dict(block, where, "map"), where + ".map"),
                  noise=_noise_spec(_dict(block, where, "noise",
                                          {"kind": "none"}),
                                    where + ".noise"),
                  chains=_int(block, where, "chains"),
                  steps=_int(block, where, "steps"),
                  seed=seed,
                  burn_in=_int(block, where, "burn_in", 1000),
                  thin=_int(block, where, "thin", 1),
                  x0=None if x0 is None else tuple(np.atleast_1d(x0)))


# -- output helpers ---------------------------------------------------------


def _comments(cfg: dict) -> list:
    return [f"dilatox {__version__}",
            "config " + json.dumps(cfg, sort_keys=True)]


def _write_csv(outdir: Path, name: str, cfg: dict, colnames, cols) -> str:
    path = outdir / name
    _io.write_csv(path, _comments(cfg), colnames, cols)
    print(f"wrote {path}")
    return name


def _write_report(outdir: Path, name: str, cfg: dict, payload: dict) -> str:
    doc = {"version": __version__, "config": cfg}
    doc.update(payload)
    path = outdir / name
    path.write_text(_io.json_dumps(doc), encoding="utf-8")
    print(f"wrote {path}")
    return name


def _cf_columns(cf: CharFnResult):
    pts = _frequency_points(cf.grid)
    vals = cf.point_values()
    if pts.shape[1] == 1:
        return ("u", "re", "im"), (pts[:, 0], vals.real, vals.imag)
    return (("ux", "uy", "re", "im"),
            (pts[:, 0], pts[:, 1], vals.real, vals.imag))


# -- stationary command -----------------------------------------------------


def _stationary_build(block: dict, where: str):
    """(CharFnResult, scaling residual max) for the configured model."""
    model = _str(block, where, "model")
    grid = _grid_any(_dict(block, where, "grid"), where + ".grid")
    kappa = _num(block, where, "kappa")
    pts = _frequency_points(grid)
    kpts = kappa * pts

    if model == "linear_det":
        A = _get(block, where, "A")
        cf = _built(where, charfn_linear_det, A, kappa, grid)
        shift = np.exp(-1j * (pts @ np.asarray(cf.params["offset"])))
        at_k = linear_det_values(A, kappa, kpts)
        factor = shift
    elif model == "linear_gauss":
        A = _get(block, where, "A")
        R = _num(block, where, "R")
        cf = _built(where, charfn_linear_gauss, A, kappa, R, grid)
        shift = np.exp(-1j * (pts @ np.asarray(cf.params["offset"])))
        factor = shift * noise_charfn(GaussianNoise(R=R, d=pts.shape[1]), pts)
        at_k = linear_gauss_values(A, kappa, R, kpts)
    elif model == "gauss_ka":
        R = _num(block, where, "R")
        ka = _built(where + ".jumps", KuboAndersen,
                    points=tuple(_list(block, where, "points")),
                    probs=tuple(_list(block, where, "probs")))
        cf = _built(where, charfn_gauss_ka, kappa, R, ka, grid)
        factor = noise_charfn(ka, pts)
        if R > 0.0:
            factor = factor * noise_charfn(GaussianNoise(R=R, d=pts.shape[1]),
                                           pts)
        at_k = gauss_ka_values(kappa, R, ka, kpts)[0]
    else:
        raise ConfigError(f"[{where}] unknown model {model!r} (expected "
                          "'linear_det', 'linear_gauss', or 'gauss_ka')")

    residual = float(np.abs(cf.point_values() - factor * at_k).max())
    return cf, residual


def cmd_stationary(cfg: dict, args, outdir: Path) -> int:
    where = "stationary"
    block = _dict(cfg, "config", where)
    cf, residual = _stationary_build(block, where)

    # refuse density requests for singular laws before writing anything
    dens_block = _dict(block, where, "density", None)
    if dens_block is not None:
        if cf.model == "linear_det":
            raise PolicyRefusal(
                "the stationary law is a point mass; no density exists - "
                "compare cumulative distributions of sorted samples instead")
        if cf.model == "gauss_ka" and float(block["R"]) == 0.0:
            raise PolicyRefusal(
                "R = 0 gives a singular fractal law with no density - "
                "compare cumulative distributions of sorted samples instead")

    outputs = [_write_csv(outdir, "charfn.csv", cfg, *_cf_columns(cf))]
    payload = {
        "model": cf.model,
        "params": cf.params,
        "scaling_residual_max": residual,
        "max_abs": float(np.abs(cf.values).max()),
    }
    if cf.flagged is not None:
        payload["truncation"] = {
            "max_terms_used": int(np.max(cf.terms_used)),
            "flagged_points": int(np.count_nonzero(cf.flagged)),
        }

    if dens_block is not None:
        xgrid = _grid_any(dens_block, where + ".density")
        dens = density_from_charfn(cf, xgrid)
        if isinstance(xgrid, Grid1D):
            names, cols = ("x", "density"), (xgrid.points(), dens.values)
        else:
            xm, ym = np.meshgrid(xgrid.xpoints(), xgrid.ypoints(),
                                 indexing="ij")
            names = ("x", "y", "density")
            cols = (xm.ravel(), ym.ravel(), dens.values.ravel())
        outputs.append(_write_csv(outdir, "density.csv", cfg, names, cols))
        payload["density"] = {k: dens.info[k] for k in
                              ("boundary_max_abs", "boundary_decayed",
                               "max_imag")}

    payload["outputs"] = outputs
    _write_report(outdir, "report.json", cfg, payload)
    return EXIT_OK


# -- mfi command ------------------------------------------------------------

_INTEGRANDS = {
    "one": lambda x: np.ones_like(np.asarray(x, dtype=float)),
    "x": lambda x: np.asarray(x, dtype=float),
    "x2": lambda x: np.asarray(x, dtype=float) ** 2,
    "x3": lambda x: np.asarray(x, dtype=float) ** 3,
    "cos": np.cos,
    "sin": np.sin,
}


def cmd_mfi(cfg: dict, args, outdir: Path) -> int:
    where = "mfi"
    block = _dict(cfg, "config", where)
    weights = _complex_list(_list(block, where, "weights", [1.0, 1.0]),
                            where, "weights")
    spec = _built(where, FractalSpec,
                  kappa=_num(block, where, "kappa"),
                  anchor=_num(block, where, "anchor"),
                  levels=tuple(_list(block, where, "levels", [0.0, 1.0])),
                  weights=tuple(weights),
                  unchecked=args.unchecked)

    fname = _str(block, where, "f", "one")
    if fname not in _INTEGRANDS:
        raise ConfigError(f"[{where}] unknown integrand {fname!r}; pick one "
                          f"of {sorted(_INTEGRANDS)}")
    deriv_bound = _num(block, where, "deriv_bound", None)
    result = mfi_eval(spec, _INTEGRANDS[fname],
                      tol=_num(block, where, "tol", 1e-10),
                      n_max=_int(block, where, "n_max", 24),
                      deriv_bound=deriv_bound,
                      threads=args.resolved_threads)

    g1, g = weight_bound(spec)
    payload = {"integrand": fname, "result": result.to_dict(),
               "weight_growth": {"G1": g1, "G": g}}
    if deriv_bound is not None:
        payload["tail_bounds"] = [
            cauchy_tail_bound(deriv_bound, g, spec.kappa, n)
            for n in range(1, len(result.trace) + 1)]

    outputs = []
    gen = _int(block, where, "prefractal_generation", None)
    if gen is not None:
        if spec.point_count(gen) > _MATERIALIZE_CAP:
            raise ConfigError(f"[{where}] prefractal generation {gen} has "
                              f"{spec.point_count(gen)} points, over the "
                              f"{_MATERIALIZE_CAP} cap")
        ws = prefractal(spec, gen)
        pts, th = ws.points(), ws.weights()
        outputs.append(_write_csv(outdir, "prefractal.csv", cfg,
                                  ("lambda", "weight_re", "weight_im"),
                                  (pts, th.real, th.imag)))
        payload["prefractal"] = {"generation": gen, "points": ws.count,
                                 "normalization": ws.normalization()}

    om_block = _dict(block, where, "omega_grid", None)
    if om_block is not None:
        gf = measure_charfn(spec, _grid1d(om_block, where + ".omega_grid"))
        outputs.append(_write_csv(outdir, "measure_charfn.csv", cfg,
                                  ("omega", "re", "im"),
                                  (gf.grid.points(), gf.values.real,
                                   gf.values.imag)))
        payload["measure_charfn"] = {
            "max_terms_used": int(np.max(gf.terms_used)),
            "flagged_points": int(np.count_nonzero(gf.flagged)),
        }

    payload["outputs"] = outputs
    _write_report(outdir, "report.json", cfg, payload)
    if not result.converged:
        note = (f"note: not converged after {result.n_final} generations "
                f"(last gap {result.cauchy_gap:.3e}")
        if result.tail_bound is not None:
            note += f", certified tail bound {result.tail_bound:.3e}"
        print(note + ")")
    return EXIT_OK


# -- ikeda command ----------------------------------------------------------


def cmd_ikeda(cfg: dict, args, outdir: Path) -> int:
    where = "ikeda"
    block = _dict(cfg, "config", where)
    kappa = _num(block, where, "kappa")
    rgrid = _grid1d(_dict(block, where, "grid"), where + ".grid")
    quad_tol = _num(block, where, "quad_tol", 1e-4)
    if not 0.0 < kappa < 1.0:
        raise ConfigError(f"[{where}] kappa must lie in (0, 1), got {kappa}")
    if rgrid.lo < 0.0:
        raise ConfigError(f"[{where}] radial grid must start at r >= 0")

    dens = p_ch(kappa, rgrid, quad_tol=quad_tol,
                threads=args.resolved_threads)
    mass = dens.mass()
    outputs = [_write_csv(outdir, "p_ch.csv", cfg, ("r", "density"),
                          (rgrid.points(), dens.values))]
    payload = {
        "kappa": kappa,
        "mass": mass,
        "support_radius": dens.support_radius,
        "peak": float(dens.values.max()),
        "min_value": float(dens.values.min()),
        "b_used": dens.b_used,
        "quad_tol": quad_tol,
    }
    print(f"chaotic ring mass {mass:.6f} (want 1 within 1e-3)")

    st_block = _dict(block, where, "stationary", None)
    if st_block is not None:
        R = _num(st_block, where + ".stationary", "R")
        if R <= 0.0:
            raise ConfigError(f"[{where}.stationary] R must be positive "
                              "(the noise-free ring is the chaotic density "
                              "itself)")
        xygrid = _grid2d(_dict(st_block, where + ".stationary", "grid"),
                         where + ".stationary.grid")
        gf = p_st_ikeda(kappa, R, xygrid,
                        quad_tol=_num(st_block, where + ".stationary",
                                      "quad_tol", 1e-7),
                        threads=args.resolved_threads)
        xm, ym = np.meshgrid(xygrid.xpoints(), xygrid.ypoints(),
                             indexing="ij")
        outputs.append(_write_csv(outdir, "p_st.csv", cfg,
                                  ("x", "y", "density"),
                                  (xm.ravel(), ym.ravel(),
                                   gf.values.ravel())))
        payload["stationary"] = {"R": R, "width": gf.info["width"],
                                 "b_used": gf.info["b_used"]}

    payload["outputs"] = outputs
    _write_report(outdir, "report.json", cfg, payload)
    return EXIT_OK


# -- simulate command -------------------------------------------------------


def cmd_simulate(cfg: dict, args, outdir: Path) -> int:
    where = "simulate"
    block = _dict(cfg, "config", where)
    spec = _ensemble_spec(block, where, args.seed)
    grid_block = _dict(block, where, "ecf_grid", None)
    ugrid = None if grid_block is None else \
        _grid_any(grid_block, where + ".ecf_grid")
    if ugrid is not None and (1 if isinstance(ugrid, Grid1D) else 2) != \
            map_dim(spec.map):
        raise ConfigError(f"[{where}.ecf_grid] grid dimension does not "
                          "match the state dimension")

    summary = run_ensemble(spec, ugrid=ugrid)

    outputs = []
    path = outdir / "samples.bin"
    write_samples_binary(path, summary.samples)
    print(f"wrote {path}")
    outputs.append("samples.bin")

    if summary.ecf is not None:
        pts = _frequency_points(ugrid)
        vals = summary.ecf.values.reshape(-1)
        if pts.shape[1] == 1:
            names, cols = ("u", "re", "im"), (pts[:, 0], vals.real, vals.imag)
        else:
            names = ("ux", "uy", "re", "im")
            cols = (pts[:, 0], pts[:, 1], vals.real, vals.imag)
        outputs.append(_write_csv(outdir, "ecf.csv", cfg, names, cols))

    payload = dict(summary.to_json_dict())
    payload["outputs"] = outputs
    _write_report(outdir, "summary.json", cfg, payload)
    return EXIT_OK


# -- compare command --------------------------------------------------------


def _analytic_side(block: dict, where: str, args):
    kind = _str(block, where, "kind")
    if kind == "stationary":
        cf, _ = _stationary_build(block, where)
        return cf
    if kind == "ikeda_chaotic":
        kappa = _num(block, where, "kappa")
        if not 0.0 < kappa < 1.0:
            raise ConfigError(f"[{where}] kappa must lie in (0, 1)")
        return p_ch(kappa, _grid1d(_dict(block, where, "grid"),
                                   where + ".grid"),
                    quad_tol=_num(block, where, "quad_tol", 1e-4),
                    threads=args.resolved_threads)
    if kind == "ikeda_stationary":
        R = _num(block, where, "R")
        if R <= 0.0:
            raise ConfigError(f"[{where}] R must be positive")
        return p_st_ikeda(_num(block, where, "kappa"), R,
                          _grid2d(_dict(block, where, "grid"),
                                  where + ".grid"),
                          quad_tol=_num(block, where, "quad_tol", 1e-7),
                          threads=args.resolved_threads)
    raise ConfigError(f"[{where}] unknown analytic kind {kind!r} (expected "
                      "'stationary', 'ikeda_chaotic', or 'ikeda_stationary')")


def cmd_compare(cfg: dict, args, outdir: Path) -> int:
    where = "compare"
    block = _dict(cfg, "config", where)
    analytic = _analytic_side(_dict(block, where, "analytic"),
                              where + ".analytic", args)
    spec = _ensemble_spec(_dict(block, where, "empirical"),
                          where + ".empirical", args.seed)
    ugrid = analytic.grid if isinstance(analytic, CharFnResult) else None
    summary = run_ensemble(spec, ugrid=ugrid)
    metrics = compare_metrics(analytic, summary)

    thresholds = _dict(block, where, "thresholds", {})
    unknown = sorted(set(thresholds) - set(metrics))
    if unknown:
        raise ConfigError(f"[{where}.thresholds] no such metric: "
                          f"{', '.join(unknown)} (computed: "
                          f"{', '.join(sorted(metrics))})")

    checks = {}
    all_passed = True
    for name in sorted(metrics):
        line = f"{name} = {metrics[name]:.6g}"
        if name in thresholds:
            limit = _num(thresholds, where + ".thresholds", name)
            ok = metrics[name] <= limit
            all_passed &= ok
            checks[name] = {"value": metrics[name], "threshold": limit,
                            "passed": ok}
            line += f" <= {limit:g}: {'PASS' if ok else 'FAIL'}"
        print(line)

    payload = {"metrics": metrics, "checks": checks, "passed": all_passed,
               "samples": summary.count}
    _write_report(outdir, "compare.json", cfg, payload)
    if not all_passed:
        print("comparison failed configured thresholds", file=sys.stderr)
        return EXIT_NUMERICAL
    return EXIT_OK


# -- entry point ------------------------------------------------------------

_COMMANDS = {
    "stationary": cmd_stationary,
    "mfi": cmd_mfi,
    "ikeda": cmd_ikeda,
    "simulate": cmd_simulate,
    "compare": cmd_compare,
}


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", required=True, metavar="PATH",
                        help="TOML experiment file (JSON with --json)")
    common.add_argument("--out", default=".", metavar="DIR",
                        help="output directory (created if missing)")
    common.add_argument("--seed", type=int, default=None, metavar="N",
                        help="override the config's ensemble seed")
    common.add_argument("--threads", type=int, default=None, metavar="N",
                        help="worker cap (default: DILATOX_THREADS or 1)")
    common.add_argument("--unchecked", action="store_true",
                        help="accept weight systems whose sum does not "
                             "equal the branch count")
    common.add_argument("--json", action="store_true",
                        help="parse the config file as JSON")

    parser = argparse.ArgumentParser(
        prog="dilatox",
        description="Stationary laws of contracting stochastic maps: "
                    "characteristic functions, multifractal integrals, "
                    "chaotic ring densities, seeded ensembles.")
    parser.add_argument("--version", action="version",
                        version=f"dilatox {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)
    sub.add_parser("stationary", parents=[common],
                   help="closed-form characteristic functions and densities")
    sub.add_parser("mfi", parents=[common],
                   help="multifractal integrals and measure transforms")
    sub.add_parser("ikeda", parents=[common],
                   help="chaotic ring and noisy stationary densities")
    sub.add_parser("simulate", parents=[common],
                   help="seeded ensemble runs with digests and samples")
    sub.add_parser("compare", parents=[common],
                   help="analytic-vs-ensemble distance metrics")
    return parser


def _resolve_threads(args) -> None:
    n = args.threads
    if n is None:
        env = os.environ.get("DILATOX_THREADS", "").strip()
        if env:
            try:
                n = int(env)
            except ValueError:
                raise ConfigError(
                    f"DILATOX_THREADS must be an integer, got {env!r}")
    if n is not None and n < 1:
        raise ConfigError("thread count must be >= 1")
    args.resolved_threads = n


def _load_config(args) -> dict:
    path = Path(args.config)
    try:
        raw = path.read_bytes()
    except OSError as e:
        raise ConfigError(f"cannot read config: {e}")
    try:
        if args.json or path.suffix == ".json":
            cfg = json.loads(raw.decode("utf-8"))
        else:
            cfg = tomllib.loads(raw.decode("utf-8"))
    except (json.JSONDecodeError, tomllib.TOMLDecodeError,
            UnicodeDecodeError) as e:
        raise ConfigError(f"cannot parse {path.name}: {e}")
    if not isinstance(cfg, dict):
        raise ConfigError("config root must be a table/object")
    return cfg


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        _resolve_threads(args)
        cfg = _load_config(args)
        outdir = Path(args.out)
        outdir.mkdir(parents=True, exist_ok=True)
        return _COMMANDS[args.command](cfg, args, outdir)
    except ConfigError as e:
        print(f"config error: {e}", file=sys.stderr)
        return EXIT_CONFIG
    except PolicyRefusal as e:
        print(f"refused: {e}", file=sys.stderr)
        return EXIT_POLICY
    except NormalizationError as e:
        print(f"refused: {e} (or pass --unchecked)", file=sys.stderr)
        return EXIT_POLICY
    except (ValueError, ArithmeticError, DivergenceError) as e:
        print(f"numerical failure: {e}", file=sys.stderr)
        return EXIT_NUMERICAL


if __name__ == "__main__":
    sys.exit(main())
