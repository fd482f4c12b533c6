"""Command-line front end.

Verbs run in the fixed order verify, solve, stability, poincare,
hamiltonian, diagnose. Every run writes ``report.json`` (validated against
the shipped schema) and ``report.md`` into ``--out``.

Exit codes: 0 all certificates pass, 1 a certificate failed, 2 bad
configuration, 3 solver failure.
"""

from __future__ import annotations

import os

_THREAD_VARS = ("OMP_NUM_THREADS", "OPENBLAS_NUM_THREADS", "MKL_NUM_THREADS",
                "NUMEXPR_NUM_THREADS", "VECLIB_MAXIMUM_THREADS")


def _cap_threads() -> None:
    """``HYPOGEO_THREADS`` caps BLAS/OpenMP pools; one thread by default so
    results are bit-reproducible."""
    n = os.environ.get("HYPOGEO_THREADS")
    for var in _THREAD_VARS:
        if n:
            os.environ[var] = n
        else:
            os.environ.setdefault(var, "1")


_cap_threads()

import argparse  # noqa: E402
import json  # noqa: E402
import logging  # noqa: E402
import math  # noqa: E402
import sys  # noqa: E402
from importlib import resources  # noqa: E402
from pathlib import Path  # noqa: E402

import jsonschema  # noqa: E402
import numpy as np  # noqa: E402

from hypogeo import __version__  # noqa: E402
from hypogeo import diagnostics, stability, symcalc  # noqa: E402
from hypogeo.fields import FrameKind, get_frame  # noqa: E402
from hypogeo.grid import (Grid, GridFunction, NormKind, assemble_sublaplacian,  # noqa: E402
                          cutoff_chi, homogeneous_norm, partial_derivative)
from hypogeo.solver import (NonlinearSystem, SolveOptions, SolverError,  # noqa: E402
                            discrete_profile, extend_profile, get_system, solve_semilinear)

log = logging.getLogger("hypogeo")

VERBS = ("verify", "solve", "stability", "poincare", "hamiltonian", "diagnose")
NEEDS_SOLUTION = {"stability", "poincare", "hamiltonian", "diagnose"}
EXIT_OK, EXIT_CERT, EXIT_CONFIG, EXIT_SOLVER = 0, 1, 2, 3

DEFAULT_BOX = {1: [-8.0, 8.0], 2: [-8.0, 8.0, -8.0, 8.0], 3: [-4.0, 4.0, -4.0, 4.0, -4.0, 4.0]}
DEFAULT_NODES = {1: [257], 2: [129, 129], 3: [33, 33, 33]}


class ConfigError(ValueError):
    pass


def load_schema(name: str) -> dict:
    return json.loads(resources.files("hypogeo").joinpath("schemas", name).read_text())


# --------------------------------------------------------------------------
# configuration


def _parse_list(text, cast=float) -> list:
    if isinstance(text, (list, tuple)):
        return [cast(v) for v in text]
    return [cast(v) for v in str(text).split(",") if v.strip()]


def build_config(args: argparse.Namespace) -> dict:
    """Merge the JSON config file (if any) with command-line overrides."""
    cfg: dict = {}
    if getattr(args, "config", None):
        path = Path(args.config)
        if not path.exists():
            raise ConfigError(f"config file not found: {path}")
        try:
            cfg = json.loads(path.read_text())
        except json.JSONDecodeError as exc:
            raise ConfigError(f"config is not valid JSON: {exc}") from exc
    try:
        jsonschema.validate(cfg, load_schema("config.schema.json"))
    except jsonschema.ValidationError as exc:
        raise ConfigError(f"config invalid: {exc.message}") from exc

    for key in ("frame", "grid", "box", "system", "beta", "bc", "out", "seed"):
        val = getattr(args, key, None)
        if val is not None:
            cfg[key] = val
    if getattr(args, "tol", None) is not None:
        cfg.setdefault("solver", {})["tol"] = args.tol
    for key in ("degree", "samples"):
        val = getattr(args, key, None)
        if val is not None:
            cfg.setdefault("verify", {})[key] = val
    if getattr(args, "radii", None):
        cfg.setdefault("poincare", {})["radii"] = _parse_list(args.radii)
        cfg.setdefault("diagnose", {})["radii"] = _parse_list(args.radii)
    if getattr(args, "levels", None):
        cfg.setdefault("diagnose", {})["levels"] = _parse_list(args.levels)
    if getattr(args, "slices", None):
        cfg.setdefault("hamiltonian", {})["slices"] = _parse_list(args.slices)
    if args.verb != "run":
        cfg["verbs"] = [args.verb]
    return normalize_config(cfg)


def normalize_config(cfg: dict) -> dict:
    """Fill defaults and resolve shorthands; raises ConfigError on bad values."""
    try:
        jsonschema.validate(cfg, load_schema("config.schema.json"))
    except jsonschema.ValidationError as exc:
        raise ConfigError(f"config invalid: {exc.message}") from exc
    out = dict(cfg)
    out.setdefault("verbs", list(VERBS))
    out.setdefault("frame", "grushin2d")
    out.setdefault("system", "allen-cahn")
    out.setdefault("seed", 0)
    out.setdefault("out", "hypogeo-out")
    try:
        frame = get_frame(out["frame"])
    except (ValueError, FileNotFoundError) as exc:
        raise ConfigError(str(exc)) from exc
    dim = frame.dim
    nodes = _parse_list(out.get("grid", DEFAULT_NODES[dim]), int)
    box = _parse_list(out.get("box", DEFAULT_BOX[dim]), float)
    if len(nodes) != dim:
        raise ConfigError(f"--grid has {len(nodes)} axes, frame {frame.name!r} has dim {dim}")
    if len(box) != 2 * dim:
        raise ConfigError(f"--box needs {2 * dim} numbers for dim {dim}")
    if min(nodes) < 3:
        raise ConfigError("grid needs at least 3 nodes per axis")
    if any(b <= a for a, b in zip(box[0::2], box[1::2])):
        raise ConfigError("box bounds must satisfy lo < hi")
    out["grid"], out["box"] = nodes, box
    if isinstance(out["system"], str) and out["system"] not in ("allen-cahn", "gradient-coupled", "harmonic"):
        if not Path(out["system"]).exists():
            raise ConfigError(f"system file not found: {out['system']}")
    if isinstance(out.get("bc"), str) and not Path(out["bc"]).exists():
        raise ConfigError(f"boundary file not found: {out['bc']}")
    unknown = set(out["verbs"]) - set(VERBS)
    if unknown:
        raise ConfigError(f"unknown verbs {sorted(unknown)}")
    try:
        SolveOptions.from_dict(out.get("solver"))
    except (TypeError, ValueError) as exc:
        raise ConfigError(str(exc)) from exc
    return out


def make_grid(cfg: dict) -> Grid:
    nodes, box = cfg["grid"], cfg["box"]
    return Grid(tuple(box[0::2]), tuple(box[1::2]), tuple(n - 1 for n in nodes))


def make_system(cfg: dict) -> NonlinearSystem:
    spec = cfg["system"]
    try:
        return get_system(spec, beta=cfg.get("beta", 1.0))
    except FileNotFoundError as exc:
        raise ConfigError(str(exc)) from exc
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc


# --------------------------------------------------------------------------
# boundary data


def _component_data(spec: dict, grid: Grid, system: NonlinearSystem) -> GridFunction:
    kind = spec.get("kind")
    sq2 = math.sqrt(2.0)
    if kind == "profile-x":
        prof = discrete_profile(grid.lo[0], grid.hi[0], grid.n[0], system
                                if system.m == 1 else None)
        gf = extend_profile(prof, grid)
        gf.from_profile = True
        return gf
    if kind == "tanh-x":
        s = float(spec.get("sign", 1.0))
        return grid.sample(lambda *c: np.tanh(s * c[0] / sq2))
    if kind == "bump":
        s0, ell = float(spec.get("s0", 1.0)), float(spec.get("ell", 1.0))
        if grid.dim < 2:
            raise ConfigError("bump data needs a 2D or 3D grid")
        return grid.sample(lambda *c: np.tanh((c[0] - s0 / np.cosh(c[1] / ell)) / sq2))
    if kind == "constant":
        v = float(spec.get("value", 0.0))
        return GridFunction(grid, np.full(grid.size, v))
    if kind == "linear":
        coef = [float(c) for c in spec.get("coef", [0.0] * grid.dim)]
        off = float(spec.get("offset", 0.0))
        if len(coef) != grid.dim:
            raise ConfigError("linear data needs one coefficient per axis")
        return grid.sample(lambda *c: off + sum(a * x for a, x in zip(coef, c)))
    if kind == "raw":
        gf = GridFunction.from_raw(spec["path"])
        if gf.grid != grid:
            raise ConfigError("raw boundary data was written for another grid")
        return gf
    raise ConfigError(f"unknown boundary data kind {kind!r}")


def boundary_data(cfg: dict, grid: Grid, system: NonlinearSystem) -> list[GridFunction]:
    bc = cfg.get("bc")
    if isinstance(bc, str):
        try:
            bc = json.loads(Path(bc).read_text())
        except json.JSONDecodeError as exc:
            raise ConfigError(f"boundary file is not valid JSON: {exc}") from exc
    if bc is None:
        if system.label == "allen-cahn":
            bc = [{"kind": "profile-x"}]
        elif system.label == "gradient-coupled":
            bc = [{"kind": "tanh-x"}, {"kind": "tanh-x", "sign": -1}]
        else:
            bc = [{"kind": "constant", "value": 0.0}] * system.m
    if isinstance(bc, dict):
        bc = bc.get("components", [bc])
    if len(bc) != system.m:
        raise ConfigError(f"boundary data for {len(bc)} components, system has {system.m}")
    try:
        return [_component_data(dict(s), grid, system) for s in bc]
    except (KeyError, TypeError, ValueError) as exc:
        if isinstance(exc, ConfigError):
            raise
        raise ConfigError(f"bad boundary data: {exc}") from exc


# --------------------------------------------------------------------------
# pipeline


def _norm_kind(frame) -> NormKind:
    return {FrameKind.GRUSHIN2D: NormKind.GRUSHIN,
            FrameKind.HEISENBERG3D: NormKind.HEISENBERG}.get(frame.kind, NormKind.EUCLIDEAN)


def _clean(obj):
    """JSON-safe copy: numpy scalars to Python, non-finite floats to None."""
    if isinstance(obj, dict):
        return {str(k): _clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_clean(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return _clean(obj.tolist())
    if isinstance(obj, (np.bool_, bool)):
        return bool(obj)
    if isinstance(obj, (np.integer, int)):
        return int(obj)
    if isinstance(obj, (np.floating, float)):
        v = float(obj)
        return v if math.isfinite(v) else None
    return obj


class Pipeline:
    def __init__(self, cfg: dict):
        self.cfg = cfg
        self.out = Path(cfg["out"])
        self.sections: dict = {}
        self.certificates: dict = {}
        self.files: list = []
        self.frame = get_frame(cfg["frame"])
        self.system = None
        self.grid = None
        self.u = None
        self.op = None

    # each stage records a section and optional certificates

    def run(self) -> int:
        self.out.mkdir(parents=True, exist_ok=True)
        verbs = [v for v in VERBS if v in self.cfg["verbs"]]
        if any(v in NEEDS_SOLUTION for v in verbs) and "solve" not in verbs:
            verbs.insert(verbs.index(next(v for v in verbs if v in NEEDS_SOLUTION)), "solve")
        code = EXIT_OK
        for verb in verbs:
            try:
                getattr(self, f"do_{verb}")()
            except SolverError as exc:
                self.sections[verb] = {"status": "error", "message": str(exc),
                                       "history": exc.history}
                code = EXIT_SOLVER
                break
        if code == EXIT_OK and not all(self.certificates.values()):
            code = EXIT_CERT
        self.write_report(code)
        return code

    def _setup(self):
        if self.grid is None:
            self.system = make_system(self.cfg)
            self.grid = make_grid(self.cfg)
            if self.frame.dim != self.grid.dim:
                raise ConfigError("frame and grid dimensions differ")
            self.op = assemble_sublaplacian(self.grid, self.frame)

    def do_verify(self):
        vc = self.cfg.get("verify", {})
        frames = vc.get("frames", [self.cfg["frame"]])
        rep = symcalc.verify_suite(frames, degree=vc.get("degree", 4),
                                   samples=vc.get("samples", 200), seed=self.cfg["seed"],
                                   coef_range=vc.get("coef_range", 3))
        rep.pop("elapsed_s", None)
        table = self.out / "verify_samples.csv"
        with open(table, "w") as fh:
            fh.write("frame,sample,terms_w,identity_residual_terms,commutation_terms_1,"
                     "commutation_terms_2\n")
            for name, v in rep["frames"].items():
                for s in v["samples"]:
                    c = s.get("commutation_residual_terms", ["", ""])
                    fh.write(f"{name},{s['sample']},{s['terms_w']},"
                             f"{s['identity_residual_terms']},{c[0]},{c[1]}\n")
        self.files.append(table.name)
        self.sections["verify"] = {
            "status": "pass" if rep["pass"] else "fail", "degree": rep["degree"],
            "samples": rep["samples"], "seed": rep["seed"], "frames": rep["frames"],
            "algebraic_lemma": rep["algebraic_lemma"]}
        self.certificates["verify"] = bool(rep["pass"])

    def do_solve(self):
        self._setup()
        data = boundary_data(self.cfg, self.grid, self.system)
        # the discrete profile is already a solution; start Newton from the
        # analytic heteroclinic instead so the solve is not vacuous
        init = [self.grid.sample(lambda *c: np.tanh(c[0] / math.sqrt(2.0)))
                if getattr(d, "from_profile", False) else d for d in data]
        opts = SolveOptions.from_dict(self.cfg.get("solver"))
        res = solve_semilinear(self.grid, self.frame, self.system, data, init=init,
                               opts=opts, op=self.op)
        self.u = res.u
        for name, gf in zip(self.system.names, res.u):
            raw = self.out / f"{name}.bin"
            side = gf.to_raw(raw, component=name)
            gf.to_csv(self.out / f"{name}.csv")
            self.files += [raw.name, side.name, f"{name}.csv"]
        sec = res.to_json()
        sec["status"] = "pass" if res.converged else "fail"
        sec["system"] = self.system.to_json()
        sec["grid"] = self.grid.to_json()
        if res.u[0].grid.dim >= 2:
            A = res.u[0].array()
            sec["y_variation"] = float(np.max(np.ptp(A, axis=1)))
        self.sections["solve"] = sec
        if not res.converged:
            raise SolverError(f"no convergence: residual {res.residual_norm:.3e}", res.history)
        self.certificates["solve"] = True

    def do_stability(self):
        margin = self.cfg.get("stability", {}).get("margin", stability.DEFAULT_MARGIN)
        sec = {}
        if not self.system.symmetric:
            sec = {"status": "skipped", "reason": "spectral certificate needs a symmetric system"}
            self.sections["stability"] = sec
            return
        lin = stability.assemble_linearized(self.grid, self.frame, self.system, self.u, self.op)
        eig = stability.smallest_eigenvalue(lin, margin=margin)
        sec.update(eig.to_json())
        phi = [partial_derivative(c, 0) for c in self.u]
        cert = stability.pointwise_certificate(self.u, self.system, phi, self.frame, self.op)
        sec["pointwise_dx"] = cert
        sec["status"] = "pass" if eig.stable else "fail"
        self.sections["stability"] = sec
        self.certificates["stability"] = eig.stable

    def do_poincare(self):
        pc = self.cfg.get("poincare", {})
        radii = pc.get("radii", [2.0, 2.5])
        rel = pc.get("rel_tol", 1e-5)
        floor = pc.get("grad_floor", 1e-8)
        kind = _norm_kind(self.frame)
        if kind is NormKind.GRUSHIN and self.grid.dim != 2 or \
                kind is NormKind.HEISENBERG and self.grid.dim != 3:
            kind = NormKind.EUCLIDEAN
        nrm = homogeneous_norm(self.grid, kind)
        reach = float(nrm[~self.grid.interior_mask(stability.COMPACT_DEPTH)].min())
        entries, skipped = [], []
        ok = True
        for R in radii:
            if R >= reach:
                skipped.append(R)
                continue
            chi = cutoff_chi(self.grid, R, kind)
            zeta = [chi] * self.system.m
            rep = stability.poincare_gap(self.u, self.system, self.frame, zeta, floor,
                                         op=self.op)
            passed = rep.passes(rel)
            ok &= passed
            entries.append({"R": R, **rep.to_json(), "pass": passed})
        sec = {"norm": kind.value, "cutoffs": entries, "skipped_radii": skipped,
               "rel_tol": rel}
        if not entries:
            sec["status"] = "skipped"
            sec["reason"] = "no cutoff radius fits inside the box"
        else:
            sec["status"] = "pass" if ok else "fail"
            self.certificates["poincare"] = bool(ok)
        self.sections["poincare"] = sec

    def do_hamiltonian(self):
        hc = self.cfg.get("hamiltonian", {})
        try:
            res = diagnostics.hamiltonian_slices(self.u, self.system, self.frame,
                                                 hc.get("slices"))
        except ValueError as exc:
            self.sections["hamiltonian"] = {"status": "skipped", "reason": str(exc)}
            return
        sec = dict(res)
        if "tol" in hc:
            ok = res["drift"] <= hc["tol"]
            sec["status"] = "pass" if ok else "fail"
            sec["tol"] = hc["tol"]
            self.certificates["hamiltonian"] = bool(ok)
        else:
            sec["status"] = "info"
        self.sections["hamiltonian"] = sec

    def do_diagnose(self):
        dc = self.cfg.get("diagnose", {})
        radii = dc.get("radii", [1.0, 1.5, 2.0, 2.5])
        sec: dict = {}
        growth = diagnostics.growth_integral(self.u, self.frame, radii)
        growth.to_csv(self.out / "growth.csv")
        self.files.append("growth.csv")
        sec["growth"] = growth.to_json()
        if self.system.potential is not None:
            shift = [1.0] * self.system.m
            prof = diagnostics.energy_profile(self.u, self.system, self.frame, radii, shift)
            prof.to_csv(self.out / "energy.csv")
            self.files.append("energy.csv")
            sec["energy"] = prof.to_json()
        if self.grid.dim == 2:
            levels = dc.get("levels", [-0.5, 0.0, 0.5])
            flat = []
            for name, comp in zip(self.system.names, self.u):
                for fit in diagnostics.level_set_flatness(comp, levels):
                    flat.append({"component": name, **fit.to_json()})
            sec["level_sets"] = flat
        sec["monotonicity"] = diagnostics.monotonicity_profile(self.u, self.system, self.frame)
        if self.frame.kind is FrameKind.GRUSHIN2D:
            sl = [diagnostics.slope_condition(c, self.frame, dc.get("grad_floor", 1e-8))["summary"]
                  for c in self.u]
            sec["slope_condition"] = sl
        ok = bool(growth.passed) if growth.values else True
        sec["status"] = "pass" if ok else "fail"
        self.sections["diagnose"] = sec
        if growth.values:
            self.certificates["growth"] = ok

    # reports

    def report_dict(self, code: int) -> dict:
        cfg = {k: v for k, v in self.cfg.items() if k != "out"}
        status = {EXIT_OK: "pass", EXIT_CERT: "fail", EXIT_SOLVER: "solver-failure"}[code]
        return _clean({
            "tool": "hypogeo", "version": __version__, "schema_version": 1,
            "config": cfg, "sections": self.sections, "certificates": self.certificates,
            "status": status, "exit_code": code,
            "files": sorted(set(self.files + ["report.json", "report.md"])),
        })

    def write_report(self, code: int) -> dict:
        rep = self.report_dict(code)
        jsonschema.validate(rep, load_schema("report.schema.json"))
        (self.out / "report.json").write_text(json.dumps(rep, indent=2, sort_keys=True) + "\n")
        (self.out / "report.md").write_text(render_markdown(rep))
        return rep


def _fmt(v) -> str:
    if isinstance(v, float):
        return f"{v:.6g}"
    return str(v)


def render_markdown(rep: dict) -> str:
    lines = [f"# hypogeo report", "",
             f"Status: **{rep['status']}** (exit code {rep['exit_code']})", "",
             "| certificate | result |", "|---|---|"]
    for name, ok in sorted(rep["certificates"].items()):
        lines.append(f"| {name} | {'PASS' if ok else 'FAIL'} |")
    lines.append("")
    cfg = rep["config"]
    lines += ["## Configuration", "",
              f"- frame: `{cfg.get('frame')}`", f"- system: `{cfg.get('system')}`",
              f"- grid nodes: {cfg.get('grid')}, box: {cfg.get('box')}",
              f"- seed: {cfg.get('seed')}", ""]
    for name, sec in rep["sections"].items():
        lines += [f"## {name}", "", f"status: {sec.get('status')}", ""]
        for key, val in sec.items():
            if key == "status" or isinstance(val, (dict, list)):
                continue
            lines.append(f"- {key}: {_fmt(val)}")
        if name == "verify":
            for fr, s in sec.get("frames", {}).items():
                lines.append(f"- {fr}: {s['summary']}")
        if name == "poincare":
            for e in sec.get("cutoffs", []):
                lines.append(f"- R={_fmt(e['R'])}: gap={_fmt(e['gap'])}, rhs={_fmt(e['rhs'])}, "
                             f"terms={ {k: _fmt(v) for k, v in e['lhs_terms'].items()} }")
        if name == "diagnose":
            g = sec.get("growth", {})
            lines.append(f"- growth slope: {_fmt(g.get('slope'))} (bound {_fmt(g.get('bound'))})")
            if "energy" in sec:
                lines.append(f"- energy slope: {_fmt(sec['energy'].get('slope'))}")
        lines.append("")
    return "\n".join(lines)


# --------------------------------------------------------------------------
# argument parsing


def _parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="JSON config file (see schemas/config.schema.json)")
    common.add_argument("--frame", help="grushin2d, heisenberg3d, martinet3d, euclidean2d, "
                                        "euclidean1d or a frame JSON file")
    common.add_argument("--grid", help="node counts nx,ny[,nz]")
    common.add_argument("--box", help="bounds xlo,xhi,ylo,yhi[,zlo,zhi]")
    common.add_argument("--system", help="allen-cahn, gradient-coupled, harmonic or a JSON file")
    common.add_argument("--beta", type=float, help="coupling for gradient-coupled")
    common.add_argument("--bc", help="boundary-data JSON file")
    common.add_argument("--out", help="output directory")
    common.add_argument("--seed", type=int)
    common.add_argument("--degree", type=int, help="verify: polynomial degree")
    common.add_argument("--samples", type=int, help="verify: samples per frame")
    common.add_argument("--tol", type=float, help="solver residual tolerance")
    common.add_argument("--radii", help="comma-separated radii for poincare/diagnose")
    common.add_argument("--levels", help="comma-separated levels for level-set fits")
    common.add_argument("--slices", help="comma-separated y-values for Hamiltonian slices")
    common.add_argument("-v", "--verbose", action="store_true")
    p = argparse.ArgumentParser(prog="hypogeo", description=__doc__.splitlines()[0])
    p.add_argument("--version", action="version", version=f"hypogeo {__version__}")
    sub = p.add_subparsers(dest="verb", required=True)
    for verb in VERBS + ("run",):
        sub.add_parser(verb, parents=[common])
    rp = sub.add_parser("report", help="re-render report.md from report.json")
    rp.add_argument("--out", required=True)
    rp.add_argument("-v", "--verbose", action="store_true")
    return p


def _report_only(out: str) -> int:
    path = Path(out) / "report.json"
    if not path.exists():
        print(f"error: {path} not found", file=sys.stderr)
        return EXIT_CONFIG
    rep = json.loads(path.read_text())
    try:
        jsonschema.validate(rep, load_schema("report.schema.json"))
    except jsonschema.ValidationError as exc:
        print(f"error: report invalid: {exc.message}", file=sys.stderr)
        return EXIT_CONFIG
    (Path(out) / "report.md").write_text(render_markdown(rep))
    print(render_markdown(rep))
    return int(rep["exit_code"])


def main(argv=None) -> int:
    args = _parser().parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    if args.verb == "report":
        return _report_only(args.out)
    try:
        cfg = build_config(args)
        pipe = Pipeline(cfg)
        code = pipe.run()
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except FileNotFoundError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    rep_path = Path(cfg["out"]) / "report.json"
    status = json.loads(rep_path.read_text())["status"]
    print(f"{status}: wrote {rep_path}")
    return code


if __name__ == "__main__":
    sys.exit(main())
