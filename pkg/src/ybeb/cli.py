"""Command-line entry point ``ybeb``.

Every subcommand prints one JSON report (stdout or --out).  Exit status 0 means the
computation completed, whatever its verdict; 2 means the input or the requested
size was rejected, in which case the report is an error object.
"""
from __future__ import annotations

import argparse
import json
import sys
from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path

import numpy as np
import sympy as sp

from . import __version__, _kernels
from .bootstrap import bootstrap_to_order, verify_truncated
from .charges import MAX_DIM, boost_ladder_check, poincare_demo, three_local_charge, transfer_charges
from .errors import BadConfig, HigherConditionViolated, InfeasibleSize, NoAdmissibleShift, NotIntegrable, YbebError
from .general import build_gRc_system, solve_gRc
from .models import (MODEL_NAMES, named_spin_half_examples, random_spin_half_couplings, spin1_theta_scan,
                     spin_half_classify, suN_delta_scan, theta_grid, zoo)
from .opalg import DEFAULT_TOL, DenseOperator
from .subasis import CouplingSpec, build_hamiltonian, gellmann_basis, pauli_basis

COMMANDS = ("test", "bootstrap", "ybe", "charges", "gtest", "classify", "demo")
SCANS = ("spin1-theta", "suN-delta", "spin-half-random", "spin-half-named")


@dataclass
class RunConfig:
    command: str
    model: str = None
    spec: str = None
    params: dict = field(default_factory=dict)
    order: int = 3
    tol: float = DEFAULT_TOL
    c: object = 0.0
    length: int = 6
    out: str = None
    seed: int = 0
    scan: str = None
    step: str = "pi/36"
    count: int = 500
    random: int = 50
    N: int = 3
    demo: str = None
    cosh_eta: str = "3/2"
    k_max: int = 10

    def validate(self):
        if self.command not in COMMANDS:
            raise BadConfig(f"unknown command {self.command!r}")
        if self.order < 1:
            raise BadConfig(f"--order must be >= 1, got {self.order}")
        if not self.tol > 0:
            raise BadConfig(f"--tol must be positive, got {self.tol}")
        if self.model and self.spec:
            raise BadConfig("give either --model or --spec, not both")
        if self.command in ("test", "bootstrap", "ybe", "charges", "gtest") and not (self.model or self.spec):
            raise BadConfig(f"{self.command} needs --model or --spec")
        if self.command == "classify" and not (self.model or self.spec or self.scan):
            raise BadConfig("classify needs --scan, --model or --spec")
        if self.scan is not None and self.scan not in SCANS:
            raise BadConfig(f"unknown scan {self.scan!r}; choose from {', '.join(SCANS)}")
        if self.command == "demo" and self.demo != "poincare":
            raise BadConfig("the only demo is 'poincare'")
        return self

    def echo(self):
        return {k: v for k, v in self.__dict__.items() if v is not None}


# ---------------------------------------------------------------------------
# serialization
# ---------------------------------------------------------------------------

def to_jsonable(x):
    """Complex -> [re, im]; arrays and operators -> nested row-major lists."""
    if isinstance(x, DenseOperator):
        return to_jsonable(x.mat)
    if isinstance(x, np.ndarray):
        if np.iscomplexobj(x):
            return to_jsonable(np.stack([x.real, x.imag], axis=-1))
        return x.tolist()
    if isinstance(x, (complex, np.complexfloating)):
        return [float(x.real), float(x.imag)]
    if isinstance(x, (np.floating, float)):
        return float(x) if np.isfinite(x) else str(float(x))
    if isinstance(x, (np.integer,)):
        return int(x)
    if isinstance(x, (np.bool_,)):
        return bool(x)
    if isinstance(x, Fraction):
        return str(x)
    if isinstance(x, dict):
        return {(k if isinstance(k, str) else ",".join(map(str, k)) if isinstance(k, tuple) else str(k)):
                to_jsonable(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [to_jsonable(v) for v in x]
    return x


def _parse_matrix(raw):
    """Nested list with entries either numbers or [re, im] pairs."""
    arr = np.asarray(raw, dtype=float)
    if arr.ndim == 3 and arr.shape[-1] == 2:
        return arr[..., 0] + 1j * arr[..., 1]
    if arr.ndim in (1, 2):
        return arr.astype(complex)
    raise BadConfig(f"cannot read a matrix of shape {arr.shape}")


def _parse_number(text):
    """Evaluate a closed-form number such as 'pi/36' or '3/2'."""
    try:
        val = sp.sympify(text)
    except (sp.SympifyError, SyntaxError, TypeError) as exc:
        raise BadConfig(f"cannot parse number {text!r}") from exc
    if val.free_symbols:
        raise BadConfig(f"{text!r} is not a number")
    return val


# ---------------------------------------------------------------------------
# model input
# ---------------------------------------------------------------------------

def load_spec(path):
    try:
        data = json.loads(Path(path).read_text())
    except (OSError, json.JSONDecodeError) as exc:
        raise BadConfig(f"cannot read spec file {path}: {exc}") from exc
    if "dense" in data:
        mat = _parse_matrix(data["dense"])
        n = int(round(np.sqrt(mat.shape[0])))
        if mat.shape != (n * n, n * n):
            raise BadConfig(f"dense density must be n^2 x n^2, got {mat.shape}")
        return DenseOperator(mat, n, 2), None
    try:
        n = int(data["local_dim"])
        basis_name = data.get("basis", "gellmann")
        a = _parse_matrix(data["a"])
        b = _parse_matrix(data.get("b", [0.0] * (n * n - 1)))
    except (KeyError, ValueError, TypeError) as exc:
        raise BadConfig(f"spec file needs local_dim and a: {exc}") from exc
    if basis_name == "pauli" or (basis_name == "gellmann" and n == 2 and data.get("pauli")):
        basis = pauli_basis()
    elif basis_name == "gellmann":
        basis = gellmann_basis(n)
    else:
        raise BadConfig(f"unknown basis {basis_name!r}")
    spec = CouplingSpec(a, b, complex(data.get("c", 0.0)))
    return build_hamiltonian(spec, basis), spec


def resolve_density(cfg):
    if cfg.spec:
        h, _ = load_spec(cfg.spec)
        return h, {"spec": cfg.spec}
    m = zoo(cfg.model, cfg.params)
    return m.density, {"model": m.name, "params": m.params, "notes": m.notes}


def _parse_c(text):
    if text == "solve":
        return "solve"
    try:
        return complex(text)
    except ValueError as exc:
        raise BadConfig(f"--c takes 'solve' or a number, got {text!r}") from exc


# ---------------------------------------------------------------------------
# commands
# ---------------------------------------------------------------------------

def _status_log(branch):
    return [{"order": s.order, "kind": s.kind, "residual": s.residual, "passed": s.passed, "note": s.note}
            for s in branch.status_log]


def _bootstrap(cfg, h, force=False):
    try:
        return bootstrap_to_order(h, cfg.order, cfg.tol, cfg.c, force=force), None
    except (NotIntegrable, HigherConditionViolated, NoAdmissibleShift) as exc:
        return exc.state, exc


def _shift_json(state):
    if state is None or state.shift is None:
        return None
    s = state.shift
    return {"status": s.status, "roots": list(s.roots), "chosen": list(s.chosen),
            "n_polynomials": s.n_polynomials, "max_degree": s.max_degree}


def cmd_test(cfg):
    h, src = resolve_density(cfg)
    state, exc = _bootstrap(cfg, h)
    branches = [] if state is None else state.branches
    failed = [] if state is None else state.pruned
    if exc is None:
        verdict = f"passed through order {state.passed_through}"
    else:
        order = getattr(exc, "order", None) or 2 * exc.m + 1
        verdict = f"fails at order {order}: {exc.code}"
    return {"input": src, "verdict": verdict, "passed": exc is None,
            "failure": None if exc is None else exc.to_dict(), "shift": _shift_json(state),
            "branches": [{"c": b.c, "orders": _status_log(b)} for b in branches + failed]}


def cmd_bootstrap(cfg):
    h, src = resolve_density(cfg)
    state, exc = _bootstrap(cfg, h)
    out = {"input": src, "shift": _shift_json(state), "error": None if exc is None else exc.to_dict(),
           "branches": []}
    for b in state.branches if state is not None else []:
        out["branches"].append({"c": b.c, "order": b.order, "orders": _status_log(b),
                                "R": {str(k): b.R[k] for k in range(1, len(b.R))}})
    return out


def cmd_ybe(cfg):
    h, src = resolve_density(cfg)
    state, exc = _bootstrap(cfg, h)
    out = {"input": src, "error": None if exc is None else exc.to_dict(), "branches": []}
    for b in state.branches if state is not None else []:
        rep = verify_truncated(b.R, b.order, cfg.tol)
        out["branches"].append({"c": b.c, "K": rep.K, "max_residual": rep.max_residual,
                                "passes": rep.max_residual <= max(cfg.tol, 1e-8),
                                "residuals": rep.residuals, "unitarity": rep.unitarity})
    return out


def cmd_charges(cfg):
    h, src = resolve_density(cfg)
    n, L = h.local_dim, cfg.length
    if n ** L > MAX_DIM:
        raise InfeasibleSize(f"n^L = {n ** L} exceeds {MAX_DIM}", local_dim=n, length=L)
    order = max(cfg.order, 2)
    state, exc = _bootstrap(RunConfig(**{**cfg.__dict__, "order": order}), h)
    out = {"input": src, "L": L}
    tl = three_local_charge(h, L)
    out["three_local"] = {"commutator_norm": tl.commutator_norm}
    if exc is None and state.branches:
        b = state.branches[0]
        cs = transfer_charges(b.R, L)
        out["transfer"] = {"c": b.c, "K": cs.K, "orders": sorted(cs.Q), "commutator_norms": cs.commutator_norms(),
                           "affine_fit_Q2": {"alpha": cs.affine[0], "beta": cs.affine[1], "residual": cs.affine[2]}}
    else:
        out["transfer"] = {"error": exc.to_dict() if exc else "no branch"}
    if L >= 6:
        br = boost_ladder_check(h, L, cfg.tol)
        out["boost"] = {"ladder_residual": br.ladder_residual, "bulk_residual": br.bulk_residual,
                        "boundary_norm": br.boundary_norm, "passes": br.passes,
                        "rung_boundary_norm": br.rung_boundary_norm, "rung_bulk_residual": br.rung_bulk_residual,
                        "rung_window": br.rung_window, "squid": br.squid,
                        "commutator_windows": br.commutator_windows}
    return out


def _basis_for(h):
    return pauli_basis() if h.local_dim == 2 else gellmann_basis(h.local_dim)


def cmd_gtest(cfg):
    h, src = resolve_density(cfg)
    system = build_gRc_system(h, _basis_for(h))
    r = solve_gRc(system, cfg.tol)
    return {"input": src, "status": r.status, "residual": r.residual, "rank": r.rank,
            "n_equations": r.n_equations, "n_unknowns": r.n_unknowns, "null_dimension": r.null_dimension,
            "rhs_norm": r.rhs_norm, "operator_residual": r.operator_residual,
            "antisymmetry_ok": r.antisymmetry_ok, "p": r.p, "q": r.q, "r": r.r}


def _classification_json(c):
    return {"a": list(c.a), "b": list(c.b), "label": c.label, "products": list(c.products),
            "product_verdict": c.product_verdict, "reshetikhin_residual": c.reshetikhin_residual,
            "reshetikhin_verdict": c.reshetikhin_verdict, "agree": c.agree}


def cmd_classify(cfg):
    if cfg.scan == "spin1-theta":
        step = float(_parse_number(cfg.step))
        if step <= 0:
            raise BadConfig("--step must be positive")
        pts = spin1_theta_scan(theta_grid(step), cfg.tol)
        return {"scan": cfg.scan, "step": step,
                "pass_set": [p.parameter for p in pts if p.passes],
                "points": [{"theta": p.parameter, "residual": p.residual, "passes": p.passes} for p in pts]}
    if cfg.scan == "suN-delta":
        rng = np.random.default_rng(cfg.seed)
        signs = [tuple(s) for s in np.array(np.meshgrid(*[[-1.0, 1.0]] * cfg.N)).reshape(cfg.N, -1).T]
        rand = [tuple(rng.uniform(-2, 2, size=cfg.N)) for _ in range(cfg.random)]
        pts = suN_delta_scan(cfg.N, signs + rand, cfg.tol)
        return {"scan": cfg.scan, "N": cfg.N, "seed": cfg.seed,
                "points": [{"delta": list(p.parameter), "residual": p.residual, "passes": p.passes} for p in pts]}
    if cfg.scan == "spin-half-random":
        res = [spin_half_classify(a, b, cfg.tol) for a, b in random_spin_half_couplings(cfg.count, cfg.seed)]
        return {"scan": cfg.scan, "seed": cfg.seed, "count": cfg.count,
                "agreements": sum(c.agree for c in res), "results": [_classification_json(c) for c in res]}
    if cfg.scan == "spin-half-named":
        return {"scan": cfg.scan, "results": {k: _classification_json(spin_half_classify(a, b, cfg.tol))
                                              for k, (a, b) in named_spin_half_examples().items()}}
    h, src = resolve_density(cfg)
    if h.local_dim != 2:
        raise BadConfig("single-model classification is for spin-1/2 densities; use a scan otherwise")
    from .subasis import diagonalize_coupling, project_coefficients
    coeffs = project_coefficients(h, pauli_basis())
    diag = diagonalize_coupling(coeffs.as_coupling(), pauli_basis())
    if diag is None:
        raise BadConfig("coupling matrix is not diagonalizable by a complex orthogonal rotation")
    _, spec = diag
    return {"input": src, "classification": _classification_json(spin_half_classify(spec.diagonal(), spec.b, cfg.tol))}


def cmd_demo(cfg):
    val = _parse_number(cfg.cosh_eta)
    if not val.is_Rational:
        val = sp.nsimplify(float(val), rational=True)
    rep = poincare_demo(Fraction(int(val.p), int(val.q)), cfg.k_max)
    return {"demo": "poincare", "cosh_eta": rep.cosh_eta, "k_max": rep.k_max, "closure": rep.closure,
            "first_offlattice": rep.first_offlattice, "t3_relation": rep.t3_relation, "fibonacci": rep.fibonacci,
            "lattice_coordinates": [None if c is None else [str(x) for x in c] for c in rep.coordinates],
            "translations": [list(map(str, t.translation)) for t in rep.elements]}


HANDLERS = {"test": cmd_test, "bootstrap": cmd_bootstrap, "ybe": cmd_ybe, "charges": cmd_charges,
            "gtest": cmd_gtest, "classify": cmd_classify, "demo": cmd_demo}


# ---------------------------------------------------------------------------
# entry
# ---------------------------------------------------------------------------

def build_parser():
    p = argparse.ArgumentParser(prog="ybeb", description="R-matrix bootstrap and integrability tests.")
    p.add_argument("--version", action="version", version=f"ybeb {__version__}")
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp_):
        sp_.add_argument("--model", help=f"one of: {', '.join(MODEL_NAMES)}")
        sp_.add_argument("--spec", help="JSON model spec file")
        sp_.add_argument("--param", action="append", default=[], metavar="KEY=VALUE",
                         help="model parameter; VALUE is parsed as JSON")
        sp_.add_argument("--order", type=int, default=3, help="truncation order K (default 3; K >= 5 reaches the first higher condition)")
        sp_.add_argument("--tol", type=float, default=DEFAULT_TOL)
        sp_.add_argument("--c", default="0", help="shift constant: a number or 'solve'")
        sp_.add_argument("--length", type=int, default=6, help="chain length L")
        sp_.add_argument("--out", help="write the JSON report here instead of stdout")
        sp_.add_argument("--seed", type=int, default=0)

    for name in ("test", "bootstrap", "ybe", "charges", "gtest"):
        common(sub.add_parser(name))
    c = sub.add_parser("classify")
    common(c)
    c.add_argument("--scan", choices=SCANS)
    c.add_argument("--step", default="pi/36", help="angle step for spin1-theta, e.g. pi/36")
    c.add_argument("--count", type=int, default=500)
    c.add_argument("--N", type=int, default=3)
    c.add_argument("--random", type=int, default=50, help="random off-grid points for suN-delta")
    d = sub.add_parser("demo")
    d.add_argument("demo", choices=["poincare"])
    d.add_argument("--cosh-eta", default="3/2")
    d.add_argument("--k-max", type=int, default=10)
    d.add_argument("--out")
    d.add_argument("--tol", type=float, default=DEFAULT_TOL)
    return p


def _params(items):
    out = {}
    for item in items:
        key, sep, val = item.partition("=")
        if not sep:
            raise BadConfig(f"--param expects KEY=VALUE, got {item!r}")
        try:
            out[key] = json.loads(val)
        except json.JSONDecodeError:
            out[key] = val
    return out


def config_from_args(ns):
    d = vars(ns).copy()
    d["params"] = _params(d.pop("param", []))
    if "c" in d:
        d["c"] = _parse_c(d["c"])
    return RunConfig(**{k: v for k, v in d.items() if k in RunConfig.__dataclass_fields__}).validate()


def run(cfg):
    """Execute a validated config.  Returns (exit status, report dict)."""
    base = {"tool": "ybeb", "version": __version__, "backend": _kernels.BACKEND, "config": cfg.echo(),
            "tol": cfg.tol}
    try:
        body = HANDLERS[cfg.command](cfg)
    except YbebError as exc:
        return 2, {**base, "error": exc.to_dict()}
    return 0, {**base, **body}


def main(argv=None):
    parser = build_parser()
    ns = parser.parse_args(argv)
    try:
        cfg = config_from_args(ns)
    except (BadConfig, ValueError) as exc:
        err = exc.to_dict() if isinstance(exc, YbebError) else {"error": "BadConfig", "message": str(exc)}
        _emit({"tool": "ybeb", "version": __version__, "error": err}, getattr(ns, "out", None))
        return 2
    status, report = run(cfg)
    _emit(report, cfg.out)
    return status


def _emit(report, out):
    text = json.dumps(to_jsonable(report), indent=2, sort_keys=True)
    if out:
        Path(out).write_text(text + "\n", encoding="utf-8")
    else:
        sys.stdout.write(text + "\n")


if __name__ == "__main__":
    sys.exit(main())
