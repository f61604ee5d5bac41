"""Command-line entry point: ``spinor-hardy <command> [options]``.

Exit codes: 0 success, 1 usage or configuration error, 2 verification failure.
Outputs are JSON (``--json``) or CSV (``--csv``); identical inputs and seed give
identical bytes whatever ``SPINOR_HARDY_THREADS`` is set to.
"""

import argparse
import csv
import io
import json
import math
import os
import sys
import warnings
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from . import config as cfgmod
from . import fields, hardy, pauli, quadrature, spectral
from .errors import OutOfRangeError, SingularityError, SingularPointError, VerificationError

SCHEMA = 1
THREADS_ENV = "SPINOR_HARDY_THREADS"
DEFAULT_EPSILONS = "0.3,0.2,0.1,0.05"
CLOSED_FORM_TOL = 1e-10
COARSE_GRID = dict(n_r=12, n_theta=4, n_phi=8)

DEFAULT_TOL = {
    "selftest": None,
    "spectrum": 1e-8,
    "verify-identity": hardy.IDENTITY_TOL_ANALYTIC,
    "hardy": hardy.CHAIN_SLACK,
    "gauge-check": 1e-6,
}


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(f"{self.prog}: {message}")


@dataclass
class CommandResult:
    payload: dict
    header: list
    rows: list
    exit_code: int = 0
    messages: list = field(default_factory=list)


# --- helpers ----------------------------------------------------------------


def worker_count():
    raw = os.environ.get(THREADS_ENV)
    if raw is None or raw.strip() == "":
        return min(4, os.cpu_count() or 1)
    try:
        n = int(raw)
    except ValueError:
        raise UsageError(f"{THREADS_ENV} must be a positive integer, got {raw!r}") from None
    if n < 1:
        raise UsageError(f"{THREADS_ENV} must be a positive integer, got {raw!r}")
    return n


def parallel_map(fn, items):
    """Map in input order over at most ``worker_count()`` threads."""
    items = list(items)
    n = min(worker_count(), len(items))
    if n <= 1:
        return [fn(it) for it in items]
    with ThreadPoolExecutor(max_workers=n) as pool:
        return list(pool.map(fn, items))


def _clean(obj):
    """JSON-safe copy: non-finite floats become null, numpy scalars become Python."""
    if isinstance(obj, dict):
        return {str(k): _clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_clean(v) for v in obj]
    if isinstance(obj, (np.floating, float)):
        v = float(obj)
        return v if math.isfinite(v) else None
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, np.bool_):
        return bool(obj)
    return obj


def render(result, fmt):
    if fmt == "csv":
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(result.header)
        for row in result.rows:
            w.writerow(["" if v is None else (repr(float(v)) if isinstance(v, (float, np.floating)) else v) for v in row])
        return buf.getvalue()
    return json.dumps(_clean(result.payload), indent=2, sort_keys=True) + "\n"


def _base_payload(command, args, tol):
    return {"schema": SCHEMA, "command": command, "seed": args.seed, "tol": tol}


def _field_singular_at_origin(spec):
    if spec.zero:
        return False
    with np.errstate(all="ignore"):
        near, far = np.abs(spec.radial.phi(np.array([1e-6, 1e-3])))
    return not np.isfinite(near) or near > 10 * far


# --- selftest ---------------------------------------------------------------


def selftest_checks(sigmas=pauli.SIGMA):
    """(group, name, residual, tol) for the algebraic and quadrature invariants."""
    sigmas = np.asarray(sigmas, dtype=complex)
    out = []
    for j in range(3):
        herm = float(np.max(np.abs(sigmas[j] - sigmas[j].conj().T)))
        out.append(("hermiticity", f"s{j + 1}", herm, 0.0))
    for name, res in pauli.anticommutation_residuals(sigmas).items():
        out.append(("anticommutation", name, res, 0.0))
    rng = np.random.default_rng(20240101)
    F, G = rng.normal(size=(1000, 3)), rng.normal(size=(1000, 3))
    out.append(("product formula", "1000 random real pairs", pauli.sigma_product_check(F, G, sigmas), 1e-14))
    om = rng.normal(size=(1000, 3))
    om /= np.linalg.norm(om, axis=-1, keepdims=True)
    s = rng.normal(size=(1000, 2)) + 1j * rng.normal(size=(1000, 2))
    contracted = np.einsum("nab,nb->na", pauli.sigma_dot(om, sigmas), s)
    dev = float(np.max(np.abs(np.linalg.norm(contracted, axis=-1) - np.linalg.norm(s, axis=-1)) / np.linalg.norm(s, axis=-1)))
    out.append(("unit contraction", "|(sigma.omega)s| = |s|", dev, 1e-14))

    sg = quadrature.sphere_grid(32, 64)
    out.append(("quadrature", "sphere area 4*pi", abs(quadrature.integrate_sphere(sg, np.ones(len(sg.weights))) - 4 * math.pi), 1e-12))
    g3 = quadrature.grid3d()
    gauss = quadrature.integrate_weighted(g3, lambda x: np.exp(-2 * np.sum(x * x, axis=-1)), "inv_r")
    out.append(("quadrature", "int exp(-2r^2)/r = pi", abs(gauss - math.pi), 1e-10))
    gram = quadrature.harmonic_gram(8, quadrature.sphere_grid(10, 18))
    out.append(("quadrature", "Y_lm Gram matrix l<=8", float(np.max(np.abs(gram - np.eye(gram.shape[0])))), 1e-12))
    return out


def cmd_selftest(args, sigmas=None):
    checks = selftest_checks(pauli.SIGMA if sigmas is None else sigmas)
    failed = [f"{g}: {n}" for g, n, res, tol in checks if not res <= tol]
    payload = {
        "schema": SCHEMA,
        "command": "selftest",
        "checks": [{"group": g, "name": n, "residual": res, "tol": tol, "passed": res <= tol} for g, n, res, tol in checks],
        "failed": failed,
        "passed": not failed,
    }
    rows = [[g, n, res, tol, "pass" if res <= tol else "FAIL"] for g, n, res, tol in checks]
    msgs = [f"selftest failed: {f}" for f in failed]
    return CommandResult(payload, ["group", "check", "residual", "tol", "status"], rows, 1 if failed else 0, msgs)


# --- spectrum ---------------------------------------------------------------


def cmd_spectrum(args, cfg):
    if args.lmax < 0:
        raise UsageError(f"--lmax must be >= 0, got {args.lmax}")
    tol = DEFAULT_TOL["spectrum"] if args.tol is None else args.tol
    free = spectral.eigenvalues(spectral.assemble_free(args.lmax))
    payload = _base_payload("spectrum", args, tol)
    payload.update({"l_max": args.lmax, "free": free.to_dict(), "note": free.note})
    rows = [[i, v, None] for i, v in enumerate(free.eigenvalues)]
    code = 0
    msgs = []
    if not args.free:
        spec = cfgmod.build_field_spec(cfg)
        gauge = fields.make_gauge(spec)
        cmp = spectral.compare_spectra(gauge, args.lmax, args.pad)
        mag = cmp.magnetic_result(args.lmax)
        sg = spectral.magnetic_sphere_grid(gauge, args.lmax + cmp.pad)
        payload.update(
            {
                "field": spec.label,
                "magnetic": mag.to_dict(),
                "max_deviation": cmp.max_deviation,
                "pad": cmp.pad,
                "contamination_free": cmp.clean,
                "sphere_grid": {"n_theta": sg.n_theta, "n_phi": sg.n_phi, "exactness": sg.degree},
            }
        )
        rows = [[i, f, m] for i, (f, m) in enumerate(zip(free.eigenvalues, mag.eigenvalues + [None] * len(free.eigenvalues)))]
        if not cmp.max_deviation <= tol:
            code = 2
            msgs.append(f"magnetic spectrum deviates from the free one by {cmp.max_deviation:.3e} > tol {tol:.1e}")
    return CommandResult(payload, ["index", "free", "magnetic"], rows, code, msgs)


# --- verify-identity --------------------------------------------------------


def cmd_verify_identity(args, cfg):
    spec = cfgmod.build_field_spec(cfg)
    gauge = fields.make_gauge(spec)
    trial = cfgmod.build_trial(cfg, np.random.default_rng(args.seed))
    grid = cfgmod.build_grid(cfg)
    if args.coarse:
        grid = quadrature.grid3d(r_min=grid.radial.r_min, r_max=grid.radial.r_max, radial_map=grid.radial.map, **COARSE_GRID)
    default_tol = hardy.IDENTITY_TOL_FD if args.method == "fd" else hardy.IDENTITY_TOL_ANALYTIC
    tol = default_tol if args.tol is None else args.tol
    report = hardy.identity_terms(gauge, trial, grid, args.method, order=args.fd_order)
    rel = report.relative_residual if args.identity_form == "stated" else report.relative_corrected_residual
    passed = rel <= tol
    payload = _base_payload("verify-identity", args, tol)
    payload.update(report.to_dict())
    payload.update(
        {
            "form": args.identity_form,
            "method": args.method,
            "field": spec.label,
            "trial": trial.label,
            "passed": passed,
            "pauli_term_direct": hardy.pauli_term_direct(gauge, trial, grid),
        }
    )
    msgs = []
    if not passed:
        k = report.dominant_term()
        hint = (
            f"relative residual {rel:.3e} exceeds tol {tol:.1e}; dominant term T{k}; "
            f"refine the grid (double grid.n_r and grid.n_theta, now {grid.metadata()['n_r']} and {grid.sphere.n_theta})"
        )
        if args.identity_form == "stated" and report.relative_corrected_residual <= tol:
            hint += (
                f"; the closure T1 = T2+T3+T4+T5-T6 holds (relative residual {report.relative_corrected_residual:.3e}),"
                f" the gap being int r <sigma.B phi, phi> = {report.pauli_term:.6e}"
            )
        payload["hint"] = hint
        msgs.append(hint)
    rows = [[f"T{i}", t] for i, t in enumerate(report.terms(), start=1)]
    rows += [["residual", report.residual], ["scale", report.scale], ["relative_residual", report.relative_residual]]
    return CommandResult(payload, ["quantity", "value"], rows, 0 if passed else 2, msgs)


# --- hardy ------------------------------------------------------------------


def _parse_epsilons(text):
    items = [t.strip() for t in text.split(",")]
    if items == [""]:
        raise UsageError("--epsilons: empty epsilon list in family mode")
    if "" in items:
        raise UsageError(f"--epsilons: empty item in {text!r}")
    try:
        eps = [float(t) for t in items]
    except ValueError:
        raise UsageError(f"--epsilons: cannot parse {text!r}") from None
    for e in eps:
        if not 0 < e < 1:
            raise UsageError(f"--epsilons: epsilon {e!r} outside (0, 1)")
    return eps


def _hardy_row(gauge, field_, grid, tol):
    rep = hardy.identity_terms(gauge, field_, grid)
    chain = hardy.ChainValues(-rep.T4, rep.T3, rep.T1, tol)
    if rep.T4 == 0:
        raise UsageError("trial field vanishes; the Hardy quotient is undefined")
    return rep.T1 / -rep.T4, chain


def cmd_hardy(args, cfg):
    tol = DEFAULT_TOL["hardy"] if args.tol is None else args.tol
    family = args.family or args.epsilons is not None
    payload = _base_payload("hardy", args, tol)
    entries = []
    if family:
        eps_list = _parse_epsilons(DEFAULT_EPSILONS if args.epsilons is None else args.epsilons)
        spec = cfgmod.build_field_spec(cfg, default=None)
        gauge = fields.make_gauge(spec)
        n_panel = cfg.get("grid.n_r", 48)

        def run(eps):
            prof = hardy.NearExtremalProfile(eps, args.smoothing)
            q, chain = _hardy_row(gauge, prof.field(), prof.grid(n_panel), tol)
            return {"epsilon": eps, "quotient": q, "chain": list(chain), "ordered": chain.ordered,
                    "ideal": hardy.ideal_quotient(eps), "oracle_1d": hardy.radial_quotient_oracle(prof) if spec.zero else None}

        entries = parallel_map(run, eps_list)
        qs = [e["quotient"] for e in entries]
        payload.update(
            {
                "mode": "family",
                "family_tag": f"piecewise_power(smoothing={args.smoothing:g})",
                "field": spec.label,
                "monotone": all(a > b for a, b in zip(qs[:-1], qs[1:])) if list(eps_list) == sorted(eps_list, reverse=True) else None,
                "grid": hardy.NearExtremalProfile(eps_list[0], args.smoothing).grid(n_panel).metadata(),
            }
        )
    else:
        spec = cfgmod.build_field_spec(cfg)
        gauge = fields.make_gauge(spec)
        grid = cfgmod.build_grid(cfg)
        if args.trials < 1:
            raise UsageError("--trials must be >= 1")
        seeds = np.random.SeedSequence(args.seed).spawn(args.trials)
        trials = [cfgmod.build_trial(cfg, np.random.default_rng(s), default="random") for s in seeds]

        def run(tf):
            q, chain = _hardy_row(gauge, tf, grid, tol)
            return {"epsilon": None, "trial": tf.label, "quotient": q, "chain": list(chain), "ordered": chain.ordered}

        entries = parallel_map(run, trials)
        payload.update({"mode": "trials", "field": spec.label, "grid": grid.metadata()})
    msgs = []
    for e in entries:
        bad = e["quotient"] < 1 - tol or not e["ordered"]
        e["violation"] = bad
        if bad:
            where = f"epsilon={e['epsilon']!r}" if e["epsilon"] is not None else f"trial {e['trial']}"
            msgs.append(f"violation at {where}: quotient={e['quotient']!r}, chain={e['chain']!r}")
    payload["entries"] = entries
    payload["passed"] = not msgs
    rows = [[e["epsilon"], e["quotient"]] for e in entries]
    return CommandResult(payload, ["epsilon", "quotient"], rows, 2 if msgs else 0, msgs)


# --- gauge-check ------------------------------------------------------------


def cmd_gauge_check(args, cfg):
    tol = DEFAULT_TOL["gauge-check"] if args.tol is None else args.tol
    spec = cfgmod.build_field_spec(cfg)
    gauge = fields.make_gauge(spec)
    if args.samples < 1:
        raise UsageError("--samples must be >= 1")
    rng = np.random.default_rng(args.seed)
    d = rng.normal(size=(args.samples, 3))
    d /= np.linalg.norm(d, axis=-1, keepdims=True)
    x = d * rng.uniform(0.5, 2.0, size=(args.samples, 1))
    if _field_singular_at_origin(spec):
        warnings.warn("radial profile is singular at r = 0; integrals over this field should use grid.radial_map = log", RuntimeWarning)
    curl = float(np.max(fields.curl_residual(gauge, x, args.h)))
    gres = fields.gauge_condition_residual(gauge, x, args.h)
    closed, fd = float(np.max(gres.closed_form)), float(np.max(gres.finite_difference))
    bdotx = float(np.max(np.abs(np.sum(gauge.B(x) * x, axis=-1))))
    passed = curl <= tol and fd <= tol and closed <= CLOSED_FORM_TOL
    payload = _base_payload("gauge-check", args, tol)
    payload.update(
        {
            "field": spec.label,
            "samples": args.samples,
            "shell": [0.5, 2.0],
            "h": args.h,
            "max_curl_residual": curl,
            "max_gauge_residual_closed_form": closed,
            "max_gauge_residual_fd": fd,
            "closed_form_tol": CLOSED_FORM_TOL,
            "max_B_dot_x": bdotx,
            "passed": passed,
        }
    )
    rows = [["max_curl_residual", curl], ["max_gauge_residual_closed_form", closed], ["max_gauge_residual_fd", fd]]
    msgs = [] if passed else [f"gauge check failed: curl {curl:.3e}, closed form {closed:.3e}, fd {fd:.3e} (tol {tol:.1e})"]
    return CommandResult(payload, ["quantity", "value"], rows, 0 if passed else 2, msgs)


# --- parser -----------------------------------------------------------------


def build_parser():
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", default=argparse.SUPPRESS, help="key = value config file")
    common.add_argument("--set", action="append", metavar="KEY=VALUE", default=argparse.SUPPRESS, help="override a config key")
    common.add_argument("--tol", type=float, default=argparse.SUPPRESS, help="verification tolerance")
    common.add_argument("--seed", type=int, default=argparse.SUPPRESS, help="random seed (default 0)")
    common.add_argument("--out", default=argparse.SUPPRESS, help="write output here instead of stdout")
    fmt = common.add_mutually_exclusive_group()
    fmt.add_argument("--json", dest="format", action="store_const", const="json", default=argparse.SUPPRESS)
    fmt.add_argument("--csv", dest="format", action="store_const", const="csv", default=argparse.SUPPRESS)

    p = _Parser(prog="spinor-hardy", parents=[common], description="Numerical checks of magnetic Hardy-Dirac inequalities.")
    sub = p.add_subparsers(dest="command", parser_class=_Parser)
    sub.required = True

    sub.add_parser("selftest", parents=[common], help="Pauli algebra and quadrature invariants")

    sp = sub.add_parser("spectrum", parents=[common], help="spectrum of sigma.L_A + 1 on the sphere")
    sp.add_argument("--lmax", type=int, default=6)
    sp.add_argument("--free", action="store_true", help="free operator only")
    sp.add_argument("--pad", type=int, default=None, help="extra shells for the magnetic assembly (default: adaptive)")

    vi = sub.add_parser("verify-identity", parents=[common], help="quadrature check of the weighted Dirac identity")
    vi.add_argument("--coarse", action="store_true", help="use a deliberately coarse grid")
    vi.add_argument("--method", choices=("analytic", "fd"), default="analytic")
    vi.add_argument("--fd-order", type=int, choices=(2, 4), default=2)
    vi.add_argument("--identity-form", choices=("stated", "corrected"), default="stated")

    hp = sub.add_parser("hardy", parents=[common], help="Hardy quotients and the inequality chain")
    hp.add_argument("--family", action="store_true", help="near-extremal family mode")
    hp.add_argument("--epsilons", default=None, help=f"comma-separated list (family mode, default {DEFAULT_EPSILONS})")
    hp.add_argument("--smoothing", type=float, default=0.05)
    hp.add_argument("--trials", type=int, default=1, help="number of seeded trial fields (trial mode)")

    gc = sub.add_parser("gauge-check", parents=[common], help="curl and gauge-condition residuals")
    gc.add_argument("--samples", type=int, default=200)
    gc.add_argument("--h", type=float, default=1e-4)
    return p


COMMANDS = {
    "spectrum": cmd_spectrum,
    "verify-identity": cmd_verify_identity,
    "hardy": cmd_hardy,
    "gauge-check": cmd_gauge_check,
}


def _finish_args(args):
    for name, default in (("config", None), ("set", []), ("tol", None), ("seed", 0), ("out", None), ("format", None)):
        if not hasattr(args, name):
            setattr(args, name, default)
    if args.format is None:
        args.format = "csv" if args.command == "hardy" else "json"
    return args


def main(argv=None, sigmas=None):
    """Run the CLI; returns the exit code.  ``sigmas`` replaces the Pauli
    matrices in ``selftest`` (used to check that broken algebra is caught)."""
    stdout, stderr = sys.stdout, sys.stderr
    try:
        args = _finish_args(build_parser().parse_args(argv))
        cfg = cfgmod.load_config(args.config) if args.config else cfgmod.RunConfig()
        cfgmod.apply_overrides(cfg, args.set)
        with warnings.catch_warnings(record=True) as caught:
            warnings.simplefilter("always")
            if args.command == "selftest":
                result = cmd_selftest(args, sigmas)
            else:
                result = COMMANDS[args.command](args, cfg)
        notes = sorted({str(w.message) for w in caught})
        if notes and isinstance(result.payload, dict):
            result.payload["warnings"] = notes
    except UsageError as exc:
        print(f"usage error: {exc}", file=stderr)
        return 1
    except cfgmod.ConfigError as exc:
        print(f"config error: {exc}", file=stderr)
        return 1
    except (SingularityError, SingularPointError, OutOfRangeError, ValueError) as exc:
        print(f"error: {exc}", file=stderr)
        return 1
    except VerificationError as exc:
        print(f"verification failed: {exc}", file=stderr)
        return 2
    for n in notes:
        print(f"warning: {n}", file=stderr)
    text = render(result, args.format)
    if args.out:
        with open(args.out, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
    else:
        stdout.write(text)
    for m in result.messages:
        print(m, file=stderr)
    return result.exit_code


def run():
    sys.exit(main())
