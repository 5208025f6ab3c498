"""Command-line entry point.

Subcommands cover the whole pipeline: solve a system and archive the
wavefunction, evaluate entropy and density from an archive, print
geometric expectation values, run a nuclear-charge scan, dump quadrature
rules, and run the quick oracle suites.

Reproducibility rules baked in here:

* every number printed or persisted is a decimal string, never a binary
  float repr;
* identical argv plus config file produce byte-identical output documents
  (the run id is a digest of exactly those inputs);
* each file-writing run leaves a manifest next to its outputs with the
  command, resolved settings, precision policy, timings, and output
  digests.  Timings live only in the manifest, which is why the manifest
  itself is exempt from the byte-identity rule.

Exit codes: 0 success, 1 a computation failed to converge, 2 usage or
input errors.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import random
import sys
import time
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path
from typing import Optional

import gmpy2
from gmpy2 import mpfr

from . import __version__
from .archive import ArchiveError, load_wavefunction, save_wavefunction
from .basis import BasisSpec
from .density import (
    density_at,
    density_oracle,
    hydrogenic_entropy,
    radial_density,
    shannon_entropy,
)
from .integrals import IntegralKey, base_integral, base_integral_oracle
from .operators import (
    SystemSpec,
    Wavefunction,
    assemble_operators,
    assemble_overlap,
    expectation_values,
)
from .precision import (
    PrecisionPolicy,
    RuleGenerationError,
    default_bits_from_env,
    format_decimal,
    make_gauss_laguerre,
    serialize_mpfr,
    working_precision,
)
from .solver import SolverError, default_decay_start, ladder_optimize, lowest_state
from .zscan import ScanConfig, emit_table, scan_z

EXIT_OK = 0
EXIT_NONCONVERGED = 1
EXIT_USAGE = 2

_SYSTEM_ALIASES = {
    "hminus": "1",
    "he": "2",
    "liplus": "3",
}


class UsageError(Exception):
    """Bad flags or input values; maps to exit code 2."""


# ---------------------------------------------------------------------------
# settings: flags > config file > environment/defaults


def _load_config(path: Optional[str]) -> dict:
    if path is None:
        return {}
    try:
        raw = Path(path).read_text()
    except OSError as exc:
        raise UsageError(f"cannot read config file {path}: {exc}") from exc
    try:
        doc = json.loads(raw)
    except json.JSONDecodeError as exc:
        raise UsageError(f"config file {path} is not valid JSON: {exc}") from exc
    if not isinstance(doc, dict):
        raise UsageError(f"config file {path} must hold a JSON object")
    return doc


def _resolve_settings(args: argparse.Namespace, keys: list[str]) -> dict:
    """One value per setting key, with flags overriding the config file."""
    config = _load_config(args.config)
    unknown = set(config) - set(keys) - {"bits", "workers"}
    if unknown:
        raise UsageError(f"unknown config keys: {sorted(unknown)}")
    settings = {}
    for key in keys:
        flag_value = getattr(args, key, None)
        if flag_value is not None:
            settings[key] = flag_value
        elif key in config:
            settings[key] = config[key]
        else:
            settings[key] = None
    bits = settings.get("bits")
    if bits is None:
        bits = default_bits_from_env()
    bits = int(bits)
    if bits < 2:
        raise UsageError(f"precision bits must be at least 2, got {bits}")
    settings["bits"] = bits
    workers = settings.get("workers")
    settings["workers"] = 1 if workers is None else max(1, int(workers))
    return settings


def _canonical_json(obj) -> str:
    return json.dumps(obj, sort_keys=True, separators=(",", ":"))


def _jsonable(settings: dict) -> dict:
    return {k: v for k, v in settings.items() if v is not None}


def _run_id(command: list[str], settings: dict, policy: PrecisionPolicy) -> str:
    doc = {
        "command": command,
        "config": _jsonable(settings),
        "precision": {
            "mantissa_bits": policy.mantissa_bits,
            "escalation_factor": policy.escalation_factor,
            "max_bits": policy.max_bits,
        },
        "version": __version__,
    }
    return hashlib.sha256(_canonical_json(doc).encode()).hexdigest()[:16]


def _write_manifest(
    anchor: str,
    run_id: str,
    command: list[str],
    settings: dict,
    policy: PrecisionPolicy,
    timings: dict,
    outputs: list[str],
) -> None:
    entries = []
    for path in outputs:
        data = Path(path).read_bytes()
        entries.append(
            {
                "path": str(path),
                "sha256": hashlib.sha256(data).hexdigest(),
                "bytes": len(data),
            }
        )
    manifest = {
        "run_id": run_id,
        "command": command,
        "config": _jsonable(settings),
        "precision": {
            "mantissa_bits": policy.mantissa_bits,
            "escalation_factor": policy.escalation_factor,
            "max_bits": policy.max_bits,
        },
        "version": __version__,
        "timings": timings,
        "outputs": entries,
    }
    Path(f"{anchor}.manifest.json").write_text(
        json.dumps(manifest, indent=1) + "\n"
    )


# ---------------------------------------------------------------------------
# shared argument handling


def _parse_system(token: str, no_ee: bool) -> SystemSpec:
    """Map a --system token to a SystemSpec at the active precision."""
    if token == "psminus":
        if no_ee:
            raise UsageError("--no-ee applies only to fixed-nucleus systems")
        return SystemSpec.ps_minus()
    if token in _SYSTEM_ALIASES:
        charge = _SYSTEM_ALIASES[token]
    elif token.startswith("z:"):
        charge = token[2:]
    else:
        raise UsageError(
            f"unknown system {token!r}; use hminus, he, liplus, psminus, or z:<real>"
        )
    try:
        z = mpfr(charge)
    except ValueError as exc:
        raise UsageError(f"bad charge in system token {token!r}") from exc
    if not (gmpy2.is_finite(z) and z > 0):
        raise UsageError(f"nuclear charge must be positive and finite, got {charge}")
    return SystemSpec.nucleus(z, interaction_on=not no_ee)


def _decimal(settings: dict, key: str, minimum=None) -> Optional[mpfr]:
    raw = settings.get(key)
    if raw is None:
        return None
    try:
        value = mpfr(str(raw))
    except ValueError as exc:
        raise UsageError(f"--{key} expects a decimal number, got {raw!r}") from exc
    if not gmpy2.is_finite(value):
        raise UsageError(f"--{key} must be finite, got {raw!r}")
    if minimum is not None and not value > minimum:
        raise UsageError(f"--{key} must be greater than {minimum}, got {raw!r}")
    return value


def _load_archive(path: Optional[str]) -> Wavefunction:
    if path is None:
        raise UsageError("--wavefunction is required")
    return load_wavefunction(path)


def _emit(text: str, out: Optional[str]) -> list[str]:
    """Print to stdout, or write to the given path; returns written files."""
    if out is None:
        sys.stdout.write(text)
        return []
    Path(out).write_text(text)
    return [out]


# ---------------------------------------------------------------------------
# solve


def _cmd_solve(args, settings, command) -> int:
    policy = PrecisionPolicy(mantissa_bits=settings["bits"])
    run_id = _run_id(command, settings, policy)
    omega = settings.get("omega")
    if omega is None:
        raise UsageError("--omega is required")
    omega = int(omega)
    system = _parse_system_setting(settings)
    alpha = _decimal(settings, "alpha", minimum=0)
    beta = _decimal(settings, "beta", minimum=0)
    optimize = bool(settings.get("optimize"))
    if optimize and (alpha is not None or beta is not None):
        raise UsageError("--optimize and explicit --alpha/--beta are exclusive")
    if (alpha is None) != (beta is None):
        raise UsageError("--alpha and --beta must be given together")
    budget = int(settings.get("budget") or 80)

    t0 = time.perf_counter()
    converged = True
    lines = []
    if optimize:
        result = ladder_optimize(system, omega, budget=budget, policy=policy)
        state = result.state
        wf = state.wavefunction()
        converged = result.converged
        lines.append(f"energy {format_decimal(result.energy, 12)}")
        lines.append(f"alpha {format_decimal(result.alpha, 12)}")
        lines.append(f"beta {format_decimal(result.beta, 12)}")
        lines.append(f"evaluations {result.evaluations}")
        lines.append(f"converged {'true' if result.converged else 'false'}")
    else:
        with working_precision(settings["bits"]):
            # decimal strings are re-read at full precision inside the context
            if alpha is None:
                alpha, beta = default_decay_start(system)
            else:
                alpha = mpfr(str(settings["alpha"]))
                beta = mpfr(str(settings["beta"]))
            basis = BasisSpec(omega, alpha, beta)
            ops = assemble_operators(system, basis)
        sol = lowest_state(ops)
        wf = Wavefunction(system, basis, sol.energy, sol.vector, ops.bits)
        lines.append(f"energy {format_decimal(sol.energy, 12)}")
        lines.append(f"alpha {format_decimal(alpha, 12)}")
        lines.append(f"beta {format_decimal(beta, 12)}")
        lines.append("converged true")
    elapsed = time.perf_counter() - t0

    sys.stdout.write("\n".join(lines) + "\n")
    out = settings.get("out")
    if out is not None:
        save_wavefunction(wf, out, run_id=run_id)
        _write_manifest(
            out,
            run_id,
            command,
            settings,
            policy,
            {"solve_s": round(elapsed, 3)},
            [out],
        )
    return EXIT_OK if converged else EXIT_NONCONVERGED


def _parse_system_setting(settings: dict) -> SystemSpec:
    token = settings.get("system")
    if token is None:
        raise UsageError("--system is required")
    with working_precision(settings["bits"]):
        return _parse_system(str(token), bool(settings.get("no_ee")))


# ---------------------------------------------------------------------------
# entropy / density / expect


def _cmd_entropy(args, settings, command) -> int:
    policy = PrecisionPolicy(mantissa_bits=settings["bits"])
    run_id = _run_id(command, settings, policy)
    wf = _load_archive(settings.get("wavefunction"))
    order = settings.get("order")
    start_order = 200 if order is None else int(order)
    if start_order < 2:
        raise UsageError(f"--order must be at least 2, got {start_order}")
    scale = settings.get("scale")
    if scale is not None:
        scale = str(scale)

    t0 = time.perf_counter()
    profile = radial_density(wf)
    result = shannon_entropy(
        profile,
        start_order=start_order,
        max_order=max(1600, 8 * start_order),
        scale=scale,
    )
    elapsed = time.perf_counter() - t0

    record = {
        "S_r": format_decimal(result.value, 12),
        "norm_residual": format_decimal(result.norm_residual, 3),
        "order": result.order,
        "converged": result.converged,
        "run_id": run_id,
    }
    text = json.dumps(record, indent=1) + "\n"
    written = _emit(text, settings.get("out"))
    if written:
        _write_manifest(
            written[0],
            run_id,
            command,
            settings,
            policy,
            {"entropy_s": round(elapsed, 3)},
            written,
        )
    return EXIT_OK if result.converged else EXIT_NONCONVERGED


def _cmd_density(args, settings, command) -> int:
    policy = PrecisionPolicy(mantissa_bits=settings["bits"])
    run_id = _run_id(command, settings, policy)
    wf = _load_archive(settings.get("wavefunction"))
    rmax = _decimal(settings, "rmax", minimum=0)
    if rmax is None:
        raise UsageError("--rmax is required")
    points = settings.get("points")
    if points is None:
        raise UsageError("--points is required")
    points = int(points)
    if points < 1:
        raise UsageError(f"--points must be at least 1, got {points}")

    t0 = time.perf_counter()
    profile = radial_density(wf)
    rows = [f"# run {run_id}", "r,rho,4*pi*r^2*rho"]
    with working_precision(wf.bits):
        rmax = mpfr(str(settings["rmax"]))
        four_pi = 4 * gmpy2.const_pi()
        for j in range(1, points + 1):
            r = rmax * j / points
            rho = density_at(profile, r)
            shell = four_pi * r * r * rho
            rows.append(
                f"{format_decimal(r, 10)},{format_decimal(rho, 10)},"
                f"{format_decimal(shell, 10)}"
            )
    text = "\n".join(rows) + "\n"
    elapsed = time.perf_counter() - t0

    written = _emit(text, settings.get("out"))
    if written:
        _write_manifest(
            written[0],
            run_id,
            command,
            settings,
            policy,
            {"density_s": round(elapsed, 3)},
            written,
        )
    return EXIT_OK


def _cmd_expect(args, settings, command) -> int:
    wf = _load_archive(settings.get("wavefunction"))
    r1, r12 = expectation_values(wf)
    sys.stdout.write(f"r1 {format_decimal(r1, 11)}\n")
    sys.stdout.write(f"r12 {format_decimal(r12, 11)}\n")
    return EXIT_OK


# ---------------------------------------------------------------------------
# scan-z


def _cmd_scan_z(args, settings, command) -> int:
    policy = PrecisionPolicy(mantissa_bits=settings["bits"])
    run_id = _run_id(command, settings, policy)
    omega = settings.get("omega")
    if omega is None:
        raise UsageError("--omega is required")
    out = settings.get("out")
    if out is None:
        raise UsageError("--out is required")
    fmt = settings.get("format") or "csv"
    if fmt not in ("csv", "json"):
        raise UsageError(f"--format must be csv or json, got {fmt!r}")

    kwargs = {}
    for cfg_key, key in (
        ("z_from", "z_from"),
        ("z_to", "z_to"),
        ("z_step", "z_step"),
        ("below_cr_strategy", "strategy"),
    ):
        value = settings.get(key)
        if value is not None:
            kwargs[cfg_key] = str(value)
    budget = settings.get("budget")
    if budget is not None:
        budget = int(budget)
        kwargs["budget"] = budget
        kwargs["first_budget"] = max(budget, 80)
    try:
        config = ScanConfig(omega=int(omega), policy=policy, **kwargs)
    except ValueError as exc:
        raise UsageError(str(exc)) from exc

    def progress(row):
        sys.stderr.write(
            f"Z={format_decimal(row.z, 6)} {row.regime}"
            f" E={format_decimal(row.energy, 10)}"
            f" S_r={format_decimal(row.entropy, 8)}"
            f"{'' if row.solver_converged else ' UNCONVERGED'}\n"
        )
        sys.stderr.flush()

    t0 = time.perf_counter()
    rows = scan_z(config, progress=progress)
    elapsed = time.perf_counter() - t0

    Path(out).write_text(emit_table(rows, fmt=fmt, run_id=run_id))
    _write_manifest(
        out,
        run_id,
        command,
        settings,
        policy,
        {"scan_s": round(elapsed, 3)},
        [out],
    )
    clean = all(r.solver_converged and r.entropy_converged for r in rows)
    if clean or settings.get("keep_going"):
        return EXIT_OK
    return EXIT_NONCONVERGED


# ---------------------------------------------------------------------------
# gl-nodes


def _cmd_gl_nodes(args, settings, command) -> int:
    policy = PrecisionPolicy(mantissa_bits=settings["bits"])
    run_id = _run_id(command, settings, policy)
    n = settings.get("n")
    if n is None:
        raise UsageError("--n is required")
    n = int(n)
    if n < 1:
        raise UsageError(f"--n must be at least 1, got {n}")
    with working_precision(settings["bits"]):
        rule = make_gauss_laguerre(n)
        nodes, weights = rule.nodes, rule.weights
        if settings.get("scale") is not None:
            s = mpfr(str(settings["scale"]))
            if not s > 0:
                raise UsageError(f"--scale must be positive, got {settings['scale']}")
            # substitution x = s r: the pair then integrates f(r) e^{-s r}
            nodes = [x / s for x in nodes]
            weights = [w / s for w in weights]
        lines = [f"# run {run_id}", "node,weight"]
        for x, w in zip(nodes, weights):
            lines.append(f"{serialize_mpfr(x)},{serialize_mpfr(w)}")
    text = "\n".join(lines) + "\n"
    written = _emit(text, settings.get("out"))
    if written:
        _write_manifest(
            written[0], run_id, command, settings, policy, {}, written
        )
    return EXIT_OK


# ---------------------------------------------------------------------------
# validate


def _check(name: str, ok: bool, detail: str, failures: list) -> None:
    tag = "ok" if ok else "FAIL"
    sys.stdout.write(f"{tag:4s} {name}: {detail}\n")
    if not ok:
        failures.append(name)


def _cmd_validate(args, settings, command) -> int:
    bits = settings["bits"]
    workers = settings["workers"]
    failures: list = []

    with working_precision(bits):
        # quadrature rule against exact moments of the Laguerre weight
        rule = make_gauss_laguerre(30)
        worst = mpfr(0)
        for k, exact in ((5, 120), (12, 479001600)):
            got = rule.integrate(lambda x, k=k: x**k)
            worst = max(worst, abs(got - exact) / exact)
        _check(
            "gl-rule", worst < mpfr("1e-30"),
            f"order-30 moment error {format_decimal(worst, 3)}", failures,
        )

        # single-term symmetrized overlap has the closed form 4 pi^2
        s00 = assemble_overlap(BasisSpec(0, mpfr(1), mpfr(1)))[0][0]
        target = 4 * gmpy2.const_pi() ** 2
        dev = abs(s00 / target - 1)
        _check(
            "overlap-closed-form", dev < mpfr("1e-60"),
            f"relative deviation {format_decimal(dev, 3)}", failures,
        )

    # closed-form integrals against the independent quadrature oracle
    rng = random.Random(20260816)
    keys = []
    with working_precision(bits):
        for _ in range(12):
            keys.append(
                IntegralKey(
                    rng.randint(0, 6),
                    rng.randint(0, 6),
                    rng.randint(0, 6),
                    mpfr(f"{rng.uniform(0.3, 4):.6f}"),
                    mpfr(f"{rng.uniform(0.3, 4):.6f}"),
                )
            )

    def compare(key):
        with working_precision(bits):
            exact = float(base_integral(key))
        approx = base_integral_oracle(key)
        return abs(approx / exact - 1)

    with ThreadPoolExecutor(max_workers=workers) as pool:
        devs = list(pool.map(compare, keys))
    worst_dev = max(devs)
    _check(
        "integral-oracle", worst_dev < 1e-8,
        f"12 random keys, worst relative deviation {worst_dev:.2e}", failures,
    )

    # non-interacting system against the hydrogenic closed forms
    with working_precision(bits):
        z = mpfr(2)
        system = SystemSpec.nucleus(z, interaction_on=False)
        basis = BasisSpec(2, z, z)
        ops = assemble_operators(system, basis)
        # the exact state sits in the basis, so keep the shift clear of it
        sol = lowest_state(ops, sigma=-z * z - 1)
        e_dev = abs(sol.energy + z * z)
        _check(
            "free-energy", e_dev < mpfr("1e-10"),
            f"|E + Z^2| = {format_decimal(e_dev, 3)} at Z=2", failures,
        )
        wf = Wavefunction(system, basis, sol.energy, sol.vector, ops.bits)
        result = shannon_entropy(radial_density(wf))
        s_target = hydrogenic_entropy(z)
        s_dev = abs(result.value - s_target)
        _check(
            "free-entropy",
            result.converged and s_dev < mpfr("1e-8"),
            f"|S_r - (3 + ln pi - 3 ln Z)| = {format_decimal(s_dev, 3)}", failures,
        )
        _check(
            "norm-residual", result.norm_residual < mpfr("1e-8"),
            f"quadrature norm defect {format_decimal(result.norm_residual, 3)}",
            failures,
        )

        # closed-form density against direct 2-D quadrature
        helium = SystemSpec.nucleus(2)
        basis = BasisSpec(3, mpfr("1.7"), mpfr("1.7"))
        ops = assemble_operators(helium, basis)
        sol = lowest_state(ops)
        wf = Wavefunction(helium, basis, sol.energy, sol.vector, ops.bits)
        profile = radial_density(wf)
        worst = 0.0
        for r in ("0.4", "1.5"):
            closed = float(density_at(profile, mpfr(r)))
            direct = density_oracle(wf, float(r))
            worst = max(worst, abs(direct / closed - 1))
        _check(
            "density-oracle", worst < 1e-8,
            f"worst relative deviation {worst:.2e}", failures,
        )

    if failures:
        sys.stdout.write(f"{len(failures)} check(s) failed\n")
        return EXIT_NONCONVERGED
    sys.stdout.write("all checks passed\n")
    return EXIT_OK


# ---------------------------------------------------------------------------
# parser


def _common_flags(parser: argparse.ArgumentParser) -> None:
    parser.add_argument(
        "--bits",
        type=int,
        default=None,
        help="mantissa bits for all arithmetic (default: $HELIKE_BITS or 256)",
    )
    parser.add_argument(
        "--config",
        default=None,
        help="JSON file with default settings; explicit flags win",
    )
    parser.add_argument(
        "--workers",
        type=int,
        default=None,
        help="worker threads for independent oracle evaluations (default 1)",
    )


_SETTINGS: dict = {
    "solve": [
        "bits", "workers", "system", "omega", "no_ee", "alpha", "beta",
        "optimize", "budget", "out",
    ],
    "entropy": ["bits", "workers", "wavefunction", "order", "scale", "out"],
    "density": ["bits", "workers", "wavefunction", "rmax", "points", "out"],
    "expect": ["bits", "workers", "wavefunction"],
    "scan-z": [
        "bits", "workers", "omega", "z_from", "z_to", "z_step", "strategy",
        "format", "budget", "keep_going", "out",
    ],
    "gl-nodes": ["bits", "workers", "n", "scale", "out"],
    "validate": ["bits", "workers"],
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="helike",
        description="Variational solver for two-electron atoms and ions",
    )
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="cmd", required=True)

    p = sub.add_parser("solve", help="solve one system and archive the state")
    _common_flags(p)
    p.add_argument("--system", help="hminus | he | liplus | psminus | z:<real>")
    p.add_argument("--omega", type=int, help="basis truncation order")
    p.add_argument("--no-ee", dest="no_ee", action="store_true", default=None,
                   help="drop electron-electron repulsion (analytic-oracle mode)")
    p.add_argument("--alpha", help="first decay parameter (decimal string)")
    p.add_argument("--beta", help="second decay parameter (decimal string)")
    p.add_argument("--optimize", action="store_true", default=None,
                   help="optimize (alpha, beta) instead of fixing them")
    p.add_argument("--budget", type=int, help="optimizer evaluation budget")
    p.add_argument("--out", help="wavefunction archive path (JSON)")

    p = sub.add_parser("entropy", help="Shannon entropy of an archived state")
    _common_flags(p)
    p.add_argument("--wavefunction", help="wavefunction archive path")
    p.add_argument("--order", type=int,
                   help="starting quadrature order (doubled until stable)")
    p.add_argument("--scale", help="quadrature scale override (decimal string)")
    p.add_argument("--out", help="write the JSON record here instead of stdout")

    p = sub.add_parser("density", help="radial density table of an archived state")
    _common_flags(p)
    p.add_argument("--wavefunction", help="wavefunction archive path")
    p.add_argument("--rmax", help="largest radius (decimal string)")
    p.add_argument("--points", type=int, help="number of evenly spaced radii")
    p.add_argument("--out", help="write the CSV here instead of stdout")

    p = sub.add_parser("expect", help="expectation values <r1> and <r12>")
    _common_flags(p)
    p.add_argument("--wavefunction", help="wavefunction archive path")

    p = sub.add_parser("scan-z", help="nuclear-charge scan across the bound edge")
    _common_flags(p)
    p.add_argument("--from", dest="z_from", help="lowest charge (decimal string)")
    p.add_argument("--to", dest="z_to", help="highest charge (decimal string)")
    p.add_argument("--step", dest="z_step", help="grid step (decimal string)")
    p.add_argument("--omega", type=int, help="basis truncation order (>= 5)")
    p.add_argument("--strategy", choices=("freeze", "extrapolate"),
                   help="parameter handling below the critical charge")
    p.add_argument("--format", choices=("csv", "json"), help="table format")
    p.add_argument("--budget", type=int, help="per-row optimizer budget")
    p.add_argument("--keep-going", dest="keep_going", action="store_true",
                   default=None, help="exit 0 even if some rows fail to converge")
    p.add_argument("--out", help="table output path")

    p = sub.add_parser("gl-nodes", help="dump a Gauss-Laguerre rule")
    _common_flags(p)
    p.add_argument("--n", type=int, help="rule order")
    p.add_argument("--scale", help="map rule to weight e^{-scale x}")
    p.add_argument("--out", help="write the CSV here instead of stdout")

    p = sub.add_parser("validate", help="run the quick oracle suites")
    _common_flags(p)

    return parser


_HANDLERS = {
    "solve": _cmd_solve,
    "entropy": _cmd_entropy,
    "density": _cmd_density,
    "expect": _cmd_expect,
    "scan-z": _cmd_scan_z,
    "gl-nodes": _cmd_gl_nodes,
    "validate": _cmd_validate,
}


def main(argv: Optional[list] = None) -> int:
    command = list(sys.argv[1:] if argv is None else argv)
    parser = build_parser()
    args = parser.parse_args(command)
    try:
        settings = _resolve_settings(args, _SETTINGS[args.cmd])
        return _HANDLERS[args.cmd](args, settings, command)
    except UsageError as exc:
        sys.stderr.write(f"error: {exc}\n")
        return EXIT_USAGE
    except ArchiveError as exc:
        sys.stderr.write(f"error: bad wavefunction archive: {exc}\n")
        return EXIT_USAGE
    except (ValueError, OSError) as exc:
        sys.stderr.write(f"error: {exc}\n")
        return EXIT_USAGE
    except (SolverError, RuleGenerationError) as exc:
        sys.stderr.write(f"error: computation failed: {exc}\n")
        return EXIT_NONCONVERGED


if __name__ == "__main__":
    sys.exit(main())
