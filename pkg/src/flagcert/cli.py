"""Command-line front end: every pipeline stage as a subcommand.

Artifacts land in a work directory (default ``build``); the pipeline
subcommand chains gen-sdp, solve, round and certify.  Defaults can come
from a plain "key = value" config file, with explicit flags winning.
Exit codes: 0 success, 1 verification or stage failure, 2 usage error.
"""

from __future__ import annotations

import argparse
import shutil
import sys
from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path

from . import certify
from .density import dump_table, pair_density_table
from .extremal import (brute_force_minimum, enumerate_W3,
                       lower_bound_formula, mk_formula)
from .flags import enumerate_flags, sigma0, sigma1, sigma2
from .graphs import canonical_form, enumerate_admissible
from .rounding import RoundingConfig, RoundingError, build_and_solve
from .sdpgen import build_reduced_problem, read_sdpa, sdpa_text, write_sdpa
from .solverio import SolverError, read_solution, solve_external

BUNDLED_SOLVER = "flagcert-solver"

CONFIG_KEYS = ("workdir", "solver", "emit_tables", "eps1", "eps2", "eps3",
               "denom_bound", "max_retries")


@dataclass(frozen=True)
class PipelineConfig:
    workdir: Path
    solver_path: str | None = None
    rounding: RoundingConfig = field(default_factory=RoundingConfig)
    emit_tables: bool = False

    def __post_init__(self):
        for name in ("eps1", "eps2", "eps3"):
            if getattr(self.rounding, name) <= 0:
                raise ValueError("%s must be positive" % name)
        self.workdir.mkdir(parents=True, exist_ok=True)
        if not self.workdir.is_dir():
            raise ValueError("workdir %s is not a directory" % self.workdir)


def read_config_file(path) -> dict:
    """Plain "key = value" lines; blank lines and # comments ignored."""
    out = {}
    with open(path) as fh:
        for lineno, raw in enumerate(fh, 1):
            line = raw.strip()
            if not line or line.startswith("#"):
                continue
            if "=" not in line:
                raise ValueError("%s:%d: expected key = value" % (path, lineno))
            key, _, value = line.partition("=")
            key = key.strip()
            if key not in CONFIG_KEYS:
                raise ValueError("%s:%d: unknown key %r" % (path, lineno, key))
            out[key] = value.strip()
    return out


def _merge_settings(args) -> dict:
    """Config-file values under the explicit flags."""
    merged = dict(read_config_file(args.config)) if args.config else {}
    for key in CONFIG_KEYS:
        attr = {"solver": "solver_path"}.get(key, key)
        flag = getattr(args, attr, None)
        if flag is not None:
            merged[key] = flag
    return merged


def make_pipeline_config(args) -> PipelineConfig:
    s = _merge_settings(args)
    base = RoundingConfig()
    rounding = RoundingConfig(
        eps1=float(s.get("eps1", base.eps1)),
        eps2=float(s.get("eps2", base.eps2)),
        eps3=float(s.get("eps3", base.eps3)),
        denom_bound=int(float(s.get("denom_bound", base.denom_bound))),
        max_retries=int(s.get("max_retries", base.max_retries)),
    )
    emit = s.get("emit_tables", False)
    if isinstance(emit, str):
        emit = emit.lower() in ("1", "true", "yes", "on")
    return PipelineConfig(
        workdir=Path(s.get("workdir", "build")),
        solver_path=s.get("solver"),
        rounding=rounding,
        emit_tables=bool(emit),
    )


def _resolve_solver(explicit):
    """Explicit path if given, else the bundled solver when on PATH."""
    if explicit:
        return explicit
    return shutil.which(BUNDLED_SOLVER)


def _check_problem_file(path):
    """The exact data comes from the generator; the file must match it."""
    problem = build_reduced_problem()
    with open(path) as fh:
        if fh.read() != sdpa_text(problem):
            raise RoundingError(
                "%s does not match the generated reduced problem" % path)
    return problem


def cmd_enumerate(args) -> int:
    cfg = make_pipeline_config(args)
    classes = enumerate_admissible(args.size)
    print(len(classes))
    out = cfg.workdir / ("classes-%d.txt" % args.size)
    with open(out, "w") as fh:
        for g in classes:
            fh.write("%d %x\n" % (g.n, canonical_form(g).code))
    print("wrote %s" % out)
    return 0


def cmd_flags(args) -> int:
    cfg = make_pipeline_config(args)
    for name, sigma, l in (("sigma0", sigma0(), 4), ("sigma1", sigma1(), 5),
                           ("sigma2", sigma2(), 5)):
        basis = enumerate_flags(sigma, l)
        print("%s l=%d: %d flags" % (name, l, len(basis)))
        out = cfg.workdir / ("flags-%s.txt" % name)
        with open(out, "w") as fh:
            for f in basis.flags:
                fh.write("%x\n" % canonical_form(f.graph).code)
    return 0


def _write_tables(workdir: Path) -> None:
    classes = enumerate_admissible(7)
    for name, sigma, l in (("sigma0", sigma0(), 4), ("sigma1", sigma1(), 5),
                           ("sigma2", sigma2(), 5)):
        table = pair_density_table(sigma, enumerate_flags(sigma, l), classes)
        out = workdir / ("table-%s.txt" % name)
        with open(out, "w") as fh:
            fh.write(dump_table(table))
        print("wrote %s" % out)


def cmd_tables(args) -> int:
    cfg = make_pipeline_config(args)
    _write_tables(cfg.workdir)
    return 0


def cmd_gen_sdp(args) -> int:
    cfg = make_pipeline_config(args)
    problem = build_reduced_problem()
    out = cfg.workdir / "problem.dat-s"
    write_sdpa(problem, out)
    print("m=%d blocks=10,71,1,-388" % len(problem.reps))
    print("wrote %s" % out)
    return 0


def cmd_solve(args) -> int:
    cfg = make_pipeline_config(args)
    solver = _resolve_solver(cfg.solver_path)
    out = Path(args.out) if args.out else cfg.workdir / "solution.txt"
    numsol = solve_external(args.problem, solver, timeout=args.timeout,
                            solution_path=out)
    print("objective %.12f" % numsol.objective)
    print("wrote %s" % out)
    return 0


def cmd_round(args) -> int:
    cfg = make_pipeline_config(args)
    problem = _check_problem_file(args.problem)
    numsol = read_solution(args.solution, read_sdpa(args.problem))
    result = build_and_solve(problem, numsol, cfg.rounding)
    out = Path(args.out) if args.out else cfg.workdir / "solution-exact.txt"
    sol = certify.make_solution(result.solution.denominator,
                                result.solution.numerators)
    certify.write_solution(sol, out)
    log_path = cfg.workdir / "rounding-log.txt"
    with open(log_path, "w") as fh:
        fh.write(result.log)
    print("rounded in %d attempt(s), denominator %d"
          % (result.attempts, result.solution.denominator))
    print("wrote %s" % out)
    return 0


def cmd_certify(args) -> int:
    cfg = make_pipeline_config(args)
    problem = _check_problem_file(args.problem)
    sol = certify.load_solution(args.solution)
    cert = certify.verify_solution(sol, problem)
    report = certify.render_certificate(cert)
    out = cfg.workdir / "certificate.txt"
    with open(out, "w") as fh:
        fh.write(report)
    print(report.splitlines()[0])
    print("wrote %s" % out)
    psd_ok = all(w.ok for w in cert.psd_witnesses)
    if not psd_ok or cert.bound_scaled != 35:
        print("verification failed: psd_ok=%s bound_scaled=%s"
              % (psd_ok, cert.bound_scaled), file=sys.stderr)
        return 1
    return 0


def cmd_extremal(args) -> int:
    n = args.n
    formula = lower_bound_formula(n)
    if formula != mk_formula(n, 3):
        print("formula mismatch at n=%d" % n, file=sys.stderr)
        return 1
    print("m3(%d) = %d" % (n, formula))
    if n >= 15:
        members = enumerate_W3(n)
        print("|W3(%d)| = %d" % (n, len(members)))
    return 0


def cmd_minimum(args) -> int:
    n = args.n
    value = brute_force_minimum(n)
    formula = lower_bound_formula(n)
    print("brute_force_minimum(%d) = %d" % (n, value))
    print("lower_bound_formula(%d) = %d" % (n, formula))
    return 0 if value == formula else 1


def cmd_pipeline(args) -> int:
    cfg = make_pipeline_config(args)
    problem = build_reduced_problem()
    problem_path = cfg.workdir / "problem.dat-s"
    write_sdpa(problem, problem_path)
    print("[1/4] wrote %s" % problem_path)
    if cfg.emit_tables:
        _write_tables(cfg.workdir)

    solver = _resolve_solver(cfg.solver_path)
    solution_path = cfg.workdir / "solution.txt"
    numsol = solve_external(problem_path, solver, timeout=args.timeout,
                            solution_path=solution_path)
    print("[2/4] objective %.12f -> %s" % (numsol.objective, solution_path))

    result = build_and_solve(problem, numsol, cfg.rounding)
    exact_path = cfg.workdir / "solution-exact.txt"
    sol = certify.make_solution(result.solution.denominator,
                                result.solution.numerators)
    certify.write_solution(sol, exact_path)
    with open(cfg.workdir / "rounding-log.txt", "w") as fh:
        fh.write(result.log)
    print("[3/4] rounded in %d attempt(s) -> %s"
          % (result.attempts, exact_path))

    cert = certify.verify_solution(sol, problem)
    report = certify.render_certificate(cert)
    cert_path = cfg.workdir / "certificate.txt"
    with open(cert_path, "w") as fh:
        fh.write(report)
    print("[4/4] %s -> %s" % (report.splitlines()[0], cert_path))
    psd_ok = all(w.ok for w in cert.psd_witnesses)
    if not psd_ok or cert.bound != Fraction(1, 27):
        print("verification failed", file=sys.stderr)
        return 1
    return 0


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(
        prog="flagcert",
        description="Exact flag-algebra certificate for the monotone "
                    "4-subsequence density bound 1/27.")
    ap.add_argument("--config", help="key = value defaults file")
    ap.add_argument("--workdir", help="artifact directory (default build)")
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("enumerate", help="admissible graph classes of a size")
    p.add_argument("--size", type=int, default=7)
    p.set_defaults(func=cmd_enumerate)

    p = sub.add_parser("flags", help="flag bases for the three types")
    p.set_defaults(func=cmd_flags)

    p = sub.add_parser("tables", help="pair density tables")
    p.set_defaults(func=cmd_tables)

    p = sub.add_parser("gen-sdp", help="emit the reduced SDPA problem")
    p.set_defaults(func=cmd_gen_sdp)

    p = sub.add_parser("solve", help="run the external SDP solver")
    p.add_argument("--problem", required=True)
    p.add_argument("--solver", dest="solver_path")
    p.add_argument("--out")
    p.add_argument("--timeout", type=float, default=600.0)
    p.set_defaults(func=cmd_solve)

    p = sub.add_parser("round", help="round a numerical solution exactly")
    p.add_argument("--problem", required=True)
    p.add_argument("--solution", required=True)
    p.add_argument("--out")
    _add_rounding_flags(p)
    p.set_defaults(func=cmd_round)

    p = sub.add_parser("certify", help="verify an exact solution")
    p.add_argument("--problem", required=True)
    p.add_argument("--solution", required=True)
    p.set_defaults(func=cmd_certify)

    p = sub.add_parser("extremal", help="extremal family checks")
    p.add_argument("--n", type=int, required=True)
    p.set_defaults(func=cmd_extremal)

    p = sub.add_parser("minimum", help="brute-force minimum over S_n")
    p.add_argument("--n", type=int, required=True)
    p.set_defaults(func=cmd_minimum)

    p = sub.add_parser("pipeline", help="gen-sdp, solve, round, certify")
    p.add_argument("--solver", dest="solver_path")
    p.add_argument("--emit-tables", dest="emit_tables", action="store_const",
                   const=True)
    p.add_argument("--timeout", type=float, default=1800.0)
    _add_rounding_flags(p)
    p.set_defaults(func=cmd_pipeline)
    return ap


def _add_rounding_flags(p) -> None:
    p.add_argument("--eps1", type=float)
    p.add_argument("--eps2", type=float)
    p.add_argument("--eps3", type=float)
    p.add_argument("--denom-bound", dest="denom_bound", type=float)
    p.add_argument("--max-retries", dest="max_retries", type=int)


def run_subcommand(argv) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return exc.code if isinstance(exc.code, int) else 2
    try:
        return args.func(args)
    except (SolverError, RoundingError) as exc:
        print("flagcert: %s" % exc, file=sys.stderr)
        return 1
    except (OSError, ValueError) as exc:
        print("flagcert: %s" % exc, file=sys.stderr)
        return 2


def main(argv=None) -> int:
    return run_subcommand(sys.argv[1:] if argv is None else argv)


if __name__ == "__main__":
    sys.exit(main())
