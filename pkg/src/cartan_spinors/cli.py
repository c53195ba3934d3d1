"""Command-line front end.

    cartan-spinors verify   --suite killing --n 3
    cartan-spinors spectrum --n 3 --m 2 --space rp_plus --space rp_minus
    cartan-spinors report   --all --n 3 --m 2 --recompute --out report.json

Exit status: 0 when every check passes, 1 when a check fails, 2 for usage,
configuration and I/O errors.  JSON output is deterministic for a given
configuration and seed and carries no timestamps.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from dataclasses import asdict, dataclass, field
from pathlib import Path

from . import __version__
from .bundle import BundleSelector, context
from .dirac import spectrum
from .errors import CartanSpinorError, DegreeBoundError
from .scalars import EXACT, FLOAT
from .suites import SUITES, SuiteReport, run_suites

SCHEMA_VERSION = 1
TOOL_NAME = "cartan-spinors"
OUT_ENV = "CARTAN_SPINORS_OUT"

EXIT_OK, EXIT_FAIL, EXIT_USAGE = 0, 1, 2

HERMITIAN_TOL = 1e-9


class UsageError(Exception):
    """Invalid configuration or unusable input/output path (exit status 2)."""


@dataclass
class ToolConfig:
    n: int = 3
    m: int = 2
    spaces: list[str] = field(default_factory=lambda: ["sphere"])
    suites: list[str] = field(default_factory=lambda: ["all"])
    mode: str = FLOAT
    sample_count: int = 20
    seed: int = 0
    output: str = "text"
    out_path: str | None = None

    def validate(self) -> "ToolConfig":
        if not 1 <= self.n <= 7:
            raise UsageError(f"--n must satisfy 1 <= n <= 7, got {self.n}")
        if not 0 <= self.m <= 6:
            raise UsageError(f"--m must satisfy 0 <= m <= 6, got {self.m}")
        if self.sample_count < 1:
            raise UsageError(f"--samples must be >= 1, got {self.sample_count}")
        if self.mode not in (FLOAT, EXACT):
            raise UsageError(f"--mode must be float or exact, got {self.mode!r}")
        for s in self.spaces:
            try:
                BundleSelector.parse(s)
            except ValueError as exc:
                raise UsageError(str(exc)) from None
        for s in self.suites:
            if s != "all" and s not in SUITES:
                raise UsageError(f"unknown suite {s!r}; choose from {', '.join(SUITES)}, all")
        return self

    def echo(self) -> dict:
        d = asdict(self)
        d.pop("out_path")
        d.pop("output")
        return d


@dataclass
class VerificationReport:
    config: ToolConfig
    suites: list[SuiteReport]

    @property
    def passed(self) -> bool:
        return all(s.passed for s in self.suites)

    def to_json(self) -> dict:
        return {
            "pass": self.passed,
            "suites": [s.to_json() for s in self.suites],
        }

    def render(self) -> str:
        lines = [f"{TOOL_NAME} {__version__}  verify n={self.config.n} mode={self.config.mode} seed={self.config.seed}"]
        for s in self.suites:
            for c in s.checks:
                tag = "PASS" if c.passed else "FAIL"
                lines.append(
                    f"{tag}  {s.suite:<13} {c.check_name:<38} residual={c.max_residual:.3e} "
                    f"{c.relation} {c.threshold:.1e}  (samples={c.samples})"
                )
        lines.append("overall: " + ("PASS" if self.passed else "FAIL"))
        return "\n".join(lines)


def _envelope(command: str, cfg: ToolConfig) -> dict:
    return {
        "schema_version": SCHEMA_VERSION,
        "tool": {"name": TOOL_NAME, "version": __version__},
        "command": command,
        "config": cfg.echo(),
    }


def dumps(doc: dict) -> str:
    return json.dumps(doc, indent=2, sort_keys=True, allow_nan=False) + "\n"


# ---------------------------------------------------------------------------
# commands


def cmd_verify(cfg: ToolConfig) -> VerificationReport:
    suites = run_suites(cfg.suites, cfg.n, cfg.mode, cfg.sample_count, cfg.seed)
    return VerificationReport(cfg, suites)


@dataclass
class SpectrumResult:
    tables: list
    checks: list[dict]

    @property
    def passed(self) -> bool:
        return all(c["pass"] for c in self.checks)

    def to_json(self) -> dict:
        return {"pass": self.passed, "spectra": [t.to_json() for t in self.tables], "checks": self.checks}

    def render(self) -> str:
        blocks = [t.render() for t in self.tables]
        blocks.append("\n".join(f"{'PASS' if c['pass'] else 'FAIL'}  {c['check_name']}" for c in self.checks))
        return "\n\n".join(blocks)


def _check(name: str, value: float, threshold: float) -> dict:
    value = float(f"{float(value):.6e}") if value else 0.0
    return {"check_name": name, "max_residual": value, "threshold": threshold, "pass": value <= threshold}


def cmd_spectrum(cfg: ToolConfig) -> SpectrumResult:
    if cfg.mode == EXACT:
        raise UsageError("spectra are computed in float mode; drop --mode exact")
    if cfg.m < 1:
        raise UsageError("spectra need --m >= 1")
    ctx = context(cfg.n)
    spaces = list(dict.fromkeys(BundleSelector.parse(s) for s in cfg.spaces))
    tables = []
    for sel in spaces:
        try:
            tables.append(spectrum(ctx, sel, cfg.m))
        except DegreeBoundError as exc:
            raise UsageError(f"{exc} (for example --m {cfg.m + 1})") from None
    checks = []
    for t in tables:
        checks.append(_check(f"hermitian[{t.selector.value}]", max(t.hermitian_defect, t.max_imag), HERMITIAN_TOL))
        if t.selector == BundleSelector.SPHERE:
            asym = sum(abs(t.multiplicity(v) - t.multiplicity(-v)) for v in t.values())
            checks.append(_check("sphere_symmetry", asym, 0))
    by = {t.selector: t for t in tables}
    if len(by) == 3:
        sph = by[BundleSelector.SPHERE]
        bad = sum(
            abs(sph.multiplicity(v) - by[BundleSelector.RP_PLUS].multiplicity(v) - by[BundleSelector.RP_MINUS].multiplicity(v))
            for v in sph.values()
        )
        checks.append(_check("partition", bad, 0))
    return SpectrumResult(tables, checks)


def _load_results(paths: list[str]) -> list[dict]:
    docs = []
    for p in paths:
        try:
            with open(p, encoding="utf-8") as fh:
                doc = json.load(fh)
        except OSError as exc:
            raise UsageError(f"cannot read results file {p}: {exc.strerror}") from None
        except json.JSONDecodeError as exc:
            raise UsageError(f"results file {p} is not valid JSON: {exc}") from None
        if doc.get("schema_version") != SCHEMA_VERSION or doc.get("command") not in ("verify", "spectrum"):
            raise UsageError(f"results file {p} is not a schema v{SCHEMA_VERSION} verify/spectrum document")
        docs.append(doc)
    return docs


def cmd_report(cfg: ToolConfig, results: list[str], recompute: bool, everything: bool) -> dict:
    if not results and not recompute:
        raise UsageError("report needs prior results (--results FILE) or --recompute")
    if everything:
        cfg.suites = ["all"]
        cfg.spaces = [s.value for s in BundleSelector]
    verification: list[dict] = []
    spectra: list[dict] = []
    checks: list[dict] = []
    for doc in _load_results(results):
        verification += doc.get("suites", [])
        spectra += doc.get("spectra", [])
        checks += doc.get("checks", [])
    if recompute:
        verification += cmd_verify(cfg).to_json()["suites"]
        if cfg.m >= 1 and cfg.mode == FLOAT:
            sr = cmd_spectrum(cfg)
            spectra += [t.to_json() for t in sr.tables]
            checks += sr.checks
    passed = all(s["pass"] for s in verification) and all(c["pass"] for c in checks)
    doc = _envelope("report", cfg)
    doc.update({"pass": passed, "verification": verification, "spectra": spectra, "spectrum_checks": checks})
    return doc


# ---------------------------------------------------------------------------
# output


def _default_path(command: str, cfg: ToolConfig, ext: str) -> Path | None:
    base = os.environ.get(OUT_ENV)
    if command == "report":
        name = f"report-n{cfg.n}-m{cfg.m}.json"
        return Path(base or ".") / name
    if base:
        return Path(base) / f"{command}-n{cfg.n}.{ext}"
    return None


def _check_path(path: Path | None) -> None:
    if path is None:
        return
    if path.is_dir():
        raise UsageError(f"output path {path} is a directory")
    if not path.parent.is_dir():
        raise UsageError(f"cannot write {path}: directory {path.parent} does not exist")


def _emit(text: str, path: Path | None, stdout) -> None:
    if path is None:
        stdout.write(text)
        return
    _check_path(path)
    try:
        path.write_text(text, encoding="utf-8")
    except OSError as exc:
        raise UsageError(f"cannot write {path}: {exc.strerror}") from None


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--n", type=int, default=3, help="sphere dimension (generator count for the clifford suite), 1..7")
    common.add_argument("--m", type=int, default=2, help="polynomial degree bound for spectra, 0..6")
    common.add_argument("--space", action="append", choices=[s.value for s in BundleSelector], help="bundle; repeatable")
    common.add_argument("--suite", action="append", choices=list(SUITES) + ["all"], help="verification suite; repeatable")
    common.add_argument("--mode", choices=[FLOAT, EXACT], default=FLOAT)
    common.add_argument("--samples", type=int, default=20, help="random samples per sampled check")
    common.add_argument("--seed", type=int, default=0)
    common.add_argument("--format", choices=["json", "text"], default=None, help="output format (default text; report is always JSON)")
    common.add_argument("--out", default=None, help=f"output file (default: stdout, or ${OUT_ENV}/<command>-n<n>.<ext>)")

    p = argparse.ArgumentParser(prog=TOOL_NAME, description="Spinor bundles over spheres and real projective spaces.")
    p.add_argument("--version", action="version", version=f"{TOOL_NAME} {__version__}")
    sub = p.add_subparsers(dest="command", required=True)
    sub.add_parser("verify", parents=[common], help="run verification suites")
    sub.add_parser("spectrum", parents=[common], help="Dirac spectrum tables")
    r = sub.add_parser("report", parents=[common], help="bundle results into one JSON document")
    r.add_argument("--all", action="store_true", help="every suite and every space")
    r.add_argument("--recompute", action="store_true", help="run suites and spectra now")
    r.add_argument("--results", action="append", default=[], help="JSON output of an earlier verify/spectrum run; repeatable")
    return p


def _config(args) -> ToolConfig:
    return ToolConfig(
        n=args.n,
        m=args.m,
        spaces=args.space or ["sphere"],
        suites=args.suite or ["all"],
        mode=args.mode,
        sample_count=args.samples,
        seed=args.seed,
        output=args.format or ("json" if args.command == "report" else "text"),
        out_path=args.out,
    ).validate()


def main(argv=None, stdout=None, stderr=None) -> int:
    stdout = stdout or sys.stdout
    stderr = stderr or sys.stderr
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        cfg = _config(args)
        ext = "json" if cfg.output == "json" else "txt"
        path = Path(cfg.out_path) if cfg.out_path else _default_path(args.command, cfg, ext)
        _check_path(path)  # fail before any computation
        if args.command == "verify":
            rep = cmd_verify(cfg)
            doc = _envelope("verify", cfg) | rep.to_json()
            _emit(dumps(doc) if cfg.output == "json" else rep.render() + "\n", path, stdout)
            return EXIT_OK if rep.passed else EXIT_FAIL
        if args.command == "spectrum":
            res = cmd_spectrum(cfg)
            doc = _envelope("spectrum", cfg) | res.to_json()
            _emit(dumps(doc) if cfg.output == "json" else res.render() + "\n", path, stdout)
            return EXIT_OK if res.passed else EXIT_FAIL
        doc = cmd_report(cfg, args.results, args.recompute, args.all)
        _emit(dumps(doc), path, stdout)
        if cfg.output == "text" and path is not None:
            stdout.write(f"report written to {path}: {'PASS' if doc['pass'] else 'FAIL'}\n")
        return EXIT_OK if doc["pass"] else EXIT_FAIL
    except UsageError as exc:
        stderr.write(f"{TOOL_NAME}: error: {exc}\n")
        return EXIT_USAGE
    except CartanSpinorError as exc:
        stderr.write(f"{TOOL_NAME}: error: {exc}\n")
        return EXIT_USAGE


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
