"""Run configuration: INI files with inline or CSV-referenced matrices.

Example::

    [problem]
    kind = scalar
    a = 1
    b = 1
    c = 1

    [numeric]
    quad_tol = 1e-10

    [checks]
    decay_scan = true

A ``[matrices]`` section (keys ``A``, ``B``, ``C``) overrides the generator.
Rows are separated by ``;`` and entries by whitespace or commas; complex
entries use Python syntax (``1+2j``).  A value starting with ``@`` names a
CSV file relative to the config file.
"""

import configparser
import csv
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .errors import ParameterError
from .hamiltonian import SystemData
from .policy import NumericPolicy
from .problems import ProblemSpec, generate

CHECK_FLAGS = ("symmetry", "sq_identity", "decay_scan", "f1f2",
               "closed_loop_scan")
_DEFAULT_CHECKS = {"symmetry": True, "sq_identity": False, "decay_scan": False,
                   "f1f2": True, "closed_loop_scan": False}
_SPEC_KEYS = ("kind", "n", "m", "p", "r", "s", "seed", "label")


@dataclass(frozen=True)
class ScanSettings:
    kind: str = "axis_decay"
    which: str = "V0norm"
    grid: tuple = None  # None means "use the default grid"


@dataclass(frozen=True)
class RunConfig:
    problem: ProblemSpec = None
    matrices: dict = None
    policy: NumericPolicy = field(default_factory=NumericPolicy)
    report: str = "report"
    csv_dir: str = None
    checks: dict = field(default_factory=lambda: dict(_DEFAULT_CHECKS))
    scan: ScanSettings = field(default_factory=ScanSettings)
    label: str = "config"

    def system(self):
        """Build the :class:`SystemData` this run operates on."""
        if self.matrices is not None:
            r = self.problem.r if self.problem else 0.0
            s = self.problem.s if self.problem else 0.0
            return SystemData(self.matrices["A"], self.matrices["B"],
                              self.matrices["C"], r, s, label=self.label)
        return generate(self.problem)


# -- matrix text --------------------------------------------------------------

def parse_number(token):
    token = token.strip()
    try:
        z = complex(token)
    except ValueError:
        raise ParameterError(f"not a number: {token!r}") from None
    return z


def parse_matrix(text):
    """``"1 2; 3 4"`` -> 2x2 array (complex only when needed)."""
    rows = [r for r in text.replace("\n", " ").split(";") if r.strip()]
    data = [[parse_number(t) for t in r.replace(",", " ").split()]
            for r in rows]
    if not data or len({len(r) for r in data}) != 1:
        raise ParameterError("matrix rows must be non-empty and equal length")
    M = np.array(data, dtype=complex)
    return M.real.copy() if not np.any(M.imag) else M


def _sci(x):
    return np.format_float_scientific(x, unique=True, trim="0", exp_digits=2)


def format_number(z):
    """Shortest round-trip scientific notation (``1.5e+00-2.0e+00j``)."""
    if isinstance(z, (int, np.integer)):
        return str(int(z))
    z = complex(z)
    if z.imag == 0:
        return _sci(z.real)
    im = _sci(z.imag)
    return f"{_sci(z.real)}{'' if im[0] == '-' else '+'}{im}j"


def read_csv_matrix(path):
    with open(path, newline="", encoding="utf-8") as fh:
        data = [[parse_number(t) for t in row] for row in csv.reader(fh) if row]
    if not data or len({len(r) for r in data}) != 1:
        raise ParameterError(f"{path}: ragged or empty matrix")
    M = np.array(data, dtype=complex)
    return M.real.copy() if not np.any(M.imag) else M


def write_csv_matrix(path, M):
    M = np.atleast_2d(M)
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        for row in M:
            w.writerow([format_number(z) for z in row])


# -- config file --------------------------------------------------------------

def _bool(value):
    v = value.strip().lower()
    if v in ("1", "true", "yes", "on"):
        return True
    if v in ("0", "false", "no", "off"):
        return False
    raise ParameterError(f"not a boolean: {value!r}")


def _grid(text):
    return tuple(float(t) for t in text.replace(",", " ").split())


def _extra(value):
    v = value.strip()
    for conv in (int, float):
        try:
            return conv(v)
        except ValueError:
            pass
    try:
        return _bool(v)
    except ParameterError:
        return v


def parse_config(text, base_dir="."):
    """Parse INI text into a :class:`RunConfig`.

    Raises
    ------
    ParameterError
        On unknown keys, malformed numbers or inconsistent settings.
    """
    cp = configparser.ConfigParser(inline_comment_prefixes=("#",))
    cp.optionxform = str
    try:
        cp.read_string(text)
    except configparser.Error as exc:
        raise ParameterError(f"config syntax: {exc}") from None
    unknown = set(cp.sections()) - {"problem", "matrices", "numeric", "output",
                                    "checks", "scan"}
    if unknown:
        raise ParameterError(f"unknown sections: {sorted(unknown)}")
    base = Path(base_dir)

    prob = dict(cp["problem"]) if cp.has_section("problem") else {}
    matrices = None
    if cp.has_section("matrices"):
        matrices = {}
        for key in ("A", "B", "C"):
            if key not in cp["matrices"]:
                raise ParameterError(f"[matrices] needs {key}")
            v = cp["matrices"][key].strip()
            matrices[key] = (read_csv_matrix(base / v[1:]) if v.startswith("@")
                             else parse_matrix(v))
    if matrices is None and "kind" not in prob:
        raise ParameterError("[problem] kind is required without [matrices]")
    try:
        spec = ProblemSpec(
            kind=prob.get("kind", "scalar"),
            n=int(prob.get("n", 1)), m=int(prob.get("m", 1)),
            p=int(prob.get("p", 1)),
            r=float(prob.get("r", 0.0)), s=float(prob.get("s", 0.0)),
            seed=int(prob.get("seed", 0)),
            extras={k: _extra(v) for k, v in prob.items() if k not in _SPEC_KEYS})
    except ValueError as exc:
        raise ParameterError(f"[problem]: {exc}") from None

    num = dict(cp["numeric"]) if cp.has_section("numeric") else {}
    names = {"quad_tol", "eigen_tol", "residual_tol", "rel_tol", "max_nodes",
             "tol", "resolvent"}
    if set(num) - names:
        raise ParameterError(f"unknown [numeric] keys: {sorted(set(num) - names)}")
    kw = {}
    for k, v in num.items():
        key = "residual_tol" if k == "tol" else k
        if k == "resolvent":
            kw[key] = v.strip()
        else:
            kw[key] = int(v) if k == "max_nodes" else float(v)
    try:
        policy = NumericPolicy(**kw)
    except ValueError as exc:
        raise ParameterError(str(exc)) from None

    checks = dict(_DEFAULT_CHECKS)
    if cp.has_section("checks"):
        for k, v in cp["checks"].items():
            if k not in CHECK_FLAGS:
                raise ParameterError(f"unknown check {k!r}")
            checks[k] = _bool(v)

    scan = ScanSettings()
    if cp.has_section("scan"):
        sc = cp["scan"]
        scan = ScanSettings(kind=sc.get("kind", scan.kind),
                            which=sc.get("which", scan.which),
                            grid=_grid(sc["grid"]) if "grid" in sc else None)

    out = dict(cp["output"]) if cp.has_section("output") else {}
    return RunConfig(problem=spec, matrices=matrices, policy=policy,
                     report=out.get("report", "report"),
                     csv_dir=out.get("csv_dir"), checks=checks, scan=scan,
                     label=prob.get("label", "config"))


def load_config(path):
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise ParameterError(f"cannot read config: {exc}") from None
    return parse_config(text, base_dir=path.parent)


def system_to_config(system, csv_names=("A.csv", "B.csv", "C.csv")):
    """INI text that reloads ``system`` from the given CSV files."""
    return (
        "[problem]\n"
        f"r = {system.r!r}\n"
        f"s = {system.s!r}\n"
        f"label = {system.label}\n\n"
        "[matrices]\n"
        + "".join(f"{k} = @{name}\n" for k, name in zip("ABC", csv_names))
    )
