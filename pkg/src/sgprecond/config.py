"""Line-oriented experiment configuration files.

The format is deliberately small: a version header line ``sgp-config v1``,
``[section]`` markers, ``key = value`` pairs and ``#`` comments.  Unknown
sections or keys are rejected with the offending line number, and every
value is validated against the module preconditions before any assembly
work starts.  parse -> serialize -> parse is a fixed point.
"""

from __future__ import annotations

from dataclasses import dataclass, replace

from . import coeffexpr
from .errors import ConfigError
from .operator import PRECONDITIONER_KINDS
from .orthopoly import RecurrenceFamily, family_from_name

__all__ = ["ExperimentConfig", "parse_config", "serialize_config", "load_config"]

HEADER = "sgp-config v1"

_SECTIONS = {
    "problem": {"dim", "elements", "family", "gamma", "basis", "degree", "degrees", "K"},
    "coefficients": None,  # a0..aK or table
    "run": {
        "preconditioners",
        "classical",
        "kappa_A",
        "tol",
        "max_iter",
        "mu_refine",
        "seed",
        "rhs",
        "oracle",
    },
}


@dataclass(frozen=True)
class ExperimentConfig:
    dim: int
    elements: tuple
    family: RecurrenceFamily
    basis: str  # "complete" | "tensor"
    degrees: tuple  # complete: swept total degrees; tensor: one per-variable degree tuple
    nterms: int
    coefficients: tuple | None  # expression strings a0..aK
    table_path: str | None
    preconditioners: tuple
    classical: bool = False
    kappa_a: bool = True
    oracle: bool = False
    tol: float = 1e-6
    max_iter: int = 400
    mu_refine: int = 64
    seed: int = 42
    rhs: str = "1"

    def with_overrides(self, seed=None, tol=None):
        cfg = self
        if seed is not None:
            cfg = replace(cfg, seed=int(seed))
        if tol is not None:
            cfg = replace(cfg, tol=float(tol))
        return cfg


def _parse_lines(text: str):
    """Yield (line_no, section, key, value) with structural validation."""
    section = None
    header_seen = False
    for no, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if not header_seen:
            if line != HEADER:
                raise ConfigError(f"expected header {HEADER!r}, found {line!r}", line=no)
            header_seen = True
            continue
        if line.startswith("[") and line.endswith("]"):
            section = line[1:-1].strip()
            if section not in _SECTIONS:
                raise ConfigError(f"unknown section [{section}]", line=no)
            continue
        if "=" not in line:
            raise ConfigError("expected 'key = value'", line=no)
        if section is None:
            raise ConfigError("key outside any section", line=no)
        key, value = (part.strip() for part in line.split("=", 1))
        allowed = _SECTIONS[section]
        if allowed is not None and key not in allowed:
            raise ConfigError(f"unknown key {key!r} in [{section}]", line=no)
        yield no, section, key, value
    if not header_seen:
        raise ConfigError(f"missing header line {HEADER!r}")


def _to_int(value, no, key):
    try:
        return int(value)
    except ValueError:
        raise ConfigError(f"{key} must be an integer, got {value!r}", line=no) from None


def _to_float(value, no, key):
    try:
        return float(value)
    except ValueError:
        raise ConfigError(f"{key} must be a number, got {value!r}", line=no) from None


def _to_bool(value, no, key):
    low = value.strip().lower()
    if low in ("true", "yes", "1"):
        return True
    if low in ("false", "no", "0"):
        return False
    raise ConfigError(f"{key} must be true or false, got {value!r}", line=no)


def parse_config(text: str) -> ExperimentConfig:
    problem = {}
    coeffs = {}
    run = {}
    lines = {}
    for no, section, key, value in _parse_lines(text):
        target = {"problem": problem, "coefficients": coeffs, "run": run}[section]
        if key in target:
            raise ConfigError(f"duplicate key {key!r}", line=no)
        target[key] = value
        lines[(section, key)] = no

    def where(section, key):
        return lines.get((section, key))

    for req in ("dim", "elements", "family", "basis", "K"):
        if req not in problem:
            raise ConfigError(f"[problem] is missing {req!r}")
    dim = _to_int(problem["dim"], where("problem", "dim"), "dim")
    if dim not in (1, 2):
        raise ConfigError("dim must be 1 or 2", line=where("problem", "dim"))
    parts = problem["elements"].split()
    if len(parts) != dim:
        raise ConfigError(
            f"elements needs {dim} value(s)", line=where("problem", "elements")
        )
    elements = tuple(_to_int(p, where("problem", "elements"), "elements") for p in parts)
    if min(elements) < 2:
        raise ConfigError("elements must be >= 2 per axis", line=where("problem", "elements"))
    if dim == 2 and elements[0] != elements[1]:
        raise ConfigError("2D meshes must be square", line=where("problem", "elements"))
    gamma = None
    if "gamma" in problem:
        gamma = _to_float(problem["gamma"], where("problem", "gamma"), "gamma")
    try:
        fam = family_from_name(problem["family"], gamma)
    except Exception as exc:
        raise ConfigError(str(exc), line=where("problem", "family")) from None
    basis = problem["basis"].strip().lower()
    if basis not in ("complete", "tensor"):
        raise ConfigError("basis must be 'complete' or 'tensor'", line=where("problem", "basis"))
    nterms = _to_int(problem["K"], where("problem", "K"), "K")
    if nterms < 1:
        raise ConfigError("K must be >= 1", line=where("problem", "K"))
    if basis == "complete":
        if "degree" not in problem:
            raise ConfigError("complete basis requires 'degree'")
        no = where("problem", "degree")
        degrees = tuple(_to_int(p, no, "degree") for p in problem["degree"].split())
        if "degrees" in problem:
            raise ConfigError("'degrees' applies to tensor bases only", line=where("problem", "degrees"))
        if not degrees or min(degrees) < 1:
            raise ConfigError("degree entries must be >= 1", line=no)
    else:
        if "degrees" not in problem:
            raise ConfigError("tensor basis requires 'degrees' (one per variable)")
        no = where("problem", "degrees")
        degrees = tuple(_to_int(p, no, "degrees") for p in problem["degrees"].split())
        if len(degrees) != nterms:
            raise ConfigError(f"need {nterms} per-variable degrees", line=no)
        if min(degrees) < 0:
            raise ConfigError("degrees must be >= 0", line=no)

    table_path = coeffs.pop("table", None)
    expr_texts = None
    if table_path is None:
        expected = [f"a{i}" for i in range(nterms + 1)]
        missing = [k for k in expected if k not in coeffs]
        extra = [k for k in coeffs if k not in expected]
        if missing or extra:
            raise ConfigError(
                f"[coefficients] must define exactly a0..a{nterms} or 'table'"
                + (f"; missing {missing}" if missing else "")
                + (f"; unexpected {extra}" if extra else "")
            )
        expr_texts = tuple(coeffs[k] for k in expected)
        for k in expected:
            try:
                tree = coeffexpr.parse(coeffs[k])
            except Exception as exc:
                raise ConfigError(f"{k}: {exc}", line=where("coefficients", k)) from None
            if dim == 1 and "x2" in coeffexpr.variables(tree):
                raise ConfigError(f"{k} uses x2 in a 1D problem", line=where("coefficients", k))
    elif coeffs:
        raise ConfigError("[coefficients] cannot mix 'table' with expressions")

    precs = tuple(run.get("preconditioners", "mean_based").split())
    for p in precs:
        if p not in PRECONDITIONER_KINDS:
            raise ConfigError(
                f"unknown preconditioner {p!r} (choose from {', '.join(PRECONDITIONER_KINDS)})",
                line=where("run", "preconditioners"),
            )
        if p in ("truncated_tp", "splitting_tp") and basis != "tensor":
            raise ConfigError(f"{p} requires a tensor basis", line=where("run", "preconditioners"))
        if p == "splitting_complete" and basis != "complete":
            raise ConfigError(f"{p} requires a complete basis", line=where("run", "preconditioners"))
    tol = _to_float(run.get("tol", "1e-6"), where("run", "tol"), "tol")
    max_iter = _to_int(run.get("max_iter", "400"), where("run", "max_iter"), "max_iter")
    mu_refine = _to_int(run.get("mu_refine", "64"), where("run", "mu_refine"), "mu_refine")
    seed = _to_int(run.get("seed", "42"), where("run", "seed"), "seed")
    if tol <= 0 or max_iter < 1 or mu_refine < 1:
        raise ConfigError("tol, max_iter and mu_refine must be positive")
    rhs = run.get("rhs", "1")
    try:
        coeffexpr.parse(rhs)
    except Exception as exc:
        raise ConfigError(f"rhs: {exc}", line=where("run", "rhs")) from None

    return ExperimentConfig(
        dim=dim,
        elements=elements,
        family=fam,
        basis=basis,
        degrees=degrees,
        nterms=nterms,
        coefficients=expr_texts,
        table_path=table_path,
        preconditioners=precs,
        classical=_to_bool(run["classical"], where("run", "classical"), "classical")
        if "classical" in run
        else ("mean_based" in precs),
        kappa_a=_to_bool(run["kappa_A"], where("run", "kappa_A"), "kappa_A")
        if "kappa_A" in run
        else True,
        oracle=_to_bool(run["oracle"], where("run", "oracle"), "oracle")
        if "oracle" in run
        else False,
        tol=tol,
        max_iter=max_iter,
        mu_refine=mu_refine,
        seed=seed,
        rhs=rhs,
    )


def serialize_config(cfg: ExperimentConfig) -> str:
    out = [HEADER, "", "[problem]"]
    out.append(f"dim = {cfg.dim}")
    out.append("elements = " + " ".join(str(e) for e in cfg.elements))
    out.append(f"family = {cfg.family.kind}")
    if cfg.family.gamma is not None:
        out.append(f"gamma = {cfg.family.gamma!r}")
    out.append(f"basis = {cfg.basis}")
    if cfg.basis == "complete":
        out.append("degree = " + " ".join(str(d) for d in cfg.degrees))
    else:
        out.append("degrees = " + " ".join(str(d) for d in cfg.degrees))
    out.append(f"K = {cfg.nterms}")
    out.append("")
    out.append("[coefficients]")
    if cfg.table_path is not None:
        out.append(f"table = {cfg.table_path}")
    else:
        for i, text in enumerate(cfg.coefficients):
            out.append(f"a{i} = {text}")
    out.append("")
    out.append("[run]")
    out.append("preconditioners = " + " ".join(cfg.preconditioners))
    out.append(f"classical = {str(cfg.classical).lower()}")
    out.append(f"kappa_A = {str(cfg.kappa_a).lower()}")
    out.append(f"oracle = {str(cfg.oracle).lower()}")
    out.append(f"tol = {cfg.tol!r}")
    out.append(f"max_iter = {cfg.max_iter}")
    out.append(f"mu_refine = {cfg.mu_refine}")
    out.append(f"seed = {cfg.seed}")
    out.append(f"rhs = {cfg.rhs}")
    return "\n".join(out) + "\n"


def load_config(path) -> ExperimentConfig:
    try:
        with open(path, "r", encoding="utf-8") as fh:
            text = fh.read()
    except OSError as exc:
        raise ConfigError(f"cannot read {path}: {exc.strerror or exc}") from None
    return parse_config(text)
