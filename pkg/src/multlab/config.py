"""INI experiment configuration: parsing, validation and echo.

Example::

    [domain]
    dim = 1
    length = pi
    N = 401

    [operator]
    bc = dirichlet
    a = 1
    H = 0

    [symbols]
    names = all
    cutoff = 1.0

    [run]
    suites = eig, wave
    seed = 0
    output_dir = out

    [tolerances]
    eig_rel = 1e-10

Coefficients ``a`` and ``H`` are numpy expressions in the coordinates
``x`` (and ``y`` in 2D), e.g. ``1 + sin(3*x)**2``.
"""
from __future__ import annotations

import configparser
import os
import math
import re
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Callable, Optional

import numpy as np

from .errors import ConfigurationError
from .symbols import builtin_symbols

TOLERANCES = {
    "eig_rel": 1e-10,
    "orthonormality": 1e-9,
    "eig_runtime_s": 30.0,
    "scaling": 1e-12,
    "wave_order": 0.2,
    "cone_spectral": 1e-6,
    "dg_slack": 1.05,
    "commutator_C": 2.0,
    "gronwall_slack": 0.05,
    "gauss_r2": 0.98,
    "gauss_exponent": 0.1,
    "gauss_gradient_exponent": 0.15,
    "norm_slope": 0.15,
    "subordination_rel": 1e-6,
    "subordination_scalar": 1e-10,
    "route": 1e-5,
    "k_independence": 1e-5,
    "bessel_quadrature": 1e-8,
    "psi_stability": 0.05,
    "reconstruction": 1e-5,
    "factorization": 1e-7,
    "flat_refinement": 0.10,
    "support": 1e-6,
    "keylemma_factor": 1.25,
    "keylemma_epsilon": 0.05,
    "bmo_C": 10.0,
    "bmo_refinement": 0.25,
    "lp_p2": 1e-10,
    "lp_refinement": 0.25,
    "resolvent_factor": 0.1,
}

SUITES = ("eig", "heat-fit", "norm-fits", "wave", "dg", "cone", "commutator",
          "resolvent-limit", "multiplier", "keylemma", "bmo", "lp")

_SCHEMA = {
    "domain": {"dim", "length", "n"},
    "operator": {"bc", "a", "h"},
    "symbols": {"names", "cutoff"},
    "run": {"suites", "seed", "output_dir", "companion_2d"},
    "tolerances": {k.lower() for k in TOLERANCES},
}
# configparser lowercases keys; map them back to the canonical tolerance names
_TOL_NAMES = {k.lower(): k for k in TOLERANCES}

_NAMESPACE = {name: getattr(np, name) for name in
              ("sin", "cos", "tan", "exp", "log", "sqrt", "abs", "tanh", "arctan",
               "where", "minimum", "maximum", "heaviside")}
_NAMESPACE.update(pi=math.pi, e=math.e)


def _line_of(text: str, section: str, key: str) -> Optional[int]:
    cur = None
    for i, line in enumerate(text.splitlines(), 1):
        m = re.match(r"\s*\[([^\]]+)\]", line)
        if m:
            cur = m.group(1).strip().lower()
        elif cur == section and re.match(rf"\s*{re.escape(key)}\s*[=:]", line, re.I):
            return i
    return None


def _number(expr: str, what: str) -> float:
    try:
        val = float(_compile(expr, what, allow=())(None))
    except (TypeError, ValueError) as exc:
        raise ConfigurationError(f"{what}: {expr!r} is not a number") from exc
    return val


def _compile(expr: str, what: str, allow=("x", "y")) -> Callable:
    """Expression in the coordinates as a callable on an (n, dim) point array."""
    try:
        code = compile(expr, f"<{what}>", "eval")
    except SyntaxError as exc:
        raise ConfigurationError(f"{what}: cannot parse {expr!r}") from exc
    bad = set(code.co_names) - set(_NAMESPACE) - set(allow)
    if bad:
        raise ConfigurationError(f"{what}: unknown names {sorted(bad)} in {expr!r}")

    def fn(points):
        ns = dict(_NAMESPACE)
        if points is not None:
            ns["x"] = points[:, 0]
            if points.shape[1] > 1:
                ns["y"] = points[:, 1]
        return eval(code, {"__builtins__": {}}, ns)

    return fn


@dataclass(frozen=True)
class ExperimentConfig:
    dim: int = 1
    lengths: tuple = (math.pi,)
    N: int = 401
    bc: str = "dirichlet"
    a: str = "1"
    H: str = "0"
    symbols: tuple = tuple(s.name for s in builtin_symbols())
    cutoff: float = 1.0
    suites: tuple = SUITES
    seed: int = 0
    output_dir: str = "multlab-out"
    companion_2d: bool = True
    tolerances: dict = field(default_factory=lambda: dict(TOLERANCES))

    def coefficient(self, which: str):
        return parse_coefficient({"a": self.a, "H": self.H}[which], which)

    @property
    def constant_coefficients(self) -> bool:
        return _is_constant(self.a) and _is_constant(self.H)

    @property
    def length(self) -> float:
        return self.lengths[0]

    def tol(self, key: str) -> float:
        return float(self.tolerances[key])

    def echo(self) -> str:
        """The fully resolved configuration in INI form."""
        d = asdict(self)
        out = ["[domain]", f"dim = {self.dim}",
               "length = " + ", ".join(repr(L) for L in self.lengths), f"N = {self.N}",
               "", "[operator]", f"bc = {self.bc}", f"a = {self.a}", f"H = {self.H}",
               "", "[symbols]", "names = " + ", ".join(self.symbols), f"cutoff = {self.cutoff!r}",
               "", "[run]", "suites = " + ", ".join(self.suites), f"seed = {self.seed}",
               f"output_dir = {self.output_dir}",
               f"companion_2d = {str(self.companion_2d).lower()}", "", "[tolerances]"]
        out += [f"{k} = {v!r}" for k, v in sorted(d["tolerances"].items())]
        return "\n".join(out) + "\n"


def _is_constant(expr: str) -> bool:
    try:
        float(expr)
    except ValueError:
        return False
    return True


def parse_coefficient(expr: str, which: str = "coefficient"):
    """Constant coefficients as floats, expressions as callables on points."""
    if _is_constant(expr):
        return float(expr)
    return _compile(expr, which)


def _split_list(value: str) -> list:
    return [v.strip() for v in value.replace("\n", ",").split(",") if v.strip()]


def parse_config(text: str, base_dir: Optional[Path] = None) -> ExperimentConfig:
    """Parse and validate INI text; errors carry the offending line number."""
    cp = configparser.ConfigParser(interpolation=None, inline_comment_prefixes=("#", ";"))
    try:
        cp.read_string(text)
    except configparser.Error as exc:
        raise ConfigurationError(f"config parse error: {exc}") from exc

    def where(section, key):
        line = _line_of(text, section, key)
        return f" (line {line})" if line else ""

    for section in cp.sections():
        sec = section.lower()
        if sec not in _SCHEMA:
            line = next((i for i, ln in enumerate(text.splitlines(), 1)
                         if ln.strip().lower() == f"[{sec}]"), None)
            raise ConfigurationError(f"unknown section [{section}]"
                                     + (f" (line {line})" if line else ""))
        for key in cp[section]:
            if key not in _SCHEMA[sec]:
                raise ConfigurationError(f"unknown key {key!r} in [{section}]{where(sec, key)}")

    kw = {}
    try:
        if cp.has_option("domain", "dim"):
            kw["dim"] = int(cp.get("domain", "dim"))
        dim = kw.get("dim", 1)
        if dim not in (1, 2):
            raise ConfigurationError(f"dim must be 1 or 2{where('domain', 'dim')}")
        if cp.has_option("domain", "length"):
            Ls = [_number(v, "length") for v in _split_list(cp.get("domain", "length"))]
            if len(Ls) == 1:
                Ls = Ls * dim
            if len(Ls) != dim or min(Ls) <= 0:
                raise ConfigurationError(f"length needs {dim} positive values{where('domain', 'length')}")
            kw["lengths"] = tuple(Ls)
        elif dim == 2:
            kw["lengths"] = (1.0, 1.0)
        if cp.has_option("domain", "n"):
            kw["N"] = int(cp.get("domain", "n"))
        elif dim == 2:
            kw["N"] = 41
        N = kw.get("N", 401)
        if N < 8:
            raise ConfigurationError(f"N = {N} is below the minimum 8{where('domain', 'n')}")
        if N % 2 == 0:
            raise ConfigurationError(f"N = {N} must be odd so that the mesh halves{where('domain', 'n')}")
        if cp.has_option("operator", "bc"):
            kw["bc"] = cp.get("operator", "bc").strip().lower()
            if kw["bc"] not in ("dirichlet", "neumann"):
                raise ConfigurationError(f"bc must be dirichlet or neumann{where('operator', 'bc')}")
        for key, name in (("a", "a"), ("h", "H")):
            if cp.has_option("operator", key):
                expr = cp.get("operator", key).strip()
                _compile(expr, name)
                kw[name] = expr
        if cp.has_option("symbols", "names"):
            names = _split_list(cp.get("symbols", "names"))
            known = [s.name for s in builtin_symbols()]
            if names != ["all"]:
                unknown = [n for n in names if n not in known]
                if unknown:
                    raise ConfigurationError(
                        f"unknown symbols {unknown}{where('symbols', 'names')}; known: {known}")
                kw["symbols"] = tuple(names)
        if cp.has_option("symbols", "cutoff"):
            kw["cutoff"] = _number(cp.get("symbols", "cutoff"), "cutoff")
            if not 0 < kw["cutoff"] <= 10:
                raise ConfigurationError(f"cutoff must lie in (0, 10]{where('symbols', 'cutoff')}")
        if cp.has_option("run", "suites"):
            names = _split_list(cp.get("run", "suites"))
            if names != ["all"]:
                unknown = [n for n in names if n not in SUITES]
                if unknown:
                    raise ConfigurationError(f"unknown suites {unknown}{where('run', 'suites')}")
                kw["suites"] = tuple(s for s in SUITES if s in names)
        if cp.has_option("run", "seed"):
            kw["seed"] = int(cp.get("run", "seed"))
        if cp.has_option("run", "output_dir"):
            out = Path(cp.get("run", "output_dir").strip())
            if base_dir is not None and not out.is_absolute():
                out = base_dir / out
            kw["output_dir"] = os.path.normpath(out)
        if cp.has_option("run", "companion_2d"):
            kw["companion_2d"] = cp.getboolean("run", "companion_2d")
        tols = dict(TOLERANCES)
        if cp.has_section("tolerances"):
            for key in cp["tolerances"]:
                val = float(cp.get("tolerances", key))
                if not val > 0:
                    raise ConfigurationError(f"tolerance {key} must be positive{where('tolerances', key)}")
                tols[_TOL_NAMES[key]] = val
        kw["tolerances"] = tols
    except ValueError as exc:
        if isinstance(exc, ConfigurationError):
            raise
        raise ConfigurationError(f"invalid value: {exc}") from exc
    return ExperimentConfig(**kw)


def load_config(path) -> ExperimentConfig:
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise ConfigurationError(f"cannot read config {path}: {exc}") from exc
    return parse_config(text, base_dir=path.parent)
