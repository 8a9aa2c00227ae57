"""Job configuration files.

A config is a ``[job]`` section of ``key = value`` lines; ``#`` starts a
comment.  Model parameters are namespaced as ``q1.mu`` or ``q2.delta_t``.
Numeric values may use ``pi`` and ``sqrt`` with the usual arithmetic, e.g.
``k = pi/2, 0``.

Example::

    [job]
    command = fidelity-map
    model = triplet_product
    q1.t = 1
    q1.mu = -3
    q1.m_z = 0.5
    q1.delta_t = 0.6
    q2.t = 1
    q2.mu = -0.1
    q2.m_z = 0.5
    q2.delta_t = 0.6
    output.csv = triplet.csv
"""

import ast
import math
import operator
from dataclasses import dataclass, field, replace

from .errors import ConfigError, ModelError
from .models import get_model

COMMANDS = ("fidelity-map", "gap-map", "chern", "z2", "segment", "critical-line", "counterexamples", "ising")
OUTPUT_KINDS = ("csv", "pgm", "report")

DEFAULT_GRID = (201, 201)
DEFAULT_TOL = 1e-8
DEFAULT_N_S = 200

_NEEDS_Q2 = {"fidelity-map", "segment", "critical-line", "ising"}
_MAY_Q2 = _NEEDS_Q2 | {"z2"}
_NO_MODEL = {"counterexamples"}
_PGM_OK = {"fidelity-map", "gap-map"}
_CSV_OK = {"fidelity-map", "gap-map", "segment", "counterexamples", "ising", "z2"}
_SCALAR_KEYS = ("command", "model", "beta", "grid", "bounds", "tol", "n_s", "k", "exponent.k", "workers")


@dataclass(frozen=True)
class ScanJob:
    command: str
    model: str = None
    q1: dict = field(default_factory=dict)
    q2: dict = None
    beta: float = math.inf
    grid: tuple = DEFAULT_GRID
    bounds: tuple = None
    tol: float = DEFAULT_TOL
    n_s: int = DEFAULT_N_S
    k: tuple = None
    exponent_k: tuple = ()
    workers: int = 1
    outputs: tuple = ()

    @property
    def temperature(self):
        return 0.0 if math.isinf(self.beta) else (math.inf if self.beta == 0 else 1.0 / self.beta)

    def output(self, kind):
        for kd, path in self.outputs:
            if kd == kind:
                return path
        return None


# --- value parsing -----------------------------------------------------------

_BINOPS = {ast.Add: operator.add, ast.Sub: operator.sub, ast.Mult: operator.mul,
           ast.Div: operator.truediv, ast.Pow: operator.pow}
_UNOPS = {ast.USub: operator.neg, ast.UAdd: operator.pos}
_NAMES = {"pi": math.pi, "inf": math.inf}
_FUNCS = {"sqrt": math.sqrt}


def _eval_node(node):
    if isinstance(node, ast.Constant) and isinstance(node.value, (int, float)) and not isinstance(node.value, bool):
        return float(node.value)
    if isinstance(node, ast.Name) and node.id in _NAMES:
        return _NAMES[node.id]
    if isinstance(node, ast.BinOp) and type(node.op) in _BINOPS:
        return _BINOPS[type(node.op)](_eval_node(node.left), _eval_node(node.right))
    if isinstance(node, ast.UnaryOp) and type(node.op) in _UNOPS:
        return _UNOPS[type(node.op)](_eval_node(node.operand))
    if (isinstance(node, ast.Call) and isinstance(node.func, ast.Name) and node.func.id in _FUNCS
            and len(node.args) == 1 and not node.keywords):
        return _FUNCS[node.func.id](_eval_node(node.args[0]))
    raise ValueError("unsupported expression")


def parse_number(text):
    """Float from a literal or a small arithmetic expression in ``pi``."""
    src = text.strip().replace("−", "-")
    try:
        return float(_eval_node(ast.parse(src, mode="eval").body))
    except (SyntaxError, ValueError, ZeroDivisionError, OverflowError) as exc:
        raise ValueError(f"not a number: {text.strip()!r}") from exc


def _vector(text):
    return tuple(parse_number(x) for x in text.split(","))


def _grid(text):
    parts = text.lower().replace(" ", "").split("x")
    try:
        n = tuple(int(p) for p in parts)
    except ValueError:
        raise ValueError(f"grid must look like 201x201 or 201, got {text.strip()!r}") from None
    if len(n) not in (1, 2) or any(x < 2 for x in n):
        raise ValueError(f"grid must have 1 or 2 axes of at least 2 points, got {text.strip()!r}")
    return n


def _positive_int(text, name):
    try:
        v = int(text)
    except ValueError:
        raise ValueError(f"{name} must be an integer, got {text.strip()!r}") from None
    if v < 1:
        raise ValueError(f"{name} must be at least 1")
    return v


# --- parser ------------------------------------------------------------------


def parse_config(text, overrides=(), command=None):
    """Parse and validate a job config.

    Parameters
    ----------
    text : str
        Config file contents.
    overrides : sequence of str
        Extra ``key=value`` lines applied after the file (CLI ``--set``).
    command : str, optional
        Command implied by the caller (the CLI subcommand).  A config that
        names a different command is rejected; one that names none gets this.

    Raises
    ------
    ConfigError
        With the offending line number where there is one.
    """
    entries = {}
    section_seen = False
    lines = text.splitlines()
    numbered = [(i + 1, s) for i, s in enumerate(lines)]
    numbered += [(None, "__override__" + s) for s in overrides]
    for lineno, raw in numbered:
        is_override = raw.startswith("__override__")
        line = raw[len("__override__"):] if is_override else raw
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        where = lineno if not is_override else None
        if line.startswith("["):
            if line != "[job]":
                raise ConfigError(f"unknown section {line!r}; expected [job]", where)
            if section_seen:
                raise ConfigError("duplicate [job] section", where)
            section_seen = True
            continue
        if not is_override and not section_seen:
            raise ConfigError("settings must follow the [job] header", where)
        if "=" not in line:
            raise ConfigError(f"expected 'key = value', got {line!r}", where)
        key, value = (s.strip() for s in line.split("=", 1))
        if not key or not value:
            raise ConfigError(f"expected 'key = value', got {line!r}", where)
        if key != key.lower():
            raise ConfigError(f"keys are lowercase: {key!r}", where)
        if key in entries and not is_override:
            raise ConfigError(f"duplicate key {key!r}", where)
        _check_key(key, where)
        entries[key] = (value, where if not is_override else "--set")
    if not section_seen:
        raise ConfigError("missing [job] section")
    if command is not None:
        if "command" not in entries:
            entries["command"] = (command, None)
        elif entries["command"][0] != command:
            value, where = entries["command"]
            raise ConfigError(f"config is for command {value!r}, not {command!r}",
                              where if isinstance(where, int) else None)
    return _build(entries)


def _check_key(key, where):
    if key in _SCALAR_KEYS:
        return
    head, _, tail = key.partition(".")
    if head in ("q1", "q2") and tail and tail.isidentifier():
        return
    if head == "output" and tail in OUTPUT_KINDS:
        return
    raise ConfigError(f"unknown key {key!r}", where)


def _build(entries):
    def get(key, conv, default=None):
        if key not in entries:
            return default
        value, where = entries[key]
        try:
            return conv(value)
        except ValueError as exc:
            raise ConfigError(f"{key}: {exc}", where if isinstance(where, int) else None) from None

    def line_of(key):
        where = entries.get(key, (None, None))[1]
        return where if isinstance(where, int) else None

    command = get("command", str.strip)
    if command is None:
        raise ConfigError("missing required key 'command'")
    if command not in COMMANDS:
        raise ConfigError(f"unknown command {command!r}; expected one of {', '.join(COMMANDS)}", line_of("command"))

    q = {"q1": {}, "q2": {}}
    for key in entries:
        head, _, tail = key.partition(".")
        if head in q:
            q[head][tail] = get(key, parse_number)

    model_id = get("model", str.strip)
    if command == "ising" and model_id is None:
        model_id = "ising_tf"
    if command in _NO_MODEL:
        if model_id is not None:
            raise ConfigError(f"'{command}' takes no model", line_of("model"))
        if q["q1"] or q["q2"]:
            raise ConfigError(f"'{command}' takes no parameter points")
    else:
        if model_id is None:
            raise ConfigError("missing required key 'model'")
        try:
            model = get_model(model_id)
        except ModelError as exc:
            raise ConfigError(str(exc), line_of("model")) from None
        if command == "ising" and model.id != "ising_tf":
            raise ConfigError("'ising' runs the ising_tf model", line_of("model"))
        for name in ("q1", "q2"):
            if name == "q2" and command not in _MAY_Q2:
                if q["q2"]:
                    raise ConfigError(f"'{command}' takes no q2", line_of(f"q2.{next(iter(q['q2']))}"))
                continue
            if name == "q2" and command not in _NEEDS_Q2 and not q["q2"]:
                continue
            got = q[name]
            for p in sorted(set(got) - set(model.schema)):
                raise ConfigError(f"{name}.{p} is not a parameter of {model.id} "
                                  f"(schema: {', '.join(model.schema)})", line_of(f"{name}.{p}"))
            missing = [p for p in model.schema if p not in got]
            if missing:
                raise ConfigError(f"missing required key(s) {', '.join(f'{name}.{p}' for p in missing)}")

    beta = get("beta", parse_number, math.inf)
    if not beta >= 0:
        raise ConfigError("beta must be non-negative", line_of("beta"))
    grid = get("grid", _grid, None)
    bounds = get("bounds", _vector, None)
    tol = get("tol", parse_number, DEFAULT_TOL)
    if not tol > 0:
        raise ConfigError("tol must be positive", line_of("tol"))
    n_s = get("n_s", lambda s: _positive_int(s, "n_s"), DEFAULT_N_S)
    k = get("k", _vector, None)
    exponent_k = get("exponent.k", lambda s: tuple(_vector(p) for p in s.split(";")), ())
    workers = get("workers", lambda s: _positive_int(s, "workers"), 1)
    outputs = tuple((kind, entries[f"output.{kind}"][0]) for kind in OUTPUT_KINDS if f"output.{kind}" in entries)

    dim_k = 1 if command in ("ising", "counterexamples") else None
    if model_id is not None:
        dim_k = get_model(model_id).dim_k
    if grid is None:
        grid = (DEFAULT_GRID[0],) if dim_k == 1 else DEFAULT_GRID
    if command in ("counterexamples", "chern"):
        if len(grid) == 2 and grid[0] != grid[1]:
            raise ConfigError(f"'{command}' needs a square grid", line_of("grid"))
        grid = grid[:1]
    elif dim_k == 2 and len(grid) == 1:
        grid = (grid[0], grid[0])
    elif dim_k == 1 and len(grid) != 1:
        raise ConfigError("1d models take a single grid size", line_of("grid"))
    if bounds is not None:
        if command in ("counterexamples", "chern", "z2", "critical-line") or len(bounds) != 2 * len(grid):
            raise ConfigError(f"bounds must give lo, hi per grid axis for '{command}'", line_of("bounds"))
        bounds = tuple(bounds[i:i + 2] for i in range(0, len(bounds), 2))
    if command == "critical-line":
        if k is None:
            raise ConfigError("missing required key 'k'")
        if len(k) != dim_k:
            raise ConfigError(f"k needs {dim_k} components", line_of("k"))
    elif k is not None:
        raise ConfigError(f"'{command}' takes no k", line_of("k"))
    if exponent_k and command != "fidelity-map":
        raise ConfigError("exponent.k is only used by fidelity-map", line_of("exponent.k"))
    if command == "fidelity-map" and not math.isinf(beta) and get_model(model_id).dim_h != 3:
        raise ConfigError("finite beta needs a 2x2 model", line_of("beta"))
    for kind, _ in outputs:
        ok = {"pgm": _PGM_OK, "csv": _CSV_OK}.get(kind)
        if ok is not None and command not in ok:
            raise ConfigError(f"'{command}' does not produce output.{kind}", line_of(f"output.{kind}"))

    return ScanJob(
        command=command, model=model_id,
        q1=q["q1"] if model_id is not None else {},
        q2=q["q2"] if q["q2"] else None,
        beta=beta, grid=grid, bounds=bounds, tol=tol, n_s=n_s, k=k, exponent_k=exponent_k,
        workers=workers, outputs=outputs,
    )


def _num(x):
    return "inf" if math.isinf(x) else repr(float(x))


def format_config(job):
    """Config text that parses back to ``job``."""
    lines = ["[job]", f"command = {job.command}"]
    if job.model is not None:
        lines.append(f"model = {job.model}")
    for name in ("q1", "q2"):
        for p, v in (getattr(job, name) or {}).items():
            lines.append(f"{name}.{p} = {_num(v)}")
    lines.append(f"beta = {_num(job.beta)}")
    lines.append("grid = " + "x".join(str(n) for n in job.grid))
    if job.bounds is not None:
        lines.append("bounds = " + ", ".join(_num(x) for lo_hi in job.bounds for x in lo_hi))
    lines.append(f"tol = {_num(job.tol)}")
    lines.append(f"n_s = {job.n_s}")
    if job.k is not None:
        lines.append("k = " + ", ".join(_num(x) for x in job.k))
    if job.exponent_k:
        lines.append("exponent.k = " + "; ".join(", ".join(_num(x) for x in p) for p in job.exponent_k))
    lines.append(f"workers = {job.workers}")
    for kind, path in job.outputs:
        lines.append(f"output.{kind} = {path}")
    return "\n".join(lines) + "\n"


def with_workers(job, workers):
    return replace(job, workers=int(workers))
