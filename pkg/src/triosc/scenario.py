"""Scenario files: a strict JSON schema and a runner that writes CSV tables."""

from __future__ import annotations

import csv
import io
import json
import math
import os
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path
from typing import Annotated, List, Literal, Optional, Tuple, Union

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, ValidationError, field_validator, model_validator

from . import __version__
from .dynamics import (
    CouplingParams,
    general_coefficients,
    special_case_coefficients,
    verify_identities,
)
from .errors import InvalidInputError, TrioscError
from .moments import InitialState
from .oracle import picture_equivalence
from .phasespace import joint_wigner, photon_number_distribution, single_mode_wigner, single_mode_wigner_closed
from .phasespace import single_mode_wigner_numeric
from .statistics import cauchy_schwarz_factor, g2, quadrature_squeezing, squeezed_number_reference, sum_squeezing

Mode = Literal[1, 2, 3]
Rate = Annotated[float, Field(ge=0, allow_inf_nan=False)]


class _Strict(BaseModel):
    model_config = ConfigDict(extra="forbid", frozen=True)


class StateSpec(_Strict):
    kind: Literal["fock", "thermal"]
    occupations: Tuple[Annotated[float, Field(ge=0, allow_inf_nan=False)], ...]

    @field_validator("occupations")
    @classmethod
    def _three(cls, v):
        if len(v) != 3:
            raise ValueError("exactly three occupations are required")
        return v

    @model_validator(mode="after")
    def _integral(self):
        if self.kind == "fock" and any(not float(n).is_integer() for n in self.occupations):
            raise ValueError("Fock occupations must be integers")
        return self

    def build(self):
        occ = self.occupations
        if self.kind == "fock":
            return InitialState.fock(*(int(n) for n in occ))
        return InitialState.thermal(*occ)


class TimeGrid(_Strict):
    """``steps`` equal intervals from ``start`` to ``end`` (``steps + 1`` points)."""

    start: float = Field(allow_inf_nan=False)
    end: float = Field(allow_inf_nan=False)
    steps: int = Field(ge=1)

    def values(self):
        return np.linspace(self.start, self.end, self.steps + 1)


class _Analysis(_Strict):
    file: Optional[str] = Field(default=None, pattern=r"^[A-Za-z0-9_.-]+\.csv$")
    couplings: Optional[Tuple[Rate, Rate, Rate]] = None
    state: Optional[StateSpec] = None


class CoeffsAnalysis(_Analysis):
    kind: Literal["coeffs"]
    path: Literal["general", "special"] = "general"
    residuals: bool = False


class SqueezingAnalysis(_Analysis):
    kind: Literal["squeezing"]
    mode_sets: List[Tuple[Mode, ...]] = Field(min_length=1)
    components: List[Literal["S", "Q"]] = Field(default_factory=lambda: ["S"], min_length=1)
    reference_mode: Optional[Mode] = None

    @field_validator("mode_sets")
    @classmethod
    def _sets(cls, v):
        for s in v:
            if not 1 <= len(s) <= 3 or len(set(s)) != len(s):
                raise ValueError(f"mode set {list(s)} must list 1 to 3 distinct modes")
        return v


class SumSqueezingAnalysis(_Analysis):
    kind: Literal["sum-squeezing"]
    pairs: List[Tuple[Mode, Mode]] = Field(min_length=1)
    components: List[Literal["S", "Q"]] = Field(default_factory=lambda: ["S", "Q"], min_length=1)

    @field_validator("pairs")
    @classmethod
    def _distinct(cls, v):
        for j, k in v:
            if j == k:
                raise ValueError(f"pair ({j}, {k}) must name two different modes")
        return v


class G2Analysis(_Analysis):
    kind: Literal["g2"]
    modes: List[Mode] = Field(default_factory=lambda: [1, 2, 3], min_length=1)


class CauchySchwarzAnalysis(_Analysis):
    kind: Literal["cauchy-schwarz"]
    pairs: List[Tuple[Mode, Mode]] = Field(min_length=1)

    @field_validator("pairs")
    @classmethod
    def _distinct(cls, v):
        for j, k in v:
            if j == k:
                raise ValueError(f"pair ({j}, {k}) must name two different modes")
        return v


class _GridAnalysis(_Analysis):
    t: Optional[float] = Field(default=None, allow_inf_nan=False)
    extent: float = Field(default=3.0, gt=0, allow_inf_nan=False)
    points: int = Field(default=61, ge=2, le=401)
    mode: Mode = 1


class WignerSingleAnalysis(_GridAnalysis):
    kind: Literal["wigner-single"]
    method: Literal["auto", "closed", "quadrature"] = "auto"


class WignerJointAnalysis(_GridAnalysis):
    kind: Literal["wigner-joint"]
    fixed: Tuple[Tuple[float, float], Tuple[float, float], Tuple[float, float]] = ((0, 0), (0, 0), (0, 0))


class PndAnalysis(_Analysis):
    kind: Literal["pnd"]
    t: Optional[float] = Field(default=None, allow_inf_nan=False)
    mode: Mode = 1
    n_max: int = Field(default=32, ge=0, le=64)


class OracleCheckAnalysis(_Analysis):
    kind: Literal["oracle-check"]
    cutoff: Optional[int] = Field(default=None, ge=1, le=128)
    times: Optional[List[float]] = None


Analysis = Annotated[
    Union[
        CoeffsAnalysis,
        SqueezingAnalysis,
        SumSqueezingAnalysis,
        G2Analysis,
        CauchySchwarzAnalysis,
        WignerSingleAnalysis,
        WignerJointAnalysis,
        PndAnalysis,
        OracleCheckAnalysis,
    ],
    Field(discriminator="kind"),
]


class Scenario(_Strict):
    name: str = Field(pattern=r"^[A-Za-z0-9_.-]+$")
    couplings: Tuple[Rate, Rate, Rate]
    omegas: Optional[Tuple[float, float, float]] = None
    state: StateSpec
    time: TimeGrid
    analyses: List[Analysis] = Field(min_length=1)
    output_dir: Optional[str] = None

    @model_validator(mode="after")
    def _unique_files(self):
        names = [output_name(self, i) for i in range(len(self.analyses))]
        dupes = sorted({n for n in names if names.count(n) > 1})
        if dupes:
            raise ValueError(f"analyses write to the same file: {', '.join(dupes)}")
        return self


class ToleranceFailure(TrioscError):
    """A cross-check ran to completion but exceeded its tolerance."""


def output_name(scenario, index):
    analysis = scenario.analyses[index]
    if analysis.file:
        return analysis.file
    return f"{scenario.name}_{index:02d}_{analysis.kind}.csv"


def _format_issue(err, text):
    loc = ".".join(str(p) for p in err["loc"])
    line = _line_of(text, err["loc"])
    where = f"line {line}, field {loc}" if line else f"field {loc}"
    return f"{where}: {err['msg']}"


def _line_of(text, loc):
    """Best-effort line number of the last string key in ``loc``."""
    keys = [p for p in loc if isinstance(p, str)]
    if not keys or text is None:
        return None
    needle = f'"{keys[-1]}"'
    for number, line in enumerate(text.splitlines(), 1):
        if needle in line:
            return number
    return None


def load_scenario(path):
    """Read and validate a scenario file.

    Raises InvalidInputError with one line per problem, naming the JSON line
    and the field path.
    """
    text = Path(path).read_text(encoding="utf-8")
    return parse_scenario(text)


def parse_scenario(text):
    try:
        raw = json.loads(text)
    except json.JSONDecodeError as exc:
        raise InvalidInputError(f"line {exc.lineno}, column {exc.colno}: {exc.msg}") from exc
    try:
        return Scenario.model_validate(raw)
    except ValidationError as exc:
        issues = "\n".join(_format_issue(e, text) for e in exc.errors())
        raise InvalidInputError(issues) from exc


# -- evaluation -----------------------------------------------------------

def _params(scenario, analysis):
    lam = analysis.couplings if analysis.couplings is not None else scenario.couplings
    return CouplingParams(*lam, omegas=scenario.omegas)


def _state(scenario, analysis):
    return (analysis.state or scenario.state).build()


def _set_label(modes):
    modes = tuple(sorted(modes))
    if len(modes) == 1:
        return f"single_mode{modes[0]}"
    if len(modes) == 2:
        return f"two_mode{modes[0]}{modes[1]}"
    return "three_mode"


def _coeffs_table(scenario, analysis):
    params = _params(scenario, analysis)
    t = scenario.time.values()
    if analysis.path == "special":
        coeffs = special_case_coefficients(params, t)
    else:
        coeffs = general_coefficients(params, t)
    columns = {"t": t}
    for name, block in (("f", coeffs.f), ("g", coeffs.g), ("h", coeffs.h)):
        for i in range(6):
            columns[f"{name}{i + 1}"] = block[i]
    if analysis.residuals:
        for i in range(len(t)):
            for res in verify_identities(coeffs.at(i)):
                columns.setdefault(f"res_{res.name}", np.empty(len(t)))[i] = res.relative
    return columns, "time-dependent coefficients f, g, h of the linear solution"


def _squeezing_table(scenario, analysis):
    params, state = _params(scenario, analysis), _state(scenario, analysis)
    t = scenario.time.values()
    coeffs = general_coefficients(params, t)
    columns = {"t": t}
    for modes in analysis.mode_sets:
        report = quadrature_squeezing(coeffs, state, modes)
        for comp in analysis.components:
            columns[f"{comp}_{_set_label(modes)}"] = getattr(report, comp)
    if analysis.reference_mode is not None:
        nbar = state.means[analysis.reference_mode - 1]
        columns["S_reference"] = squeezed_number_reference(nbar, params.lambda1, t)
    return columns, "quadrature squeezing factors S (X) and Q (Y) relative to the bound m/4"


def _sum_squeezing_table(scenario, analysis):
    params, state = _params(scenario, analysis), _state(scenario, analysis)
    t = scenario.time.values()
    coeffs = general_coefficients(params, t)
    columns = {"t": t}
    for j, k in analysis.pairs:
        report = sum_squeezing(coeffs, state, (j, k))
        for comp in analysis.components:
            columns[f"{comp}_sum{j}{k}"] = getattr(report, comp)
    return columns, "sum-squeezing factors with bound (<n_j> + <n_k> + 1)/4 at time t"


def _g2_table(scenario, analysis):
    params, state = _params(scenario, analysis), _state(scenario, analysis)
    t = scenario.time.values()
    coeffs = general_coefficients(params, t)
    columns = {"t": t}
    for m in analysis.modes:
        columns[f"g2_mode{m}"] = g2(coeffs, state, m, undefined="nan")
    return columns, "normalised second-order correlation g2 (nan where <n> = 0)"


def _cauchy_schwarz_table(scenario, analysis):
    params, state = _params(scenario, analysis), _state(scenario, analysis)
    t = scenario.time.values()
    coeffs = general_coefficients(params, t)
    columns = {"t": t}
    for j, k in analysis.pairs:
        columns[f"I_{j}{k}"] = cauchy_schwarz_factor(coeffs, state, (j, k), undefined="nan")
    return columns, "Cauchy-Schwarz factor I_jk (nan where the denominator vanishes)"


def _grid(analysis):
    axis = np.linspace(-analysis.extent, analysis.extent, analysis.points)
    x, y = np.meshgrid(axis, axis, indexing="xy")
    return x.reshape(-1), y.reshape(-1)


def _time_of(scenario, analysis):
    return scenario.time.end if analysis.t is None else analysis.t


def _wigner_single_table(scenario, analysis):
    params, state = _params(scenario, analysis), _state(scenario, analysis)
    coeffs = general_coefficients(params, _time_of(scenario, analysis))
    x, y = _grid(analysis)
    alpha = x + 1j * y
    if analysis.method == "closed":
        if not all(n == 0 for i, n in enumerate(state.occupations) if i != analysis.mode - 1) or state.kind != "fock":
            raise InvalidInputError("the closed single-mode form needs the selected mode excited and the others in vacuum")
        values, method = single_mode_wigner_closed(coeffs, state.occupations[analysis.mode - 1], analysis.mode, alpha), "closed"
    elif analysis.method == "quadrature":
        values, method = single_mode_wigner_numeric(coeffs, state, analysis.mode, alpha), "quadrature"
    else:
        values, method = single_mode_wigner(coeffs, state, analysis.mode, alpha)
    columns = {"x": x, "y": y, "W": np.asarray(values, dtype=float)}
    return columns, f"single-mode Wigner function of mode {analysis.mode} at t={_time_of(scenario, analysis)!r} ({method})"


def _wigner_joint_table(scenario, analysis):
    params, state = _params(scenario, analysis), _state(scenario, analysis)
    coeffs = general_coefficients(params, _time_of(scenario, analysis))
    x, y = _grid(analysis)
    point = [complex(re, im) * np.ones_like(x) for re, im in analysis.fixed]
    point[analysis.mode - 1] = x + 1j * y
    values = joint_wigner(coeffs, state, point)
    columns = {"x": x, "y": y, "W": np.asarray(values, dtype=float)}
    return columns, f"joint Wigner function scanned over mode {analysis.mode}, others fixed at {list(analysis.fixed)}"


def _pnd_table(scenario, analysis):
    params, state = _params(scenario, analysis), _state(scenario, analysis)
    if state.kind != "fock":
        raise InvalidInputError("photon-number distributions are computed for Fock inputs")
    t = _time_of(scenario, analysis)
    dist = photon_number_distribution(general_coefficients(params, t), state, analysis.mode, analysis.n_max)
    n = np.arange(analysis.n_max + 1)
    columns = {f"n{analysis.mode}": n, "P": dist.probabilities}
    note = (f"photon-number distribution of mode {analysis.mode} at t={t!r}; "
            f"tail {dist.tail:.3e}, quadrature error estimate {dist.error_estimate:.3e}")
    return columns, note


def _oracle_table(scenario, analysis):
    params, state = _params(scenario, analysis), _state(scenario, analysis)
    times = analysis.times if analysis.times is not None else scenario.time.values()
    rows = {k: [] for k in ("t", "word", "heisenberg_re", "heisenberg_im", "schrodinger_re",
                            "schrodinger_im", "difference", "tolerance", "tail")}
    failures = []
    for t in times:
        for rec in picture_equivalence(params, state, float(t), cutoff=analysis.cutoff):
            rows["t"].append(float(t))
            rows["word"].append(" ".join(f"A{l.mode}{'+' if l.dagger else ''}" for l in rec.word))
            rows["heisenberg_re"].append(rec.heisenberg.real)
            rows["heisenberg_im"].append(rec.heisenberg.imag)
            rows["schrodinger_re"].append(rec.schrodinger.real)
            rows["schrodinger_im"].append(rec.schrodinger.imag)
            rows["difference"].append(rec.difference)
            rows["tolerance"].append(rec.tolerance)
            rows["tail"].append(rec.tail)
            if not rec.ok:
                failures.append(f"t={t!r} {rows['word'][-1]}: {rec.difference:.3e} > {rec.tolerance:.3e}")
    if failures:
        raise ToleranceFailure("picture equivalence failed:\n" + "\n".join(failures))
    return rows, "Heisenberg-picture moments against truncated Schrodinger-picture propagation"


_RUNNERS = {
    "coeffs": _coeffs_table,
    "squeezing": _squeezing_table,
    "sum-squeezing": _sum_squeezing_table,
    "g2": _g2_table,
    "cauchy-schwarz": _cauchy_schwarz_table,
    "wigner-single": _wigner_single_table,
    "wigner-joint": _wigner_joint_table,
    "pnd": _pnd_table,
    "oracle-check": _oracle_table,
}


def _cell(value):
    if isinstance(value, str):
        return value
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    value = float(value)
    if math.isnan(value):
        return "nan"
    return "%.17g" % value


def render_csv(scenario, index, columns, note):
    """CSV text with ``#`` provenance lines, a header row and one row per sample."""
    analysis = scenario.analyses[index]
    buf = io.StringIO()
    buf.write(f"# triosc {__version__}\n")
    buf.write(f"# analysis {index}: {analysis.kind}; {note}\n")
    buf.write("# config: " + json.dumps(scenario.model_dump(mode="json"), sort_keys=True, separators=(",", ":")) + "\n")
    writer = csv.writer(buf, lineterminator="\r\n")
    names = list(columns)
    writer.writerow(names)
    length = len(next(iter(columns.values())))
    for i in range(length):
        writer.writerow([_cell(columns[name][i]) for name in names])
    return buf.getvalue()


class AnalysisError(TrioscError):
    """Wraps a failure with the analysis that raised it."""

    def __init__(self, index, kind, cause):
        super().__init__(f"analysis {index} ({kind}) failed: {cause}")
        self.index = index
        self.kind = kind
        self.cause = cause


def evaluate(scenario, index):
    analysis = scenario.analyses[index]
    try:
        columns, note = _RUNNERS[analysis.kind](scenario, analysis)
    except TrioscError as exc:
        raise AnalysisError(index, analysis.kind, exc) from exc
    return render_csv(scenario, index, columns, note)


def run_scenario(scenario, out_dir=None, threads=1):
    """Evaluate every analysis and write one CSV per analysis.

    Output files are only written after all analyses succeeded; on any
    failure no file of this run is left behind.  Returns the written paths.
    """
    out = Path(out_dir if out_dir is not None else (scenario.output_dir or "."))
    indices = range(len(scenario.analyses))
    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            texts = list(pool.map(lambda i: evaluate(scenario, i), indices))
    else:
        texts = [evaluate(scenario, i) for i in indices]
    out.mkdir(parents=True, exist_ok=True)
    written = []
    try:
        for i, text in zip(indices, texts):
            path = out / output_name(scenario, i)
            tmp = path.with_name(path.name + ".part")
            with open(tmp, "w", encoding="utf-8", newline="") as fh:
                fh.write(text)
            os.replace(tmp, path)
            written.append(path)
    except OSError:
        for path in written:
            path.unlink(missing_ok=True)
        for i in indices:
            (out / (output_name(scenario, i) + ".part")).unlink(missing_ok=True)
        raise
    return written


def bundled_scenarios():
    """Paths of the scenario files shipped with the package."""
    from importlib.resources import files

    root = files("triosc") / "scenarios"
    return sorted((Path(str(p)) for p in root.iterdir() if p.name.endswith(".json")), key=lambda p: p.name)


def read_table(path):
    """Load a CSV written by :func:`run_scenario` into ``{column: array}``.

    Numeric columns become float arrays; others stay lists of strings.
    """
    with open(path, encoding="utf-8", newline="") as fh:
        rows = list(csv.reader(line for line in fh if not line.startswith("#")))
    header, body = rows[0], rows[1:]
    table = {}
    for i, name in enumerate(header):
        values = [r[i] for r in body]
        try:
            table[name] = np.array([float(v) for v in values])
        except ValueError:
            table[name] = values
    return table
