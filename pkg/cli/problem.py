"""
Fichiers de problème : description déclarative d'une estimation

Deux formats équivalents sont acceptés. Le format clé-valeur, une entrée
par ligne :

    # Rosenbrock en deux dimensions
    objective = benchmark
    benchmark = rosenbrock
    param = x1,-100,100
    param = x2,-100,100
    method = pso
    seed = 1
    tolerance = 2e-5
    option.swarm_size = 16

ou un objet JSON de même structure, où `parameters` est une liste et
`options`, `external` et `cost` des objets imbriqués.
"""

import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Dict, List, Optional

from benchmarks.functions import BenchmarkFunction
from core.exceptions import (
    DimensionMismatchError,
    ExternalModelError,
    InvalidParameterError,
    ProblemFileError,
    UnknownMethodError,
)
from core.parameters import ParameterDef, ParameterSpace
from core.services import ObjectiveFunction, PlainFunction
from dynamics.services import make_period_tuning_objective
from extmodel.services import CostSpec, ExternalModelSpec, make_objective
from metaheuristics.options import BaseOptions
from metaheuristics.services import get_options_class

OBJECTIVE_KINDS = ("benchmark", "period-tuning", "external")
TOP_LEVEL_KEYS = (
    "objective",
    "benchmark",
    "dimension",
    "lower",
    "upper",
    "target",
    "method",
    "seed",
    "tolerance",
    "max_evals",
)
SECTIONS = {"option": "options", "external": "external", "cost": "cost"}
EXTERNAL_KEYS = (
    "command",
    "working_dir",
    "output_mode",
    "output_path",
    "timeout",
    "reference",
    "params_file",
)
COST_KEYS = ("kind", "columns", "command", "value_column", "skip_until")
BENCHMARK_BOUNDS = (-100.0, 100.0)
PERIOD_TUNING_BOUNDS = (0.2, 2.0)
PERIOD_TUNING_NAMES = ("x1", "x2", "x3", "x4")


@dataclass
class ProblemFile:
    """
    Problème d'estimation prêt à être lancé
    """

    objective: str
    parameters: List[ParameterDef]
    method: str = "pso"
    options: Dict[str, Any] = field(default_factory=dict)
    seed: int = 0
    tolerance: Optional[float] = None
    max_evals: Optional[int] = None
    benchmark: Optional[str] = None
    target: Optional[float] = None
    external: Optional[ExternalModelSpec] = None
    source: Optional[Path] = None

    @property
    def dimension(self) -> int:
        return len(self.parameters)

    @property
    def name(self) -> str:
        if self.objective == "benchmark":
            return f"{self.benchmark}-{self.dimension}d"
        if self.objective == "period-tuning":
            return f"period-tuning-{self.target:g}"
        return self.source.stem if self.source else "external"

    def build_options(self) -> BaseOptions:
        """
        Raises:
            InvalidOptionsError: option inconnue ou invalide
        """
        return get_options_class(self.method)().with_overrides(**self.options)

    def build_objective(
        self, jobs: Optional[int] = None, max_evals: Optional[int] = None
    ) -> ObjectiveFunction:
        """
        Construit la fonction objectif décrite par le fichier

        Raises:
            ExternalModelError: modèle externe incompatible avec les
                paramètres ou référence introuvable
        """
        kwargs = dict(
            tolerance=self.tolerance,
            jobs=jobs,
            max_evals=max_evals if max_evals is not None else self.max_evals,
        )
        if self.objective == "period-tuning":
            first = self.parameters[0]
            return make_period_tuning_objective(
                self.target, first.min, first.max, **kwargs
            )
        if self.objective == "external":
            return make_objective(
                self.external, ParameterSpace(self.parameters), **kwargs
            )
        objective = PlainFunction(
            BenchmarkFunction(self.benchmark, self.dimension), **kwargs
        )
        for definition in self.parameters:
            objective.space.add_parameter(definition)
        return objective


def parse_bool(value) -> bool:
    if isinstance(value, bool):
        return value
    return str(value).strip().lower() in ("1", "true", "yes", "on")


def parse_columns(value) -> List[tuple]:
    """`y:y_obs, x` -> [("y", "y_obs"), ("x", "x")]"""
    if isinstance(value, str):
        value = [item.strip() for item in value.split(",") if item.strip()]
    pairs = []
    for item in value:
        if isinstance(item, str):
            model, _, reference = item.partition(":")
            pairs.append((model.strip(), (reference or model).strip()))
        else:
            model, reference = item
            pairs.append((str(model), str(reference)))
    return pairs


def parse_key_value(text: str) -> Dict[str, Any]:
    """Lit le format clé-valeur vers la même structure que le JSON"""
    raw: Dict[str, Any] = {"parameters": [], "options": {}, "external": {}, "cost": {}}
    for number, line in enumerate(text.splitlines(), start=1):
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        key, sep, value = line.partition("=")
        key, value = key.strip(), value.strip()
        if not sep or not key:
            raise ProblemFileError(f"Ligne {number}: 'clé = valeur' attendu")
        if key == "param":
            parts = [part.strip() for part in value.split(",")]
            if len(parts) != 3:
                raise ProblemFileError(
                    f"Ligne {number}: 'param = nom,min,max' attendu"
                )
            raw["parameters"].append(parts)
        elif "." in key:
            section, _, name = key.partition(".")
            if section not in SECTIONS or not name:
                raise ProblemFileError(f"Ligne {number}: clé inconnue '{key}'")
            raw[SECTIONS[section]][name] = value
        elif key in TOP_LEVEL_KEYS:
            if key in raw:
                raise ProblemFileError(f"Ligne {number}: clé '{key}' répétée")
            raw[key] = value
        else:
            raise ProblemFileError(f"Ligne {number}: clé inconnue '{key}'")
    return raw


def parse_json(text: str) -> Dict[str, Any]:
    try:
        data = json.loads(text)
    except json.JSONDecodeError as e:
        raise ProblemFileError(f"JSON invalide: {e}") from e
    if not isinstance(data, dict):
        raise ProblemFileError("Le fichier JSON doit contenir un objet")
    unknown = set(data) - set(TOP_LEVEL_KEYS) - {
        "parameters",
        "options",
        "external",
        "cost",
    }
    if unknown:
        raise ProblemFileError(f"Clés inconnues: {', '.join(sorted(unknown))}")
    raw = {"options": {}, "external": {}, "cost": {}, **data}
    parameters = []
    for item in data.get("parameters", []):
        if isinstance(item, dict):
            try:
                item = [item["name"], item["min"], item["max"]]
            except KeyError as e:
                raise ProblemFileError(f"Paramètre sans {e}") from e
        if len(item) != 3:
            raise ProblemFileError(f"Paramètre invalide: {item}")
        parameters.append(item)
    raw["parameters"] = parameters
    return raw


def _cast(raw: Dict[str, Any], key: str, cast, default=None):
    if key not in raw or raw[key] in (None, ""):
        return default
    try:
        return cast(raw[key])
    except (TypeError, ValueError) as e:
        raise ProblemFileError(f"Valeur invalide pour '{key}': {raw[key]!r}") from e


def _parameters(raw: Dict[str, Any]) -> List[ParameterDef]:
    definitions = []
    for name, lower, upper in raw["parameters"]:
        try:
            definitions.append(ParameterDef(str(name), float(lower), float(upper)))
        except (TypeError, ValueError) as e:
            raise ProblemFileError(f"Paramètre '{name}': {e}") from e
    try:
        ParameterSpace(definitions)
    except InvalidParameterError as e:
        raise ProblemFileError(str(e)) from e
    return definitions


def _uniform_parameters(names, lower: float, upper: float) -> List[ParameterDef]:
    try:
        return [ParameterDef(name, lower, upper) for name in names]
    except InvalidParameterError as e:
        raise ProblemFileError(str(e)) from e


def _external_spec(raw: Dict[str, Any], base_dir: Path) -> ExternalModelSpec:
    external, cost = raw["external"], raw["cost"]
    unknown = (set(external) - set(EXTERNAL_KEYS)) | (set(cost) - set(COST_KEYS))
    if unknown:
        raise ProblemFileError(f"Clés inconnues: {', '.join(sorted(unknown))}")
    if not external.get("command"):
        raise ProblemFileError("external.command est obligatoire")
    reference = external.get("reference")
    try:
        cost_spec = CostSpec(
            kind=cost.get("kind", "value"),
            columns=parse_columns(cost.get("columns", [])),
            command=cost.get("command"),
            value_column=cost.get("value_column", "value"),
            skip_until=_cast(cost, "skip_until", float),
        )
        return ExternalModelSpec(
            command_template=external["command"],
            cost=cost_spec,
            working_dir=str(base_dir / external.get("working_dir", ".")),
            output_mode=external.get("output_mode", "stdout-csv"),
            output_path=external.get("output_path"),
            timeout=_cast(external, "timeout", float),
            reference=str(base_dir / reference) if reference else None,
            params_file=parse_bool(external.get("params_file", False)),
        )
    except ExternalModelError as e:
        raise ProblemFileError(str(e)) from e


def build_problem(
    raw: Dict[str, Any], base_dir: Path, source: Optional[Path] = None
) -> ProblemFile:
    """
    Valide la structure lue et construit le ProblemFile

    Raises:
        ProblemFileError: méthode inconnue, objectif incomplet, paramètres
            invalides
    """
    method = str(raw.get("method", "pso")).strip()
    try:
        get_options_class(method)
    except UnknownMethodError as e:
        raise ProblemFileError(str(e)) from e

    kind = raw.get("objective")
    if kind is None:
        if raw["external"]:
            kind = "external"
        elif "target" in raw:
            kind = "period-tuning"
        else:
            kind = "benchmark"
    if kind not in OBJECTIVE_KINDS:
        raise ProblemFileError(
            f"Objectif inconnu '{kind}' (valides: {', '.join(OBJECTIVE_KINDS)})"
        )

    parameters = _parameters(raw)
    problem = ProblemFile(
        objective=kind,
        parameters=parameters,
        method=method,
        options=dict(raw["options"]),
        seed=_cast(raw, "seed", int, 0),
        tolerance=_cast(raw, "tolerance", float),
        max_evals=_cast(raw, "max_evals", int),
        source=source,
    )

    if kind == "benchmark":
        problem.benchmark = str(raw.get("benchmark", "")).strip()
        if not parameters:
            lower, upper = BENCHMARK_BOUNDS
            dimension = _cast(raw, "dimension", int, 2)
            problem.parameters = _uniform_parameters(
                [f"x{i}" for i in range(1, dimension + 1)],
                _cast(raw, "lower", float, lower),
                _cast(raw, "upper", float, upper),
            )
        try:
            BenchmarkFunction(problem.benchmark, problem.dimension)
        except KeyError as e:
            raise ProblemFileError(str(e.args[0])) from e
        except DimensionMismatchError as e:
            raise ProblemFileError(str(e)) from e
    elif kind == "period-tuning":
        problem.target = _cast(raw, "target", float)
        if problem.target is None or problem.target <= 0:
            raise ProblemFileError("Le réglage de période demande target > 0")
        if parameters:
            raise ProblemFileError(
                "Les paramètres du réglage de période sont fixés (x1..x4); "
                "utiliser lower et upper"
            )
        lower, upper = PERIOD_TUNING_BOUNDS
        problem.parameters = _uniform_parameters(
            PERIOD_TUNING_NAMES,
            _cast(raw, "lower", float, lower),
            _cast(raw, "upper", float, upper),
        )
    else:
        if not parameters:
            raise ProblemFileError("Un modèle externe demande au moins un 'param'")
        problem.external = _external_spec(raw, base_dir)

    if problem.max_evals is not None and problem.max_evals < 1:
        raise ProblemFileError("max_evals doit être >= 1")
    if problem.tolerance is not None and problem.tolerance < 0:
        raise ProblemFileError("tolerance doit être >= 0")
    return problem


def load_problem(path) -> ProblemFile:
    """
    Lit un fichier de problème, clé-valeur ou JSON

    Raises:
        ProblemFileError: fichier absent, illisible ou invalide
    """
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as e:
        raise ProblemFileError(f"Lecture impossible de {path}: {e}") from e
    if path.suffix == ".json" or text.lstrip().startswith("{"):
        raw = parse_json(text)
    else:
        raw = parse_key_value(text)
    return build_problem(raw, path.resolve().parent, source=path)
