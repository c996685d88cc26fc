"""
Adaptateur de modèles externes : lance un programme de simulation par
paramètre évalué et transforme sa sortie CSV en coût
"""

import io
import logging
import os
import shlex
import signal
import string
import subprocess
import sys
import tempfile
from dataclasses import dataclass, field
from pathlib import Path
from typing import Dict, List, Optional, Tuple

import pandas as pd

from core.conf import metaestim_setting
from core.exceptions import (
    ExternalModelError,
    ModelExecutionError,
    ModelOutputError,
    ModelTimeoutError,
)
from core.parameters import ParameterSpace
from core.services import ObjectiveFunction
from dynamics.services import TIME_COLUMN, TimeSeries, dtw_distance, nrmsd, rmsd

logger = logging.getLogger(__name__)

OUTPUT_MODES = ("stdout-csv", "file-csv")
COLUMN_METRICS = {
    "rmsd-columns": rmsd,
    "nrmsd-columns": nrmsd,
    "dtw-columns": dtw_distance,
}
COST_KINDS = tuple(COLUMN_METRICS) + ("command", "value")
# Champs remplis par l'adaptateur, jamais par les paramètres
RESERVED_FIELDS = ("workdir", "params_file", "python", "model_csv", "reference_csv")
PARAMS_FILENAME = "params.csv"
MODEL_OUTPUT_FILENAME = "model_output.csv"
STDERR_TAIL = 2000


def template_fields(template: str) -> List[str]:
    """Noms des champs `{nom}` d'un gabarit de commande"""
    try:
        return [
            name
            for _, name, _, _ in string.Formatter().parse(template)
            if name is not None
        ]
    except ValueError as e:
        raise ExternalModelError(f"Gabarit de commande invalide: {e}") from e


@dataclass
class CostSpec:
    """
    Calcul du coût à partir de la sortie du modèle
    """

    kind: str
    columns: List[Tuple[str, str]] = field(default_factory=list)
    command: Optional[str] = None
    value_column: Optional[str] = None
    skip_until: Optional[float] = None

    def __post_init__(self):
        if self.kind not in COST_KINDS:
            raise ExternalModelError(
                f"Type de coût inconnu '{self.kind}' "
                f"(valides: {', '.join(COST_KINDS)})"
            )
        self.columns = [tuple(pair) for pair in self.columns]
        if self.kind in COLUMN_METRICS and not self.columns:
            raise ExternalModelError(f"Le coût {self.kind} demande des colonnes")
        if self.kind == "command" and not self.command:
            raise ExternalModelError("Le coût command demande une commande")
        if self.kind == "value" and not self.value_column:
            raise ExternalModelError("Le coût value demande value_column")

    @property
    def needs_reference(self) -> bool:
        return self.kind in COLUMN_METRICS


@dataclass
class ExternalModelSpec:
    """
    Description d'un modèle externe

    Les champs `{nom}` du gabarit reçoivent les valeurs des paramètres;
    `{workdir}`, `{params_file}` et `{python}` sont fournis par l'adaptateur.
    """

    command_template: str
    cost: CostSpec
    working_dir: str = "."
    output_mode: str = "stdout-csv"
    output_path: Optional[str] = None
    timeout: Optional[float] = None
    reference: Optional[str] = None
    params_file: bool = False

    def __post_init__(self):
        if self.timeout is None:
            self.timeout = metaestim_setting("EXTERNAL_TIMEOUT")
        if self.timeout <= 0:
            raise ExternalModelError("Le délai d'exécution doit être > 0")
        if self.output_mode not in OUTPUT_MODES:
            raise ExternalModelError(
                f"Mode de sortie inconnu '{self.output_mode}' "
                f"(valides: {', '.join(OUTPUT_MODES)})"
            )
        if self.output_mode == "file-csv" and not self.output_path:
            raise ExternalModelError("Le mode file-csv demande output_path")
        if self.cost.needs_reference and not self.reference:
            raise ExternalModelError(
                f"Le coût {self.cost.kind} demande une référence"
            )
        template_fields(self.command_template)

    def validate(self, space: ParameterSpace) -> None:
        """
        Raises:
            ExternalModelError: champ inconnu, paramètre absent ou présent
                plusieurs fois dans le gabarit
        """
        fields_used = template_fields(self.command_template)
        unknown = sorted(
            set(fields_used) - set(space.names) - set(RESERVED_FIELDS)
        )
        if unknown:
            raise ExternalModelError(
                f"Champs inconnus dans la commande: {', '.join(unknown)}"
            )
        for name in space.names:
            count = fields_used.count(name)
            if count > 1:
                raise ExternalModelError(
                    f"Le paramètre '{name}' apparaît {count} fois"
                )
            if count == 0 and not self.params_file:
                raise ExternalModelError(
                    f"Le paramètre '{name}' n'est ni dans la commande ni dans "
                    f"{PARAMS_FILENAME}"
                )


def _kill_group(process: subprocess.Popen) -> None:
    try:
        os.killpg(process.pid, signal.SIGKILL)
    except ProcessLookupError:
        pass


def run_command(
    command: str,
    cwd,
    timeout: float,
    env: Optional[Dict[str, str]] = None,
    stdin: Optional[str] = None,
) -> str:
    """
    Lance une commande dans son propre groupe de processus

    Returns:
        La sortie standard

    Raises:
        ModelTimeoutError: délai dépassé (le groupe est tué puis récupéré)
        ModelExecutionError: lancement impossible ou code de sortie non nul
    """
    try:
        process = subprocess.Popen(
            shlex.split(command),
            cwd=cwd,
            env=env,
            stdin=subprocess.PIPE if stdin is not None else subprocess.DEVNULL,
            stdout=subprocess.PIPE,
            stderr=subprocess.PIPE,
            text=True,
            start_new_session=True,
        )
    except OSError as e:
        raise ModelExecutionError(f"Lancement impossible de '{command}': {e}") from e

    try:
        stdout, stderr = process.communicate(input=stdin, timeout=timeout)
    except subprocess.TimeoutExpired:
        _kill_group(process)
        process.communicate()
        logger.warning("Délai de %gs dépassé: %s", timeout, command)
        raise ModelTimeoutError(f"Délai de {timeout}s dépassé") from None

    if process.returncode != 0:
        logger.warning(
            "Code de sortie %d pour '%s': %s",
            process.returncode,
            command,
            stderr[-STDERR_TAIL:],
        )
        raise ModelExecutionError(
            f"Code de sortie {process.returncode}: {stderr.strip()[-200:]}"
        )
    return stdout


def _format_values(params: Dict[str, float]) -> Dict[str, str]:
    # repr donne l'écriture décimale la plus courte qui relit le même flottant
    return {name: repr(float(value)) for name, value in params.items()}


def _parse_csv(source, origin: str) -> TimeSeries:
    try:
        return TimeSeries.read_csv(source)
    except (pd.errors.ParserError, pd.errors.EmptyDataError, ValueError) as e:
        raise ModelOutputError(f"CSV illisible ({origin}): {e}") from e


def run_model(
    spec: ExternalModelSpec,
    params: Dict[str, float],
    eval_id: Optional[int] = None,
    workdir=None,
) -> TimeSeries:
    """
    Lance le modèle pour un jeu de paramètres et lit sa sortie

    Args:
        spec: Description du modèle
        params: Valeur de chaque paramètre
        eval_id: Indice pset, exporté dans METAESTIM_EVAL_ID
        workdir: Répertoire de travail de l'évaluation (temporaire si absent)

    Raises:
        ExternalModelError: paramètre manquant pour un champ du gabarit,
            avant tout lancement
        ModelTimeoutError, ModelExecutionError, ModelOutputError
    """
    if workdir is None:
        with tempfile.TemporaryDirectory(prefix="metaestim-") as tmp:
            return run_model(spec, params, eval_id, tmp)

    missing = [
        name
        for name in template_fields(spec.command_template)
        if name not in RESERVED_FIELDS and name not in params
    ]
    if missing:
        raise ExternalModelError(f"Paramètres manquants: {', '.join(missing)}")

    workdir = Path(workdir)
    params_path = workdir / PARAMS_FILENAME
    values = _format_values(params)
    env = dict(os.environ)
    if eval_id is not None:
        env["METAESTIM_EVAL_ID"] = str(eval_id)
    if spec.params_file:
        pd.DataFrame([params]).to_csv(params_path, index=False, lineterminator="\n")
        env["METAESTIM_PARAMS_FILE"] = str(params_path)

    command = spec.command_template.format(
        **values,
        workdir=shlex.quote(str(workdir)),
        params_file=shlex.quote(str(params_path)),
        python=shlex.quote(sys.executable),
    )
    stdout = run_command(command, spec.working_dir, spec.timeout, env)

    if spec.output_mode == "stdout-csv":
        return _parse_csv(io.StringIO(stdout), "sortie standard")
    output = Path(spec.output_path.format(workdir=workdir))
    if not output.is_absolute():
        output = Path(spec.working_dir) / output
    if not output.exists():
        raise ModelOutputError(f"Fichier de sortie absent: {output}")
    return _parse_csv(output, str(output))


def _trim(frame: pd.DataFrame, skip_until: Optional[float]) -> pd.DataFrame:
    if skip_until is None or TIME_COLUMN not in frame.columns:
        return frame.reset_index(drop=True)
    return frame[frame[TIME_COLUMN] >= skip_until].reset_index(drop=True)


def column_cost(
    cost: CostSpec, output: TimeSeries, reference: TimeSeries
) -> float:
    """
    Somme, sur les couples de colonnes, de la métrique entre sortie et
    référence alignées par indice de ligne
    """
    model_frame = _trim(output.to_frame(), cost.skip_until)
    reference_frame = _trim(reference.to_frame(), cost.skip_until)
    metric = COLUMN_METRICS[cost.kind]
    total = 0.0
    for model_column, reference_column in cost.columns:
        if model_column not in model_frame.columns:
            raise ModelOutputError(f"Colonne absente de la sortie: {model_column}")
        if reference_column not in reference_frame.columns:
            raise ExternalModelError(
                f"Colonne absente de la référence: {reference_column}"
            )
        if len(model_frame) != len(reference_frame):
            logger.warning(
                "Longueurs différentes (%d modèle, %d référence): troncature",
                len(model_frame),
                len(reference_frame),
            )
        joined = pd.concat(
            [
                model_frame[model_column].rename("model"),
                reference_frame[reference_column].rename("reference"),
            ],
            axis=1,
            join="inner",
        ).dropna()
        if joined.empty:
            raise ModelOutputError("Aucune ligne commune entre sortie et référence")
        total += metric(joined["model"].to_numpy(), joined["reference"].to_numpy())
    return total


def command_cost(
    cost: CostSpec, output: TimeSeries, reference_path, workdir, timeout: float
) -> float:
    """
    Lance le correcteur externe. Seule la sortie du modèle lui est passée
    sur l'entrée standard, ainsi que dans `{model_csv}`; la référence
    n'arrive que par le chemin `{reference_csv}`.
    """
    model_csv = Path(workdir) / MODEL_OUTPUT_FILENAME
    output.to_csv(model_csv)
    command = cost.command.format(
        model_csv=shlex.quote(str(model_csv)),
        reference_csv=shlex.quote(str(reference_path or "")),
        workdir=shlex.quote(str(workdir)),
        python=shlex.quote(sys.executable),
    )
    stdout = run_command(
        command, workdir, timeout, stdin=model_csv.read_text(encoding="utf-8")
    )
    tokens = stdout.split()
    try:
        return float(tokens[-1])
    except (IndexError, ValueError):
        raise ModelOutputError(
            f"Sortie du correcteur non numérique: {stdout[:200]!r}"
        ) from None


class ExternalModelFunction(ObjectiveFunction):
    """
    Fonction objectif évaluée par un programme externe
    """

    def __init__(self, spec: ExternalModelSpec, **kwargs):
        super().__init__(**kwargs)
        self.spec = spec
        self._reference: Optional[TimeSeries] = None
        if spec.cost.needs_reference:
            reference_path = Path(spec.reference)
            if not reference_path.exists():
                raise ExternalModelError(f"Référence introuvable: {reference_path}")
            self._reference = TimeSeries.read_csv(reference_path)
            available = set(self._reference.names) | {TIME_COLUMN}
            missing = [
                reference_column
                for _, reference_column in spec.cost.columns
                if reference_column not in available
            ]
            if missing:
                raise ExternalModelError(
                    f"Colonne(s) absente(s) de la référence {reference_path}: "
                    + ", ".join(missing)
                )

    def evaluate_one(self, values, pset: int) -> float:
        params = self.space.as_dict(values)
        with tempfile.TemporaryDirectory(prefix="metaestim-") as workdir:
            output = run_model(self.spec, params, eval_id=pset, workdir=workdir)
            self._raw_data = output
            cost = self.spec.cost
            if cost.kind == "value":
                if cost.value_column not in output.channels:
                    raise ModelOutputError(
                        f"Colonne absente de la sortie: {cost.value_column}"
                    )
                if len(output) == 0:
                    raise ModelOutputError("Sortie vide")
                return float(output[cost.value_column][-1])
            if cost.kind == "command":
                return command_cost(
                    cost, output, self.spec.reference, workdir, self.spec.timeout
                )
            return column_cost(cost, output, self._reference)


def make_objective(
    spec: ExternalModelSpec, space: ParameterSpace, **kwargs
) -> ExternalModelFunction:
    """
    Fonction objectif sur `space` dont chaque évaluation lance le modèle

    Raises:
        ExternalModelError: description incompatible avec l'espace
    """
    spec.validate(space)
    objective = ExternalModelFunction(spec, **kwargs)
    for definition in space:
        objective.space.add_parameter(definition)
    return objective
