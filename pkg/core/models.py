from datetime import datetime

from mongoengine import (
    BooleanField,
    DateTimeField,
    DictField,
    Document,
    EmbeddedDocument,
    EmbeddedDocumentField,
    FloatField,
    IntField,
    ListField,
    StringField,
)


class VisitedPoint(EmbeddedDocument):
    """
    Point visité par une exécution (une ligne de visited_space.csv)
    """

    pset = IntField(required=True, min_value=1)
    iteration = IntField(default=0)
    values = ListField(FloatField())
    fitness = FloatField()
    note = StringField()  # Raison de l'échec d'évaluation, le cas échéant


class OptimizationRun(Document):
    """
    Archive d'une exécution d'optimisation
    """

    meta = {
        "collection": "optimization_runs",
        "indexes": ["method", "created_at", "converged"],
    }

    method = StringField(required=True, max_length=20)
    problem = StringField(max_length=500)
    parameter_names = ListField(StringField())
    options = DictField()
    seed = IntField()
    best_values = ListField(FloatField())
    best_fitness = FloatField()
    total_evals = IntField(default=0)
    converged = BooleanField(default=False)
    wall_time = FloatField(default=0.0)
    iteration_bests = ListField(EmbeddedDocumentField(VisitedPoint))
    visited_space = ListField(EmbeddedDocumentField(VisitedPoint))
    created_at = DateTimeField(default=datetime.utcnow)
    updated_at = DateTimeField(default=datetime.utcnow)

    def save(self, *args, **kwargs):
        self.updated_at = datetime.utcnow()
        return super().save(*args, **kwargs)

    def __str__(self):
        return f"{self.method} - {self.best_fitness} ({self.total_evals} évaluations)"

    @classmethod
    def from_estimates(cls, estimates, problem: str = "", seed=None):
        """Construit le document (non sauvegardé) à partir d'un Estimates"""

        def point(candidate):
            return VisitedPoint(
                pset=candidate.pset,
                iteration=candidate.iteration,
                values=[float(v) for v in candidate.values],
                fitness=candidate.fitness,
                note=candidate.note,
            )

        return cls(
            method=estimates.method,
            problem=problem,
            parameter_names=list(estimates.parameter_names),
            options=estimates.options,
            seed=seed,
            best_values=[float(v) for v in estimates.best.values],
            best_fitness=estimates.best.fitness,
            total_evals=estimates.stats.total_evals,
            converged=estimates.stats.converged,
            wall_time=estimates.stats.wall_time,
            iteration_bests=[point(c) for c in estimates.iteration_bests],
            visited_space=[point(c) for c in estimates.visited_space],
        )
