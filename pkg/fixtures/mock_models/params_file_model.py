"""
Modèle factice lisant ses paramètres dans le fichier désigné par
METAESTIM_PARAMS_FILE; affiche la somme des carrés et l'indice d'évaluation
"""

import csv
import os

if __name__ == "__main__":
    with open(os.environ["METAESTIM_PARAMS_FILE"], newline="") as handle:
        row = next(csv.DictReader(handle))
    print("value,eval_id")
    total = sum(float(value) ** 2 for value in row.values())
    print(f"{total!r},{os.environ['METAESTIM_EVAL_ID']}")
