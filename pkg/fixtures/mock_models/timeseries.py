"""
Modèle factice : y(t) = A·sin(t) sur t = 0..N-1, écrit sur la sortie
standard ou dans un fichier

Usage: timeseries.py A N [CHEMIN]
"""

import math
import sys

if __name__ == "__main__":
    amplitude, n = float(sys.argv[1]), int(sys.argv[2])
    lines = ["t,y"] + [f"{t},{amplitude * math.sin(t)!r}" for t in range(n)]
    text = "\n".join(lines) + "\n"
    if len(sys.argv) > 3:
        with open(sys.argv[3], "w") as handle:
            handle.write(text)
    else:
        sys.stdout.write(text)
