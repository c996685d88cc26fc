"""Modèle factice en échec"""

import sys

if __name__ == "__main__":
    sys.stderr.write("solveur divergent\n")
    sys.exit(3)
