"""
Modèle factice : affiche la fonction de Rosenbrock en deux dimensions
au format CSV `value`

Usage: rosenbrock2.py X1 X2
"""

import sys


def rosenbrock2(x1, x2):
    return (1 - x1) ** 2 + 100 * (x2 - x1**2) ** 2


if __name__ == "__main__":
    x1, x2 = float(sys.argv[1]), float(sys.argv[2])
    print("value")
    print(repr(rosenbrock2(x1, x2)))
