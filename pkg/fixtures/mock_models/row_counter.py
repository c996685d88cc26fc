"""Correcteur factice : affiche le nombre de lignes lues sur l'entrée standard"""

import sys

if __name__ == "__main__":
    print(len(sys.stdin.read().strip().splitlines()) - 1)
