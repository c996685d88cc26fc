"""Correcteur factice : lit le CSV du modèle sur l'entrée standard et affiche 0.5"""

import sys

if __name__ == "__main__":
    sys.stdin.read()
    print("score")
    print(0.5)
