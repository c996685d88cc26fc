"""Modèle factice dont la sortie n'est pas un CSV exploitable"""

if __name__ == "__main__":
    print("value\nnot-a-number")
