"""Modèle factice qui ne termine jamais à temps"""

import time

if __name__ == "__main__":
    time.sleep(60)
    print("value\n0")
