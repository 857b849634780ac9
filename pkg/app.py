"""
Punto de entrada de la línea de comandos.

    python app.py infer --counts counts.csv --coords coords.csv --radius 15 --out model/
    python app.py selfcheck --out selfcheck.json
"""
import sys

from spatial_couplings.controllers.cli_controller import run

if __name__ == '__main__':
    sys.exit(run(sys.argv[1:]))
