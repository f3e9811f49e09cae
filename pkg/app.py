"""
Command-line launcher for the quantum trajectory toolkit.

    python app.py trajectory --potential linear --abc 2,1,0.5 --x-grid 0:1:101
    python app.py sweep --potential step --abc 1,1,0 --x 1 --observable log_Wx --hbar-grid 1e-1:1e-4
    python app.py average --abc 2,1,0 --x 0.3 --format json
    python app.py residual-audit --samples 200 --seed 0
"""

import sys

from src.quantum_hj.main import main

if __name__ == "__main__":
    sys.exit(main())
