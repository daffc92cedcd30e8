"""
Command-line entrypoint for the quasi-power lab.
"""
import sys
from pathlib import Path

# Add the 'lab' directory to sys.path so that absolute 'quasipower.*' imports work
lab_dir = Path(__file__).parent.resolve()
if str(lab_dir) not in sys.path:
    sys.path.append(str(lab_dir))

from quasipower.main import main

__all__ = ["main"]

if __name__ == "__main__":
    sys.exit(main())
