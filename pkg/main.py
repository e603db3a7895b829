"""
Compatibility shim: lets ``python main.py <command> ...`` run the siegel-lab CLI
from a source checkout. Installed environments should use the ``siegel-lab``
console script instead.
"""

import sys

try:
    from siegel_lab.cli import main
except ImportError as e:
    print(f"Error: Failed to import siegel_lab.cli: {e}", file=sys.stderr)
    raise SystemExit(1) from e


if __name__ == "__main__":
    raise SystemExit(main())
