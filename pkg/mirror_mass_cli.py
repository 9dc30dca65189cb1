# mirror_mass_cli.py

from __future__ import annotations

import sys

from interface.cli import main

if __name__ == "__main__":
    sys.exit(main())
