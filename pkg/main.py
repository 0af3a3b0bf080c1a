"""
gpminer Launcher

Runs the command-line driver from a source checkout without installing.
"""

import sys
from pathlib import Path

# Add src to path for imports
sys.path.insert(0, str(Path(__file__).parent / "src"))

from gpminer.cli import main


if __name__ == "__main__":
    main()
