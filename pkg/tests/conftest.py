import sys
from pathlib import Path

# make tests/ importable as a plain directory (oracles, util)
sys.path.insert(0, str(Path(__file__).parent))
