import sys
from pathlib import Path

# make the oracle/generator helper modules importable from any test
sys.path.insert(0, str(Path(__file__).parent))
