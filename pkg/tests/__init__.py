"""Test-suite for graphtc; makes the ``src`` layout importable without an install."""
from pathlib import Path
import sys

SOURCE_PATH = Path(__file__).resolve().parent.parent / 'src'
if str(SOURCE_PATH) not in sys.path:
    sys.path.insert(0, str(SOURCE_PATH))
