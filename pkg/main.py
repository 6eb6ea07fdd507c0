import sys
from pathlib import Path

# Source checkouts run without an install; `core` and `interface` resolve from here.
sys.path.insert(0, str(Path(__file__).resolve().parent))

from interface.cli import main

if __name__ == "__main__":
    sys.exit(main())
