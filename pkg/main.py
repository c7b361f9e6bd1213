import sys
from pathlib import Path

# Add the root directory to Python path BEFORE imports
root_dir = Path(__file__).parent
sys.path.insert(0, str(root_dir))

from cli.app import run

if __name__ == "__main__":
    sys.exit(run(sys.argv[1:]))
