# main.py
import sys

from hybridq.cli import main

if __name__ == "__main__":
    sys.exit(main())
