import sys

from src.handlers.commands import main

if __name__ == "__main__":
    sys.exit(main())
