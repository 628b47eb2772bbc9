"""Main entry point for hxpathd."""
import sys

from .cli import main as run


def main():
    """Run the command line and exit with its status."""
    sys.exit(run())


if __name__ == "__main__":
    main()
