"""
Entry point for ``python -m lawmine``
"""

from lawmine.cli import main

if __name__ == "__main__":
    main()
