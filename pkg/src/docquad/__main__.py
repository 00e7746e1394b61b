"""Allow ``python -m docquad``."""

from .cli import main

if __name__ == "__main__":
    main()
