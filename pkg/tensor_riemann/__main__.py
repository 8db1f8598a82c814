"""
Main entry point for running tensor_riemann as a module.
"""

from .cli import main

if __name__ == "__main__":
    main()
