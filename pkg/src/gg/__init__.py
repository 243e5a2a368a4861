"""Cross-ISA assembly transpilation toolkit.

Builds paired-assembly corpora from C sources, obtains candidate
translations from pluggable guesser backends, and verifies candidates by
building, testing, coverage-measuring, triaging and benchmarking them.
"""

__version__ = "0.1.0"
