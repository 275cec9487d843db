"""Lexical query modeling for session search over a Dirichlet LM engine."""

__version__ = "0.1.0"
