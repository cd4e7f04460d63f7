"""lanebench: closed-loop lane-world benchmark for question-driven driving policies."""

__version__ = "0.1.0"
