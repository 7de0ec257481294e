"""Circular-Rydberg blockade CZ gate: atomic inputs, error models, dynamics and tomography."""

__version__ = "1.0.0"
