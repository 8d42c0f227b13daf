# hybridq/__init__.py
"""Simulation toolkit for a parametrically driven spin-ensemble/cavity system."""

__version__ = "0.1.0"
