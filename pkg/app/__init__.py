"""Nonlocal Cahn-Hilliard-Brinkman solver and optimal-control toolkit."""

__version__ = "0.1.0"
