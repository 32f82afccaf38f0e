"""Adic dynamics, Gibbs measures and cocycle relations on shifts of finite type."""

__version__ = "0.1.0"
