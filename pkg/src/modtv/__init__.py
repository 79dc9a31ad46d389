"""Numerics for b-6j symbols and state integrals of the modular double."""
