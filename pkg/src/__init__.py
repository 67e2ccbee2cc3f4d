"""Emitter-based photonic graph-state simulator."""
