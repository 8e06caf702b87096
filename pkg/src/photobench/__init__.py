"""Benchmarking and algorithm-discovery workbench for multilayer photonic
structure optimization: transfer-matrix physics, benchmark objectives,
anytime-performance metrics, baseline optimizers, a sandboxed candidate
protocol, and an LLM-driven discovery loop."""

__version__ = "0.1.0"
