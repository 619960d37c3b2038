"""Kernels de Fourier e suas transformadas populacionais."""
