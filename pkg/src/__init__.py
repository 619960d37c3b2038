"""Pacote principal dos testes de esparsidade em regressão linear de alta dimensão."""

__version__ = "1.0.0"
