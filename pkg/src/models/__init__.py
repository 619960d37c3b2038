"""Modelos de dados do pacote."""
