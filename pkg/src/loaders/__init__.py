"""Loaders do pacote."""
