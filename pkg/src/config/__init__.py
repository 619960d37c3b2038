"""Configurações do pacote config."""
