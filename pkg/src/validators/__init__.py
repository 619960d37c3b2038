"""Validadores do pacote: condições de aplicabilidade e Propriedade S."""
