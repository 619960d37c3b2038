"""Testes de esparsidade dos cenários independente e geral."""
