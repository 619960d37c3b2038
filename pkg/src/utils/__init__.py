"""Utils do pacote."""
