"""Services do pacote."""
