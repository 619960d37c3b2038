"""Geradores do modelo: covariâncias, sinais e amostras."""
