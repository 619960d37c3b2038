"""Estimadores consumidos pelos testes: square-root Lasso, MCP e projeções."""
