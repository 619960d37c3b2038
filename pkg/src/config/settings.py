"""
Configurações dos testes de esparsidade.

Caminhos do projeto, tolerâncias numéricas, parâmetros de Monte Carlo,
formato de exportação e valores analíticos padrão das constantes de projeto.
"""

from pathlib import Path

# ═══════════════════════════════════════════════════════════════════════════
# CAMINHOS DO PROJETO
# ═══════════════════════════════════════════════════════════════════════════

BASE_DIR = Path(__file__).resolve().parent.parent.parent
CACHE_DIR = BASE_DIR / ".cache_calibracao"

# ═══════════════════════════════════════════════════════════════════════════
# MODELO
# ═══════════════════════════════════════════════════════════════════════════

SPECTRUM_TOL = 1e-9  # folga no teste [1/eta, eta]
SYMMETRY_TOL = 1e-12

# Acima disso o espectro de ar1/equicorrelation é verificado pelas fórmulas fechadas
NUMERIC_SPECTRUM_MAX_P = 2000

# ═══════════════════════════════════════════════════════════════════════════
# SOLVERS
# ═══════════════════════════════════════════════════════════════════════════

ZERO_COLUMN_TOL = 1e-12
RANK_TOL = 1e-10

SQRT_LASSO_TOL = 1e-10  # queda relativa do objetivo
SQRT_LASSO_MAX_ITER = 500

MCP_TOL = 1e-9  # variação máxima relativa por coordenada
MCP_MAX_SWEEPS = 2000

# ═══════════════════════════════════════════════════════════════════════════
# QUADRATURA
# ═══════════════════════════════════════════════════════════════════════════

QUAD_ABS_TOL = 1e-10
QUAD_MAX_PANELS = 2 ** 14
SERIES_CUTOFF = 1e-4  # abaixo disso g_pop usa expansão em série

# ═══════════════════════════════════════════════════════════════════════════
# MONTE CARLO
# ═══════════════════════════════════════════════════════════════════════════

DEFAULT_SEED = 20260101
DEFAULT_TRIALS = 200
CALIBRATION_TRIALS = 2000
BISECTION_STEPS = 12
WALD_Z = 1.96
NULL_SPIKE_FACTOR = 10.0  # spikes de 10*sigma*sqrt(log p / n) nos nulos
REGIME_VARSIGMA = 0.05

# Calibração da seleção de suporte
SELECTION_TUNING_GRID = (0.25, 0.35, 0.5, 0.7, 1.0, 1.4, 2.0, 2.8, 4.0, 5.6, 8.0)
SELECTION_SIZE_ALPHA = 0.1  # fração tolerada de nulos theta* = 0 com |S| > k0
PROPERTY_S_COVERAGE = 0.9

# ═══════════════════════════════════════════════════════════════════════════
# CONFIGURAÇÕES DE EXPORTAÇÃO
# ═══════════════════════════════════════════════════════════════════════════

EXPORT_ENCODING = 'utf-8'
EXPORT_SEP = ','
FLOAT_FORMAT = '%.10g'

SWEEP_COLUMNS = [
    'n', 'p', 'k0', 'delta', 'rho', 'test',
    'type1', 'type2', 'risk', 'half_width',
    'rate_ref', 'regime', 'seed', 'error',
]

# ═══════════════════════════════════════════════════════════════════════════
# CONSTANTES DE PROJETO (valores analíticos padrão)
# ═══════════════════════════════════════════════════════════════════════════

DEFAULT_CONSTANTS = {
    'c_t': 3.5,
    'c_chi': 2.0,
    'c_u_eta': 3.0,
    'c_SL_eta': 1.0,
    'c_MCP_eta': 3.0,
    'c_MCP_prime_eta': 3.0,  # kappa, precisa ser > 1/2
    'c_star_a1': 1.0,
    'c_star_a3': 1.0,
    'c_ith_eta': 1.0,
    'condition_A_c': 1.0,
    'condition_B_c': 1.0,
    'condition_B_p_min': 2.0,
    'c_eta_regime': 1.0,
    'sl_lambda_scale': 1.1,
    'a2': 2.0,
}