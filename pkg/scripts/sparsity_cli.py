"""
Interface de linha de comando dos testes de esparsidade.

Subcomandos: generate, run-test, calibrate, risk, search, rates, sweep.
JSON e CSV vão para stdout (ou --out); logs e mensagens vão para stderr.

Códigos de saída: 0 sucesso, 2 configuração inválida, 3 falha numérica.
"""

import argparse
import json
import logging
import sys
from pathlib import Path
from typing import List, Optional

import numpy as np
import pandas as pd

# Adicionar src ao path
sys.path.insert(0, str(Path(__file__).parent.parent))

from src.config import settings
from src.generators.presets import alternative_panel, null_panel
from src.generators.sampler import generate_sample
from src.generators.signal import d2_to_sparse
from src.hypothesis.registry import TEST_NAMES, TestParams, make_runner, run_test, setting_of
from src.loaders.dataset_io import read_dataset, write_dataset
from src.loaders.file_exporter import FileExporter
from src.models.design_constants import DesignConstants
from src.models.exceptions import ConfigurationError, NumericalError
from src.models.results import RateQuery
from src.models.scenario import Scenario
from src.services.calibration_service import CalibrationService
from src.services.rates import rate_reference
from src.services.risk_service import estimate_risk
from src.services.search_service import separation_search
from src.services.sweep_service import SweepConfig, sweep
from src.utils.logging_config import setup_logging


logger = logging.getLogger("sparsity_cli")

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_NUMERICAL = 3


def _read_json(path: str) -> dict:
    with open(path, "r", encoding="utf-8") as f:
        return json.load(f)


def _emit_json(payload: dict, out: Optional[str]) -> int:
    if out:
        if not FileExporter().export_json(payload, out):
            return EXIT_CONFIG
        print(f"✅ Resultado salvo em {out}", file=sys.stderr)
    else:
        print(json.dumps(payload, indent=2))
    return EXIT_OK


def _constants(args) -> DesignConstants:
    """Constantes do arquivo --constants conforme --mode."""
    constants = DesignConstants.load(args.constants) if args.constants else DesignConstants()
    if args.mode == "calibrated":
        if not constants.calibrated_names():
            raise ConfigurationError("--mode calibrated exige --constants com entradas calibradas")
        return constants
    return constants.analytic_only()


def _test_params(args, k0: int) -> TestParams:
    data = _read_json(args.params) if getattr(args, 'params', None) else {}
    data.setdefault('k0', k0)
    for key in ('alpha', 'delta', 'eta'):
        value = getattr(args, key, None)
        if value is not None:
            data[key] = value
    return TestParams.from_dict(data)


# ─────────────────────────────────────────────────────────────────────────────
# Subcomandos
# ─────────────────────────────────────────────────────────────────────────────

def cmd_generate(args) -> int:
    scenario = Scenario.from_dict(_read_json(args.scenario))
    sample = generate_sample(scenario, args.seed)
    write_dataset(sample, args.out)

    k0 = scenario.signal.k0
    logger.info(
        f"Dataset: ||theta*||_0 = {np.count_nonzero(sample.theta_star)}, "
        f"d2(theta*, B0[{k0}]) = {d2_to_sparse(sample.theta_star, k0):.6g}"
    )
    print(f"✅ Dataset gerado: {args.out} (n={sample.n}, p={sample.p})", file=sys.stderr)
    return EXIT_OK


def cmd_run_test(args) -> int:
    sample = read_dataset(args.data)
    params = _test_params(args, args.k0)
    scenario = Scenario(
        n=sample.n, p=sample.p,
        sigma=params.sigma if params.sigma is not None else 1.0,
        sigma_known=params.sigma is not None,
    )
    report = run_test(args.test, sample, scenario, params, _constants(args))
    return _emit_json(report.to_dict(), args.out)


def cmd_calibrate(args) -> int:
    constants = _constants(args)
    params = _test_params(args, args.k0)
    names = args.tests.split(',') if args.tests else []
    selectors = args.selectors.split(',') if args.selectors else []
    if not names and not selectors:
        raise ConfigurationError("calibrate exige --tests ou --selectors")
    service = CalibrationService(args.trials, args.seed, use_cache=not args.no_cache, show_progress=True)

    # o suporte selecionado alimenta phi^(th), então a seleção vem primeiro
    for selector in selectors:
        constants = service.calibrate_selection(selector, args.k0, args.n, args.p, params.eta, params.delta, constants)

    for setting in ("independent", "general"):
        group = [n for n in names if setting_of(n) == setting]
        if not group:
            continue
        nulls = null_panel(args.k0, args.n, args.p, sigma_known=setting == "independent")
        constants = service.calibrate_all(group, params, nulls, args.alpha, constants)

    if args.out:
        constants.save(args.out)
        print(f"✅ Constantes calibradas salvas em {args.out}", file=sys.stderr)
        return EXIT_OK
    print(json.dumps(constants.to_dict(), indent=2))
    return EXIT_OK


def _template(args) -> Scenario:
    return Scenario.from_dict(_read_json(args.scenario))


def cmd_risk(args) -> int:
    template = _template(args)
    signal = template.signal
    params = _test_params(args, signal.k0)
    nulls = null_panel(signal.k0, template.n, template.p, template.sigma,
                       template.sigma_known, template.covariance)
    if args.panel:
        alternatives = alternative_panel(signal.k0, signal.delta, signal.rho, template.n, template.p,
                                         template.sigma, template.sigma_known, template.covariance)
    else:
        alternatives = [template]

    runner = make_runner(args.test, params, _constants(args))
    estimate = estimate_risk(runner, nulls, alternatives, args.trials, args.seed, show_progress=True)
    return _emit_json(estimate.to_dict(), args.out)


def cmd_search(args) -> int:
    template = _template(args)
    params = _test_params(args, template.signal.k0)
    runner = make_runner(args.test, params, _constants(args))
    rho_hat = separation_search(runner, template, args.gamma, (args.rho_lo, args.rho_hi),
                                args.trials, args.seed, show_progress=True)
    return _emit_json({'test': args.test, 'gamma': args.gamma, 'rho_hat': rho_hat,
                       'trials': args.trials, 'seed': args.seed}, args.out)


def cmd_rates(args) -> int:
    result = rate_reference(RateQuery(args.setting, args.n, args.p, args.k0, args.Delta))
    return _emit_json(result, args.out)


def cmd_sweep(args) -> int:
    data = _read_json(args.config)
    data.setdefault('seed', args.seed)
    if args.trials is not None:
        data['trials'] = args.trials
    config = SweepConfig.from_dict(data)

    previous = None
    if args.resume and args.out and Path(args.out).exists():
        previous = pd.read_csv(args.out, keep_default_na=False, na_values=[''])
        previous['error'] = previous['error'].fillna('')

    df = sweep(config, _constants(args), resume_from=previous)
    text = FileExporter().export_sweep(df, args.out)
    if text is not None:
        sys.stdout.write(text)
    return EXIT_OK


# ─────────────────────────────────────────────────────────────────────────────
# Parser
# ─────────────────────────────────────────────────────────────────────────────

def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--seed", type=int, default=settings.DEFAULT_SEED, help="semente mestre (u64)")
    common.add_argument("--trials", type=int, default=None, help="ensaios de Monte Carlo")
    common.add_argument("--alpha", type=float, default=None)
    common.add_argument("--delta", type=float, default=None, help="nível delta dos estimadores")
    common.add_argument("--eta", type=float, default=None, help="limite da classe U(eta)")
    common.add_argument("--constants", default=None, help="arquivo JSON de DesignConstants")
    common.add_argument("--mode", choices=("analytic", "calibrated"), default="analytic")
    common.add_argument("--out", default=None, help="arquivo de saída (padrão: stdout)")
    common.add_argument("--no-cache", action="store_true", help="desliga o cache da calibração")
    common.add_argument("--log-level", default="WARNING")
    common.add_argument("--log-file", default=None)

    parser = argparse.ArgumentParser(prog="sparsity_cli", description="Testes de esparsidade em regressão linear")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("generate", parents=[common], help="cenário JSON + semente -> dataset SPTD")
    p.add_argument("--scenario", required=True)
    p.set_defaults(func=cmd_generate, out_required=True)

    p = sub.add_parser("run-test", parents=[common], help="executa um teste sobre um dataset")
    p.add_argument("--data", required=True)
    p.add_argument("--test", required=True, choices=TEST_NAMES)
    p.add_argument("--k0", type=int, default=0)
    p.add_argument("--params", default=None, help="JSON com k0, alpha, delta, eta, sigma, ...")
    p.set_defaults(func=cmd_run_test)

    p = sub.add_parser("calibrate", parents=[common], help="calibra constantes sob o painel nulo")
    p.add_argument("--tests", default=None, help="lista separada por vírgulas, ex.: t,chi,f")
    p.add_argument("--selectors", default=None, help="seletores a calibrar: mcp,iterative")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--p", type=int, required=True)
    p.add_argument("--k0", type=int, default=0)
    p.add_argument("--params", default=None)
    p.set_defaults(func=cmd_calibrate)

    p = sub.add_parser("risk", parents=[common], help="estima erros de tipo I e II")
    p.add_argument("--test", required=True, choices=TEST_NAMES)
    p.add_argument("--scenario", required=True, help="cenário alternativo (template)")
    p.add_argument("--panel", action="store_true", help="usa o painel spikes/flat_small/decaying")
    p.add_argument("--params", default=None)
    p.set_defaults(func=cmd_risk)

    p = sub.add_parser("search", parents=[common], help="bisseção da distância de separação")
    p.add_argument("--test", required=True, choices=TEST_NAMES)
    p.add_argument("--scenario", required=True)
    p.add_argument("--gamma", type=float, default=0.5)
    p.add_argument("--rho-lo", type=float, required=True)
    p.add_argument("--rho-hi", type=float, required=True)
    p.add_argument("--params", default=None)
    p.set_defaults(func=cmd_search)

    p = sub.add_parser("rates", parents=[common], help="taxa de referência rho*^2")
    p.add_argument("--setting", choices=("independent", "general"), required=True)
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--p", type=int, required=True)
    p.add_argument("--k0", type=int, required=True)
    p.add_argument("--Delta", type=int, required=True)
    p.set_defaults(func=cmd_rates)

    p = sub.add_parser("sweep", parents=[common], help="varredura de parâmetros em CSV")
    p.add_argument("--config", required=True)
    p.add_argument("--resume", action="store_true", help="reaproveita as células de --out")
    p.set_defaults(func=cmd_sweep)

    return parser


def _apply_defaults(args):
    if args.trials is None and args.command != "sweep":
        args.trials = settings.CALIBRATION_TRIALS if args.command == "calibrate" else settings.DEFAULT_TRIALS
    if args.command == "calibrate" and args.alpha is None:
        args.alpha = 0.05
    if getattr(args, 'out_required', False) and not args.out:
        raise ConfigurationError(f"{args.command} exige --out")


def main(argv: Optional[List[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    setup_logging(log_level=args.log_level, log_file=args.log_file)

    try:
        _apply_defaults(args)
        return args.func(args)

    except NumericalError as e:
        logger.error(f"Falha numérica: {e}")
        print(f"\n❌ ERRO NUMÉRICO: {e}", file=sys.stderr)
        return EXIT_NUMERICAL

    except (ConfigurationError, json.JSONDecodeError, OSError) as e:
        logger.error(f"Configuração inválida: {e}")
        print(f"\n❌ ERRO DE CONFIGURAÇÃO: {e}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
