"""Information-based pricing of a discrete payout: filters, entropy measures and a trading backtest."""

__version__ = "0.1.0"

from .paths import TimeGrid, bridge_from_brownian, bridge_variance, path_rng, simulate_brownian_pair, simulate_brownian_pairs
from .market import (
    CashFlowSpec,
    DiscountCurve,
    InfoFlowParams,
    PathBatch,
    PathBundle,
    discount_factor,
    sample_outcome,
    synthesize_batch,
    synthesize_paths,
)
from .filter import (
    PosteriorPath,
    bond_price,
    conditional_mean,
    conditional_variance,
    euler_price_path,
    filter_path,
    innovations,
    innovations_path,
    posterior_probs,
    price_function,
    price_function_derivative,
)
from .informed import (
    DerivedSignalParams,
    InformedParams,
    decompose_extra_info,
    derived_params,
    effective_information_path,
    informed_filter_path,
    informed_innovations,
    informed_posterior,
    informed_price,
    multi_source_effective_sigma,
    orthogonalized_rates,
    pure_noise_component,
)
from .montecarlo import MCConfig
from .metrics import (
    InfoReport,
    QuadratureConfig,
    bridge_entropy,
    conditional_price_entropy,
    cumulative_volatility_check,
    delta_J,
    expected_entropy,
    mixture_entropy,
    mutual_information,
    mutual_information_direct,
    price_entropy,
    shannon_entropy,
)
from .strategy import PnLReport, StrategyConfig, conditional_excess, pnl_backtest
from .config import ConfigError, ExperimentConfig, dump_config, load_preset, parse_config
from .experiments import ExperimentResult, run_experiment
from .plotting import emit_plot_script
