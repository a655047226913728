"""Sequential first-price auctions: markets, Walrasian prices, subgame-perfect
equilibria and constructive bidding strategies, in exact rational arithmetic."""

from .market import (UNSOLD, Additive, Coverage, Explicit, FAMILIES, Market, Scenario, UnitDemand,
                     assign, bundle, bundles, demand_reduction, empty_allocation, format_money,
                     gen_scenario, low_revenue, marginal_value, money, nonsingleton,
                     optimal_welfare, order_matters, poa_additive, random_additive,
                     random_coverage, random_unit_demand, residual_value, unsold)
from .assignment import optimal_assignment
from .walrasian import (WalrasianEquilibrium, check_walrasian, is_complete, is_support_order,
                        is_walrasian, minimal_walrasian, support_order, supporters,
                        walrasian_by_enumeration)
from .game import (Evaluator, Outcome, SellerPolicy, StrategyProfile, best_welfare,
                   fixed_order_policy, lowest_index_tiebreak, max_tiebreak_rule, play, poa,
                   priority_tiebreak, revenue, utility, welfare)
from .equilibrium import (BudgetExceeded, EquilibriumReport, FolksCertificate, NegativeUtility,
                          TooLarge, folks_check, folks_search, is_optimistic_conservative,
                          replay_deviation, verify_spe)
from .oracle import brute_force_spe, outcome_classes
from .strategies import (StrategyTree, additive_outcome, bad_spe_additive, folks_strategy,
                         greedy_submodular, low_revenue_spe, nonsingleton_spe,
                         order_matters_bad_spe, order_matters_pair, unit_wlrs_eq)

__version__ = "0.1.0"

__all__ = [name for name in dir() if not name.startswith("_")]
