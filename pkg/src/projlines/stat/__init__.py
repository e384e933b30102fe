"""The statistical potential ``f_{d,r,alpha}``, its Monte Carlo maximization and the bound ``Kbar``."""

from .fdist import f_cdf, f_pdf, f_quantile
from .potential import (KResult, MCParams, StatParams, bonferroni_k, evaluate_statistical_potential,
                        max_sq_projections, solve_k_equation, upper_bound_kbar)
from .report import ratio_report, rows_to_csv, rows_to_svg
from .search import (ProjectedGaussian, Uniform, find_max, generate_random_line_sets, local_search,
                     naive_monte_carlo)

__all__ = [
    "KResult", "MCParams", "ProjectedGaussian", "StatParams", "Uniform", "bonferroni_k",
    "evaluate_statistical_potential", "f_cdf", "f_pdf", "f_quantile", "find_max",
    "generate_random_line_sets", "local_search", "max_sq_projections", "naive_monte_carlo",
    "ratio_report", "rows_to_csv", "rows_to_svg", "solve_k_equation", "upper_bound_kbar",
]
