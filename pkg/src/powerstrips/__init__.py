"""Numerical experiments on |a^n x + b^m y - c^p| < psi(max(a^n, b^m))."""

__version__ = "0.1.0"

from .forms import (DimensionFunction, Exponents, PowerLaw, PowerLawCapped, Scaled,  # noqa: E402
                    Tabulated, dimension_formula, hausdorff_sum_partial, lebesgue_sum_partial,
                    regime_classify)

__all__ = [
    "__version__", "Exponents", "PowerLaw", "PowerLawCapped", "Tabulated", "Scaled",
    "DimensionFunction", "regime_classify", "dimension_formula", "lebesgue_sum_partial",
    "hausdorff_sum_partial",
]
