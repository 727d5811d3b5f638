"""Porter-Thomas diagnostics for amplitude samples.

For a chaotic state on a D-dimensional Hilbert space the scaled
probabilities x = D * p follow the Exp(1) law.  The report compares an
empirical sample against that law with the exact Kolmogorov-Smirnov
distance (parameter free, no binning) and carries a log-density histogram
for plotting.
"""

from __future__ import annotations

import io
from dataclasses import dataclass

import numpy as np

LOG10_E = float(np.log10(np.e))

#: Default KS distance below which a sample is flagged as Porter-Thomas.
DEFAULT_KS_THRESHOLD = 0.05


@dataclass
class DistributionReport:
    """KS comparison of scaled probabilities against Exp(1)."""

    scaled: np.ndarray
    ks_distance: float
    ks_threshold: float
    ecdf_x: np.ndarray
    ecdf_y: np.ndarray
    bin_centers: np.ndarray
    empirical_log_density: np.ndarray
    theory_log_density: np.ndarray

    @property
    def is_porter_thomas(self) -> bool:
        return self.ks_distance < self.ks_threshold

    def to_csv(self) -> str:
        """Histogram rows ``x, empirical_log_density, theory_log_density``."""
        out = io.StringIO()
        out.write("x,empirical_log_density,theory_log_density\n")
        for x, emp, theory in zip(
            self.bin_centers, self.empirical_log_density, self.theory_log_density
        ):
            out.write(f"{float(x)!r},{float(emp)!r},{float(theory)!r}\n")
        return out.getvalue()


def ks_distance_exponential(x: np.ndarray) -> float:
    """Exact sup-distance between the empirical CDF of ``x`` and 1 - e^-x."""
    xs = np.sort(np.asarray(x, dtype=float))
    n = xs.size
    cdf = 1.0 - np.exp(-xs)
    upper = np.max(np.arange(1, n + 1) / n - cdf)
    lower = np.max(cdf - np.arange(0, n) / n)
    return float(max(upper, lower))


def porter_thomas_report(
    probabilities,
    dimension: int,
    *,
    bins: int = 50,
    x_max: float = 8.0,
    ks_threshold: float = DEFAULT_KS_THRESHOLD,
) -> DistributionReport:
    """Compare scaled probabilities ``dimension * p`` against Exp(1).

    The histogram uses ``bins`` equal-width bins on [0, x_max]; points
    beyond ``x_max`` still count in the KS distance, only the plot clips.
    Scale consistent: multiplying all p by c and dividing ``dimension`` by
    c leaves everything unchanged.
    """
    p = np.asarray(probabilities, dtype=float)
    if p.size == 0:
        raise ValueError("empty probability sample")
    if np.any(p < 0):
        raise ValueError("negative probabilities in sample")
    if dimension < 2:
        raise ValueError(f"dimension {dimension} must be >= 2")
    x = dimension * p
    xs = np.sort(x)
    n = xs.size
    ks = ks_distance_exponential(x)
    edges = np.linspace(0.0, x_max, bins + 1)
    counts, _ = np.histogram(x, edges)
    width = edges[1] - edges[0]
    density = counts / (n * width)
    empirical_log = np.where(density > 0, np.log10(np.maximum(density, 1e-300)), np.nan)
    centers = 0.5 * (edges[:-1] + edges[1:])
    theory_log = -centers * LOG10_E
    return DistributionReport(
        scaled=x,
        ks_distance=ks,
        ks_threshold=ks_threshold,
        ecdf_x=xs,
        ecdf_y=np.arange(1, n + 1) / n,
        bin_centers=centers,
        empirical_log_density=empirical_log,
        theory_log_density=theory_log,
    )
