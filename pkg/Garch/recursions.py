import numpy as np
from numba import njit
from scipy.signal import lfilter


def mean_path(phi: float, returns: np.ndarray) -> np.ndarray:
    """mu_1 = 0, mu_t = phi * R_{t-1}."""
    mu = np.empty_like(returns)
    mu[0] = 0.0
    mu[1:] = phi * returns[:-1]
    return mu


def variance_path(alpha0: float, alpha1: float, beta1: float, returns: np.ndarray, sigma2_init: float) -> np.ndarray:
    """sigma²_1 = sigma2_init, sigma²_t = alpha0 + alpha1 R²_{t-1} + beta1 sigma²_{t-1}.

    Given the observed returns the recursion is a first order linear filter in sigma².
    """
    sigma2 = np.empty_like(returns)
    sigma2[0] = sigma2_init
    if returns.size > 1:
        drive = alpha0 + alpha1 * returns[:-1] ** 2
        sigma2[1:], _ = lfilter([1.0], [1.0, -beta1], drive, zi=[beta1 * sigma2_init])
    return sigma2


@njit(nogil=True, cache=True)
def simulate_path(phi, alpha0, alpha1, beta1, innovations, sigma2_start):
    """Returns and conditional variances for a pre-drawn innovation sequence."""
    n = innovations.size
    returns = np.empty(n)
    sigma2 = np.empty(n)
    r_prev = 0.0
    s2_prev = sigma2_start
    for t in range(n):
        s2 = alpha0 + alpha1 * r_prev * r_prev + beta1 * s2_prev
        r = phi * r_prev + np.sqrt(s2) * innovations[t]
        returns[t] = r
        sigma2[t] = s2
        r_prev = r
        s2_prev = s2
    return returns, sigma2
