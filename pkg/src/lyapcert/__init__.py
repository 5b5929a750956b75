"""Certified top Lyapunov exponents of 2×2 random matrix products driven by a
Markov shift, and certified Taylor coefficients along analytic families."""
from .certify import Certificate, LambdaOptions, compute_lambda, certify_lift, monte_carlo_lambda
from .derivatives import OmegaData, TaylorResult, check_omega, derivative_series, taylor
from .family import Jet, evaluate, parse
from .systemfile import SystemFile, load_system

__all__ = [
    "Certificate", "LambdaOptions", "compute_lambda", "certify_lift", "monte_carlo_lambda", "OmegaData",
    "TaylorResult", "check_omega", "derivative_series", "taylor", "Jet", "evaluate", "parse", "SystemFile",
    "load_system",
]
