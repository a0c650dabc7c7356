"""Two-tone time-domain simulation of memoryless cubic devices."""

from .kernel import COMPILED_AVAILABLE, available_backends, default_backend_name, get_backend
from .sim import (
    DEFAULT_NUM_SAMPLES,
    DEFAULT_SAMPLE_RATE_HZ,
    Ip3Extraction,
    PolyNonlinearity,
    SlopeScan,
    ToneMeasurement,
    compose,
    design_nonlinearity,
    extract_ip3,
    simulate_two_tone,
    slope_scan,
)

__all__ = [
    "COMPILED_AVAILABLE",
    "DEFAULT_NUM_SAMPLES",
    "DEFAULT_SAMPLE_RATE_HZ",
    "Ip3Extraction",
    "PolyNonlinearity",
    "SlopeScan",
    "ToneMeasurement",
    "available_backends",
    "compose",
    "default_backend_name",
    "design_nonlinearity",
    "extract_ip3",
    "get_backend",
    "simulate_two_tone",
    "slope_scan",
]
