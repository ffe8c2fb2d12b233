"""Constants used throughout the seisflow package.

This module centralizes defaults for the propagator, the cloud simulator and
the pricing models. Values can be overridden through environment variables
(or a ``.env`` file in the working directory).
"""
import os
from typing import Dict, Tuple

from dotenv import load_dotenv

load_dotenv()

# Kernel settings
THREADS = max(1, int(os.environ.get("SEISFLOW_THREADS", "1")))
PRECISION = os.environ.get("SEISFLOW_PRECISION", "float32")
DEFAULT_SPATIAL_ORDER = int(os.environ.get("SEISFLOW_SPATIAL_ORDER", "8"))
DEFAULT_ABSORBING_WIDTH = int(os.environ.get("SEISFLOW_ABSORBING_WIDTH", "40"))
# Velocity used to scale the damping sponge (m/s)
SPONGE_REFERENCE_VELOCITY = float(
    os.environ.get("SEISFLOW_SPONGE_VELOCITY", "2000.0")
)
INSTABILITY_CHECK_INTERVAL = int(os.environ.get("SEISFLOW_CHECK_INTERVAL", "20"))

# Stable CFL coefficients per spatial order, from calibrate_cfl_coefficient
# (bisection on a constant reference model), rounded down.
CFL_COEFFICIENTS: Dict[int, float] = {
    2: 0.69,
    4: 0.60,
    6: 0.56,
    8: 0.54,
}

# Output and logging
RESULTS_DIR = os.environ.get("SEISFLOW_RESULTS_DIR", "results")
LOG_LEVEL = os.environ.get("SEISFLOW_LOG_LEVEL", "INFO")
LOG_FORMAT = "%(asctime)s - %(name)s - %(levelname)s - %(message)s"

# Simulator
MAX_EVENTS = int(os.environ.get("SEISFLOW_MAX_EVENTS", "5000000"))
STARTUP_WINDOW_S: Tuple[float, float] = (60.0, 180.0)
RUNTIME_JITTER = 0.10
RESTART_PENALTY_S = 120.0
SPOT_WARNING_S = 120.0

# Queue semantics
MAX_RECEIVE_MESSAGES = 10
VISIBILITY_TIMEOUT_S = 30.0
POLL_INTERVAL_S = 1.0
RECEIVE_SINGLE_BIAS = 0.6
DUPLICATION_PROBABILITY = 0.0

# Function runtime limits and rates
FUNCTION_MEMORY_CAP_GB = 3.0
FUNCTION_DURATION_CAP_S = 900.0
FUNCTION_REQUEST_FEE = 2e-7
FUNCTION_GB_SECOND_FEE = 1.6e-5
REDUCER_MEMORY_GB = 3.0
# Largest gradient chunk a reducer invocation handles (float32 elements)
MAX_OBJECT_ELEMS = int(os.environ.get("SEISFLOW_MAX_OBJECT_ELEMS", "20000000"))
# Simulated time without store writes after which a reduction counts as stalled
REDUCTION_STALL_TIMEOUT_S = 3600.0

# Object store throughput used to model handler durations
STORE_BANDWIDTH_MB_S = 100.0
STORE_LATENCY_S = 0.05

# Workflow billing ($ per 1000 state transitions)
STATE_TRANSITION_RATE = 0.025

# Instance catalog: name -> (vcpus, memory_gb, on_demand $/h, spot $/h)
INSTANCE_CATALOG: Dict[str, Tuple[int, float, float, float]] = {
    "m4.4xlarge": (16, 64.0, 0.800, 0.2821),
    "r5.24xlarge": (96, 768.0, 6.048, 1.7103),
    "c5n.18xlarge": (72, 192.0, 3.888, 1.1659),
}
DEFAULT_INSTANCE_TYPE = "m4.4xlarge"
DEFAULT_ZONE = "us-east-1a"
# m4.4xlarge spot price during the weak-scaling measurements
MEASURED_SPOT_PRICE = 0.2748

# Plot settings
PLOT_CONFIG = {
    "template": "plotly_white",
    "width": 900,
    "height": 500,
}
