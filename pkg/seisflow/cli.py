"""
Command-line entry point.

Each subcommand calls one service and prints its message. CSV results go to
``results/<subcommand>/`` unless ``--out`` names another directory.

Exit codes: 0 on success, 1 for invalid usage or configuration, 2 when a
run fails.
"""
import argparse
import logging
import sys
from typing import Any, Callable, Dict, List, Optional, Sequence

from seisflow.core.constants import LOG_FORMAT, LOG_LEVEL, MEASURED_SPOT_PRICE
from seisflow.core.flow.definition import BUNDLED_DIR
from seisflow.core.utils.async_bridge import AsyncBridge
from seisflow.services.analysis.service import idle_cost_service, resilience_service, spot_strategy_service
from seisflow.services.inversion.service import invert_service, validate_workflow_service
from seisflow.services.simulation.service import reduce_demo_service, weak_scaling_service

# Configure logging
logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_CONFIG = 1
EXIT_RUNTIME = 2

Service = Callable[[Dict[str, Any]], Any]


class _Parser(argparse.ArgumentParser):
    """ArgumentParser reporting usage errors with the configuration exit code."""

    def error(self, message: str):
        self.print_usage(sys.stderr)
        self.exit(EXIT_CONFIG, f"{self.prog}: error: {message}\n")


def _float_list(text: str) -> List[float]:
    try:
        return [float(v) for v in text.split(",") if v.strip()]
    except ValueError as e:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}") from e


def _int_list(text: str) -> List[int]:
    try:
        return [int(v) for v in text.split(",") if v.strip()]
    except ValueError as e:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}") from e


def _common_options() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--out", help="output directory (default: results/<subcommand>)")
    common.add_argument("--seed", type=int, help="override the configured seed")
    common.add_argument("--charts", action="store_true", help="also write SVG charts")
    common.add_argument("-v", "--verbose", action="store_true", help="log debug messages")
    return common


def build_parser() -> argparse.ArgumentParser:
    """Parser with one subcommand per service."""
    common = _common_options()
    parser = _Parser(prog="seisflow", description="Event-driven seismic imaging on a simulated serverless cloud.")
    commands = parser.add_subparsers(dest="command", metavar="<command>", parser_class=_Parser)
    commands.required = True

    def add(name: str, help_text: str, example: str) -> argparse.ArgumentParser:
        return commands.add_parser(
            name,
            parents=[common],
            help=help_text,
            description=help_text,
            epilog=f"example: seisflow {example}",
        )

    invert = add("invert", "run a least-squares RTM inversion", "invert --config toy.json --seed 7")
    invert.add_argument("--config", default=str(BUNDLED_DIR / "toy.json"), help="problem JSON file")
    invert.add_argument("--backend", default="in-process", choices=["in-process", "simulated"])
    invert.add_argument("--scenario", help="simulated cloud JSON file (simulated backend)")
    invert.add_argument("--workflow", help="workflow JSON file (simulated backend)")
    invert.add_argument("--workers", type=int, default=1, help="threads computing shot gradients")

    demo = add(
        "reduce-demo",
        "reduce random gradients through the queues and compare with the direct sum",
        "reduce-demo --runs 20 --seed 1",
    )
    demo.add_argument("--config", dest="scenario", help="simulated cloud JSON file")
    demo.add_argument("--batch-size", dest="n_b", type=int, help="gradients per run (default 128)")
    demo.add_argument("--runs", type=int, help="independent runs (default 20)")
    demo.add_argument("--duplication", type=float, help="probability of a duplicate delivery (default 0.1)")

    scaling = add(
        "weak-scaling",
        "time one iteration for increasing batch sizes",
        "weak-scaling --batch-sizes 1,10,25,50,100 --charts",
    )
    scaling.add_argument("--config", dest="scenario", help="simulated cloud JSON file")
    scaling.add_argument("--batch-sizes", type=_int_list, help="comma-separated batch sizes")
    scaling.add_argument("--repetitions", type=int, help="runs per batch size (default 3)")
    scaling.add_argument("--runtime", dest="runtime_s", type=float, help="gradient task runtime in seconds")

    idle = add(
        "idle-cost",
        "idle time and cost of a fixed cluster against a batch array job",
        "idle-cost --runtimes measured_runtimes.csv --price 0.2748",
    )
    idle.add_argument("--runtimes", help="CSV with a runtime_s column (default: bundled measurements)")
    idle.add_argument("--price", type=float, default=MEASURED_SPOT_PRICE, help="instance price in $/h")
    idle.add_argument("--workers", type=_int_list, help="comma-separated cluster sizes (default: one per task)")

    spot = add(
        "spot-strategy",
        "fixed against dynamic spot zone or instance-type choice",
        "spot-strategy --prices spot_prices.csv --iterations 10 --iteration-hours 4 --instance-type c5n.18xlarge",
    )
    spot.add_argument("--prices", required=True, help="CSV of t_seconds,zone,instance_type,price_per_hour")
    spot.add_argument("--iterations", type=int, default=10)
    spot.add_argument("--iteration-hours", type=float, default=1.0)
    spot.add_argument("--dimension", choices=["zone", "type"], default="zone")
    spot.add_argument("--instance-type", help="instance type when choosing zones")
    spot.add_argument("--zone", help="zone when choosing instance types")
    spot.add_argument("--instances", dest="n_instances", type=int, default=1)

    resilience = add(
        "resilience",
        "Monte Carlo resilience factor per failure fraction",
        "resilience --fractions 0,0.2,0.4,0.6,0.8,1 --task-minutes 45 --no-restart",
    )
    resilience.add_argument("--fractions", type=_float_list, help="comma-separated failure fractions")
    resilience.add_argument("--task-minutes", type=float, help="runtime of every task (default 45)")
    resilience.add_argument("--tasks", type=int, help="number of tasks (default 100)")
    resilience.add_argument("--runtimes", help="CSV with a runtime_s column instead of equal tasks")
    resilience.add_argument("--penalty", type=float, help="restart penalty in seconds")
    resilience.add_argument("--no-restart", action="store_true", help="redistribute failed tasks instead")
    resilience.add_argument("--realizations", type=int, help="Monte Carlo realizations (default 10)")

    validate = add("validate-workflow", "check a workflow definition", "validate-workflow lsrtm.json")
    validate.add_argument("path", nargs="?", help="workflow JSON file (default: bundled lsrtm.json)")

    return parser


SERVICES: Dict[str, Service] = {
    "invert": invert_service,
    "reduce-demo": reduce_demo_service,
    "weak-scaling": weak_scaling_service,
    "idle-cost": idle_cost_service,
    "spot-strategy": spot_strategy_service,
    "resilience": resilience_service,
    "validate-workflow": validate_workflow_service,
}


def _params(args: argparse.Namespace) -> Dict[str, Any]:
    return {k: v for k, v in vars(args).items() if k not in ("command", "verbose")}


def main(argv: Optional[Sequence[str]] = None) -> int:
    """Run one subcommand and return its exit code."""
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return int(e.code or 0)

    logging.basicConfig(level=logging.DEBUG if args.verbose else LOG_LEVEL, format=LOG_FORMAT)
    logger.debug("Running %s", args.command)

    response = AsyncBridge.run_async(SERVICES[args.command], _params(args))
    if response["status"] == "success":
        print(response["message"])
        return EXIT_OK
    print(f"error: {response['message']}", file=sys.stderr)
    return EXIT_CONFIG if response.get("error_type") == "config" else EXIT_RUNTIME


if __name__ == "__main__":
    sys.exit(main())
