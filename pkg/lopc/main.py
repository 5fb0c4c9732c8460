"""
Command-line entry point of the LOPC toolkit.

Provides:
- build_parser: argparse definition of every subcommand
- run: dispatch one command and return its exit code
- main: process entry with logging setup and the global error handler

Exit codes: 0 success or positive verdict, 2 negative verdict, 1 error.
"""

import argparse
import json
import logging
import sys
import traceback
from typing import Any, Callable, Dict, List, Optional, Tuple, Type

import pandas as pd
from pydantic import BaseModel, ValidationError

from lopc.api import blocks, catalysis, conversions, multi, states
from lopc.api.reports import EXIT_ERROR, CommandResult
from lopc.core.errors import LOPCError
from lopc.settings import get_log_level

logger = logging.getLogger(__name__)

Handler = Callable[[Any], CommandResult]

# Subcommand -> (request model, handler, argparse dest -> request field)
COMMANDS: Dict[str, Tuple[Type[BaseModel], Handler, Dict[str, str]]] = {
    "info": (states.DistRequest, states.info, {}),
    "pure-check": (states.DistRequest, states.pure_check, {}),
    "majorize": (conversions.PairRequest, conversions.majorize, {"from_": "source", "to": "target"}),
    "synthesize": (conversions.SynthesizeRequest, conversions.synthesize, {"from_": "source", "to": "target"}),
    "convert-prob": (conversions.PairRequest, conversions.convert_prob, {"from_": "source", "to": "target"}),
    "procrustean": (conversions.ProcrusteanRequest, conversions.procrustean, {"from_": "source"}),
    "verify": (conversions.VerifyRequest, conversions.verify, {}),
    "otp-demo": (conversions.OTPRequest, conversions.otp_demo, {}),
    "catalysis-check": (catalysis.CatalysisCheckRequest, catalysis.catalysis_check,
                        {"from_": "source", "to": "target"}),
    "catalysis-search": (catalysis.CatalysisSearchRequest, catalysis.catalysis_search,
                         {"from_": "source", "to": "target"}),
    "concentrate": (blocks.ConcentrateRequest, blocks.concentrate, {"N": "n"}),
    "dilute": (blocks.DiluteRequest, blocks.dilute, {"N": "n"}),
    "multi-audit": (multi.MultiAuditRequest, multi.multi_audit, {}),
}


def _pair(sub: argparse.ArgumentParser) -> None:
    sub.add_argument("--from", dest="from_", required=True, help="Source spectrum, e.g. 1/3,1/3,1/3")
    sub.add_argument("--to", required=True, help="Target spectrum, e.g. 1/2,1/2")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="lopc",
        description="Exact analysis of secret classical correlations under local operations "
                    "and public communication.",
    )
    parser.add_argument("--json", action="store_true", help="Emit the report as JSON")
    subs = parser.add_subparsers(dest="command", required=True)

    for name in ("info", "pure-check"):
        sub = subs.add_parser(name, help=f"{name} of a distribution file")
        sub.add_argument("--dist", required=True, help="Distribution JSON file")

    _pair(subs.add_parser("majorize", help="Majorization test"))
    sub = subs.add_parser("synthesize", help="Deterministic conversion protocol")
    _pair(sub)
    sub.add_argument("--out", help="Write the protocol to this file")
    _pair(subs.add_parser("convert-prob", help="Optimal probabilistic conversion"))

    sub = subs.add_parser("procrustean", help="Keep-or-fail filter")
    sub.add_argument("--from", dest="from_", required=True, help="Source spectrum")
    sub.add_argument("--keep", required=True, help="0-based symbols to keep, e.g. 0,1")

    sub = subs.add_parser("verify", help="Execute a protocol file and check secrecy")
    sub.add_argument("--protocol", required=True, help="Protocol JSON file")
    sub.add_argument("--dist", required=True, help="Distribution JSON file")
    sub.add_argument("--target", help="Required output spectrum")
    sub.add_argument("--conditioned", action="store_true", help="Check the success branch only")

    sub = subs.add_parser("otp-demo", help="One-time pad with resource accounting")
    sub.add_argument("--message", default="1/2,1/2", help="Message distribution")
    sub.add_argument("--key", help="Key distribution (uniform when omitted)")
    sub.add_argument("--key-size", dest="key_size", type=int, default=2, help="Key alphabet size")
    sub.add_argument("--messages", type=int, default=1, help="Messages sent under one key")
    sub.add_argument("--sample", action="store_true", help="Also draw one seeded run")
    sub.add_argument("--seed", type=int, help="Seed for --sample (LOPC_DEFAULT_SEED when omitted)")

    sub = subs.add_parser("catalysis-check", help="Catalysis verdict for one catalyst")
    _pair(sub)
    sub.add_argument("--catalyst", required=True, help="Catalyst spectrum")
    sub = subs.add_parser("catalysis-search", help="Bounded catalyst search")
    _pair(sub)
    sub.add_argument("--max-dim", dest="max_dim", type=int, help="Largest catalyst dimension")
    sub.add_argument("--denom-bound", dest="denom_bound", type=int, help="Largest denominator")

    sub = subs.add_parser("concentrate", help="Concentration yield of N copies")
    sub.add_argument("--spectrum", required=True, help="Single-copy spectrum")
    sub.add_argument("--N", type=int, nargs="+", required=True, help="Block length(s)")
    sub = subs.add_parser("dilute", help="Dilution of key bits into N copies")
    sub.add_argument("--spectrum", required=True, help="Target single-copy spectrum")
    sub.add_argument("--N", type=int, required=True, help="Block length")
    sub.add_argument("--delta", type=float, required=True, help="Typicality slack")
    sub.add_argument("--two-sided", dest="two_sided", action="store_true", help="Two-sided typical set")

    sub = subs.add_parser("multi-audit", help="Multipartite audits")
    sub.add_argument("--state", default="cat", help="cat, ghz or epr2")
    sub.add_argument("--parties", type=int, default=4, help="Parties of the cat state")
    return parser


def _flatten(report: Any, prefix: str = "") -> List[Tuple[str, str]]:
    if isinstance(report, dict):
        rows = []
        for key, value in report.items():
            rows.extend(_flatten(value, f"{prefix}.{key}" if prefix else str(key)))
        return rows
    if isinstance(report, list) and any(isinstance(item, (dict, list)) for item in report):
        rows = []
        for i, item in enumerate(report):
            rows.extend(_flatten(item, f"{prefix}[{i}]"))
        return rows
    if isinstance(report, list):
        return [(prefix, ", ".join(map(str, report)))]
    return [(prefix, str(report).lower() if isinstance(report, bool) else str(report))]


def render(report: Dict[str, Any], as_json: bool) -> str:
    """Same report as JSON or as a two-column table."""
    if as_json:
        return json.dumps(report, indent=2)
    df = pd.DataFrame(_flatten(report), columns=["field", "value"])
    return df.to_string(index=False)


def run(args: argparse.Namespace) -> CommandResult:
    """Validate the flags of one subcommand into its request model and call its handler."""
    model, handler, renames = COMMANDS[args.command]
    values = {renames.get(k, k): v for k, v in vars(args).items() if k not in ("command", "json") and v is not None}
    request = model(**values)
    logger.info(f"Running command '{args.command}'")
    return handler(request)


def main(argv: Optional[List[str]] = None) -> int:
    # Reports go to stdout, logs to stderr
    logging.basicConfig(
        level=getattr(logging, get_log_level(), logging.INFO),
        format='%(asctime)s - %(name)s - %(levelname)s - %(message)s',
        handlers=[logging.StreamHandler(sys.stderr)],
    )
    args = build_parser().parse_args(argv)
    try:
        result = run(args)
    except ValidationError as e:
        first = e.errors()[0]
        field = ".".join(str(part) for part in first["loc"])
        logger.error(f"Invalid flags for '{args.command}': {field}: {first['msg']}")
        print(f"error: {field}: {first['msg']}", file=sys.stderr)
        return EXIT_ERROR
    except LOPCError as e:
        logger.error(f"{type(e).__name__}: {e}")
        print(f"error: {type(e).__name__}: {e}", file=sys.stderr)
        return EXIT_ERROR
    except Exception as e:
        logger.error(f"Unhandled exception: {type(e).__name__}: {str(e)}")
        logger.error(f"Traceback:\n{traceback.format_exc()}")
        print(f"error: internal error: {type(e).__name__}: {e}", file=sys.stderr)
        return EXIT_ERROR

    print(render(result.report, args.json))
    return result.exit_code


if __name__ == "__main__":
    sys.exit(main())
