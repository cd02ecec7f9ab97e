"""MCP tool server exposing the harness over stdio.

Each tool call is a pure function of its arguments and returns the same JSON
payload as the matching CLI command.
"""
import asyncio
import logging
from typing import Any, Dict, List

import mcp.server.stdio
import mcp.types as types
from mcp.server import NotificationOptions, Server
from mcp.server.models import InitializationOptions
from pydantic import ValidationError

from .aggregators import from_spec, gallery
from .cli import axioms_payload, counterexamples_payload, dump_json, example1_payload, extract_payload
from .config import configure_logging, load_settings
from .errors import FcafError
from .measure import Measure
from .schemas import MeasureSpec

logger = logging.getLogger(__name__)

SERVER_NAME = "fcaf-server"
SERVER_VERSION = "0.1.0"

server = Server(SERVER_NAME)
settings = load_settings()


def aggregator_schema() -> Dict[str, Any]:
    return {
        "type": "object",
        "description": (
            "Aggregator spec, e.g. {\"kind\": \"dictator\", \"i\": 0.3} or "
            "{\"kind\": \"odd_h_mean\", \"variant\": \"cube\"}"
        ),
    }


def _int_schema(description: str, default: int) -> Dict[str, Any]:
    return {"type": "integer", "description": description, "default": default}


@server.list_tools()
async def handle_list_tools() -> List[types.Tool]:
    """List the harness tools."""
    return [
        types.Tool(
            name="list-aggregators",
            description="List the shipped aggregators with their probing shape and claimed axioms",
            inputSchema={"type": "object", "properties": {}},
        ),
        types.Tool(
            name="example1",
            description="Aggregate the six-object worked example and compare with the exact table",
            inputSchema={
                "type": "object",
                "properties": {
                    "measure": {"type": "object", "description": "Optional measure replacing density 3i^2"},
                },
            },
        ),
        types.Tool(
            name="check-axioms",
            description="Run every axiom checker on an aggregator and compare with its claims",
            inputSchema={
                "type": "object",
                "properties": {
                    "aggregator": aggregator_schema(),
                    "seed": _int_schema("Root seed", settings.seed),
                    "probes": _int_schema("Probes per axiom", settings.probes),
                    "grid_n": _int_schema("Non-dictatorship grid cells", settings.grid_n),
                },
                "required": ["aggregator"],
            },
        ),
        types.Tool(
            name="extract-measure",
            description="Recover the representing measure (or h for two objects) from an aggregator",
            inputSchema={
                "type": "object",
                "properties": {
                    "aggregator": aggregator_schema(),
                    "mode": {"type": "string", "enum": ["measure", "h"], "default": "measure"},
                    "grid_n": _int_schema("Probe grid points", settings.extract_grid_n),
                    "seed": _int_schema("Root seed", settings.seed),
                },
                "required": ["aggregator"],
            },
        ),
        types.Tool(
            name="counterexamples",
            description="Verdicts of the single-axiom counterexamples on the four theorem axioms",
            inputSchema={
                "type": "object",
                "properties": {"seed": _int_schema("Root seed", settings.seed)},
            },
        ),
    ]


def call_tool(name: str, arguments: Dict[str, Any]) -> str:
    """Dispatch one tool call and return its JSON text."""
    seed = int(arguments.get("seed", settings.seed))
    tol = settings.tolerance
    if name == "list-aggregators":
        return dump_json([
            {"name": a.name, "shape": list(a.shape), "claimed": sorted(a.claimed_axioms)}
            for a in gallery()
        ])
    if name == "example1":
        measure = arguments.get("measure")
        mu = Measure.from_spec(MeasureSpec.model_validate(measure)) if measure else None
        return dump_json(example1_payload(mu))
    if name == "check-axioms":
        alpha = from_spec(arguments["aggregator"])
        probes = int(arguments.get("probes", settings.probes))
        grid_n = int(arguments.get("grid_n", settings.grid_n))
        return dump_json(axioms_payload(alpha, seed, probes, grid_n, tol))
    if name == "extract-measure":
        alpha = from_spec(arguments["aggregator"])
        grid_n = int(arguments.get("grid_n", settings.extract_grid_n))
        mode = arguments.get("mode", "measure")
        return dump_json(extract_payload(alpha, mode, grid_n, settings.validation_n, seed, settings.probes, tol))
    if name == "counterexamples":
        return dump_json(counterexamples_payload(seed, settings.probes, settings.grid_n, tol))
    raise ValueError(f"Unknown tool: {name}")


@server.call_tool()
async def handle_call_tool(name: str, arguments: Dict[str, Any]) -> List[types.TextContent]:
    """Handle tool execution requests."""
    try:
        text = await asyncio.to_thread(call_tool, name, arguments or {})
    except (FcafError, ValidationError, KeyError) as e:
        logger.error(f"Tool {name} failed: {e}")
        text = f"Error running {name}: {e}"
    return [types.TextContent(type="text", text=text)]


async def main():
    """Run the server using stdin/stdout streams."""
    async with mcp.server.stdio.stdio_server() as (read_stream, write_stream):
        await server.run(
            read_stream,
            write_stream,
            InitializationOptions(
                server_name=SERVER_NAME,
                server_version=SERVER_VERSION,
                capabilities=server.get_capabilities(
                    notification_options=NotificationOptions(),
                    experimental_capabilities={},
                ),
            ),
        )


def run_server():
    """Wrapper to run the async main function"""
    configure_logging(settings)
    asyncio.run(main())


if __name__ == "__main__":
    run_server()
