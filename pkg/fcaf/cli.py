"""Command-line entry point: reproduce the worked example, run axiom suites, extract measures."""
import argparse
import csv
import io
import json
import logging
import sys
from pathlib import Path
from typing import Any, Optional, Sequence

from pydantic import ValidationError

from .aggregators import Fcaf, from_spec
from .axioms import claims_match, implication_matrix, counterexample_matrix, recheck, run_suite
from .classification import Profile, validate_profile
from .config import RunConfig, Settings, configure_logging, load_settings
from .errors import ArgumentError, DomainError, PreconditionError, ProtocolError
from .measure import Measure
from .schemas import MeasureSpec, ProfileSpec
from .theorem_harness import (
    CURVE_COLUMNS,
    consistency_check,
    example1_report,
    extract_h,
    extract_measure,
)

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_ASSERTION = 1
EXIT_USAGE = 2
EXIT_PROTOCOL = 3


def _number(v: float) -> str:
    return format(v, ".17g")


def _load_json(path: str) -> Any:
    with open(path, "r", encoding="utf-8") as fh:
        return json.load(fh)


def load_aggregator(path: str) -> Fcaf:
    return from_spec(_load_json(path))


def load_profile(path: str) -> Profile:
    return Profile.from_spec(ProfileSpec.model_validate(_load_json(path)))


def load_measure(path: str) -> Measure:
    return Measure.from_spec(MeasureSpec.model_validate(_load_json(path)))


def dump_json(data: Any) -> str:
    return json.dumps(data, indent=2, sort_keys=True) + "\n"


def dump_csv(header: Sequence[str], rows: Sequence[Sequence[Any]]) -> str:
    buffer = io.StringIO()
    writer = csv.writer(buffer, lineterminator="\n")
    writer.writerow(header)
    for row in rows:
        writer.writerow([_number(v) if isinstance(v, float) else v for v in row])
    return buffer.getvalue()


def _write(text: str, path: Optional[str]):
    if path is None:
        sys.stdout.write(text)
        return
    Path(path).write_text(text, encoding="utf-8")
    logger.info(f"Wrote {path}")


def _sibling(path: str, suffix: str) -> str:
    p = Path(path)
    return str(p.with_name(f"{p.stem}.{suffix}.csv"))


# Report payloads, shared with the tool server


def example1_payload(mu: Optional[Measure] = None) -> dict:
    return example1_report(mu).to_dict()


def axioms_payload(alpha: Fcaf, seed: int, probes: int, grid_n: int, tol: float) -> dict:
    reports = run_suite(alpha, seed, probes, grid_n, tol)
    implications = implication_matrix([alpha], seed, probes, grid_n, tol, suites={alpha.name: reports})
    matches = claims_match(alpha, reports)
    for report in reports:
        if not report.passed:
            logger.debug(f"{report.axiom} witness rechecks at {recheck(alpha, report):.3e}")
    return {
        "aggregator": alpha.name,
        "shape": list(alpha.shape),
        "claimed": sorted(alpha.claimed_axioms),
        "reports": [r.to_dict() for r in reports],
        "implications": implications.to_dict(),
        "claims_match": matches,
        "ok": matches and implications.ok,
    }


def extract_payload(alpha: Fcaf, mode: str, grid_n: int, validation_n: int, seed: int,
                    probes: int, tol: float) -> dict:
    if mode == "h":
        report = extract_h(alpha, grid_n, seed, probes, tol)
        return {"aggregator": alpha.name, "mode": mode, **report.to_dict()}
    result = extract_measure(alpha, grid_n, validation_n, seed)
    consistent = consistency_check(result, tol)
    return {
        "aggregator": alpha.name,
        "mode": mode,
        **result.to_dict(),
        "consistent": consistent,
        "ok": consistent and result.match_deviation <= tol,
    }


def counterexamples_payload(seed: int, probes: int, grid_n: int, tol: float) -> dict:
    rows = counterexample_matrix(seed, probes, grid_n, tol)
    return {
        "rows": [r.to_dict() for r in rows],
        "ok": all(r.fails_designated for r in rows),
    }


# Commands


def cmd_example1(config: RunConfig) -> int:
    mu = load_measure(config.measure_path) if config.measure_path else None
    payload = example1_payload(mu)
    if config.output == "json":
        _write(dump_json(payload), config.out_path)
    else:
        labels = [f"x{j + 1}" for j in range(len(payload["table"]))]
        _write(dump_csv(["object", "t1", "t2", "t3"], [[l, *row] for l, row in zip(labels, payload["table"])]),
               config.out_path)
        if config.out_path:
            _write(dump_csv(["object", "t1", "t2", "t3"],
                            [[l, *row] for l, row in zip(labels, payload["deviations"])]),
                   _sibling(config.out_path, "deviations"))
            _write(dump_csv(CURVE_COLUMNS, payload["curves"]), _sibling(config.out_path, "curves"))
    if payload["max_deviation"] > config.tolerance:
        logger.error(f"Example table deviates by {payload['max_deviation']:.3e} > {config.tolerance:g}")
        return EXIT_ASSERTION
    return EXIT_OK


def cmd_axioms(config: RunConfig) -> int:
    if not config.aggregator_path:
        raise ArgumentError("axioms needs --aggregator")
    alpha = load_aggregator(config.aggregator_path)
    payload = axioms_payload(alpha, config.seed, config.probes, config.grid_n, config.tolerance)
    if config.output == "json":
        _write(dump_json(payload), config.out_path)
    else:
        rows = []
        for r in payload["reports"]:
            witness = r["witness"] or {}
            atoms = r.get("variants", {}).get("atoms", {}).get("verdict", "")
            rows.append([r["axiom"], r["verdict"], r["probes"], witness.get("deviation", ""), atoms])
        _write(dump_csv(["axiom", "verdict", "probes", "deviation", "atoms_variant"], rows), config.out_path)
    if not payload["ok"]:
        logger.error(f"{alpha.name}: observed verdicts do not match claimed axioms {payload['claimed']}")
        return EXIT_ASSERTION
    return EXIT_OK


def cmd_extract(config: RunConfig) -> int:
    if not config.aggregator_path:
        raise ArgumentError("extract needs --aggregator")
    alpha = load_aggregator(config.aggregator_path)
    payload = extract_payload(alpha, config.mode, config.grid_n, config.validation_n, config.seed,
                              config.probes, config.tolerance)
    if config.output == "json":
        _write(dump_json(payload), config.out_path)
    elif config.mode == "h":
        _write(dump_csv(["u", "h"], list(zip(payload["u"], payload["h"]))), config.out_path)
    else:
        types = sorted(payload["cdf_values"], key=int)
        header = ["x"] + [f"cdf_t{int(t) + 1}" for t in types]
        rows = [[x, *(payload["cdf_values"][t][k] for t in types)] for k, x in enumerate(payload["grid"])]
        _write(dump_csv(header, rows), config.out_path)
    if not payload["ok"]:
        logger.error(f"Extraction for {alpha.name} failed its checks")
        return EXIT_ASSERTION
    return EXIT_OK


def cmd_counterexamples(config: RunConfig) -> int:
    payload = counterexamples_payload(config.seed, config.probes, config.grid_n, config.tolerance)
    if config.output == "json":
        _write(dump_json(payload), config.out_path)
    else:
        axioms = list(payload["rows"][0]["verdicts"])
        rows = [
            [r["aggregator"], r["designated"], *(r["verdicts"][a] for a in axioms),
             str(r["fails_designated"]).lower(), str(r["passes_others"]).lower()]
            for r in payload["rows"]
        ]
        _write(dump_csv(["aggregator", "designated", *axioms, "fails_designated", "passes_others"], rows),
               config.out_path)
    if not payload["ok"]:
        logger.error("A counterexample does not violate its designated axiom")
        return EXIT_ASSERTION
    return EXIT_OK


def cmd_aggregate(config: RunConfig) -> int:
    if not config.aggregator_path or not config.profile_path:
        raise ArgumentError("aggregate needs --aggregator and --profile")
    alpha = load_aggregator(config.aggregator_path)
    profile = load_profile(config.profile_path)
    report = validate_profile(profile, config.tolerance)
    if not report.ok:
        raise ArgumentError(f"Profile violates the model constraints: {report.to_dict()}")
    out = alpha.aggregate(profile)
    if config.output == "json":
        _write(dump_json({"aggregator": alpha.name, "result": out.to_dict(),
                          "valid": out.validate(config.tolerance).ok}), config.out_path)
    else:
        header = ["object"] + [f"t{t + 1}" for t in range(out.p)]
        _write(dump_csv(header, [[f"x{j + 1}", *row] for j, row in enumerate(out.values)]), config.out_path)
    return EXIT_OK


COMMANDS = {
    "example1": cmd_example1,
    "axioms": cmd_axioms,
    "extract": cmd_extract,
    "counterexamples": cmd_counterexamples,
    "aggregate": cmd_aggregate,
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="fcaf", description="Fuzzy classification aggregation over a continuum")
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--seed", type=int, help="root seed for every probe family")
    common.add_argument("--probes", type=int, help="probes per axiom")
    common.add_argument("--grid-n", type=int, dest="grid_n", help="non-dictatorship cells, or extraction grid points")
    common.add_argument("--tol", type=float, dest="tolerance", help="comparison tolerance")
    common.add_argument("--output", choices=["json", "csv"], default="json")
    common.add_argument("--out-path", dest="out_path", help="write here instead of stdout")

    sub = parser.add_subparsers(dest="command", required=True)
    example = sub.add_parser("example1", parents=[common], help="reproduce the six-object worked example")
    example.add_argument("--measure", dest="measure_path", help="measure JSON replacing density 3i^2")

    axioms = sub.add_parser("axioms", parents=[common], help="run every axiom checker on one aggregator")
    axioms.add_argument("--aggregator", dest="aggregator_path", required=True)

    extract = sub.add_parser("extract", parents=[common], help="recover the representing measure or h")
    extract.add_argument("--aggregator", dest="aggregator_path", required=True)
    extract.add_argument("--mode", choices=["measure", "h"], default="measure")

    sub.add_parser("counterexamples", parents=[common], help="single-axiom counterexample matrix")

    aggregate = sub.add_parser("aggregate", parents=[common], help="aggregate one profile")
    aggregate.add_argument("--aggregator", dest="aggregator_path", required=True)
    aggregate.add_argument("--profile", dest="profile_path", required=True)
    return parser


def resolve_config(args: argparse.Namespace, settings: Settings) -> RunConfig:
    """Merge parsed flags over environment defaults; unset flags fall back to Settings."""
    values = {k: v for k, v in vars(args).items() if v is not None}
    values.setdefault("seed", settings.seed)
    values.setdefault("probes", settings.probes)
    values.setdefault("tolerance", settings.tolerance)
    values.setdefault("validation_n", settings.validation_n)
    if "grid_n" not in values:
        values["grid_n"] = settings.extract_grid_n if args.command == "extract" else settings.grid_n
    return RunConfig(**values)


def main(argv: Optional[Sequence[str]] = None, settings: Optional[Settings] = None) -> int:
    """Parse, run one command and map failures onto the exit-code contract."""
    settings = settings or load_settings()
    args = build_parser().parse_args(argv)
    try:
        config = resolve_config(args, settings)
        logger.info(f"Running {config.command} (seed={config.seed}, probes={config.probes}, grid_n={config.grid_n})")
        code = COMMANDS[config.command](config)
        logger.info(f"{config.command} finished with exit code {code}")
        return code
    except (ArgumentError, DomainError, ValidationError, OSError, json.JSONDecodeError) as e:
        logger.error(f"Usage or input error: {e}")
        return EXIT_USAGE
    except ProtocolError as e:
        logger.error(f"Protocol error: {e}")
        return EXIT_PROTOCOL
    except PreconditionError as e:
        logger.error(f"Precondition failed: {e}")
        return EXIT_ASSERTION


def run():
    """Console script entry point."""
    settings = load_settings()
    configure_logging(settings)
    sys.exit(main(settings=settings))
