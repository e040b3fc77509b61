"""
Command-line front end: run experiments from config files and re-verify certificates
"""
import argparse
import json
import logging
import sys
from pathlib import Path
from typing import Any, Dict, List, Optional, Sequence

from pydantic import ValidationError

from src.config import settings
from src.models.schemas import Command, ExperimentConfig
from src.services.certificate_service import CertificateService
from src.utils.errors import ConfigError, McpSelError

logger = logging.getLogger(__name__)

LOG_FORMAT = "%(asctime)s %(levelname)s %(name)s: %(message)s"

_TOP_LEVEL = {"command", "seed", "output"}


def _value(text: str) -> Any:
    text = text.strip()
    try:
        return json.loads(text)
    except json.JSONDecodeError:
        return text.strip("\"'")


def parse_config(text: str) -> Dict[str, Any]:
    """
    Parse the flat config format

    Top-level `key = value` lines set command, seed and output; a
    `[command]` section holds that command's parameters. Values are JSON
    where they parse as JSON and plain strings otherwise.

    Raises:
        ConfigError: On malformed lines, unknown keys or a section that
            does not match the command
    """
    top: Dict[str, Any] = {}
    sections: Dict[str, Dict[str, Any]] = {}
    current: Optional[str] = None
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if line.startswith("[") and line.endswith("]"):
            current = line[1:-1].strip()
            if current not in {c.value for c in Command}:
                raise ConfigError(f"Line {lineno}: unknown section [{current}]", line=lineno)
            sections.setdefault(current, {})
            continue
        if "=" not in line:
            raise ConfigError(f"Line {lineno}: expected 'key = value'", line=lineno)
        key, value = (part.strip() for part in line.split("=", 1))
        if current is None:
            if key not in _TOP_LEVEL:
                raise ConfigError(f"Line {lineno}: unknown top-level key '{key}'", line=lineno)
            top[key] = _value(value)
        else:
            sections[current][key] = _value(value)
    command = top.get("command")
    if command is None:
        raise ConfigError("Config does not name a command")
    stray = set(sections) - {str(command)}
    if stray:
        raise ConfigError(f"Sections {sorted(stray)} do not match command '{command}'")
    return {**top, "params": sections.get(str(command), {})}


def load_config(path: str, seed: Optional[int] = None, output: Optional[str] = None) -> ExperimentConfig:
    payload = parse_config(Path(path).read_text(encoding="utf-8"))
    if seed is not None:
        payload["seed"] = seed
    if output is not None:
        payload["output"] = output
    try:
        return ExperimentConfig.model_validate(payload)
    except ValidationError as e:
        raise ConfigError(f"Invalid config: {e.errors(include_url=False)}")


def _rounded(value: Any) -> Any:
    if isinstance(value, float):
        return round(value, 10)
    if isinstance(value, (list, tuple)):
        return [_rounded(v) for v in value]
    return value


def summary_line(certificate: Dict[str, Any]) -> str:
    summary = certificate.get("summary", {})
    return "{}: achieved={} promised={}".format(
        certificate["kind"], json.dumps(_rounded(summary.get("achieved"))), json.dumps(_rounded(summary.get("promised")))
    )


def parse_args(argv: Optional[Sequence[str]] = None) -> argparse.Namespace:
    parser = argparse.ArgumentParser(prog="mcpsel", description="Mixed characteristic polynomial selectors")
    sub = parser.add_subparsers(dest="action", required=True)

    run = sub.add_parser("run", help="Run one experiment and write its certificate")
    run.add_argument("--config", help="Flat key = value config file")
    run.add_argument("--command", choices=[c.value for c in Command if c != Command.REVERIFY], help="Command when no config is given")
    run.add_argument("--set", action="append", default=[], metavar="KEY=VALUE", help="Parameter override, repeatable")
    run.add_argument("--output", help="Output directory for certificate.json and CSV tables")
    run.add_argument("--seed", type=int, help="Seed for instance generation")
    run.add_argument("--tol", type=float, help="Override tol_eq for this invocation")

    rev = sub.add_parser("reverify", help="Recompute a stored certificate")
    rev.add_argument("path", help="certificate.json or a directory holding it")
    rev.add_argument("--tol", type=float, help="Relative tolerance, default tol_eq")
    parser.add_argument("-v", "--verbose", action="store_true", help="Debug logging")
    return parser.parse_args(argv)


def _overrides(pairs: List[str]) -> Dict[str, Any]:
    out = {}
    for pair in pairs:
        if "=" not in pair:
            raise ConfigError(f"--set expects KEY=VALUE, got '{pair}'")
        key, value = pair.split("=", 1)
        out[key.strip()] = _value(value)
    return out


def _run(args: argparse.Namespace) -> int:
    if args.config:
        config = load_config(args.config, seed=args.seed, output=args.output)
        if args.set:
            merged = {**config.params, **_overrides(args.set)}
            try:
                config = ExperimentConfig.model_validate({**config.model_dump(mode="json"), "params": merged})
            except ValidationError as e:
                raise ConfigError(f"Invalid parameters: {e.errors(include_url=False)}")
    elif args.command:
        try:
            config = ExperimentConfig.model_validate({
                "command": args.command,
                "params": _overrides(args.set),
                "seed": args.seed or 0,
                "output": args.output,
            })
        except ValidationError as e:
            raise ConfigError(f"Invalid parameters: {e.errors(include_url=False)}")
    else:
        raise ConfigError("run needs --config or --command")
    if config.command == Command.REVERIFY:
        return _reverify(config.params["certificate"], args.tol)
    certificate = CertificateService.run(config)
    print(summary_line(certificate))
    return 0


def _reverify(path: str, tol: Optional[float]) -> int:
    certificate = CertificateService.load(path)
    report = CertificateService.reverify(certificate, tol=tol)
    print(f"{report['kind']}: reverified {report['instance_hash'][:12]} within {report['tol']:g}")
    return 0


def main(argv: Optional[Sequence[str]] = None) -> int:
    args = parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.INFO, format=LOG_FORMAT)
    previous = settings.TOL_EQ
    if args.tol is not None:
        settings.TOL_EQ = args.tol
    try:
        if args.action == "reverify":
            return _reverify(args.path, args.tol)
        return _run(args)
    except McpSelError as e:
        logger.error("%s failed: %s", args.action, e)
        print(json.dumps(e.to_dict(), default=str), file=sys.stderr)
        return 1
    except (OSError, json.JSONDecodeError) as e:
        logger.error("I/O error: %s", e)
        print(json.dumps({"status": "error", "reason": "io_error", "detail": str(e)}), file=sys.stderr)
        return 2
    finally:
        settings.TOL_EQ = previous


if __name__ == "__main__":
    raise SystemExit(main())
