"""
Certificate files: writing experiment results and re-verifying them
"""
import json
import logging
import math
from datetime import datetime, timezone
from pathlib import Path
from typing import Any, Dict, List, Optional, Union

from src.config import settings
from src.models.schemas import Command, ExperimentConfig
from src.models.selection import sha256_of
from src.services.experiment_service import ExperimentService, Outcome
from src.utils.errors import CertificateDriftError, ConfigError

logger = logging.getLogger(__name__)

CERTIFICATE_FILE = "certificate.json"

# Fields that legitimately differ between runs
_VOLATILE = {"generated_at", "elapsed", "version"}


def _to_plain(value: Any) -> Any:
    """Round-trip through JSON so tuples and numpy scalars compare like stored data"""
    return json.loads(json.dumps(value, default=_default))


def _default(value: Any) -> Any:
    if hasattr(value, "tolist"):
        return value.tolist()
    if hasattr(value, "item"):
        return value.item()
    raise TypeError(f"Object of type {type(value).__name__} is not JSON serializable")


def _compare(stored: Any, recomputed: Any, tol: float, path: str) -> None:
    if isinstance(stored, dict) and isinstance(recomputed, dict):
        keys = (set(stored) | set(recomputed)) - _VOLATILE
        for key in sorted(keys):
            here = f"{path}.{key}" if path else key
            if key not in stored or key not in recomputed:
                raise CertificateDriftError(here, stored.get(key), recomputed.get(key))
            _compare(stored[key], recomputed[key], tol, here)
        return
    if isinstance(stored, list) and isinstance(recomputed, list):
        if len(stored) != len(recomputed):
            raise CertificateDriftError(f"{path}.length", len(stored), len(recomputed))
        for i, (a, b) in enumerate(zip(stored, recomputed)):
            _compare(a, b, tol, f"{path}[{i}]")
        return
    if isinstance(stored, bool) or isinstance(recomputed, bool):
        if stored != recomputed:
            raise CertificateDriftError(path, stored, recomputed)
        return
    if isinstance(stored, (int, float)) and isinstance(recomputed, (int, float)):
        a, b = float(stored), float(recomputed)
        if math.isinf(a) or math.isinf(b) or math.isnan(a) or math.isnan(b):
            if not (a == b or (math.isnan(a) and math.isnan(b))):
                raise CertificateDriftError(path, stored, recomputed)
            return
        if abs(a - b) > tol * max(1.0, abs(a)):
            raise CertificateDriftError(path, stored, recomputed)
        return
    if stored != recomputed:
        raise CertificateDriftError(path, stored, recomputed)


class CertificateService:
    """Service for certificate creation and re-verification"""

    @staticmethod
    def build(config: ExperimentConfig) -> tuple:
        """
        Generate the instance for a config and evaluate it

        Returns:
            (certificate dict, Outcome)
        """
        if config.command == Command.REVERIFY:
            raise ConfigError("reverify is not an experiment; call CertificateService.reverify", command="reverify")
        instance = _to_plain(ExperimentService.generate(config.command, config.params, config.seed))
        outcome = ExperimentService.evaluate(config.command, instance)
        certificate = {
            "kind": config.command.value,
            "version": settings.VERSION,
            "params": config.params,
            "seed": config.seed,
            "instance": instance,
            "instance_hash": sha256_of(instance),
            "result": _to_plain(outcome.result),
            "summary": _to_plain({"achieved": outcome.achieved, "promised": outcome.promised}),
            "generated_at": datetime.now(timezone.utc).isoformat(),
        }
        return certificate, outcome

    @staticmethod
    def write(certificate: Dict[str, Any], tables: Dict[str, str], output: Union[str, Path]) -> List[Path]:
        """Write certificate.json and the CSV tables into output; returns the written paths"""
        out = Path(output)
        out.mkdir(parents=True, exist_ok=True)
        written = [out / CERTIFICATE_FILE]
        written[0].write_text(json.dumps(certificate, indent=2, sort_keys=True, default=_default), encoding="utf-8")
        for name, text in tables.items():
            path = out / name
            path.write_text(text, encoding="utf-8")
            written.append(path)
        logger.info("Wrote %s", ", ".join(str(p) for p in written))
        return written

    @staticmethod
    def run(config: ExperimentConfig, output: Optional[Union[str, Path]] = None) -> Dict[str, Any]:
        """Build a certificate and write it when an output directory is known"""
        certificate, outcome = CertificateService.build(config)
        target = output if output is not None else config.output
        if target is not None:
            CertificateService.write(certificate, outcome.tables, target)
        return certificate

    @staticmethod
    def load(path: Union[str, Path]) -> Dict[str, Any]:
        """Read a certificate from a file or from a directory holding certificate.json"""
        p = Path(path)
        if p.is_dir():
            p = p / CERTIFICATE_FILE
        return json.loads(p.read_text(encoding="utf-8"))

    @staticmethod
    def reverify(certificate: Dict[str, Any], tol: Optional[float] = None) -> Dict[str, Any]:
        """
        Recompute a stored certificate from its embedded instance

        Args:
            certificate: parsed certificate JSON
            tol: relative tolerance for numeric fields, default tol_eq

        Returns:
            Summary with kind, hash and the tolerance used

        Raises:
            ConfigError: If the certificate is missing required fields
            CertificateDriftError: If the hash or any result field differs
        """
        tol = settings.TOL_EQ if tol is None else float(tol)
        missing = [k for k in ("kind", "instance", "instance_hash", "result") if k not in certificate]
        if missing:
            raise ConfigError(f"Certificate is missing {', '.join(missing)}", missing=missing)
        instance = certificate["instance"]
        digest = sha256_of(instance)
        if digest != certificate["instance_hash"]:
            raise CertificateDriftError("instance_hash", certificate["instance_hash"], digest)
        if certificate.get("version") != settings.VERSION:
            logger.warning("Certificate version %s differs from %s", certificate.get("version"), settings.VERSION)
        outcome: Outcome = ExperimentService.evaluate(certificate["kind"], instance)
        _compare(certificate["result"], _to_plain(outcome.result), tol, "result")
        if "summary" in certificate:
            _compare(
                certificate["summary"], _to_plain({"achieved": outcome.achieved, "promised": outcome.promised}), tol, "summary"
            )
        logger.info("Certificate %s (%s) reverified", certificate["kind"], digest[:12])
        return {"status": "ok", "kind": certificate["kind"], "instance_hash": digest, "tol": tol}


build = CertificateService.build
run = CertificateService.run
reverify = CertificateService.reverify
