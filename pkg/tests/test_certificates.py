import json

import pytest

from src.config import settings
from src.models.schemas import Command, ExperimentConfig
from src.services.certificate_service import CertificateService

EXPERIMENTS = [c for c in Command if c not in (Command.REVERIFY, Command.VERIFY_IDENTITIES)]


def _stable_bytes(path):
    certificate = CertificateService.load(path)
    certificate.pop("generated_at")
    return json.dumps(certificate, indent=2, sort_keys=True)


@pytest.mark.parametrize("command", EXPERIMENTS, ids=lambda c: c.value)
def test_certificate_repeats_and_reverifies(command, tmp_path, monkeypatch):
    config = ExperimentConfig(command=command, seed=4)
    CertificateService.run(config, tmp_path / "first")
    CertificateService.run(config, tmp_path / "second")
    first = _stable_bytes(tmp_path / "first")
    assert first == _stable_bytes(tmp_path / "second")

    report = CertificateService.reverify(CertificateService.load(tmp_path / "first"))
    assert report["status"] == "ok"
    assert report["kind"] == command.value

    monkeypatch.setattr(settings, "THREADS", 4)
    CertificateService.run(config, tmp_path / "threaded")
    assert _stable_bytes(tmp_path / "threaded") == first
    assert CertificateService.reverify(CertificateService.load(tmp_path / "threaded"))["status"] == "ok"
