import os
import sys
from pathlib import Path

sys.path.insert(0, os.path.dirname(os.path.dirname(os.path.abspath(__file__))))

from src.services.certificate_service import CERTIFICATE_FILE, CertificateService  # noqa: E402
from src.utils.errors import McpSelError  # noqa: E402


def main():
    root = Path(sys.argv[1] if len(sys.argv) > 1 else "out")
    paths = sorted(root.rglob(CERTIFICATE_FILE))
    if not paths:
        print(f"No certificates under {root}")
        return
    failures = 0
    for path in paths:
        try:
            report = CertificateService.reverify(CertificateService.load(path))
            print({str(path): report["status"]})
        except McpSelError as e:
            failures += 1
            print({str(path): e.to_dict()})
    sys.exit(1 if failures else 0)


if __name__ == "__main__":
    main()
