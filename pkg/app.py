"""
app.py - re-exports the application for `uvicorn app:app`.

The application lives in src/main.py:
- src/models/ - value types and pydantic payloads
- src/routes/ - API endpoints organized by domain
- src/services/ - polynomial, selector, frame and certificate logic
- src/utils/ - errors, validators, parallel map, responses

The command-line front end is src/cli.py (`python -m src.cli`).
"""

from src.main import app

from src.models.schemas import ExperimentConfig, McpPayload, SelectorPayload

__all__ = ['app', 'ExperimentConfig', 'McpPayload', 'SelectorPayload']
