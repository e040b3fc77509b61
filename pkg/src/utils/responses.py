"""
JSON error responses for the HTTP routes
"""
import json
import logging

from fastapi.responses import JSONResponse, Response

from src.utils.errors import McpSelError

logger = logging.getLogger(__name__)


def error_response(e: Exception, where: str) -> JSONResponse:
    """
    Map an exception to the API's error payload

    Domain errors keep their status code and reason; anything else is a
    500 carrying the exception type.
    """
    if isinstance(e, McpSelError):
        logger.warning("%s rejected: %s (%s)", where, e, e.reason)
        return JSONResponse(status_code=e.status_code, content=_jsonable(e.to_dict()))
    logger.exception("Error in %s", where)
    return JSONResponse(
        status_code=500,
        content={"status": "error", "detail": str(e), "error_type": type(e).__name__}
    )


def _jsonable(payload):
    if isinstance(payload, dict):
        return {str(k): _jsonable(v) for k, v in payload.items()}
    if isinstance(payload, (list, tuple)):
        return [_jsonable(v) for v in payload]
    if isinstance(payload, (str, int, float, bool)) or payload is None:
        return payload
    return str(payload)


def json_response(content) -> Response:
    """JSON body that tolerates non-finite floats; certificates may carry inf residuals"""
    return Response(content=json.dumps(content, default=str), media_type="application/json")
