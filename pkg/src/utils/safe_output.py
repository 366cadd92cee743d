"""
Safe output utilities to handle BrokenPipeError when JSON lines are piped
"""

import json
import sys
from typing import Any, Optional, TextIO

from pydantic import BaseModel


def safe_print(*args, **kwargs):
    """
    Safe print function that handles BrokenPipeError when output is piped
    """
    try:
        print(*args, **kwargs)
    except BrokenPipeError:
        # piped to head/tail
        sys.stderr.close()
    except KeyboardInterrupt:
        sys.exit(1)


def to_json_line(record: Any) -> str:
    """Serialize a pydantic model or plain structure to one compact JSON line."""
    if isinstance(record, BaseModel):
        return record.model_dump_json()
    return json.dumps(record, separators=(",", ":"))


def emit_json_line(record: Any, stream: Optional[TextIO] = None):
    safe_print(to_json_line(record), file=stream or sys.stdout, flush=True)
