import time
import uuid


def generate_unique_run_name(prefix: str) -> str:
    """Generate a unique run directory name from a prefix, a timestamp and a short UUID."""
    stamp = time.strftime("%Y%m%d-%H%M%S")
    unique_id = uuid.uuid4().hex[:8]
    return f"{prefix}-{stamp}-{unique_id}"


def format_value(value) -> str:
    """CSV cell text; floats use repr so reruns are byte-identical."""
    if isinstance(value, float):
        return repr(value)
    return str(value)
