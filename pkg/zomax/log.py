import logging

LOG_FORMAT = "%(asctime)s %(levelname)s %(name)s: %(message)s"


def configure_logging(level: str = "INFO") -> None:
    """Install one stream handler on the package logger."""
    root = logging.getLogger("zomax")
    root.setLevel(level.upper())
    if not any(getattr(h, "_zomax", False) for h in root.handlers):
        handler = logging.StreamHandler()
        handler.setFormatter(logging.Formatter(LOG_FORMAT))
        handler._zomax = True  # type: ignore[attr-defined]
        root.addHandler(handler)
