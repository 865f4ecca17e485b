from .app import create_app
from .core import ServiceError
from .jobs import Job, JobStore

__all__ = ["Job", "JobStore", "ServiceError", "create_app"]
