from ohc_topics.annotation.store import (
    AnnotationStore,
    BatchView,
    CoderStatus,
    StoreError,
)
from ohc_topics.annotation.service import create_app

__all__ = ["AnnotationStore", "BatchView", "CoderStatus", "StoreError", "create_app"]
