"""Dataset persistence: frame records, edit history, annotation status."""
from .dataset import DatasetStore, frame_file_name, PAD_WIDTH
from .records import (EditRecord, FrameNotFoundError, FrameRecord,
                      StatusTransitionError, StoreError, StoreValidationError,
                      STATUSES, UnknownQidError, check_transition,
                      validate_edit_doc, validate_frame_doc)

__all__ = [
    "DatasetStore", "EditRecord", "FrameNotFoundError", "FrameRecord",
    "PAD_WIDTH", "STATUSES", "StatusTransitionError", "StoreError",
    "StoreValidationError", "UnknownQidError", "check_transition",
    "frame_file_name", "validate_edit_doc", "validate_frame_doc",
]
