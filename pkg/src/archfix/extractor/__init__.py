"""Fact extraction from a bounded Java-like subset."""

from .build import DuplicateTypeError, extract, extract_files, extract_sources
from .syntax import SubsetParseError, parse_unit

__all__ = [
    "DuplicateTypeError",
    "SubsetParseError",
    "extract",
    "extract_files",
    "extract_sources",
    "parse_unit",
]
