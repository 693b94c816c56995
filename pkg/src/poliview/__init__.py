"""Ingestion, profiling and curation of election-campaign document collections."""

__version__ = "0.1.0"
