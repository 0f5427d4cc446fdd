"""Game telemetry pipeline: deterministic puzzle engine, two-tier session
log store, and stateless learning analytics behind one HTTP surface."""

__version__ = "0.1.0"
