"""lsasim: deterministic discrete-event simulator of an evolved LSA system
with a centralized RRM controlling a cluster of multi-RAT small cells."""

__version__ = "0.1.0"
