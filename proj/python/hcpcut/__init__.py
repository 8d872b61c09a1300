from ._hcpcut import (
    DimensionError,
    DomainError,
    Error,
    Instance,
    IoError,
    ParseError,
    benchmark,
    enumerate_best,
    generate,
    hev_sim,
    solve,
    tau,
)

__all__ = [
    "DimensionError",
    "DomainError",
    "Error",
    "Instance",
    "IoError",
    "ParseError",
    "benchmark",
    "enumerate_best",
    "generate",
    "hev_sim",
    "solve",
    "tau",
]
