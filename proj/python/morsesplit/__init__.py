"""Splitting, reduction and critical-group analysis of discretized
variational functionals at degenerate critical points.

The heavy lifting lives in the compiled extension ``morsesplit._core``;
this package re-exports its public surface.
"""

try:
    from ._core import (  # noqa: F401
        Analysis,
        AnalysisError,
        ConditionCertificate,
        ConfigError,
        Model,
        Splitting,
        analyze_json,
        build,
        build_from_json,
        catalog,
        check_equivariance,
        critical_groups,
        custom_model,
        full_space_groups,
        verify_catalog,
    )
except ImportError:
    # Development layout: the extension sits on sys.path next to the build
    # tree instead of inside the package.
    from _core import (  # noqa: F401
        Analysis,
        AnalysisError,
        ConditionCertificate,
        ConfigError,
        Model,
        Splitting,
        analyze_json,
        build,
        build_from_json,
        catalog,
        check_equivariance,
        critical_groups,
        custom_model,
        full_space_groups,
        verify_catalog,
    )

__all__ = [
    "Analysis",
    "AnalysisError",
    "ConditionCertificate",
    "ConfigError",
    "Model",
    "Splitting",
    "analyze_json",
    "build",
    "build_from_json",
    "catalog",
    "check_equivariance",
    "critical_groups",
    "custom_model",
    "full_space_groups",
    "verify_catalog",
]

__version__ = "0.1.0"
