"""Fisher information and identifiability for 9D localization with LEO satellites.

The pipeline runs geometry -> channel FIM -> location transform ->
synchronization mode -> equivalent FIM -> verdicts and bounds::

    from leofim import default_scenario, crlb_report
    report = crlb_report(default_scenario())
    report.position_bound  # meters
"""

__version__ = "0.1.0"

from .analysis import (
    IDENTIFIABILITY_THRESHOLD,
    CrlbReport,
    IdentifiabilityVerdict,
    check_identifiability,
    crlb_report,
    minimal_config_search,
    parameter_sweep,
)
from .efim import EfimResult, apply_sync_mode, location_efim, offset_loss_terms, schur_efim
from .fim import FimMatrix, assemble_channel_fim, channel_fim_block
from .geometry import ReceiverState, SatelliteState, link_geometry
from .oracle import jacobian_fd_check, numeric_channel_fim, run_verification
from .scenario import Scenario, SyncMode, default_scenario, load_scenario
from .transform import build_jacobian, transform_fim
from .waveform import LinkBudget, PulseSpec

__all__ = [
    "__version__",
    "IDENTIFIABILITY_THRESHOLD",
    "CrlbReport",
    "IdentifiabilityVerdict",
    "check_identifiability",
    "crlb_report",
    "minimal_config_search",
    "parameter_sweep",
    "EfimResult",
    "apply_sync_mode",
    "location_efim",
    "offset_loss_terms",
    "schur_efim",
    "FimMatrix",
    "assemble_channel_fim",
    "channel_fim_block",
    "ReceiverState",
    "SatelliteState",
    "link_geometry",
    "jacobian_fd_check",
    "numeric_channel_fim",
    "run_verification",
    "Scenario",
    "SyncMode",
    "default_scenario",
    "load_scenario",
    "build_jacobian",
    "transform_fim",
    "LinkBudget",
    "PulseSpec",
]
