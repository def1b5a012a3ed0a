"""
Error hierarchy for the handover simulator and the CLI exit codes mapped to it
"""
from typing import List, Optional, Sequence, Tuple

EXIT_OK = 0
EXIT_USAGE_ERROR = 2
EXIT_CONFIG_ERROR = 3
EXIT_RUNTIME_ERROR = 4
EXIT_IO_ERROR = 5


class HandoverSimError(Exception):
    """Base class for every error raised by the simulator"""

    exit_code = EXIT_RUNTIME_ERROR


class ConfigurationError(HandoverSimError):
    """Invalid configuration document or geometry"""

    exit_code = EXIT_CONFIG_ERROR


class ArgumentError(HandoverSimError, ValueError):
    """An operation was called with an out-of-range argument"""


class DegenerateRangeError(ArgumentError):
    """Normalization over samples that all carry the same value"""


class DegenerateRouteError(ArgumentError):
    """A route with fewer than two waypoints has no transitions"""


class UnpopulatedBinError(HandoverSimError):
    """A query hit a bin without any RSRP sample"""

    def __init__(self, bin_index: Tuple[int, int], position: Optional[Tuple[float, float]] = None):
        self.bin_index = bin_index
        self.position = position
        where = f" at position {position}" if position is not None else ""
        super().__init__(f"Bin {bin_index}{where} holds no RSRP samples")


class UncoveredRouteError(HandoverSimError):
    """A trajectory crosses unpopulated bins"""

    def __init__(self, uncovered: Sequence[Tuple[int, Tuple[float, float]]]):
        self.uncovered: List[Tuple[int, Tuple[float, float]]] = list(uncovered)
        listed = ", ".join(f"#{i} ({x:.1f}, {y:.1f})" for i, (x, y) in self.uncovered[:10])
        more = f" and {len(self.uncovered) - 10} more" if len(self.uncovered) > 10 else ""
        super().__init__(f"Route has {len(self.uncovered)} uncovered waypoints: {listed}{more}")


class ExperimentError(HandoverSimError):
    """An experiment produced no usable flight"""
