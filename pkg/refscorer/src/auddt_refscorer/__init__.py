"""Reference external-scorer adapter for the auddt benchmarking harness.

Speaks wire protocol v1 on stdin/stdout, wraps an arbitrary user-supplied
detector class behind one scoring call, and ships null and energy fixture
models so the harness integration can be tested without any ML framework.
"""

from .binding import ModelBinding, ModelLoadError, instantiate
from .models import EnergyDetector, NullDetector
from .server import PROTOCOL_VERSION, serve

__version__ = "0.1.0"
