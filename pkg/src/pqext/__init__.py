"""Two-party extractable-commitment stack with an MPC-in-the-head prove layer
and a classical extraction / simulation / combinatorics harness."""

from ._kernels import BACKEND_NAME as kernel_backend

__version__ = "0.1.0"

__all__ = ["kernel_backend", "__version__"]
