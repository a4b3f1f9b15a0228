"""pathquant: desk-scale numerical checks for symplectic path-space structures.

Subpackages cover chart-based symplectic models (`geometry`), the induced
calculus on discretized path spaces (`paths`), transgressed potentials
(`transgression`), the prequantum connection with holonomy and operators
(`prequantum`), Klein-Gordon mode spaces (`klein_gordon`), and a scenario
driven verification front end (`cli`, `suites`).
"""

from ._kernels import BACKEND as KERNEL_BACKEND

__version__ = "0.1.0"
__all__ = ["KERNEL_BACKEND", "__version__"]
