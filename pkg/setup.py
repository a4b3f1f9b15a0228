"""Build script: compiles the optional Cython kernel extension.

The package works without the extension (a NumPy fallback is selected at
import time), so any build failure here degrades gracefully to a pure-Python
install.  Set PATHQUANT_NO_EXT=1 to skip the extension on purpose.
"""

import os

from setuptools import setup

ext_modules = []
if not os.environ.get("PATHQUANT_NO_EXT"):
    try:
        import numpy
        from Cython.Build import cythonize
        from setuptools import Extension

        ext_modules = cythonize(
            [
                Extension(
                    "pathquant._kernels._ckern",
                    ["src/pathquant/_kernels/_ckern.pyx"],
                    include_dirs=[numpy.get_include()],
                    define_macros=[("NPY_NO_DEPRECATED_API", "NPY_1_7_API_VERSION")],
                    extra_compile_args=["-O3"],
                )
            ],
            compiler_directives={"language_level": "3"},
        )
    except Exception as exc:  # pragma: no cover - build-environment dependent
        print(f"pathquant: skipping compiled kernels ({exc}); pure-Python fallback will be used")
        ext_modules = []

setup(ext_modules=ext_modules)
