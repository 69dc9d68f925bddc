"""Build script: compiles the optional Cython training kernel.

The package works without the extension (a pure NumPy kernel is selected at
import time), so a failed extension build is downgraded to a warning.
"""

import sys

from setuptools import setup

try:
    import numpy
    from Cython.Build import cythonize
    from setuptools.extension import Extension

    extensions = cythonize(
        [
            Extension(
                "walkvec._sgns_inner",
                ["src/walkvec/_sgns_inner.pyx"],
                include_dirs=[numpy.get_include()],
                define_macros=[("NPY_NO_DEPRECATED_API", "NPY_1_7_API_VERSION")],
            )
        ],
        language_level=3,
    )
except ImportError as exc:
    print(f"warning: building without compiled kernel ({exc})", file=sys.stderr)
    extensions = []

setup(ext_modules=extensions)
