"""Build script for the compiled lattice kernels.

The package works without the extension: asymrisk.backend falls back to the
numpy implementation when the import fails, so a pure-Python install (e.g.
`ASYMRISK_PURE_PYTHON=1` or a platform without a C compiler) is still fully
functional, just slower on large lattices.
"""

import numpy as np
from Cython.Build import cythonize
from setuptools import Extension, setup

extensions = [
    Extension(
        "asymrisk._lattice_kernels",
        ["src/asymrisk/_lattice_kernels.pyx"],
        include_dirs=[np.get_include()],
        # -ffp-contract=off: no fused multiply-add, so the compiled kernels
        # are bit-identical to the numpy fallback (same IEEE op sequence).
        extra_compile_args=["-O2", "-ffp-contract=off"],
        define_macros=[("NPY_NO_DEPRECATED_API", "NPY_1_7_API_VERSION")],
    )
]

setup(
    ext_modules=cythonize(
        extensions,
        compiler_directives={
            "language_level": 3,
            "boundscheck": False,
            "wraparound": False,
            "cdivision": True,
        },
    )
)
