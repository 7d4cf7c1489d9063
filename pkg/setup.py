"""Build script: compiles the stepping kernel extension when a toolchain is
available, otherwise falls back to the pure-Python kernels."""

import os
import sys

from setuptools import setup

ext_modules = []
if os.environ.get("NKSLAB_NO_EXT") != "1":
    try:
        import numpy as np
        from Cython.Build import cythonize
        from setuptools import Extension

        ext_modules = cythonize(
            [
                Extension(
                    "nkslab._kernels",
                    ["src/nkslab/_kernels.pyx"],
                    include_dirs=[np.get_include()],
                    extra_compile_args=["-O2"],
                )
            ],
            compiler_directives={"language_level": "3"},
        )
    except Exception as exc:  # pragma: no cover - toolchain-dependent
        sys.stderr.write(f"nkslab: building without compiled kernels ({exc})\n")
        ext_modules = []

setup(ext_modules=ext_modules)
