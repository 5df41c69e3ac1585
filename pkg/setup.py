"""Build script: compiles the optional Cython kernel core.

The package works without the extension (a pure numpy fallback is selected at
import time), so a missing compiler downgrades the build instead of failing it.
"""

import os
import sys

from setuptools import Extension, setup
from setuptools.command.build_ext import build_ext


class optional_build_ext(build_ext):
    """Build the kernel extension if possible, warn and continue if not."""

    def run(self):
        try:
            super().run()
        except Exception as exc:  # compiler missing entirely
            self._warn(exc)

    def build_extension(self, ext):
        try:
            super().build_extension(ext)
        except Exception as exc:
            self._warn(exc)

    @staticmethod
    def _warn(exc):
        sys.stderr.write(
            "warning: medax._kernels._core could not be compiled (%s); "
            "falling back to the pure numpy kernels\n" % (exc,)
        )


def extensions():
    if os.environ.get("MEDAX_NO_EXT"):
        return []
    import numpy
    from Cython.Build import cythonize

    ext = Extension(
        "medax._kernels._core",
        sources=["src/medax/_kernels/_core.pyx"],
        include_dirs=[numpy.get_include()],
        define_macros=[("NPY_NO_DEPRECATED_API", "NPY_1_7_API_VERSION")],
    )
    return cythonize([ext], language_level=3)


setup(ext_modules=extensions(), cmdclass={"build_ext": optional_build_ext})
