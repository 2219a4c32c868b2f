"""Build script.

The compiled extension is optional: if Cython or a C compiler is
unavailable the build falls back to the pure-Python kernels and the
package remains fully functional.
"""

import sys

from setuptools import setup
from setuptools.command.build_ext import build_ext


class OptionalBuildExt(build_ext):
    """Build extensions, but do not fail the install if one will not compile."""

    def run(self):
        try:
            super().run()
        except Exception as exc:
            print("compiled kernels skipped: %s" % exc, file=sys.stderr)

    def build_extension(self, ext):
        try:
            super().build_extension(ext)
        except Exception as exc:
            print("compiled kernel %s skipped: %s" % (ext.name, exc), file=sys.stderr)


def extensions():
    try:
        import numpy
        from Cython.Build import cythonize
    except ImportError:
        return []
    from setuptools import Extension

    ext = Extension(
        "specmult.kernels._core",
        sources=["src/specmult/kernels/_core.pyx"],
        include_dirs=[numpy.get_include()],
        define_macros=[("NPY_NO_DEPRECATED_API", "NPY_1_7_API_VERSION")],
    )
    return cythonize([ext], language_level=3)


setup(
    ext_modules=extensions(),
    cmdclass={"build_ext": OptionalBuildExt},
)
