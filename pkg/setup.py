"""Build script: compiles the optional accelerator extension.

The extension is a convenience, not a requirement; if Cython or a C
compiler is missing the install proceeds and the package falls back to
the pure-numpy kernels at import time.
"""

import os

from setuptools import Extension, setup
from setuptools.command.build_ext import build_ext


class OptionalBuildExt(build_ext):
    def run(self):
        try:
            super().run()
        except Exception as exc:  # compiler missing, etc.
            print(f"skipping compiled accelerator ({exc}); pure-python kernels will be used")

    def build_extension(self, ext):
        try:
            super().build_extension(ext)
        except Exception as exc:
            print(f"skipping {ext.name} ({exc}); pure-python kernels will be used")


def extensions():
    if os.environ.get("HELICALFLOW_NO_EXTENSION"):
        return []
    try:
        from Cython.Build import cythonize
    except ImportError:
        return []
    ext = Extension(
        "helicalflow._accel",
        ["src/helicalflow/_accel.pyx"],
        # -ffp-contract=off keeps the compiled kernels bit-compatible with
        # the numpy fallback (no FMA contraction).
        extra_compile_args=["-O3", "-ffp-contract=off"],
    )
    return cythonize([ext], compiler_directives={"language_level": "3"})


setup(cmdclass={"build_ext": OptionalBuildExt}, ext_modules=extensions())
