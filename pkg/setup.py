"""Build script for the optional compiled kernel backend.

The package is pure Python; lanempc._core is a Cython speedup for the
prediction/cost kernels that dominate solver runtime.  If Cython or a C
compiler is unavailable the build degrades to the pure-Python backend
(lanempc._core_py), which is selected automatically at import time.
"""

import os

from setuptools import Extension, setup
from setuptools.command.build_ext import build_ext


class optional_build_ext(build_ext):
    """Never fail the install because the speedup would not compile."""

    def run(self):
        try:
            build_ext.run(self)
        except Exception as exc:  # compiler missing, etc.
            print(f"warning: skipping compiled kernels ({exc}); "
                  "falling back to pure Python")

    def build_extension(self, ext):
        try:
            build_ext.build_extension(self, ext)
        except Exception as exc:
            print(f"warning: could not build {ext.name} ({exc}); "
                  "falling back to pure Python")


extensions = []
if not os.environ.get("LANEMPC_PURE_PY"):
    try:
        from Cython.Build import cythonize

        extensions = cythonize(
            [
                Extension(
                    "lanempc._core",
                    ["src/lanempc/_core.pyx"],
                    # Bit-identical to the pure-Python backend:
                    # -ffp-contract=off blocks fused multiply-add,
                    # -fno-builtin stops gcc fusing sin(x)+cos(x) into
                    # sincos(x), whose last ulp can differ from the
                    # separate libm calls CPython makes.
                    extra_compile_args=["-O3", "-ffp-contract=off",
                                        "-fno-builtin"],
                )
            ],
            compiler_directives={"language_level": "3"},
        )
    except ImportError:
        print("warning: Cython not available; building pure-Python only")

setup(ext_modules=extensions, cmdclass={"build_ext": optional_build_ext})
