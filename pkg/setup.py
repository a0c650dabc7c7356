"""Build shim: compiles the optional two-tone measurement kernel.

The package is pure Python plus one accelerator extension. If Cython or a C
compiler is unavailable the build falls back to the numpy kernel; nothing in
the public API changes, only speed.
"""

from setuptools import Extension, setup

try:
    from Cython.Build import cythonize
except ImportError:
    cythonize = None

ext_modules = []
if cythonize is not None:
    ext_modules = cythonize(
        [
            Extension(
                "rxchain.twotone._kernel",
                ["src/rxchain/twotone/_kernel.pyx"],
                extra_compile_args=["-O3"],
            )
        ],
        language_level=3,
    )

setup(ext_modules=ext_modules)
