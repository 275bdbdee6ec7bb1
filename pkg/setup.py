import os

from setuptools import setup

# Build the compiled kernel lane when Cython is available; the package
# falls back to tourkit.kernels._pure otherwise. Set TOURKIT_NO_EXT=1 to
# force a pure-Python install.
ext_modules = []
if not os.environ.get("TOURKIT_NO_EXT"):
    try:
        from Cython.Build import cythonize

        ext_modules = cythonize(
            ["src/tourkit/kernels/_native.pyx"],
            language_level="3",
        )
    except ImportError:
        pass

setup(ext_modules=ext_modules)
