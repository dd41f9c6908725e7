# Builds the optional compiled kernel.  The package works without it (the
# pure-Python kernel in abeshare._kernels.reference is selected at import),
# so a missing compiler or Cython only costs speed, never functionality.
#
#   python setup.py build_ext --inplace

from setuptools import setup

ext_modules = []
try:
    from Cython.Build import cythonize

    ext_modules = cythonize(
        "src/abeshare/_kernels/fastcore.pyx",
        language_level=3,
    )
except ImportError:
    pass

setup(ext_modules=ext_modules)
