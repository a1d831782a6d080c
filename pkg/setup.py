import numpy
from Cython.Build import cythonize
from setuptools import Extension, setup

# No -ffast-math: the compiled kernels must be bit-identical to the pure
# NumPy fallback, so IEEE semantics are required.
extensions = [
    Extension(
        "magniglyph._kernels._fast",
        ["src/magniglyph/_kernels/_fast.pyx"],
        include_dirs=[numpy.get_include()],
        extra_compile_args=["-O3"],
        define_macros=[("NPY_NO_DEPRECATED_API", "NPY_1_7_API_VERSION")],
    )
]

setup(
    ext_modules=cythonize(extensions, compiler_directives={"language_level": "3"}),
)
