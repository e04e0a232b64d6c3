from setuptools import Extension, setup

try:
    from Cython.Build import cythonize
except ImportError:  # the package runs on its pure-Python kernels
    ext_modules = []
else:
    ext_modules = cythonize(
        [Extension("nlum._ckernels", ["src/nlum/_ckernels.pyx"], extra_compile_args=["-O3"], optional=True)],
        compiler_directives={"language_level": "3"},
    )

setup(ext_modules=ext_modules)
