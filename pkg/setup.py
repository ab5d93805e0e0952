from setuptools import Extension, setup

try:
    from Cython.Build import cythonize
except ImportError:  # sdist without Cython: the pure-Python kernel is used
    ext_modules = []
else:
    ext_modules = cythonize(
        [Extension("biphoton._kernels", ["src/biphoton/_kernels.pyx"], optional=True)],
        language_level=3,
    )

setup(ext_modules=ext_modules)
