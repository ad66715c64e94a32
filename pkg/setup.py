"""Build the optional compiled kernel. Without Cython or a compiler the
package installs pure-Python and the fallback kernel is used."""
import os

from setuptools import setup

ext_modules = []
if os.environ.get("LORENTZWIRE_NO_EXT") != "1":
    try:
        import numpy
        from Cython.Build import cythonize
        from setuptools import Extension
    except ImportError:
        pass
    else:
        ext_modules = cythonize(
            [Extension("lorentzwire._kernel", ["src/lorentzwire/_kernel.pyx"],
                       include_dirs=[numpy.get_include()],
                       define_macros=[("NPY_NO_DEPRECATED_API", "NPY_1_7_API_VERSION")],
                       extra_compile_args=["-O3"])],
            compiler_directives={"language_level": "3"},
        )

setup(ext_modules=ext_modules)
