from setuptools import Extension, setup

setup(
    ext_modules=[
        Extension(
            "panostep._kernels",
            sources=["src/panostep/_kernels.c"],
            extra_compile_args=["-O2", "-ffp-contract=off"],
            optional=True,  # pure-numpy fallback covers missing compilers
        )
    ]
)
